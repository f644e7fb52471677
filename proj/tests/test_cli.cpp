#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <tsm/bench.hpp>
#include <tsm/commands.hpp>
#include <tsm/decimal.hpp>
#include <tsm/persist.hpp>

#include "test_support.hpp"

using namespace tsm;
namespace fs = std::filesystem;

namespace {

class TempDir
{
public:
    TempDir()
    {
        std::random_device rd;
        path_ = fs::temp_directory_path() / ("tsm_test_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> data_rows(const std::string& text)
{
    std::vector<std::string> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#')
            rows.push_back(line);
    return rows;
}

RunConfig config(KeyValues flags) { return parse_config({}, flags); }

KeyValues lorenz_flags(const std::string& steps, const std::string& out)
{
    return {{"system", "lorenz"}, {"tau", "0.01"}, {"order", "40"}, {"prec_bits", "512"},
            {"steps", steps},     {"out", out}};
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(TSM_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("parse_config examples")
{
    SUBCASE("precision in digits")
    {
        const auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "400"}, {"prec_digits", "800"}});
        CHECK(cfg.precision_bits == 2658);
        CHECK(cfg.precision_digits == 800);
        CHECK(cfg.init == std::vector<std::string>{"-15.8", "-17.48", "35.64"});
        CHECK_THROWS_AS(cfg.steps(), ConfigError);
    }
    SUBCASE("empty input lists every missing key")
    {
        try {
            (void)parse_config({}, {});
            FAIL("expected a ConfigError");
        }
        catch (const ConfigError& e) {
            const std::string msg = e.what();
            for (const char* key : {"'system'", "'tau'", "'order'", "'prec_bits'"})
                CHECK(msg.find(key) != std::string::npos);
        }
    }
    SUBCASE("conflicting alternatives")
    {
        CHECK_THROWS_AS(config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "8000"},
                                {"prec_digits", "800"}}),
                        ConfigError);
        CHECK_THROWS_AS(config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "128"},
                                {"steps", "10"}, {"t_end", "0.1"}}),
                        ConfigError);
    }
    SUBCASE("flags override the file")
    {
        const KeyValues file{{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "128"},
                             {"t_end", "1"}};
        const auto cfg = parse_config(file, {{"order", "9"}, {"prec_digits", "50"}, {"steps", "7"}});
        CHECK(cfg.order == 9);
        CHECK(cfg.precision_bits == 167);
        CHECK(cfg.steps() == 7);
        CHECK(cfg.end_time() == "0.07");
    }
    SUBCASE("t_end resolves to an exact step count")
    {
        auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "128"},
                           {"t_end", "25"}});
        CHECK(cfg.steps() == 2500);
        CHECK_THROWS_AS(config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "128"},
                                {"t_end", "0.005"}}),
                        ConfigError);
    }
    SUBCASE("invalid entries")
    {
        const KeyValues base{{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "128"}};
        auto with = [&](std::string key, std::string value) {
            KeyValues kv = base;
            kv.emplace_back(std::move(key), std::move(value));
            return kv;
        };
        CHECK_THROWS_AS(parse_config(with("colour", "blue"), {}), ConfigError);
        CHECK_THROWS_AS(parse_config(with("order", "5"), {}), ConfigError); // duplicate
        CHECK_THROWS_AS(parse_config(with("workers", "0"), {}), ConfigError);
        CHECK_THROWS_AS(parse_config(with("chunk_mode", "random"), {}), ConfigError);
        CHECK_THROWS_AS(parse_config(with("init", "1,2"), {}), ConfigError);
        CHECK_THROWS_AS(parse_config(with("init", "1,2,x"), {}), ConfigError);
        CHECK_THROWS_AS(parse_config({{"system", "lorenz"}, {"tau", "abc"}, {"order", "4"}, {"prec_bits", "128"}}, {}),
                        ConfigError);
        CHECK_THROWS_AS(parse_config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "0"}, {"prec_bits", "128"}}, {}),
                        ConfigError);
        CHECK_THROWS_AS(parse_config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "4"}, {"prec_bits", "32"}}, {}),
                        ConfigError);
    }
    SUBCASE("key=value text")
    {
        const auto kv = parse_key_values("# comment\n system = lorenz \n\ntau=0.01 # trailing\n");
        REQUIRE(kv.size() == 2);
        CHECK(kv[0] == std::pair<std::string, std::string>{"system", "lorenz"});
        CHECK(kv[1] == std::pair<std::string, std::string>{"tau", "0.01"});
        CHECK_THROWS_AS(parse_key_values("system lorenz"), ConfigError);
    }
    SUBCASE("non-builtin systems need initial values")
    {
        TempDir dir;
        const auto path = dir.file("sys.txt");
        std::ofstream(path) << "lin 0 0 1\n";
        CHECK_THROWS_AS(config({{"system", path}, {"tau", "0.1"}, {"order", "4"}, {"prec_bits", "128"}}),
                        ConfigError);
        const auto cfg =
            config({{"system", path}, {"tau", "0.1"}, {"order", "4"}, {"prec_bits", "128"}, {"init", "1"}});
        CHECK(cfg.system_description().dim() == 1);
    }
}

TEST_CASE("config echo and hash")
{
    const auto a = config(lorenz_flags("100", "a.tsv"));
    auto flags = lorenz_flags("100", "b.tsv");
    flags.emplace_back("workers", "4");
    flags.emplace_back("threshold", "0");
    const auto b = config(flags);
    CHECK(a.echo() == b.echo());
    CHECK(a.hash() == b.hash());
    CHECK(a.dynamics_hash() == b.dynamics_hash());

    const auto c = config(lorenz_flags("200", "a.tsv"));
    CHECK(a.hash() != c.hash());
    CHECK(a.dynamics_hash() == c.dynamics_hash());

    auto chunked = lorenz_flags("100", "a.tsv");
    chunked.emplace_back("chunks", "8");
    CHECK(config(chunked).dynamics_hash() != a.dynamics_hash());

    CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("decimal helpers")
{
    CHECK(decimal::times("0.01", 150) == "1.5");
    CHECK(decimal::times("0.01", 100) == "1");
    CHECK(decimal::times("0.01", 0) == "0");
    CHECK(decimal::times("-0.25", 3) == "-0.75");
    CHECK(decimal::times("1e-3", 7) == "0.007");
    CHECK(decimal::exact_quotient("25", "0.01") == std::optional<std::size_t>{2500});
    CHECK(decimal::exact_quotient("60", "0.01") == std::optional<std::size_t>{6000});
    CHECK(decimal::exact_quotient("0", "0.01") == std::optional<std::size_t>{0});
    CHECK_FALSE(decimal::exact_quotient("25.005", "0.01"));
    CHECK_FALSE(decimal::exact_quotient("-1", "0.01"));
    CHECK(decimal::is_literal("-15.8"));
    CHECK_FALSE(decimal::is_literal("0x1p3"));
    CHECK_THROWS_AS(decimal::require_literal("abc", "tau"), ParseError);
    CHECK(decimal::to_double("2.5") == 2.5);
}

TEST_CASE("checkpoint round trip")
{
    std::mt19937_64 rng(17);
    const mp::Context ctx(2658);
    Checkpoint c;
    c.step = 1234;
    c.time = "12.34";
    c.precision_bits = 2658;
    c.config_hash = 0x0123456789abcdefULL;
    for (int m = 0; m < 3; ++m)
        c.state.push_back(tsm_test::random_real(rng, ctx, -50, 50));
    c.state.push_back(mp::neg(mp::Real(ctx)));

    std::stringstream ss;
    write_checkpoint(ss, c);
    const auto text = ss.str();
    CHECK(text.rfind("tsm-checkpoint 1\nstep 1234\ntime 12.34\nprec_bits 2658\nconfig_hash 0123456789abcdef\ndim 4\n",
                     0)
          == 0);
    const auto back = read_checkpoint(ss);
    CHECK(back.step == c.step);
    CHECK(back.time == c.time);
    CHECK(back.precision_bits == c.precision_bits);
    CHECK(back.config_hash == c.config_hash);
    REQUIRE(back.state.size() == 4);
    for (std::size_t m = 0; m < 4; ++m)
        CHECK(identical(back.state[m], c.state[m]));

    TempDir dir;
    save_checkpoint(dir.file("c.ckpt"), c);
    CHECK(slurp(dir.file("c.ckpt")) == text);
    CHECK(identical(load_checkpoint(dir.file("c.ckpt")).state[2], c.state[2]));

    for (const std::string bad :
         {std::string(""), std::string("tsm-checkpoint 2\n"), text.substr(0, text.size() - 4),
          text.substr(0, text.find("var 0")) + "var 1 + 1 0\n"}) {
        std::istringstream in(bad);
        CHECK_THROWS_AS(read_checkpoint(in), ParseError);
    }
    CHECK_THROWS_AS(load_checkpoint(dir.file("missing.ckpt")), Error);
}

TEST_CASE("trajectory writer format")
{
    const mp::Context ctx(128);
    std::ostringstream os;
    const std::vector<std::string> header{"tsm test"}, names{"x", "y"};
    TrajectoryWriter w(os, header, names, 5);
    w.row("0", std::vector<mp::Real>{mp::from_decimal("-15.8", ctx), mp::from_decimal("123456", ctx)});
    w.row("0.5", std::vector<mp::Real>{mp::from_decimal("0.000012345678", ctx), mp::Real(ctx)});
    CHECK(os.str() == "# tsm test\n# t x y\n0\t-15.800\t1.2346e5\n0.5\t0.000012346\t0.0000\n");
}

TEST_CASE("cmd_integrate")
{
    TempDir dir;
    std::ostringstream out, err;

    SUBCASE("100 steps at stride 100 give the t=0 and t=1 rows")
    {
        const auto path = dir.file("run.tsv");
        REQUIRE(cmd_integrate(config(lorenz_flags("100", path)), out, err) == exit_ok);
        const auto text = slurp(path);
        const auto rows = data_rows(text);
        REQUIRE(rows.size() == 2);
        CHECK(rows[0].rfind("0\t-15.8", 0) == 0);
        CHECK(rows[1].rfind("1\t", 0) == 0);
        CHECK(text.find("\n# t x y z\n") != std::string::npos);
        CHECK(text.find("# config_hash=") != std::string::npos);
        CHECK(fs::exists(path + ".ckpt"));
        CHECK(load_checkpoint(path + ".ckpt").step == 100);
    }
    SUBCASE("zero steps give only the initial row")
    {
        const auto path = dir.file("zero.tsv");
        REQUIRE(cmd_integrate(config(lorenz_flags("0", path)), out, err) == exit_ok);
        CHECK(data_rows(slurp(path)).size() == 1);
    }
    SUBCASE("off-stride final step and digits")
    {
        const auto path = dir.file("odd.tsv");
        auto flags = lorenz_flags("25", path);
        flags.emplace_back("stride", "10");
        flags.emplace_back("digits", "12");
        REQUIRE(cmd_integrate(config(flags), out, err) == exit_ok);
        const auto rows = data_rows(slurp(path));
        REQUIRE(rows.size() == 4);
        CHECK(rows[3].rfind("0.25\t", 0) == 0);
        CHECK(rows[0] == "0\t-15.8000000000\t-17.4800000000\t35.6400000000");
    }
    SUBCASE("stdout when no output path")
    {
        REQUIRE(cmd_integrate(config(lorenz_flags("10", "")), out, err) == exit_ok);
        CHECK(data_rows(out.str()).size() == 2);
    }
    SUBCASE("resume from a checkpoint is bit-identical")
    {
        const auto straight = dir.file("straight.tsv");
        REQUIRE(cmd_integrate(config(lorenz_flags("100", straight)), out, err) == exit_ok);

        const auto half = dir.file("half.tsv");
        REQUIRE(cmd_integrate(config(lorenz_flags("50", half)), out, err) == exit_ok);
        CHECK(load_checkpoint(half + ".ckpt").step == 50);

        const auto resumed = dir.file("resumed.tsv");
        auto flags = lorenz_flags("100", resumed);
        flags.emplace_back("resume", half + ".ckpt");
        REQUIRE(cmd_integrate(config(flags), out, err) == exit_ok);
        CHECK(slurp(resumed + ".ckpt") == slurp(straight + ".ckpt"));
        // The resumed file starts at the checkpoint and ends at the same row.
        CHECK(data_rows(slurp(resumed)).back() == data_rows(slurp(straight)).back());
        CHECK(data_rows(slurp(resumed)).front().rfind("0.5\t", 0) == 0);
    }
    SUBCASE("periodic checkpoints")
    {
        const auto path = dir.file("periodic.tsv");
        auto flags = lorenz_flags("30", path);
        flags.emplace_back("checkpoint_every", "10");
        REQUIRE(cmd_integrate(config(flags), out, err) == exit_ok);
        CHECK(load_checkpoint(path + ".ckpt").step == 30);
    }
    SUBCASE("a checkpoint from a different configuration is refused")
    {
        const auto first = dir.file("first.tsv");
        REQUIRE(cmd_integrate(config(lorenz_flags("20", first)), out, err) == exit_ok);
        auto flags = lorenz_flags("40", dir.file("second.tsv"));
        flags[2] = {"order", "41"};
        flags.emplace_back("resume", first + ".ckpt");
        CHECK(cmd_integrate(config(flags), out, err) == exit_config);
        CHECK(err.str().find("different configuration") != std::string::npos);

        auto past = lorenz_flags("10", dir.file("third.tsv"));
        past.emplace_back("resume", first + ".ckpt");
        CHECK(cmd_integrate(config(past), out, err) == exit_config);
    }
    SUBCASE("unwritable output is a runtime error")
    {
        CHECK(cmd_integrate(config(lorenz_flags("1", dir.file("no/such/dir/x.tsv"))), out, err) == exit_runtime);
    }
}

TEST_CASE("trajectory files are byte-identical across worker counts")
{
    TempDir dir;
    std::ostringstream out, err;
    std::string reference;
    for (std::size_t w : {1u, 2u, 4u}) {
        for (int repeat = 0; repeat < 2; ++repeat) {
            const auto path = dir.file("w" + std::to_string(w) + "_" + std::to_string(repeat) + ".tsv");
            auto flags = lorenz_flags("60", path);
            flags[2] = {"order", "300"};
            flags.emplace_back("workers", std::to_string(w));
            flags.emplace_back("threshold", "0");
            flags.emplace_back("stride", "20");
            flags.emplace_back("digits", "150");
            REQUIRE(cmd_integrate(config(flags), out, err) == exit_ok);
            const auto text = slurp(path) + slurp(path + ".ckpt");
            if (reference.empty())
                reference = text;
            CHECK(text == reference);
        }
    }
}

TEST_CASE("benchmark records")
{
    const auto one = make_record("parallel", 1, 2.0, 2.0);
    CHECK(one.speedup == 1.0);
    CHECK(one.efficiency == 100.0);
    const auto four = make_record("parallel", 4, 0.5, 1.8);
    CHECK(four.speedup == doctest::Approx(3.6));
    CHECK(four.efficiency == doctest::Approx(90.0));

    const mp::Context ctx(256);
    const auto sys = lorenz_system(LorenzParams::standard(ctx), ctx);
    const std::vector<mp::Real> s0{mp::from_decimal("-15.8", ctx), mp::from_decimal("-17.48", ctx),
                                   mp::from_decimal("35.64", ctx)};
    ReducePlan plan;
    plan.serial_threshold = 0;
    const std::vector<std::size_t> workers{1, 2};
    const auto records = run_benchmark(sys, s0, {mp::from_decimal("0.01", ctx), 60}, ctx, plan, workers, 2);
    REQUIRE(records.size() == 3);
    CHECK(records[0].mode == "serial");
    CHECK(records[0].speedup == 1.0);
    for (const auto& r : records) {
        CHECK(r.matches_serial);
        CHECK(r.seconds > 0.0);
        CHECK(r.efficiency == doctest::Approx(100.0 * r.speedup / static_cast<double>(r.workers)));
    }
    const auto table = benchmark_table(records);
    CHECK(table.rfind("# workers\tmode\ttime_s\tspeedup\tefficiency_pct\tidentical\n", 0) == 0);
    CHECK(table.find("hardware") != std::string::npos);

    std::ostringstream out, err;
    auto flags = KeyValues{{"system", "lorenz"}, {"tau", "0.01"}, {"order", "30"}, {"prec_bits", "256"},
                           {"bench", "1"}, {"probe_steps", "2"}};
    REQUIRE(cmd_bench(config(flags), out, err) == exit_ok);
    CHECK(data_rows(out.str()).size() == 2);
}

TEST_CASE("cmd_cns")
{
    TempDir dir;
    std::ostringstream out, err;

    SUBCASE("equal runs through the escape hatch certify everything")
    {
        const auto path = dir.file("eq.tsv");
        const auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "20"}, {"prec_bits", "128"},
                                 {"t_end", "2"}, {"verify_order", "20"}, {"verify_prec_bits", "128"},
                                 {"allow_equal", "true"}, {"out", path}});
        REQUIRE(cmd_cns(cfg, out, err) == exit_ok);
        const auto kv = slurp(path + ".tc");
        CHECK(kv.find("t_c=2\n") != std::string::npos);
        CHECK(kv.find("t_end=2\n") != std::string::npos);
        CHECK(slurp(path + ".tc.tsv").find("exact") != std::string::npos);
        CHECK(data_rows(slurp(path)).size() == 3);
    }
    SUBCASE("thin wrapper over cns_run")
    {
        const auto path = dir.file("pair.tsv");
        const auto cfg =
            config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "20"}, {"prec_bits", "128"}, {"t_end", "25"},
                    {"verify_order", "30"}, {"verify_prec_bits", "256"}, {"agree_digits", "6"}, {"out", path}});
        REQUIRE(cmd_cns(cfg, out, err) == exit_ok);
        CnsConfig cns;
        cns.base = {128, 20};
        cns.verify = {256, 30};
        cns.tau = "0.01";
        cns.t_end = "25";
        cns.agree_digits = 6;
        const SystemFactory factory = [](const mp::Context& ctx) {
            return lorenz_system(LorenzParams::standard(ctx), ctx);
        };
        const std::vector<std::string> init{"-15.8", "-17.48", "35.64"};
        const auto direct = cns_run(factory, init, cns, ReducePlan{});
        CHECK(slurp(path + ".tc") == direct.report.to_key_value());
        CHECK(slurp(path + ".tc.tsv") == direct.report.series_tsv());
        CHECK(out.str().find("t_c = " + direct.report.t_c) != std::string::npos);
    }
    SUBCASE("default verification margins")
    {
        const auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "60"}, {"prec_bits", "600"},
                                 {"t_end", "1"}});
        CHECK(verify_spec(cfg) == RunSpec{798, 80});
    }
    SUBCASE("a verify run that does not dominate is a configuration error")
    {
        const auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "20"}, {"prec_bits", "128"},
                                 {"t_end", "1"}, {"verify_order", "10"}});
        CHECK(cmd_cns(cfg, out, err) == exit_config);
        CHECK(err.str().find("verify") != std::string::npos);
    }
}

TEST_CASE("cmd_diagram")
{
    std::ostringstream out, err;
    const auto cfg = config({{"system", "lorenz"}, {"tau", "0.01"}, {"order", "20"}, {"prec_bits", "128"},
                             {"t_end", "3"}, {"agree_digits", "6"}});
    DiagramRequest request;
    request.axis = SweepAxis::order;
    request.values = {10, 20};
    REQUIRE(cmd_diagram(cfg, request, out, err) == exit_ok);
    CHECK(out.str().rfind("# param t_c\n10\t", 0) == 0);
    request.values.clear();
    CHECK(cmd_diagram(cfg, request, out, err) == exit_config);
}

TEST_CASE("command-line exit codes")
{
    TempDir dir;
    const auto path = dir.file("cli.tsv");
    CHECK(run_cli("integrate --system lorenz --tau 0.01 --order 10 --prec-bits 128 --steps 5 --out " + path) == 0);
    CHECK(data_rows(slurp(path)).size() == 2);

    const auto cfg_path = dir.file("run.cfg");
    std::ofstream(cfg_path) << "system=lorenz\ntau=0.01\norder=10\nprec_bits=128\nsteps=5\n";
    const auto from_file = dir.file("file.tsv");
    CHECK(run_cli("integrate --config " + cfg_path + " --out " + from_file) == 0);
    CHECK(slurp(from_file) == slurp(path));

    CHECK(run_cli("integrate --system lorenz --tau 0.01") == 1);
    CHECK(run_cli("integrate --system lorenz --tau 0.01 --order 10 --prec-bits 128 --steps 5 --prec-digits 40") == 1);
    CHECK(run_cli("integrate --bogus-flag 3") == 1);
    CHECK(run_cli("cns --system lorenz --tau 0.01 --order 10 --prec-bits 128 --t-end 1 --verify-order 5") == 1);
    CHECK(run_cli("integrate --system lorenz --tau 0.01 --order 10 --prec-bits 128 --steps 5 --out " +
                  dir.file("missing/dir/x.tsv"))
          == 2);
    CHECK(run_cli("diagram --system lorenz --tau 0.01 --order 10 --prec-bits 128 --t-end 1") == 1);
    CHECK(run_cli("") == 1);
}
