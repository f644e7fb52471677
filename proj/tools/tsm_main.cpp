// tsm: arbitrary-precision Taylor series integration of quadratic ODE systems.

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <tsm/commands.hpp>

namespace {

// Command-line flag -> config key.
const std::vector<std::pair<std::string, std::string>> flag_keys{
    {"--system", "system"},
    {"--init", "init"},
    {"--tau", "tau"},
    {"--order", "order"},
    {"--prec-bits", "prec_bits"},
    {"--prec-digits", "prec_digits"},
    {"--steps", "steps"},
    {"--t-end", "t_end"},
    {"--workers", "workers"},
    {"--chunks", "chunks"},
    {"--chunk-mode", "chunk_mode"},
    {"--threshold", "threshold"},
    {"--out", "out"},
    {"--checkpoint-every", "checkpoint_every"},
    {"--digits", "digits"},
    {"--stride", "stride"},
    {"--verify-order", "verify_order"},
    {"--verify-prec-bits", "verify_prec_bits"},
    {"--agree-digits", "agree_digits"},
    {"--allow-equal", "allow_equal"},
    {"--bench", "bench"},
    {"--probe-steps", "probe_steps"},
    {"--resume", "resume"},
};

struct Options
{
    std::string config_file;
    std::map<std::string, std::string> values; // key -> raw flag text
};

void add_run_options(CLI::App& cmd, Options& opts)
{
    cmd.add_option("--config", opts.config_file, "key=value config file (flags override it)");
    for (const auto& [flag, key] : flag_keys)
        cmd.add_option(flag, opts.values[key], "config key '" + key + "'");
}

std::vector<long> parse_list(const std::string& text)
{
    std::vector<long> out;
    std::stringstream ss(text);
    std::string piece;
    while (std::getline(ss, piece, ','))
        out.push_back(std::stol(piece));
    return out;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Arbitrary-precision Taylor series integrator with clean-numerical-simulation verification"};
    app.require_subcommand(1);

    Options opts;
    auto* integrate = app.add_subcommand("integrate", "integrate and write a trajectory (plus checkpoints)");
    auto* cns = app.add_subcommand("cns", "paired base/verify runs and critical predictable time");
    auto* bench = app.add_subcommand("bench", "thread-scaling probe");
    auto* diagram = app.add_subcommand("diagram", "T_c versus precision or order sweep");
    for (auto* cmd : {integrate, cns, bench, diagram})
        add_run_options(*cmd, opts);

    std::string sweep_bits, sweep_orders;
    long margin_bits = 64;
    long margin_order = 10;
    diagram->add_option("--sweep-prec-bits", sweep_bits, "comma-separated precisions (T_c-K diagram)");
    diagram->add_option("--sweep-orders", sweep_orders, "comma-separated orders (T_c-N diagram)");
    diagram->add_option("--margin-bits", margin_bits, "extra bits of each verify run");
    diagram->add_option("--margin-order", margin_order, "extra order of each verify run");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? tsm::exit_ok : tsm::exit_config;
    }

    tsm::RunConfig cfg;
    try {
        tsm::KeyValues file;
        if (!opts.config_file.empty())
            file = tsm::read_config_file(opts.config_file);
        tsm::KeyValues flags;
        for (const auto& [flag, key] : flag_keys) {
            auto* sub = app.get_subcommands().front();
            if (sub->count(flag) > 0)
                flags.emplace_back(key, opts.values[key]);
        }
        cfg = tsm::parse_config(file, flags);
    }
    catch (const tsm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return tsm::exit_config;
    }

    if (*integrate)
        return tsm::cmd_integrate(cfg, std::cout, std::cerr);
    if (*cns)
        return tsm::cmd_cns(cfg, std::cout, std::cerr);
    if (*bench)
        return tsm::cmd_bench(cfg, std::cout, std::cerr);

    tsm::DiagramRequest request;
    if (!sweep_bits.empty() == !sweep_orders.empty()) {
        std::cerr << "error: diagram needs exactly one of --sweep-prec-bits or --sweep-orders\n";
        return tsm::exit_config;
    }
    try {
        request.axis = sweep_bits.empty() ? tsm::SweepAxis::order : tsm::SweepAxis::precision;
        request.values = parse_list(sweep_bits.empty() ? sweep_orders : sweep_bits);
    }
    catch (const std::exception&) {
        std::cerr << "error: sweep values must be comma-separated integers\n";
        return tsm::exit_config;
    }
    if (margin_bits < 1 || margin_order < 1) {
        std::cerr << "error: verify margins must be positive\n";
        return tsm::exit_config;
    }
    request.margin = {margin_bits, static_cast<std::size_t>(margin_order)};
    return tsm::cmd_diagram(cfg, request, std::cout, std::cerr);
}
