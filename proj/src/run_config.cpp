#include <tsm/run_config.hpp>

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <tsm/decimal.hpp>

namespace tsm {

namespace {

const std::set<std::string, std::less<>> known_keys{
    "system",  "init",       "tau",       "order",       "prec_bits",        "prec_digits", "steps",
    "t_end",   "workers",    "chunks",    "chunk_mode",  "threshold",        "out",         "checkpoint_every",
    "digits",  "stride",     "verify_order", "verify_prec_bits", "agree_digits", "allow_equal", "bench",
    "probe_steps", "resume"};

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.npos : comma - start));
        out.push_back(piece);
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <class Int>
std::optional<Int> parse_int(std::string_view s)
{
    Int v{};
    const auto* end = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || ptr != end || s.empty())
        return std::nullopt;
    return v;
}

} // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed)
{
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v)
{
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4)
        out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

KeyValues parse_key_values(std::string_view text)
{
    KeyValues out;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const auto t = trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return out;
}

KeyValues read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_key_values(ss.str());
}

RunConfig parse_config(const KeyValues& file, const KeyValues& flags)
{
    std::vector<std::string> problems;
    std::map<std::string, std::string, std::less<>> merged;

    // Keys that are alternatives of one logical setting.
    const std::map<std::string, std::string, std::less<>> alternative{
        {"prec_bits", "prec_digits"}, {"prec_digits", "prec_bits"}, {"steps", "t_end"}, {"t_end", "steps"}};

    auto absorb = [&](const KeyValues& source, const char* origin, bool overrides) {
        std::set<std::string> seen;
        for (const auto& [key, value] : source) {
            if (!known_keys.contains(key)) {
                problems.push_back(std::string("unknown key '") + key + "' in " + origin);
                continue;
            }
            if (!seen.insert(key).second) {
                problems.push_back("key '" + key + "' given twice in " + origin);
                continue;
            }
            if (auto alt = alternative.find(key); alt != alternative.end()) {
                if (seen.contains(alt->second))
                    problems.push_back("'" + key + "' and '" + alt->second + "' conflict in " + origin);
                else if (overrides)
                    merged.erase(alt->second);
            }
            merged[key] = value;
        }
    };
    absorb(file, "config file", false);
    absorb(flags, "flags", true);

    auto get = [&](std::string_view key) -> const std::string* {
        auto it = merged.find(key);
        return it == merged.end() ? nullptr : &it->second;
    };
    auto unsigned_key = [&](std::string_view key, std::size_t minimum) -> std::optional<std::size_t> {
        const auto* v = get(key);
        if (!v)
            return std::nullopt;
        auto n = parse_int<std::size_t>(*v);
        if (!n || *n < minimum) {
            problems.push_back(std::string(key) + " must be an integer >= " + std::to_string(minimum) + ", got '"
                               + *v + "'");
            return std::nullopt;
        }
        return n;
    };

    RunConfig cfg;

    if (const auto* v = get("system"))
        cfg.system = *v;
    else
        problems.push_back("missing required key 'system'");

    if (const auto* v = get("tau")) {
        if (!decimal::is_literal(*v))
            problems.push_back("tau is not a decimal number: '" + *v + "'");
        else if (!decimal::exact_quotient("0", *v))
            problems.push_back("tau must be nonzero");
        else
            cfg.tau = *v;
    }
    else {
        problems.push_back("missing required key 'tau'");
    }

    if (get("order")) {
        if (auto n = unsigned_key("order", 1))
            cfg.order = *n;
    }
    else {
        problems.push_back("missing required key 'order'");
    }

    if (const auto* v = get("prec_bits")) {
        auto n = parse_int<long>(*v);
        if (!n || *n < mp::min_precision_bits)
            problems.push_back("prec_bits must be an integer >= " + std::to_string(mp::min_precision_bits));
        else
            cfg.precision_bits = *n;
    }
    else if (const auto* d = get("prec_digits")) {
        auto n = parse_int<long>(*d);
        if (!n || *n < 1) {
            problems.push_back("prec_digits must be a positive integer");
        }
        else {
            cfg.precision_digits = *n;
            cfg.precision_bits = std::max(mp::bits_for_digits(*n), mp::min_precision_bits);
        }
    }
    else {
        problems.push_back("missing required key 'prec_bits' or 'prec_digits'");
    }

    if (get("steps"))
        cfg.n_steps = unsigned_key("steps", 0);
    if (const auto* v = get("t_end")) {
        if (!decimal::is_literal(*v))
            problems.push_back("t_end is not a decimal number: '" + *v + "'");
        else if (!cfg.tau.empty() && !decimal::exact_quotient(*v, cfg.tau))
            problems.push_back("t_end=" + *v + " is not a nonnegative integer multiple of tau=" + cfg.tau);
        else
            cfg.t_end = *v;
    }

    if (auto n = unsigned_key("workers", 1))
        cfg.workers = *n;
    if (auto n = unsigned_key("chunks", 1))
        cfg.num_chunks = *n;
    if (auto n = unsigned_key("threshold", 0))
        cfg.threshold = *n;
    if (const auto* v = get("chunk_mode")) {
        if (*v == "fixed")
            cfg.chunk_mode = ChunkMode::fixed;
        else if (*v == "per_worker")
            cfg.chunk_mode = ChunkMode::per_worker;
        else
            problems.push_back("chunk_mode must be 'fixed' or 'per_worker', got '" + *v + "'");
    }
    if (const auto* v = get("out"))
        cfg.out = *v;
    if (auto n = unsigned_key("checkpoint_every", 0))
        cfg.checkpoint_every = *n;
    if (auto n = unsigned_key("digits", 1))
        cfg.digits = static_cast<int>(*n);
    if (auto n = unsigned_key("stride", 1))
        cfg.stride = *n;
    if (auto n = unsigned_key("verify_order", 1))
        cfg.verify_order = *n;
    if (const auto* v = get("verify_prec_bits")) {
        auto n = parse_int<long>(*v);
        if (!n || *n < mp::min_precision_bits)
            problems.push_back("verify_prec_bits must be an integer >= " + std::to_string(mp::min_precision_bits));
        else
            cfg.verify_prec_bits = *n;
    }
    if (auto n = unsigned_key("agree_digits", 1))
        cfg.agree_digits = static_cast<int>(*n);
    if (const auto* v = get("allow_equal")) {
        if (*v == "true" || *v == "1")
            cfg.allow_equal = true;
        else if (*v == "false" || *v == "0")
            cfg.allow_equal = false;
        else
            problems.push_back("allow_equal must be true or false");
    }
    if (const auto* v = get("bench")) {
        for (const auto& piece : split_list(*v)) {
            auto n = parse_int<std::size_t>(piece);
            if (!n || *n == 0)
                problems.push_back("bench worker counts must be positive integers, got '" + piece + "'");
            else
                cfg.bench_workers.push_back(*n);
        }
    }
    if (auto n = unsigned_key("probe_steps", 1))
        cfg.probe_steps = *n;
    if (const auto* v = get("resume"))
        cfg.resume = *v;

    // System and initial state.
    std::size_t dim = 0;
    if (!cfg.system.empty()) {
        try {
            dim = cfg.system_description().dim();
        }
        catch (const Error& e) {
            problems.push_back(e.what());
        }
    }
    if (const auto* v = get("init")) {
        cfg.init = split_list(*v);
    }
    else if (cfg.system == "lorenz") {
        cfg.init = split_list(lorenz_default_init);
    }
    else if (!cfg.system.empty()) {
        problems.push_back("missing required key 'init' (only the lorenz built-in has a default)");
    }
    for (const auto& x : cfg.init)
        if (!decimal::is_literal(x))
            problems.push_back("initial value is not a decimal number: '" + x + "'");
    if (dim != 0 && !cfg.init.empty() && cfg.init.size() != dim)
        problems.push_back("init has " + std::to_string(cfg.init.size()) + " values, system dimension is "
                           + std::to_string(dim));

    if (!problems.empty()) {
        std::string msg = "configuration error";
        msg += problems.size() == 1 ? ":" : "s:";
        for (const auto& p : problems)
            msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return cfg;
}

std::size_t RunConfig::steps() const
{
    if (n_steps)
        return *n_steps;
    if (t_end) {
        if (auto n = decimal::exact_quotient(*t_end, tau))
            return *n;
        throw ConfigError("t_end is not an integer multiple of tau");
    }
    throw ConfigError("one of 'steps' or 't_end' is required");
}

std::string RunConfig::end_time() const { return decimal::times(tau, steps()); }

int RunConfig::output_digits() const
{
    if (digits)
        return *digits;
    return static_cast<int>(std::min<long>(mp::decimal_digits(precision_bits), 50));
}

ReducePlan RunConfig::reduce_plan() const
{
    ReducePlan plan;
    plan.num_chunks = num_chunks;
    plan.workers = workers;
    plan.serial_threshold = threshold;
    plan.mode = chunk_mode;
    return plan;
}

SystemDescription RunConfig::system_description() const
{
    if (system == "lorenz")
        return SystemDescription::builtin(system);
    return SystemDescription::parse_file(system);
}

namespace {

std::string join(const std::vector<std::string>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? "," : "") + v[i];
    return out;
}

std::vector<std::string> dynamics_lines(const RunConfig& c)
{
    std::vector<std::string> lines{
        "system=" + c.system,
        "system_hash=" + hex64(fnv1a(c.system_description().canonical_text())),
        "init=" + join(c.init),
        "tau=" + c.tau,
        "order=" + std::to_string(c.order),
        "prec_bits=" + std::to_string(c.precision_bits),
    };
    if (c.chunk_mode == ChunkMode::per_worker) {
        lines.push_back("chunk_mode=per_worker");
        lines.push_back("workers=" + std::to_string(c.workers));
    }
    else {
        lines.push_back("chunks=" + std::to_string(c.num_chunks));
    }
    return lines;
}

std::uint64_t hash_lines(const std::vector<std::string>& lines)
{
    std::uint64_t h = fnv1a("");
    for (const auto& l : lines)
        h = fnv1a(l + "\n", h);
    return h;
}

} // namespace

std::vector<std::string> RunConfig::echo() const
{
    auto lines = dynamics_lines(*this);
    if (precision_digits)
        lines.push_back("prec_digits=" + std::to_string(*precision_digits));
    if (n_steps || t_end) {
        lines.push_back("steps=" + std::to_string(steps()));
        lines.push_back("t_end=" + end_time());
    }
    lines.push_back("digits=" + std::to_string(output_digits()));
    lines.push_back("stride=" + std::to_string(stride));
    return lines;
}

std::uint64_t RunConfig::hash() const { return hash_lines(echo()); }

std::uint64_t RunConfig::dynamics_hash() const { return hash_lines(dynamics_lines(*this)); }

} // namespace tsm
