#include <tsm/persist.hpp>

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <tsm/run_config.hpp>

namespace tsm {

namespace {

constexpr const char* magic = "tsm-checkpoint";
constexpr int format_version = 1;

std::string expect_line(std::istream& is, const std::string& key)
{
    std::string line;
    if (!std::getline(is, line))
        throw ParseError("checkpoint truncated before '" + key + "'");
    if (line.rfind(key + " ", 0) != 0)
        throw ParseError("checkpoint: expected '" + key + "', got '" + line + "'");
    return line.substr(key.size() + 1);
}

template <class T>
T to_number(const std::string& text, const std::string& key)
{
    std::istringstream is(text);
    T v{};
    std::string rest;
    if (!(is >> v) || (is >> rest))
        throw ParseError("checkpoint: bad value for '" + key + "': '" + text + "'");
    return v;
}

} // namespace

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt)
{
    os << magic << ' ' << format_version << '\n'
       << "step " << ckpt.step << '\n'
       << "time " << ckpt.time << '\n'
       << "prec_bits " << ckpt.precision_bits << '\n'
       << "config_hash " << hex64(ckpt.config_hash) << '\n'
       << "dim " << ckpt.state.size() << '\n';
    for (std::size_t m = 0; m < ckpt.state.size(); ++m)
        os << "var " << m << ' ' << mp::to_hex(ckpt.state[m]) << '\n';
    os << "end\n";
}

Checkpoint read_checkpoint(std::istream& is)
{
    const auto version = to_number<int>(expect_line(is, magic), "version");
    if (version != format_version)
        throw ParseError("checkpoint: unsupported format version " + std::to_string(version));

    Checkpoint ckpt;
    ckpt.step = to_number<std::size_t>(expect_line(is, "step"), "step");
    ckpt.time = expect_line(is, "time");
    ckpt.precision_bits = to_number<long>(expect_line(is, "prec_bits"), "prec_bits");
    const auto hash_text = expect_line(is, "config_hash");
    if (hash_text.size() != 16)
        throw ParseError("checkpoint: config_hash must be 16 hex digits");
    try {
        std::size_t used = 0;
        ckpt.config_hash = std::stoull(hash_text, &used, 16);
        if (used != hash_text.size())
            throw ParseError("checkpoint: bad config_hash");
    }
    catch (const std::logic_error&) {
        throw ParseError("checkpoint: bad config_hash");
    }
    const auto dim = to_number<std::size_t>(expect_line(is, "dim"), "dim");

    mp::Context ctx(mp::min_precision_bits);
    try {
        ctx = mp::Context(ckpt.precision_bits);
    }
    catch (const ConfigError& e) {
        throw ParseError(std::string("checkpoint: ") + e.what());
    }
    for (std::size_t m = 0; m < dim; ++m) {
        const auto rest = expect_line(is, "var");
        std::istringstream ls(rest);
        std::size_t index = 0;
        if (!(ls >> index) || index != m)
            throw ParseError("checkpoint: variables out of order");
        std::string value;
        std::getline(ls, value);
        ckpt.state.push_back(mp::from_hex(value, ctx));
    }
    std::string line;
    if (!std::getline(is, line) || line != "end")
        throw ParseError("checkpoint: missing 'end'");
    return ckpt;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os)
            throw Error("cannot write checkpoint '" + tmp + "'");
        write_checkpoint(os, ckpt);
        os.flush();
        if (!os)
            throw Error("error writing checkpoint '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot move checkpoint into place at '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw ConfigError("cannot read checkpoint '" + path + "'");
    return read_checkpoint(is);
}

TrajectoryWriter::TrajectoryWriter(std::ostream& os, std::span<const std::string> header_lines,
                                   std::span<const std::string> names, int digits)
    : os_(os), digits_(digits)
{
    for (const auto& line : header_lines)
        os_ << "# " << line << '\n';
    os_ << "# t";
    for (const auto& n : names)
        os_ << ' ' << n;
    os_ << '\n';
}

void TrajectoryWriter::row(const std::string& time, std::span<const mp::Real> state)
{
    os_ << time;
    for (const auto& v : state)
        os_ << '\t' << mp::to_decimal(v, digits_);
    os_ << '\n';
}

} // namespace tsm
