#include <tsm/odesys.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace tsm {

namespace {

std::vector<std::string> default_names(std::size_t dim)
{
    if (dim == 3)
        return {"x", "y", "z"};
    std::vector<std::string> names;
    for (std::size_t m = 0; m < dim; ++m)
        names.push_back("x" + std::to_string(m));
    return names;
}

} // namespace

QuadraticODESystem::QuadraticODESystem(std::vector<mp::Real> constant, std::vector<std::vector<mp::Real>> linear,
                                       std::vector<std::vector<BilinearTerm>> bilinear,
                                       std::vector<std::string> names)
    : constant_(std::move(constant)), linear_(std::move(linear)), bilinear_(std::move(bilinear)),
      names_(std::move(names))
{
    const auto n = constant_.size();
    if (n == 0)
        throw ConfigError("system dimension must be positive");
    if (linear_.size() != n || bilinear_.size() != n)
        throw ConfigError("linear and bilinear parts must have one row per equation");
    if (names_.empty())
        names_ = default_names(n);
    if (names_.size() != n)
        throw ConfigError("one variable name per equation required");

    precision_bits_ = constant_[0].precision_bits();
    auto check_precision = [&](const mp::Real& v) {
        if (v.precision_bits() != precision_bits_)
            throw ConfigError("all coefficients must share one working precision");
    };

    support_.resize(n);
    for (std::size_t m = 0; m < n; ++m) {
        check_precision(constant_[m]);
        if (linear_[m].size() != n)
            throw ConfigError("linear part must be dim x dim");
        for (std::size_t j = 0; j < n; ++j) {
            check_precision(linear_[m][j]);
            if (!linear_[m][j].is_zero())
                support_[m].push_back(j);
        }
        std::set<std::pair<std::size_t, std::size_t>> seen;
        for (const auto& term : bilinear_[m]) {
            check_precision(term.coeff);
            if (term.j > term.k)
                throw ConfigError("bilinear term indices must satisfy j <= k");
            if (term.k >= n)
                throw ConfigError("bilinear term index out of range");
            if (!seen.emplace(term.j, term.k).second)
                throw ConfigError("duplicate bilinear term");
        }
    }
}

LorenzParams LorenzParams::standard(const mp::Context& ctx)
{
    return {mp::Real(10, ctx), mp::Real(28, ctx), mp::div(mp::Real(8, ctx), mp::Real(3, ctx), ctx)};
}

QuadraticODESystem lorenz_system(const LorenzParams& params, const mp::Context& ctx)
{
    const mp::Real zero(ctx);
    const mp::Real one(1, ctx);
    auto at = [&](const mp::Real& v) { return mp::round_to(v, ctx); };

    std::vector<mp::Real> constant(3, zero);
    std::vector<std::vector<mp::Real>> linear{
        {mp::neg(at(params.sigma)), at(params.sigma), zero},
        {at(params.R), mp::neg(one), zero},
        {zero, zero, mp::neg(at(params.b))},
    };
    std::vector<std::vector<BilinearTerm>> bilinear(3);
    bilinear[1].push_back({0, 2, mp::neg(one)}); // -x z
    bilinear[2].push_back({0, 1, one});          // +x y
    return QuadraticODESystem(std::move(constant), std::move(linear), std::move(bilinear), {"x", "y", "z"});
}

std::vector<mp::Real> rhs_eval(const QuadraticODESystem& system, std::span<const mp::Real> state,
                               const mp::Context& ctx)
{
    const auto n = system.dim();
    if (state.size() != n)
        throw DomainError("state length does not match system dimension");

    std::vector<mp::Real> out;
    out.reserve(n);
    mp::Real temp(ctx);
    mp::Real prod(ctx);
    mp::RangeCheck range;
    for (std::size_t m = 0; m < n; ++m) {
        mp::Real acc = mp::round_to(system.constant(m), ctx);
        for (auto j : system.linear_support(m)) {
            mp::mul_into(temp, system.linear(m, j), state[j]);
            mp::add_into(acc, temp);
        }
        for (const auto& term : system.bilinear(m)) {
            mp::mul_into(prod, state[term.j], state[term.k]);
            mp::mul_into(temp, term.coeff, prod);
            mp::add_into(acc, temp);
        }
        out.push_back(std::move(acc));
    }
    range.check("right-hand side evaluation");
    return out;
}

SystemDescription SystemDescription::builtin(std::string_view name)
{
    if (name != "lorenz")
        throw ConfigError("unknown built-in system '" + std::string(name) + "'");
    SystemDescription d;
    d.dim_ = 3;
    d.lorenz_ = true;
    return d;
}

SystemDescription SystemDescription::parse(std::string_view text)
{
    SystemDescription d;
    std::map<std::size_t, std::string> constants;
    std::map<std::pair<std::size_t, std::size_t>, std::string> linears;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::string> bilinears;
    std::size_t declared_dim = 0;
    std::size_t max_index = 0;
    bool any = false;

    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    auto fail = [&](const std::string& why) {
        throw ParseError("system description line " + std::to_string(lineno) + ": " + why);
    };
    auto read_index = [&](std::istringstream& ls) {
        long long v = -1;
        if (!(ls >> v) || v < 0)
            fail("expected a nonnegative index");
        const auto idx = static_cast<std::size_t>(v);
        max_index = std::max(max_index, idx);
        any = true;
        return idx;
    };
    auto read_value = [&](std::istringstream& ls) {
        std::string v;
        if (!(ls >> v))
            fail("missing coefficient value");
        // Validate the literal now; the precision used here is irrelevant.
        try {
            (void)mp::from_decimal(v, mp::Context(mp::min_precision_bits));
        }
        catch (const Error& e) {
            fail(e.what());
        }
        std::string extra;
        if (ls >> extra)
            fail("trailing text '" + extra + "'");
        return v;
    };

    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::istringstream ls(line);
        std::string kind;
        if (!(ls >> kind))
            continue;
        if (kind == "dim") {
            long long v = 0;
            if (!(ls >> v) || v <= 0)
                fail("dim must be a positive integer");
            declared_dim = static_cast<std::size_t>(v);
        }
        else if (kind == "const") {
            const auto m = read_index(ls);
            if (!constants.emplace(m, read_value(ls)).second)
                fail("duplicate const entry");
        }
        else if (kind == "lin") {
            const auto m = read_index(ls);
            const auto j = read_index(ls);
            if (!linears.emplace(std::pair{m, j}, read_value(ls)).second)
                fail("duplicate lin entry");
        }
        else if (kind == "bilin") {
            const auto m = read_index(ls);
            auto j = read_index(ls);
            auto k = read_index(ls);
            if (j > k)
                std::swap(j, k);
            if (!bilinears.emplace(std::tuple{m, j, k}, read_value(ls)).second)
                fail("duplicate bilin entry");
        }
        else {
            fail("unknown entry kind '" + kind + "'");
        }
    }

    const std::size_t inferred = any ? max_index + 1 : 0;
    if (declared_dim != 0 && inferred > declared_dim)
        throw ParseError("system description: index exceeds declared dim");
    d.dim_ = declared_dim != 0 ? declared_dim : inferred;
    if (d.dim_ == 0)
        throw ParseError("system description is empty");

    for (auto& [m, v] : constants)
        d.constants_.push_back({m, 0, 0, v});
    for (auto& [mj, v] : linears)
        d.linears_.push_back({mj.first, mj.second, 0, v});
    for (auto& [mjk, v] : bilinears)
        d.bilinears_.push_back({std::get<0>(mjk), std::get<1>(mjk), std::get<2>(mjk), v});
    return d;
}

SystemDescription SystemDescription::parse_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read system description '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

QuadraticODESystem SystemDescription::instantiate(const mp::Context& ctx) const
{
    if (lorenz_)
        return lorenz_system(LorenzParams::standard(ctx), ctx);

    const mp::Real zero(ctx);
    std::vector<mp::Real> constant(dim_, zero);
    std::vector<std::vector<mp::Real>> linear(dim_, std::vector<mp::Real>(dim_, zero));
    std::vector<std::vector<BilinearTerm>> bilinear(dim_);
    for (const auto& e : constants_)
        constant[e.m] = mp::from_decimal(e.value, ctx);
    for (const auto& e : linears_)
        linear[e.m][e.j] = mp::from_decimal(e.value, ctx);
    for (const auto& e : bilinears_)
        bilinear[e.m].push_back({e.j, e.k, mp::from_decimal(e.value, ctx)});
    return QuadraticODESystem(std::move(constant), std::move(linear), std::move(bilinear));
}

std::string SystemDescription::canonical_text() const
{
    if (lorenz_)
        return "builtin lorenz\n";
    std::ostringstream os;
    os << "dim " << dim_ << '\n';
    for (const auto& e : constants_)
        os << "const " << e.m << ' ' << e.value << '\n';
    for (const auto& e : linears_)
        os << "lin " << e.m << ' ' << e.j << ' ' << e.value << '\n';
    for (const auto& e : bilinears_)
        os << "bilin " << e.m << ' ' << e.j << ' ' << e.k << ' ' << e.value << '\n';
    return os.str();
}

} // namespace tsm
