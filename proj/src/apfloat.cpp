#include <tsm/apfloat.hpp>

#include <gmp.h>

#include <cctype>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>

namespace tsm::mp {

namespace {

constexpr double log10_of_2 = 0.30102999566398119521373889472449302676818988146211;

// Signed decimal: [+-]? (digits [. digits?] | . digits) ([eE] [+-]? digits)?
bool is_decimal_literal(std::string_view s)
{
    std::size_t i = 0;
    const auto n = s.size();
    auto digits = [&] {
        const auto start = i;
        while (i < n && std::isdigit(static_cast<unsigned char>(s[i])))
            ++i;
        return i - start;
    };

    if (i < n && (s[i] == '+' || s[i] == '-'))
        ++i;
    auto mantissa = digits();
    if (i < n && s[i] == '.') {
        ++i;
        mantissa += digits();
    }
    if (mantissa == 0)
        return false;
    if (i < n && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        if (i < n && (s[i] == '+' || s[i] == '-'))
            ++i;
        if (digits() == 0)
            return false;
    }
    return i == n;
}

void throw_on_range(const char* what)
{
    if (mpfr_overflow_p())
        throw RangeError(std::string(what) + ": exponent overflow");
    if (mpfr_underflow_p())
        throw RangeError(std::string(what) + ": exponent underflow");
}

struct mpz_holder
{
    mpz_t z;
    mpz_holder() { mpz_init(z); }
    ~mpz_holder() { mpz_clear(z); }
    mpz_holder(const mpz_holder&) = delete;
    mpz_holder& operator=(const mpz_holder&) = delete;
};

} // namespace

Context::Context(long precision_bits) : bits_(precision_bits)
{
    if (precision_bits < min_precision_bits)
        throw ConfigError("precision must be at least " + std::to_string(min_precision_bits) + " bits, got "
                          + std::to_string(precision_bits));
    if (precision_bits > static_cast<long>(MPFR_PREC_MAX))
        throw ConfigError("precision exceeds backend maximum");
}

Context Context::from_digits(long digits)
{
    return Context(std::max(bits_for_digits(digits), min_precision_bits));
}

long decimal_digits(long precision_bits)
{
    if (precision_bits < 1)
        throw DomainError("precision_bits must be positive");
    return static_cast<long>(std::floor(static_cast<long double>(precision_bits) * log10_of_2));
}

long bits_for_digits(long digits)
{
    if (digits < 1)
        throw DomainError("digit count must be positive");
    return static_cast<long>(std::ceil(static_cast<long double>(digits) / log10_of_2));
}

Real::Real(const Context& ctx)
{
    mpfr_init2(value_, static_cast<mpfr_prec_t>(ctx.precision_bits()));
    mpfr_set_zero(value_, 1);
}

Real::Real(long value, const Context& ctx)
{
    mpfr_init2(value_, static_cast<mpfr_prec_t>(ctx.precision_bits()));
    mpfr_set_si(value_, value, MPFR_RNDN);
}

Real::Real(const Real& other)
{
    mpfr_init2(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
}

Real::Real(Real&& other) noexcept
{
    // The moved-from object keeps a valid minimal-precision zero.
    mpfr_init2(value_, MPFR_PREC_MIN);
    mpfr_set_zero(value_, 1);
    mpfr_swap(value_, other.value_);
}

Real& Real::operator=(const Real& other)
{
    if (this != &other) {
        if (mpfr_get_prec(value_) != mpfr_get_prec(other.value_))
            mpfr_set_prec(value_, mpfr_get_prec(other.value_));
        mpfr_set(value_, other.value_, MPFR_RNDN);
    }
    return *this;
}

Real& Real::operator=(Real&& other) noexcept
{
    mpfr_swap(value_, other.value_);
    return *this;
}

Real::~Real() { mpfr_clear(value_); }

bool identical(const Real& a, const Real& b) noexcept
{
    if (a.precision_bits() != b.precision_bits())
        return false;
    if (mpfr_signbit(a.get()) != mpfr_signbit(b.get()))
        return false;
    return mpfr_equal_p(a.get(), b.get()) != 0;
}

int compare(const Real& a, const Real& b) noexcept { return mpfr_cmp(a.get(), b.get()); }

Real from_decimal(std::string_view text, const Context& ctx)
{
    if (!is_decimal_literal(text))
        throw ParseError("not a decimal number: '" + std::string(text) + "'");

    const std::string owned(text);
    Real out(ctx);
    mpfr_clear_flags();
    mpfr_set_str(out.get(), owned.c_str(), 10, MPFR_RNDN);
    throw_on_range("decimal literal");
    return out;
}

std::string to_decimal(const Real& v, int digits)
{
    if (digits < 1)
        throw DomainError("digit count must be positive");

    const bool negative = mpfr_signbit(v.get()) != 0 && !v.is_zero();
    std::string sig;
    long point = 0; // decimal exponent of the leading digit
    if (v.is_zero()) {
        sig.assign(static_cast<std::size_t>(digits), '0');
    }
    else {
        mpfr_exp_t e10 = 0;
        char* raw = mpfr_get_str(nullptr, &e10, 10, static_cast<std::size_t>(digits), v.get(), MPFR_RNDN);
        std::unique_ptr<char, decltype(&mpfr_free_str)> guard(raw, &mpfr_free_str);
        sig = raw[0] == '-' ? std::string(raw + 1) : std::string(raw);
        point = static_cast<long>(e10) - 1;
    }

    std::string out = negative ? "-" : "";
    const long n = static_cast<long>(sig.size());
    if (point >= n || point < -5) {
        out += sig.substr(0, 1);
        if (n > 1)
            out += "." + sig.substr(1);
        out += "e" + std::to_string(point);
    }
    else if (point >= 0) {
        out += sig.substr(0, static_cast<std::size_t>(point + 1));
        if (point + 1 < n)
            out += "." + sig.substr(static_cast<std::size_t>(point + 1));
    }
    else {
        out += "0." + std::string(static_cast<std::size_t>(-point - 1), '0') + sig;
    }
    return out;
}

Real arith(Op op, const Real& a, const Real& b, const Context& ctx)
{
    Real out(ctx);
    mpfr_clear_flags();
    switch (op) {
    case Op::add:
        mpfr_add(out.get(), a.get(), b.get(), MPFR_RNDN);
        break;
    case Op::sub:
        mpfr_sub(out.get(), a.get(), b.get(), MPFR_RNDN);
        break;
    case Op::mul:
        mpfr_mul(out.get(), a.get(), b.get(), MPFR_RNDN);
        break;
    case Op::div:
        if (b.is_zero())
            throw DomainError("division by zero");
        mpfr_div(out.get(), a.get(), b.get(), MPFR_RNDN);
        break;
    }
    throw_on_range("arithmetic");
    return out;
}

Real neg(const Real& a)
{
    Real out(a);
    mpfr_neg(out.get(), out.get(), MPFR_RNDN);
    return out;
}

Real abs(const Real& a)
{
    Real out(a);
    mpfr_abs(out.get(), out.get(), MPFR_RNDN);
    return out;
}

Real round_to(const Real& a, const Context& ctx)
{
    Real out(ctx);
    mpfr_clear_flags();
    mpfr_set(out.get(), a.get(), MPFR_RNDN);
    throw_on_range("precision change");
    return out;
}

RangeCheck::RangeCheck() noexcept { mpfr_clear_flags(); }

void RangeCheck::check(const char* what) const { throw_on_range(what); }

bool RangeCheck::failed() const noexcept { return mpfr_overflow_p() || mpfr_underflow_p(); }

std::string to_hex(const Real& v)
{
    if (v.is_zero())
        return mpfr_signbit(v.get()) ? "- 0 0" : "+ 0 0";

    mpz_holder m;
    const mpfr_exp_t e = mpfr_get_z_2exp(m.z, v.get());
    const bool negative = mpz_sgn(m.z) < 0;
    mpz_abs(m.z, m.z);
    // Strip trailing zero bits so the representation is canonical.
    const auto tz = mpz_scan1(m.z, 0);
    mpz_fdiv_q_2exp(m.z, m.z, tz);

    std::unique_ptr<char, void (*)(char*)> hex(mpz_get_str(nullptr, 16, m.z), [](char* p) {
        void (*free_fn)(void*, std::size_t);
        mp_get_memory_functions(nullptr, nullptr, &free_fn);
        free_fn(p, std::char_traits<char>::length(p) + 1);
    });

    std::ostringstream os;
    os << (negative ? '-' : '+') << ' ' << hex.get() << ' ' << (static_cast<long>(e) + static_cast<long>(tz));
    return os.str();
}

Real from_hex(std::string_view text, const Context& ctx)
{
    std::istringstream is{std::string(text)};
    std::string sign, hex, exp_text;
    if (!(is >> sign >> hex >> exp_text) || (sign != "+" && sign != "-"))
        throw ParseError("malformed exact value: '" + std::string(text) + "'");
    std::string rest;
    if (is >> rest)
        throw ParseError("trailing data in exact value: '" + std::string(text) + "'");
    for (char c : hex)
        if (!std::isxdigit(static_cast<unsigned char>(c)))
            throw ParseError("bad hex significand: '" + hex + "'");

    long exponent = 0;
    try {
        std::size_t used = 0;
        exponent = std::stol(exp_text, &used);
        if (used != exp_text.size())
            throw ParseError("bad binary exponent: '" + exp_text + "'");
    }
    catch (const std::logic_error&) {
        throw ParseError("bad binary exponent: '" + exp_text + "'");
    }

    mpz_holder m;
    mpz_set_str(m.z, hex.c_str(), 16);
    if (static_cast<long>(mpz_sizeinbase(m.z, 2)) > ctx.precision_bits() && mpz_sgn(m.z) != 0)
        throw RangeError("significand has more bits than the working precision");
    if (sign == "-")
        mpz_neg(m.z, m.z);

    Real out(ctx);
    if (mpz_sgn(m.z) == 0) {
        mpfr_set_zero(out.get(), sign == "-" ? -1 : 1);
        return out;
    }
    mpfr_clear_flags();
    mpfr_set_z_2exp(out.get(), m.z, static_cast<mpfr_exp_t>(exponent), MPFR_RNDN);
    throw_on_range("exact value");
    return out;
}

} // namespace tsm::mp
