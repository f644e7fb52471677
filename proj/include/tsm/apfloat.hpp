#pragma once

// Arbitrary-precision binary floating point, round-to-nearest-even.
//
// Values are backed by MPFR. Every value carries the precision of the context
// it was created under; every arithmetic result is the exact result rounded
// once to that precision. Overflow and underflow raise tsm::RangeError instead
// of producing infinities or flushing to zero.

#include <mpfr.h>

#include <string>
#include <string_view>

#include <tsm/error.hpp>

namespace tsm::mp {

inline constexpr long min_precision_bits = 64;

// Working precision shared by all values of one computation.
class Context
{
public:
    explicit Context(long precision_bits);

    // Smallest context carrying at least `digits` reliable decimal digits.
    static Context from_digits(long digits);

    long precision_bits() const noexcept { return bits_; }

    friend bool operator==(const Context&, const Context&) = default;

private:
    long bits_;
};

// floor(bits * log10(2)): decimal digits reliably carried by `bits` bits.
long decimal_digits(long precision_bits);

// ceil(digits / log10(2)): bits needed to carry `digits` decimal digits.
long bits_for_digits(long digits);

class Real
{
public:
    // Exact +0 at the context precision.
    explicit Real(const Context& ctx);
    // Exact integer (|value| < 2^63 always fits in >= 64 bits).
    Real(long value, const Context& ctx);

    Real(const Real& other);
    Real(Real&& other) noexcept;
    Real& operator=(const Real& other);
    Real& operator=(Real&& other) noexcept;
    ~Real();

    long precision_bits() const noexcept { return static_cast<long>(mpfr_get_prec(value_)); }
    bool is_zero() const noexcept { return mpfr_zero_p(value_) != 0; }
    int sign() const noexcept { return mpfr_sgn(value_); }
    double to_double() const noexcept { return mpfr_get_d(value_, MPFR_RNDN); }

    // Backend access for kernels that need in-place MPFR calls.
    mpfr_srcptr get() const noexcept { return value_; }
    mpfr_ptr get() noexcept { return value_; }

    void swap(Real& other) noexcept { mpfr_swap(value_, other.value_); }

private:
    mpfr_t value_;
};

// Same precision, same sign, same significand bits, same exponent.
bool identical(const Real& a, const Real& b) noexcept;

// Numeric comparison across precisions: <0, 0, >0.
int compare(const Real& a, const Real& b) noexcept;

Real from_decimal(std::string_view text, const Context& ctx);

// Correctly rounded, `digits` significant digits. Plain positional notation
// for moderate exponents, otherwise d.ddd...e<exp>.
std::string to_decimal(const Real& v, int digits);

enum class Op { add, sub, mul, div };

Real arith(Op op, const Real& a, const Real& b, const Context& ctx);

inline Real add(const Real& a, const Real& b, const Context& ctx) { return arith(Op::add, a, b, ctx); }
inline Real sub(const Real& a, const Real& b, const Context& ctx) { return arith(Op::sub, a, b, ctx); }
inline Real mul(const Real& a, const Real& b, const Context& ctx) { return arith(Op::mul, a, b, ctx); }
inline Real div(const Real& a, const Real& b, const Context& ctx) { return arith(Op::div, a, b, ctx); }

// Exact negation and magnitude, at the operand's own precision.
Real neg(const Real& a);
Real abs(const Real& a);

// Exact change of precision is impossible in general; this rounds once.
Real round_to(const Real& a, const Context& ctx);

// In-place kernels for hot loops. Results round to the destination's
// precision. Range checking is left to the caller via RangeCheck.
inline void mul_into(Real& out, const Real& a, const Real& b) noexcept
{
    mpfr_mul(out.get(), a.get(), b.get(), MPFR_RNDN);
}
inline void add_into(Real& acc, const Real& x) noexcept
{
    mpfr_add(acc.get(), acc.get(), x.get(), MPFR_RNDN);
}
inline void set_zero(Real& v) noexcept { mpfr_set_zero(v.get(), 1); }

// Scope for a batch of in-place kernel calls on the current thread: clears
// the sticky exponent flags on construction, check() throws RangeError if
// any overflow or underflow happened since.
class RangeCheck
{
public:
    RangeCheck() noexcept;
    void check(const char* what) const;
    bool failed() const noexcept;
};

// Exact serialization: "<sign> <hex significand> <binary exponent>", meaning
// sign * significand * 2^exponent. Zeros are "+ 0 0" and "- 0 0".
std::string to_hex(const Real& v);
// Throws ParseError on malformed text and RangeError when the significand
// does not fit the context precision.
Real from_hex(std::string_view text, const Context& ctx);

} // namespace tsm::mp
