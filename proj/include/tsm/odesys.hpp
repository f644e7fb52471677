#pragma once

// Autonomous ODE systems with quadratic polynomial right-hand sides:
//
//   dx_m/dt = c_m + sum_j L_mj x_j + sum_{(j,k,w) in B_m} w x_j x_k
//
// The Lorenz system is the canonical instance.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <tsm/apfloat.hpp>

namespace tsm {

struct BilinearTerm
{
    std::size_t j;
    std::size_t k; // j <= k
    mp::Real coeff;
};

class QuadraticODESystem
{
public:
    // Validates shapes and canonical bilinear ordering. Throws ConfigError.
    QuadraticODESystem(std::vector<mp::Real> constant, std::vector<std::vector<mp::Real>> linear,
                       std::vector<std::vector<BilinearTerm>> bilinear, std::vector<std::string> names = {});

    std::size_t dim() const noexcept { return constant_.size(); }
    long precision_bits() const noexcept { return precision_bits_; }

    const mp::Real& constant(std::size_t m) const { return constant_[m]; }
    const mp::Real& linear(std::size_t m, std::size_t j) const { return linear_[m][j]; }
    // Column indices of the nonzero entries of row m, ascending.
    std::span<const std::size_t> linear_support(std::size_t m) const { return support_[m]; }
    std::span<const BilinearTerm> bilinear(std::size_t m) const { return bilinear_[m]; }
    const std::string& name(std::size_t m) const { return names_[m]; }

private:
    std::vector<mp::Real> constant_;
    std::vector<std::vector<mp::Real>> linear_;
    std::vector<std::vector<std::size_t>> support_;
    std::vector<std::vector<BilinearTerm>> bilinear_;
    std::vector<std::string> names_;
    long precision_bits_ = 0;
};

struct LorenzParams
{
    mp::Real sigma;
    mp::Real R;
    mp::Real b;

    // sigma = 10, R = 28, b = 8/3 (rounded once at ctx precision).
    static LorenzParams standard(const mp::Context& ctx);
};

QuadraticODESystem lorenz_system(const LorenzParams& params, const mp::Context& ctx);

// c + L state + bilinear terms, evaluated in a fixed order: constant, linear
// terms in ascending column, bilinear terms in stored order.
std::vector<mp::Real> rhs_eval(const QuadraticODESystem& system, std::span<const mp::Real> state,
                               const mp::Context& ctx);

// Precision-free description of a system: coefficients kept as decimal text
// so the same system can be instantiated at any working precision.
//
// Text format, one entry per line, '#' starts a comment:
//   dim <n>                  (optional; otherwise inferred from the indices)
//   const <m> <value>
//   lin <m> <j> <value>
//   bilin <m> <j> <k> <value>
// Indices are zero-based. Bilinear entries with j > k are swapped; repeated
// (m, j, k) or (m, j) entries are rejected.
class SystemDescription
{
public:
    static SystemDescription parse(std::string_view text);
    static SystemDescription parse_file(const std::string& path);
    // Built-in: "lorenz" with the standard parameters. Throws ConfigError.
    static SystemDescription builtin(std::string_view name);

    std::size_t dim() const noexcept { return dim_; }
    QuadraticODESystem instantiate(const mp::Context& ctx) const;

    // Canonical text form; equal descriptions have equal canonical text.
    std::string canonical_text() const;

private:
    struct Entry
    {
        std::size_t m, j, k;
        std::string value;
    };

    std::size_t dim_ = 0;
    bool lorenz_ = false;
    std::vector<Entry> constants_; // j, k unused
    std::vector<Entry> linears_;   // k unused
    std::vector<Entry> bilinears_;
};

} // namespace tsm
