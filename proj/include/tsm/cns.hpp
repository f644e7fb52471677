#pragma once

// Clean numerical simulation: integrate twice, at a base (precision, order)
// and at a strictly larger verification pair, and certify the base trajectory
// up to the critical predictable time t_c where the two stop agreeing to the
// required number of significant digits.
//
// Agreement of two states is measured per component as
//
//   floor(-log10(|a - b| / max(|a|, |b|, 1)))
//
// clamped at 0, and the minimum over components is taken. The max(.., 1)
// guard turns the measure into an absolute one near zero.

#include <climits>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <tsm/apfloat.hpp>
#include <tsm/jet.hpp>
#include <tsm/odesys.hpp>
#include <tsm/reduce.hpp>

namespace tsm {

// Returned by agreement_digits when every component difference is zero.
inline constexpr int exact_agreement = INT_MAX;

int agreement_digits(std::span<const mp::Real> a, std::span<const mp::Real> b);

struct RunSpec
{
    long precision_bits = 0;
    std::size_t order = 0;

    friend bool operator==(const RunSpec&, const RunSpec&) = default;
};

// ceil(1.33 * bits) and N + ceil(N / 3).
RunSpec default_verify(const RunSpec& base);

struct CnsConfig
{
    RunSpec base;
    RunSpec verify;
    std::string tau;   // decimal
    std::string t_end; // decimal, an exact multiple of tau
    int agree_digits = 10;
    std::size_t stride = 100; // steps between compared samples
    // Permit verify == base; normally rejected since it certifies nothing.
    bool allow_equal_runs = false;

    // Throws ConfigError.
    void validate() const;
    std::size_t n_steps() const;
};

struct AgreementPoint
{
    std::size_t step = 0;
    std::string time; // exact decimal
    int digits = 0;
};

struct TcReport
{
    std::size_t tc_step = 0;
    std::string t_c;   // exact decimal
    std::string t_end; // exact decimal
    int required_digits = 0;
    std::vector<AgreementPoint> series;
    RunSpec base;
    RunSpec verify;
    std::vector<std::string> warnings;

    double t_c_value() const;

    // Human-readable summary.
    std::string to_text() const;
    // key=value per line.
    std::string to_key_value() const;
    // "# step t digits" then one row per compared sample.
    std::string series_tsv() const;
};

// Both trajectories must be sampled at identical step indices.
TcReport estimate_tc(const Trajectory& a, const Trajectory& b, int required_digits, const std::string& tau);

using SystemFactory = std::function<QuadraticODESystem(const mp::Context&)>;

struct CnsResult
{
    Trajectory base;
    TcReport report;
};

// Initial values are decimal strings parsed separately at each run's precision.
CnsResult cns_run(const SystemFactory& system, std::span<const std::string> state0, const CnsConfig& cfg,
                  const ReducePlan& plan);

enum class SweepAxis { precision, order };

struct DiagramRow
{
    RunSpec point;
    long param = 0; // decimal digits K for a precision sweep, N for an order sweep
    std::size_t tc_step = 0;
    std::string t_c;
};

struct VerifyMargin
{
    long extra_bits = 0;
    std::size_t extra_order = 0;
};

// One cns_run per sweep point, verifying each against point + margin.
std::vector<DiagramRow> tc_diagram(const SystemFactory& system, std::span<const std::string> state0,
                                   std::span<const RunSpec> sweep, SweepAxis axis, const VerifyMargin& margin,
                                   const std::string& tau, const std::string& t_end, int required_digits,
                                   std::size_t stride, const ReducePlan& plan);

// "# param t_c" then one row per sweep point.
std::string diagram_tsv(std::span<const DiagramRow> rows);

} // namespace tsm
