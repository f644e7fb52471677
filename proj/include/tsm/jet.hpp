#pragma once

// Taylor series method for quadratic systems.
//
// The normalized derivatives (Taylor coefficients) of every variable at the
// current point come from the recurrence
//
//   x_m[i+1] = 1/(i+1) * ( [i == 0] c_m + sum_j L_mj x_j[i]
//                          + sum_{(j,k,w)} w * sum_{q=0}^{i} x_j[i-q] x_k[q] )
//
// for i = 0..N-1, starting from x_m[0] = state_m. A step of size tau is the
// truncated series evaluated by Horner's rule.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <tsm/apfloat.hpp>
#include <tsm/odesys.hpp>
#include <tsm/reduce.hpp>

namespace tsm {

struct Jet
{
    std::size_t order = 0;
    // coeffs[m][i]: i-th Taylor coefficient of variable m, i = 0..order.
    std::vector<std::vector<mp::Real>> coeffs;

    std::size_t dim() const noexcept { return coeffs.size(); }
};

struct StepConfig
{
    mp::Real tau;
    std::size_t order = 1;

    // Throws ConfigError: tau must be nonzero, order at least 1.
    void validate() const;
};

Jet compute_jet(const QuadraticODESystem& system, std::span<const mp::Real> state, std::size_t order,
                const mp::Context& ctx, Reducer& reducer);

// Same, reusing the storage of `jet` when its shape already fits.
void compute_jet(const QuadraticODESystem& system, std::span<const mp::Real> state, std::size_t order,
                 const mp::Context& ctx, Reducer& reducer, Jet& jet);

// a[0] + tau (a[1] + tau (a[2] + ...)), innermost term = highest index.
mp::Real horner_eval(std::span<const mp::Real> row, const mp::Real& tau, const mp::Context& ctx);

std::vector<mp::Real> step(const QuadraticODESystem& system, std::span<const mp::Real> state, const StepConfig& cfg,
                           const mp::Context& ctx, Reducer& reducer);

struct Sample
{
    std::size_t step = 0;
    std::vector<mp::Real> state;
};

struct Trajectory
{
    std::vector<Sample> samples;

    const Sample& back() const { return samples.back(); }
};

// Called after every step (and once for the initial state) with the absolute
// step index, the time step * tau, and a read-only view of the state.
using Observer = std::function<void(std::size_t step, const mp::Real& time, std::span<const mp::Real> state)>;

struct IntegrateOptions
{
    // Record the state when the absolute step index is a multiple of this;
    // the initial and final states are always recorded. 0 records only those.
    std::size_t record_every = 100;
    // Absolute index of state0, nonzero when resuming.
    std::size_t first_step = 0;
    Observer observer;
};

Trajectory integrate(const QuadraticODESystem& system, std::span<const mp::Real> state0, const StepConfig& cfg,
                     std::size_t n_steps, const mp::Context& ctx, Reducer& reducer,
                     const IntegrateOptions& options = {});

} // namespace tsm
