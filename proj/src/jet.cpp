#include <tsm/jet.hpp>

namespace tsm {

void StepConfig::validate() const
{
    if (tau.is_zero())
        throw ConfigError("step size must be nonzero");
    if (order < 1)
        throw ConfigError("Taylor order must be at least 1");
}

Jet compute_jet(const QuadraticODESystem& system, std::span<const mp::Real> state, std::size_t order,
                const mp::Context& ctx, Reducer& reducer)
{
    Jet jet;
    compute_jet(system, state, order, ctx, reducer, jet);
    return jet;
}

void compute_jet(const QuadraticODESystem& system, std::span<const mp::Real> state, std::size_t order,
                 const mp::Context& ctx, Reducer& reducer, Jet& jet)
{
    const auto dim = system.dim();
    if (state.size() != dim)
        throw DomainError("state length does not match system dimension");
    if (order < 1)
        throw ConfigError("Taylor order must be at least 1");

    if (jet.coeffs.size() != dim || jet.order != order || jet.coeffs[0][0].precision_bits() != ctx.precision_bits())
        jet.coeffs.assign(dim, std::vector<mp::Real>(order + 1, mp::Real(ctx)));
    jet.order = order;
    for (std::size_t m = 0; m < dim; ++m)
        jet.coeffs[m][0] = state[m];

    // Sums needed at every order, in equation order then stored term order.
    struct TermRef
    {
        std::size_t m;
        const BilinearTerm* term;
    };
    std::vector<TermRef> terms;
    for (std::size_t m = 0; m < dim; ++m)
        for (const auto& t : system.bilinear(m))
            terms.push_back({m, &t});

    std::vector<ConvolutionOperands> ops(terms.size());
    std::vector<mp::Real> sums(terms.size(), mp::Real(ctx));
    mp::Real temp(ctx);
    mp::Real acc(ctx);
    const mp::Real one(1, ctx);

    for (std::size_t i = 0; i < order; ++i) {
        // Only the completed prefix 0..i is visible to the reduction.
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const auto& term = *terms[t].term;
            ops[t] = {std::span<const mp::Real>(jet.coeffs[term.j]).first(i + 1),
                      std::span<const mp::Real>(jet.coeffs[term.k]).first(i + 1)};
        }
        reducer.convolve_batch(ops, i, sums);

        const mp::Real inv = mp::div(one, mp::Real(static_cast<long>(i + 1), ctx), ctx);
        mp::RangeCheck range;
        std::size_t t = 0;
        for (std::size_t m = 0; m < dim; ++m) {
            if (i == 0)
                mpfr_set(acc.get(), system.constant(m).get(), MPFR_RNDN);
            else
                mp::set_zero(acc);
            for (auto j : system.linear_support(m)) {
                mp::mul_into(temp, system.linear(m, j), jet.coeffs[j][i]);
                mp::add_into(acc, temp);
            }
            for (const auto& term : system.bilinear(m)) {
                mp::mul_into(temp, term.coeff, sums[t++]);
                mp::add_into(acc, temp);
            }
            mp::mul_into(jet.coeffs[m][i + 1], acc, inv);
        }
        range.check("Taylor coefficient recurrence");
    }
}

mp::Real horner_eval(std::span<const mp::Real> row, const mp::Real& tau, const mp::Context& ctx)
{
    if (row.empty())
        throw DomainError("Horner evaluation of an empty series");
    if (tau.is_zero())
        return mp::round_to(row[0], ctx);

    mp::RangeCheck range;
    mp::Real result = mp::round_to(row.back(), ctx);
    for (std::size_t i = row.size() - 1; i-- > 0;) {
        mpfr_mul(result.get(), result.get(), tau.get(), MPFR_RNDN);
        mp::add_into(result, row[i]);
    }
    range.check("Horner evaluation");
    return result;
}

namespace {

void advance(const QuadraticODESystem& system, std::vector<mp::Real>& state, const StepConfig& cfg,
             const mp::Context& ctx, Reducer& reducer, Jet& jet)
{
    compute_jet(system, state, cfg.order, ctx, reducer, jet);
    for (std::size_t m = 0; m < state.size(); ++m)
        state[m] = horner_eval(jet.coeffs[m], cfg.tau, ctx);
}

} // namespace

std::vector<mp::Real> step(const QuadraticODESystem& system, std::span<const mp::Real> state, const StepConfig& cfg,
                           const mp::Context& ctx, Reducer& reducer)
{
    cfg.validate();
    std::vector<mp::Real> next(state.begin(), state.end());
    Jet jet;
    advance(system, next, cfg, ctx, reducer, jet);
    return next;
}

Trajectory integrate(const QuadraticODESystem& system, std::span<const mp::Real> state0, const StepConfig& cfg,
                     std::size_t n_steps, const mp::Context& ctx, Reducer& reducer, const IntegrateOptions& options)
{
    cfg.validate();
    if (state0.size() != system.dim())
        throw DomainError("state length does not match system dimension");

    std::vector<mp::Real> state;
    state.reserve(state0.size());
    for (const auto& v : state0)
        state.push_back(mp::round_to(v, ctx));

    Trajectory traj;
    auto notify = [&](std::size_t index) {
        if (options.observer) {
            const mp::Real time = mp::mul(mp::Real(static_cast<long>(index), ctx), cfg.tau, ctx);
            options.observer(index, time, std::span<const mp::Real>(state));
        }
    };

    const std::size_t first = options.first_step;
    traj.samples.push_back({first, state});
    notify(first);

    Jet jet;
    for (std::size_t n = 1; n <= n_steps; ++n) {
        advance(system, state, cfg, ctx, reducer, jet);
        const std::size_t index = first + n;
        const bool on_stride = options.record_every != 0 && index % options.record_every == 0;
        if (on_stride || n == n_steps)
            traj.samples.push_back({index, state});
        notify(index);
    }
    return traj;
}

} // namespace tsm
