#include <tsm/cns.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

#include <tsm/decimal.hpp>

namespace tsm {

int agreement_digits(std::span<const mp::Real> a, std::span<const mp::Real> b)
{
    if (a.size() != b.size())
        throw DomainError("agreement_digits: states of different dimension");

    int worst = exact_agreement;
    for (std::size_t m = 0; m < a.size(); ++m) {
        if (mpfr_equal_p(a[m].get(), b[m].get()))
            continue;

        const mp::Context work(std::max(a[m].precision_bits(), b[m].precision_bits()) + 64);
        mp::Real diff(work);
        mpfr_sub(diff.get(), a[m].get(), b[m].get(), MPFR_RNDN);
        mpfr_abs(diff.get(), diff.get(), MPFR_RNDN);

        mp::Real scale(1, work);
        if (mpfr_cmpabs(a[m].get(), scale.get()) > 0)
            mpfr_abs(scale.get(), a[m].get(), MPFR_RNDN);
        if (mpfr_cmpabs(b[m].get(), scale.get()) > 0)
            mpfr_abs(scale.get(), b[m].get(), MPFR_RNDN);

        mpfr_div(diff.get(), diff.get(), scale.get(), MPFR_RNDN);
        mpfr_log10(diff.get(), diff.get(), MPFR_RNDN);
        mpfr_neg(diff.get(), diff.get(), MPFR_RNDN);
        mpfr_floor(diff.get(), diff.get());
        const long digits = std::max(0L, mpfr_get_si(diff.get(), MPFR_RNDN));
        worst = std::min(worst, static_cast<int>(std::min<long>(digits, exact_agreement - 1)));
    }
    return worst;
}

RunSpec default_verify(const RunSpec& base)
{
    return {static_cast<long>(std::ceil(static_cast<double>(base.precision_bits) * 1.33)),
            base.order + (base.order + 2) / 3};
}

void CnsConfig::validate() const
{
    std::vector<std::string> problems;
    if (base.precision_bits < mp::min_precision_bits)
        problems.push_back("base precision must be at least " + std::to_string(mp::min_precision_bits) + " bits");
    if (base.order < 1)
        problems.push_back("base order must be at least 1");
    const bool equal = verify == base;
    if (!(equal && allow_equal_runs)
        && !(verify.precision_bits > base.precision_bits && verify.order > base.order))
        problems.push_back("verify run must exceed the base run in both precision and order");
    if (agree_digits < 1)
        problems.push_back("agreement digits must be at least 1");
    if (!decimal::is_literal(tau) || decimal::to_double(tau) <= 0.0)
        problems.push_back("tau must be a positive decimal");
    else if (!decimal::is_literal(t_end) || !decimal::exact_quotient(t_end, tau))
        problems.push_back("t_end must be a nonnegative exact multiple of tau");

    if (!problems.empty()) {
        std::string msg = "invalid CNS configuration:";
        for (const auto& p : problems)
            msg += "\n  " + p;
        throw ConfigError(msg);
    }
}

std::size_t CnsConfig::n_steps() const
{
    auto n = decimal::exact_quotient(t_end, tau);
    if (!n)
        throw ConfigError("t_end must be a nonnegative exact multiple of tau");
    return *n;
}

double TcReport::t_c_value() const { return decimal::to_double(t_c); }

std::string TcReport::to_text() const
{
    std::ostringstream os;
    os << "Clean numerical simulation report\n"
       << "  base run:    " << base.precision_bits << " bits (" << mp::decimal_digits(base.precision_bits)
       << " digits), order " << base.order << '\n'
       << "  verify run:  " << verify.precision_bits << " bits (" << mp::decimal_digits(verify.precision_bits)
       << " digits), order " << verify.order << '\n'
       << "  required agreement: " << required_digits << " significant digits\n"
       << "  compared samples:   " << series.size() << '\n'
       << "  critical predictable time t_c = " << t_c << " (of t_end = " << t_end << ")\n";
    for (const auto& w : warnings)
        os << "  warning: " << w << '\n';
    return os.str();
}

std::string TcReport::to_key_value() const
{
    std::ostringstream os;
    os << "t_c=" << t_c << '\n'
       << "tc_step=" << tc_step << '\n'
       << "t_end=" << t_end << '\n'
       << "agree_digits=" << required_digits << '\n'
       << "base_prec_bits=" << base.precision_bits << '\n'
       << "base_order=" << base.order << '\n'
       << "verify_prec_bits=" << verify.precision_bits << '\n'
       << "verify_order=" << verify.order << '\n'
       << "samples=" << series.size() << '\n';
    for (std::size_t w = 0; w < warnings.size(); ++w)
        os << "warning" << w << '=' << warnings[w] << '\n';
    return os.str();
}

std::string TcReport::series_tsv() const
{
    std::ostringstream os;
    os << "# step t digits\n";
    for (const auto& p : series) {
        os << p.step << '\t' << p.time << '\t';
        if (p.digits == exact_agreement)
            os << "exact";
        else
            os << p.digits;
        os << '\n';
    }
    return os.str();
}

TcReport estimate_tc(const Trajectory& a, const Trajectory& b, int required_digits, const std::string& tau)
{
    if (a.samples.size() != b.samples.size() || a.samples.empty())
        throw ConfigError("estimate_tc: trajectories have different sampling grids");
    for (std::size_t s = 0; s < a.samples.size(); ++s)
        if (a.samples[s].step != b.samples[s].step)
            throw ConfigError("estimate_tc: trajectories have different sampling grids");

    TcReport report;
    report.required_digits = required_digits;
    report.t_end = decimal::times(tau, a.samples.back().step);

    long carried = LONG_MAX;
    for (const auto* traj : {&a, &b})
        for (const auto& v : traj->samples.front().state)
            carried = std::min(carried, v.precision_bits());
    const bool certifiable = required_digits <= mp::decimal_digits(carried);
    if (!certifiable)
        report.warnings.push_back("required agreement of " + std::to_string(required_digits)
                                  + " digits exceeds the " + std::to_string(mp::decimal_digits(carried))
                                  + " digits carried; nothing can be certified");

    std::size_t tc_step = a.samples.front().step;
    bool failed = !certifiable;
    for (std::size_t s = 0; s < a.samples.size(); ++s) {
        const auto step = a.samples[s].step;
        const int digits = agreement_digits(a.samples[s].state, b.samples[s].state);
        report.series.push_back({step, decimal::times(tau, step), digits});
        if (!failed && digits >= required_digits)
            tc_step = step;
        else
            failed = true;
    }
    report.tc_step = tc_step;
    report.t_c = decimal::times(tau, tc_step);
    return report;
}

namespace {

Trajectory run_one(const SystemFactory& factory, std::span<const std::string> state0, const RunSpec& spec,
                   const std::string& tau, std::size_t n_steps, std::size_t stride, const ReducePlan& plan)
{
    const mp::Context ctx(spec.precision_bits);
    const auto system = factory(ctx);
    if (state0.size() != system.dim())
        throw ConfigError("initial state has " + std::to_string(state0.size()) + " values, system needs "
                          + std::to_string(system.dim()));
    std::vector<mp::Real> state;
    for (const auto& text : state0)
        state.push_back(mp::from_decimal(text, ctx));

    Reducer reducer(plan, ctx);
    const StepConfig cfg{mp::from_decimal(tau, ctx), spec.order};
    IntegrateOptions options;
    options.record_every = stride;
    return integrate(system, state, cfg, n_steps, ctx, reducer, options);
}

} // namespace

CnsResult cns_run(const SystemFactory& system, std::span<const std::string> state0, const CnsConfig& cfg,
                  const ReducePlan& plan)
{
    cfg.validate();
    const auto n = cfg.n_steps();
    CnsResult result;
    result.base = run_one(system, state0, cfg.base, cfg.tau, n, cfg.stride, plan);
    const auto verify = run_one(system, state0, cfg.verify, cfg.tau, n, cfg.stride, plan);
    result.report = estimate_tc(result.base, verify, cfg.agree_digits, cfg.tau);
    result.report.base = cfg.base;
    result.report.verify = cfg.verify;
    return result;
}

std::vector<DiagramRow> tc_diagram(const SystemFactory& system, std::span<const std::string> state0,
                                   std::span<const RunSpec> sweep, SweepAxis axis, const VerifyMargin& margin,
                                   const std::string& tau, const std::string& t_end, int required_digits,
                                   std::size_t stride, const ReducePlan& plan)
{
    if (sweep.empty())
        throw ConfigError("T_c diagram needs at least one sweep point");

    std::vector<DiagramRow> rows;
    for (const auto& point : sweep) {
        CnsConfig cfg;
        cfg.base = point;
        cfg.verify = {point.precision_bits + margin.extra_bits, point.order + margin.extra_order};
        cfg.tau = tau;
        cfg.t_end = t_end;
        cfg.agree_digits = required_digits;
        cfg.stride = stride;
        const auto run = cns_run(system, state0, cfg, plan);
        const long param = axis == SweepAxis::precision ? mp::decimal_digits(point.precision_bits)
                                                        : static_cast<long>(point.order);
        rows.push_back({point, param, run.report.tc_step, run.report.t_c});
    }
    return rows;
}

std::string diagram_tsv(std::span<const DiagramRow> rows)
{
    std::ostringstream os;
    os << "# param t_c\n";
    for (const auto& r : rows)
        os << r.param << '\t' << r.t_c << '\n';
    return os.str();
}

} // namespace tsm
