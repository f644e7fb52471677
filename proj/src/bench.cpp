#include <tsm/bench.hpp>

#include <chrono>
#include <cstdio>
#include <limits>
#include <sstream>

namespace tsm {

BenchmarkRecord make_record(std::string mode, std::size_t workers, double seconds, double serial_seconds)
{
    BenchmarkRecord r;
    r.mode = std::move(mode);
    r.workers = workers;
    r.seconds = seconds;
    r.speedup = seconds > 0.0 ? serial_seconds / seconds : 0.0;
    r.efficiency = 100.0 * r.speedup / static_cast<double>(workers);
    return r;
}

namespace {

struct Probe
{
    double seconds;
    std::vector<mp::Real> final_state;
};

Probe probe(const QuadraticODESystem& system, std::span<const mp::Real> state, const StepConfig& cfg,
            const mp::Context& ctx, const ReducePlan& plan, std::size_t steps)
{
    Reducer reducer(plan, ctx);
    IntegrateOptions options;
    options.record_every = 0;

    const auto start = std::chrono::steady_clock::now();
    auto traj = integrate(system, state, cfg, steps, ctx, reducer, options);
    const auto stop = std::chrono::steady_clock::now();
    return {std::chrono::duration<double>(stop - start).count(), std::move(traj.samples.back().state)};
}

} // namespace

std::vector<BenchmarkRecord> run_benchmark(const QuadraticODESystem& system, std::span<const mp::Real> state,
                                           const StepConfig& cfg, const mp::Context& ctx, const ReducePlan& plan,
                                           std::span<const std::size_t> worker_counts, std::size_t probe_steps)
{
    if (probe_steps < 1)
        throw ConfigError("probe needs at least one step");
    cfg.validate();

    ReducePlan serial = plan;
    serial.workers = 1;
    serial.serial_threshold = std::numeric_limits<std::size_t>::max();
    // untimed warm-up so first-touch allocation is not charged to the serial probe
    (void)probe(system, state, cfg, ctx, serial, 1);
    const auto base = probe(system, state, cfg, ctx, serial, probe_steps);

    std::vector<BenchmarkRecord> records{make_record("serial", 1, base.seconds, base.seconds)};
    for (auto w : worker_counts) {
        ReducePlan p = plan;
        p.workers = w;
        const auto run = probe(system, state, cfg, ctx, p, probe_steps);
        auto rec = make_record("parallel", w, run.seconds, base.seconds);
        for (std::size_t m = 0; m < run.final_state.size(); ++m)
            rec.matches_serial = rec.matches_serial && mp::identical(run.final_state[m], base.final_state[m]);
        records.push_back(std::move(rec));
    }
    return records;
}

std::string benchmark_table(std::span<const BenchmarkRecord> records)
{
    std::ostringstream os;
    os << "# workers\tmode\ttime_s\tspeedup\tefficiency_pct\tidentical\n";
    char buf[160];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%zu\t%s\t%.3f\t%.3f\t%.1f\t%s\n", r.workers, r.mode.c_str(), r.seconds,
                      r.speedup, r.efficiency, r.matches_serial ? "yes" : "NO");
        os << buf;
    }
    os << "# note: absolute times are hardware-specific; compare the speedup and efficiency columns.\n"
       << "# reference shape (N=2000, 8000 bits, 5 steps, 28-core node): 4 workers 3.63x / 90.9%,"
          " 28 workers 21.0x / 75.1% (8.28 s vs 174.05 s serial)\n";
    return os.str();
}

} // namespace tsm
