#pragma once

// Thread-scaling probe: a short fixed number of Taylor steps, timed once on
// the serial path and once per requested worker count.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <tsm/jet.hpp>

namespace tsm {

struct BenchmarkRecord
{
    std::string mode; // "serial" or "parallel"
    std::size_t workers = 1;
    double seconds = 0.0;
    double speedup = 1.0;          // serial_seconds / seconds
    double efficiency = 100.0;     // 100 * speedup / workers
    bool matches_serial = true;    // final state bit-identical to the serial probe
};

BenchmarkRecord make_record(std::string mode, std::size_t workers, double seconds, double serial_seconds);

// `plan` supplies chunking and threshold; the serial row disables forking.
// Only the step loop is timed (monotonic clock); setup is excluded.
std::vector<BenchmarkRecord> run_benchmark(const QuadraticODESystem& system, std::span<const mp::Real> state,
                                           const StepConfig& cfg, const mp::Context& ctx, const ReducePlan& plan,
                                           std::span<const std::size_t> worker_counts, std::size_t probe_steps);

// "# workers mode time_s speedup efficiency_pct identical" table plus a
// trailing note that absolute times are hardware-specific.
std::string benchmark_table(std::span<const BenchmarkRecord> records);

} // namespace tsm
