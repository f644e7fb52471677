#pragma once

// CLI command bodies. Each returns a process exit code:
//   0 success, 1 configuration error, 2 runtime or arithmetic error.
// Diagnostics go to `err`; tables and reports not bound to a file go to `out`.

#include <iosfwd>
#include <string>
#include <vector>

#include <tsm/cns.hpp>
#include <tsm/run_config.hpp>

namespace tsm {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 1;
inline constexpr int exit_runtime = 2;

// Trajectory TSV to cfg.out (stdout when empty); checkpoints to cfg.out + ".ckpt".
int cmd_integrate(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Base trajectory to cfg.out, key=value report to cfg.out + ".tc", agreement
// series to cfg.out + ".tc.tsv"; the text report always goes to `out`.
int cmd_cns(const RunConfig& cfg, std::ostream& out, std::ostream& err);

// Benchmark table to cfg.out (stdout when empty).
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

struct DiagramRequest
{
    SweepAxis axis = SweepAxis::precision;
    std::vector<long> values; // precisions in bits, or orders
    VerifyMargin margin{64, 10};
};

// T_c diagram TSV to cfg.out (stdout when empty).
int cmd_diagram(const RunConfig& cfg, const DiagramRequest& request, std::ostream& out, std::ostream& err);

// Resolved verification run for `cns`: explicit verify_* keys, else the
// default margins.
RunSpec verify_spec(const RunConfig& cfg);

} // namespace tsm
