#pragma once

// Trajectory output and checkpoints.
//
// Checkpoint layout (text, one item per line, LF endings):
//
//   tsm-checkpoint 1
//   step <absolute step index>
//   time <exact decimal of step * tau>
//   prec_bits <working precision>
//   config_hash <16 hex digits>
//   dim <n>
//   var <m> <sign> <hex significand> <binary exponent>     (n lines, m = 0..n-1)
//   end
//
// A variable's value is sign * significand * 2^exponent, exactly.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <tsm/apfloat.hpp>

namespace tsm {

struct Checkpoint
{
    std::size_t step = 0;
    std::string time;
    long precision_bits = 0;
    std::uint64_t config_hash = 0;
    std::vector<mp::Real> state;
};

void write_checkpoint(std::ostream& os, const Checkpoint& ckpt);
// Throws ParseError on malformed input.
Checkpoint read_checkpoint(std::istream& is);

// Write to `path` via a temporary file and rename. Throws Error on I/O failure.
void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

// TSV trajectory writer: comment header block, "# t <names>" line, then one
// row per call to row().
class TrajectoryWriter
{
public:
    TrajectoryWriter(std::ostream& os, std::span<const std::string> header_lines,
                     std::span<const std::string> names, int digits);

    void row(const std::string& time, std::span<const mp::Real> state);

private:
    std::ostream& os_;
    int digits_;
};

} // namespace tsm
