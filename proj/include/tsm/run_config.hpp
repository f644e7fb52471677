#pragma once

// Run configuration shared by the CLI commands.
//
// Sources are `key=value` lines (file, '#' comments) and command-line flags;
// flags override the file. Decimal values are kept verbatim and only parsed
// to multiple precision at run start, under the run's precision.
//
// Keys:
//   system            built-in name ("lorenz") or path to a system description
//   init              comma-separated initial values (default for lorenz:
//                     -15.8,-17.48,35.64)
//   tau               step size, decimal
//   order             Taylor order N
//   prec_bits         working precision in bits       } exactly one
//   prec_digits       working precision in digits K   }
//   steps             number of steps                 } at most one; the
//   t_end             final time, multiple of tau     } commands that
//                                                       integrate need one
//   workers           reduction workers (default 1)
//   chunks            logical reduction chunks (default 64)
//   chunk_mode        fixed | per_worker (default fixed)
//   threshold         serial-fallback threshold in indices (default 256)
//   out               output path
//   checkpoint_every  steps between checkpoints (default 0 = final only)
//   digits            significant digits in trajectory output
//   stride            steps between trajectory rows / compared samples (100)
//   verify_order      CNS verification order
//   verify_prec_bits  CNS verification precision
//   agree_digits      CNS required agreement digits (default 10)
//   allow_equal       CNS: accept verify == base (true|false)
//   bench             comma-separated worker counts for the benchmark
//   probe_steps       benchmark probe length (default 5)
//   resume            checkpoint to resume from

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <tsm/odesys.hpp>
#include <tsm/reduce.hpp>

namespace tsm {

using KeyValues = std::vector<std::pair<std::string, std::string>>;

// Throws ConfigError on malformed lines (no '=').
KeyValues parse_key_values(std::string_view text);
KeyValues read_config_file(const std::string& path);

inline constexpr std::string_view lorenz_default_init = "-15.8,-17.48,35.64";

struct RunConfig
{
    std::string system;
    std::vector<std::string> init;
    std::string tau;
    std::size_t order = 0;
    long precision_bits = 0;
    std::optional<long> precision_digits; // when precision was given in digits
    std::optional<std::size_t> n_steps;
    std::optional<std::string> t_end;

    std::size_t workers = 1;
    std::size_t num_chunks = 64;
    ChunkMode chunk_mode = ChunkMode::fixed;
    std::size_t threshold = 256;

    std::string out;
    std::size_t checkpoint_every = 0;
    std::optional<int> digits;
    std::size_t stride = 100;

    std::optional<long> verify_prec_bits;
    std::optional<std::size_t> verify_order;
    int agree_digits = 10;
    bool allow_equal = false;

    std::vector<std::size_t> bench_workers;
    std::size_t probe_steps = 5;
    std::string resume;

    // Resolved step count; throws ConfigError when neither steps nor t_end
    // was given.
    std::size_t steps() const;
    // Final time as exact decimal.
    std::string end_time() const;
    // Significant digits for trajectory output: `digits`, else
    // min(decimal_digits(precision_bits), 50).
    int output_digits() const;

    ReducePlan reduce_plan() const;
    SystemDescription system_description() const;

    // Canonical "key=value" lines of every setting that influences the
    // numbers written (scheduling knobs and paths are excluded, so runs that
    // differ only in worker count produce byte-identical output).
    std::vector<std::string> echo() const;
    std::uint64_t hash() const;
    // Hash of the settings that determine the trajectory itself (no step
    // count, no output formatting): guards checkpoint resumption.
    std::uint64_t dynamics_hash() const;
};

// Merges file entries with flag overrides, validates everything and reports
// all problems at once in one ConfigError.
RunConfig parse_config(const KeyValues& file, const KeyValues& flags);

// FNV-1a, 64 bit.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

} // namespace tsm
