#pragma once

// Deterministic parallel reduction of Cauchy-product sums
//
//   sum_{k=0}^{i} a[i-k] * b[k]
//
// The index range [0, i] is split into a fixed number of logical chunks that
// does not depend on the number of workers. Each chunk accumulates its partial
// sum in ascending k (one rounding per multiply and per add); a single merger
// then adds the partials in ascending chunk order. The result is therefore a
// function of (a, b, i, num_chunks) only: any worker count and any scheduling
// give the same bits. With num_chunks = 1 it is exactly the serial loop
//
//   s = 0; for k in 0..i: temp = a[i-k] * b[k]; s += temp;
//
// ChunkMode::per_worker reproduces the classical scheme where the chunk count
// equals the worker count (results then depend on the worker count).

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include <tsm/apfloat.hpp>

namespace tsm {

// Half-open index range [begin, end).
struct IndexRange
{
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    bool empty() const noexcept { return begin == end; }
    friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

// Splits [0, i] into num_chunks ascending ranges whose sizes differ by at most
// one; the first (i+1) mod num_chunks ranges are the larger ones. Trailing
// ranges are empty when num_chunks > i+1.
std::vector<IndexRange> partition(std::size_t i, std::size_t num_chunks);

enum class ChunkMode {
    fixed,     // num_chunks logical chunks, claimed dynamically by workers
    per_worker // one static chunk per worker
};

struct ReducePlan
{
    std::size_t num_chunks = 64;
    std::size_t workers = 1;
    // Orders with fewer than this many indices run on the calling thread;
    // larger ones fork a team of `workers` threads (even a team of one).
    std::size_t serial_threshold = 256;
    ChunkMode mode = ChunkMode::fixed;

    std::size_t effective_chunks() const noexcept { return mode == ChunkMode::per_worker ? workers : num_chunks; }
    // Throws ConfigError.
    void validate() const;
};

struct ConvolutionOperands
{
    std::span<const mp::Real> a;
    std::span<const mp::Real> b;
};

// Debug-mode record of the last reductions (see Reducer::set_instrumented).
struct ReduceTrace
{
    // Times each k in [0, i] was consumed, per sum, during the last call.
    std::vector<std::size_t> visits;
    // Largest coefficient index read during the last call.
    std::size_t max_index_read = 0;
    // False if any accumulator was written by more than one thread in a call.
    bool single_writer = true;
    // (order i, largest index read) for every instrumented call, in call order.
    std::vector<std::pair<std::size_t, std::size_t>> calls;
    // Number of calls that forked workers.
    std::size_t parallel_calls = 0;
};

class Reducer
{
public:
    Reducer(ReducePlan plan, const mp::Context& ctx);
    ~Reducer();
    Reducer(const Reducer&) = delete;
    Reducer& operator=(const Reducer&) = delete;

    const ReducePlan& plan() const noexcept { return plan_; }
    const mp::Context& context() const noexcept { return ctx_; }

    mp::Real convolve(std::span<const mp::Real> a, std::span<const mp::Real> b, std::size_t i);

    // Both sums in one pass over k per chunk; each equals the standalone
    // convolve of its operands bit for bit.
    std::pair<mp::Real, mp::Real> convolve_pair(std::span<const mp::Real> a, std::span<const mp::Real> b,
                                                std::span<const mp::Real> c, std::span<const mp::Real> d,
                                                std::size_t i);

    // Any number of sums fused into one fork-join episode. out.size() must
    // equal ops.size(); out values are replaced by context-precision results.
    void convolve_batch(std::span<const ConvolutionOperands> ops, std::size_t i, std::span<mp::Real> out);

    // Instrumentation counts visits and accumulator writers. Slow; tests only.
    void set_instrumented(bool on);
    const ReduceTrace& trace() const noexcept { return trace_; }

private:
    struct Instrumentation;

    void run_chunk(std::span<const ConvolutionOperands> ops, std::size_t i, IndexRange range, std::size_t chunk,
                   mp::Real& temp, int thread);

    ReducePlan plan_;
    mp::Context ctx_;
    std::vector<mp::Real> partials_; // chunk-major, partials_[chunk * nsums + s]
    std::vector<mp::Real> scratch_;  // one temporary product per worker
    std::size_t nsums_ = 0;
    ReduceTrace trace_;
    std::unique_ptr<Instrumentation> instr_;
};

} // namespace tsm
