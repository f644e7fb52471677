#include <tsm/reduce.hpp>

#include <omp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <string>

namespace tsm {

std::vector<IndexRange> partition(std::size_t i, std::size_t num_chunks)
{
    if (num_chunks == 0)
        throw DomainError("num_chunks must be positive");
    const std::size_t count = i + 1;
    const std::size_t base = count / num_chunks;
    const std::size_t larger = count % num_chunks;

    std::vector<IndexRange> ranges;
    ranges.reserve(num_chunks);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < num_chunks; ++c) {
        const std::size_t size = base + (c < larger ? 1 : 0);
        ranges.push_back({begin, begin + size});
        begin += size;
    }
    return ranges;
}

void ReducePlan::validate() const
{
    if (num_chunks == 0)
        throw ConfigError("num_chunks must be at least 1");
    if (workers == 0)
        throw ConfigError("workers must be at least 1");
}

struct Reducer::Instrumentation
{
    std::vector<std::atomic<std::size_t>> visits;
    std::vector<std::atomic<int>> writer; // owning thread per accumulator, -1 = none
    std::atomic<std::size_t> max_index{0};
    std::atomic<bool> single_writer{true};

    void reset(std::size_t n_visits, std::size_t n_accumulators)
    {
        visits = std::vector<std::atomic<std::size_t>>(n_visits);
        writer = std::vector<std::atomic<int>>(n_accumulators);
        for (auto& w : writer)
            w.store(-1);
        max_index.store(0);
        single_writer.store(true);
    }

    void note_index(std::size_t idx)
    {
        auto cur = max_index.load();
        while (idx > cur && !max_index.compare_exchange_weak(cur, idx)) {
        }
    }

    void claim(std::size_t accumulator, int thread)
    {
        int expected = -1;
        if (!writer[accumulator].compare_exchange_strong(expected, thread) && expected != thread)
            single_writer.store(false);
    }
};

Reducer::Reducer(ReducePlan plan, const mp::Context& ctx) : plan_(plan), ctx_(ctx)
{
    plan_.validate();
    scratch_.assign(plan_.workers, mp::Real(ctx_));
}

Reducer::~Reducer() = default;

void Reducer::set_instrumented(bool on)
{
    if (on && !instr_)
        instr_ = std::make_unique<Instrumentation>();
    else if (!on)
        instr_.reset();
    trace_ = {};
}

mp::Real Reducer::convolve(std::span<const mp::Real> a, std::span<const mp::Real> b, std::size_t i)
{
    const ConvolutionOperands ops[1] = {{a, b}};
    mp::Real out(ctx_);
    convolve_batch(ops, i, std::span<mp::Real>(&out, 1));
    return out;
}

std::pair<mp::Real, mp::Real> Reducer::convolve_pair(std::span<const mp::Real> a, std::span<const mp::Real> b,
                                                     std::span<const mp::Real> c, std::span<const mp::Real> d,
                                                     std::size_t i)
{
    const ConvolutionOperands ops[2] = {{a, b}, {c, d}};
    std::vector<mp::Real> out(2, mp::Real(ctx_));
    convolve_batch(ops, i, out);
    return {std::move(out[0]), std::move(out[1])};
}

void Reducer::run_chunk(std::span<const ConvolutionOperands> ops, std::size_t i, IndexRange range,
                        std::size_t chunk, mp::Real& temp, int thread)
{
    const auto nsums = ops.size();
    mp::Real* partial = partials_.data() + chunk * nsums;
    for (std::size_t s = 0; s < nsums; ++s)
        mp::set_zero(partial[s]);

    if (instr_) {
        for (std::size_t s = 0; s < nsums; ++s)
            instr_->claim(chunk * nsums + s, thread);
    }

    for (std::size_t k = range.begin; k < range.end; ++k) {
        for (std::size_t s = 0; s < nsums; ++s) {
            mp::mul_into(temp, ops[s].a[i - k], ops[s].b[k]);
            mp::add_into(partial[s], temp);
            if (instr_) {
                instr_->visits[s * (i + 1) + k].fetch_add(1);
                instr_->note_index(std::max(i - k, k));
            }
        }
    }
}

void Reducer::convolve_batch(std::span<const ConvolutionOperands> ops, std::size_t i, std::span<mp::Real> out)
{
    const auto nsums = ops.size();
    if (out.size() != nsums)
        throw DomainError("convolve_batch: one output per operand pair required");
    for (const auto& op : ops)
        if (op.a.size() < i + 1 || op.b.size() < i + 1)
            throw DomainError("convolve: operand shorter than order + 1");
    if (nsums == 0)
        return;

    const std::size_t chunks = plan_.effective_chunks();
    if (nsums_ != nsums || partials_.size() != chunks * nsums) {
        partials_.assign(chunks * nsums, mp::Real(ctx_));
        nsums_ = nsums;
    }
    if (scratch_.size() < plan_.workers)
        scratch_.assign(plan_.workers, mp::Real(ctx_));
    if (instr_)
        instr_->reset(nsums * (i + 1), chunks * nsums);

    const auto ranges = partition(i, chunks);
    const bool parallel = i + 1 >= plan_.serial_threshold;

    if (!parallel) {
        mp::RangeCheck range;
        for (std::size_t c = 0; c < chunks; ++c)
            run_chunk(ops, i, ranges[c], c, scratch_[0], 0);
        range.check("convolution");
    }
    else {
        std::atomic<bool> range_failed{false};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        const int nthreads = static_cast<int>(plan_.workers);
        const bool per_worker = plan_.mode == ChunkMode::per_worker;

#pragma omp parallel num_threads(nthreads)
        {
            const int tid = omp_get_thread_num();
            const int team = omp_get_num_threads();
            mp::RangeCheck range;
            try {
                mp::Real& temp = scratch_[static_cast<std::size_t>(tid)];
                if (per_worker) {
                    // Static ownership: chunk c belongs to thread c mod team.
                    for (std::size_t c = static_cast<std::size_t>(tid); c < chunks;
                         c += static_cast<std::size_t>(team))
                        run_chunk(ops, i, ranges[c], c, temp, tid);
                }
                else {
#pragma omp for schedule(dynamic, 1) nowait
                    for (std::size_t c = 0; c < chunks; ++c)
                        run_chunk(ops, i, ranges[c], c, temp, tid);
                }
            }
            catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
            if (range.failed())
                range_failed.store(true);
        }
        // Implicit barrier at the end of the parallel region.
        if (failure)
            std::rethrow_exception(failure);
        if (range_failed.load())
            throw RangeError("convolution: exponent overflow or underflow");
        ++trace_.parallel_calls;
    }

    mp::RangeCheck range;
    for (std::size_t s = 0; s < nsums; ++s) {
        mp::Real acc(ctx_);
        for (std::size_t c = 0; c < chunks; ++c)
            mp::add_into(acc, partials_[c * nsums + s]);
        out[s] = std::move(acc);
    }
    range.check("convolution merge");

    if (instr_) {
        trace_.visits.resize(nsums * (i + 1));
        for (std::size_t v = 0; v < trace_.visits.size(); ++v)
            trace_.visits[v] = instr_->visits[v].load();
        trace_.max_index_read = instr_->max_index.load();
        trace_.calls.emplace_back(i, trace_.max_index_read);
        trace_.single_writer = trace_.single_writer && instr_->single_writer.load();
    }
}

} // namespace tsm
