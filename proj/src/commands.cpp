#include <tsm/commands.hpp>

#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include <tsm/bench.hpp>
#include <tsm/decimal.hpp>
#include <tsm/jet.hpp>
#include <tsm/persist.hpp>

namespace tsm {

namespace {

int guarded(std::ostream& err, const std::function<int()>& body)
{
    try {
        return body();
    }
    catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return exit_config;
    }
    catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}

// Output stream bound to a path, or the fallback stream when path is empty.
class Sink
{
public:
    Sink(const std::string& path, std::ostream& fallback) : os_(&fallback)
    {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
            if (!*file_)
                throw Error("cannot open output file '" + path + "'");
            os_ = file_.get();
        }
    }

    std::ostream& stream() { return *os_; }

    void finish(const std::string& path)
    {
        os_->flush();
        if (!*os_)
            throw Error("error writing '" + (path.empty() ? std::string("<stdout>") : path) + "'");
    }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* os_;
};

std::vector<std::string> names_of(const QuadraticODESystem& system)
{
    std::vector<std::string> names;
    for (std::size_t m = 0; m < system.dim(); ++m)
        names.push_back(system.name(m));
    return names;
}

std::vector<std::string> header(const std::string& command, const std::vector<std::string>& echo,
                                std::uint64_t hash)
{
    std::vector<std::string> lines{"tsm " + command};
    for (const auto& l : echo)
        lines.push_back("config " + l);
    lines.push_back("config_hash=" + hex64(hash));
    return lines;
}

std::vector<mp::Real> parse_state(const std::vector<std::string>& init, const mp::Context& ctx)
{
    std::vector<mp::Real> state;
    for (const auto& v : init)
        state.push_back(mp::from_decimal(v, ctx));
    return state;
}

} // namespace

int cmd_integrate(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const std::size_t total = cfg.steps();
        const mp::Context ctx(cfg.precision_bits);
        const auto system = cfg.system_description().instantiate(ctx);
        const auto dyn_hash = cfg.dynamics_hash();

        std::size_t first = 0;
        auto state = parse_state(cfg.init, ctx);
        if (!cfg.resume.empty()) {
            auto ckpt = load_checkpoint(cfg.resume);
            if (ckpt.config_hash != dyn_hash)
                throw ConfigError("checkpoint '" + cfg.resume + "' was written under a different configuration");
            if (ckpt.precision_bits != cfg.precision_bits || ckpt.state.size() != system.dim())
                throw ConfigError("checkpoint precision or dimension does not match the configuration");
            if (ckpt.step > total)
                throw ConfigError("checkpoint is at step " + std::to_string(ckpt.step) + ", beyond the requested "
                                  + std::to_string(total) + " steps");
            first = ckpt.step;
            state = std::move(ckpt.state);
        }

        if (cfg.checkpoint_every != 0 && cfg.out.empty())
            throw ConfigError("checkpoints need an output path ('out')");

        Sink sink(cfg.out, out);
        const auto names = names_of(system);
        const auto echo = cfg.echo();
        TrajectoryWriter writer(sink.stream(), header("integrate", echo, cfg.hash()), names, cfg.output_digits());

        const std::string ckpt_path = cfg.out.empty() ? std::string() : cfg.out + ".ckpt";
        auto save = [&](std::size_t step, std::span<const mp::Real> s) {
            if (ckpt_path.empty())
                return;
            Checkpoint c;
            c.step = step;
            c.time = decimal::times(cfg.tau, step);
            c.precision_bits = cfg.precision_bits;
            c.config_hash = dyn_hash;
            c.state.assign(s.begin(), s.end());
            save_checkpoint(ckpt_path, c);
        };

        IntegrateOptions options;
        options.record_every = 0;
        options.first_step = first;
        options.observer = [&](std::size_t step, const mp::Real&, std::span<const mp::Real> s) {
            const bool last = step == total;
            if (step == first || step % cfg.stride == 0 || last)
                writer.row(decimal::times(cfg.tau, step), s);
            if (cfg.checkpoint_every != 0 && step != first && step % cfg.checkpoint_every == 0 && !last)
                save(step, s);
        };

        Reducer reducer(cfg.reduce_plan(), ctx);
        const StepConfig step_cfg{mp::from_decimal(cfg.tau, ctx), cfg.order};
        const auto traj = integrate(system, state, step_cfg, total - first, ctx, reducer, options);
        save(total, traj.back().state);
        sink.finish(cfg.out);
        return exit_ok;
    });
}

RunSpec verify_spec(const RunConfig& cfg)
{
    const RunSpec base{cfg.precision_bits, cfg.order};
    RunSpec verify = default_verify(base);
    if (cfg.verify_prec_bits)
        verify.precision_bits = *cfg.verify_prec_bits;
    if (cfg.verify_order)
        verify.order = *cfg.verify_order;
    return verify;
}

int cmd_cns(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        CnsConfig cns;
        cns.base = {cfg.precision_bits, cfg.order};
        cns.verify = verify_spec(cfg);
        cns.tau = cfg.tau;
        cns.t_end = cfg.end_time();
        cns.agree_digits = cfg.agree_digits;
        cns.stride = cfg.stride;
        cns.allow_equal_runs = cfg.allow_equal;
        cns.validate();

        const auto description = cfg.system_description();
        const SystemFactory factory = [&](const mp::Context& ctx) { return description.instantiate(ctx); };
        const auto result = cns_run(factory, cfg.init, cns, cfg.reduce_plan());

        auto echo = cfg.echo();
        echo.push_back("verify_prec_bits=" + std::to_string(cns.verify.precision_bits));
        echo.push_back("verify_order=" + std::to_string(cns.verify.order));
        echo.push_back("agree_digits=" + std::to_string(cns.agree_digits));
        std::uint64_t hash = fnv1a("");
        for (const auto& l : echo)
            hash = fnv1a(l + "\n", hash);

        const mp::Context ctx(cfg.precision_bits);
        const auto names = names_of(description.instantiate(ctx));
        {
            Sink sink(cfg.out, out);
            TrajectoryWriter writer(sink.stream(), header("cns", echo, hash), names, cfg.output_digits());
            for (const auto& s : result.base.samples)
                writer.row(decimal::times(cfg.tau, s.step), s.state);
            sink.finish(cfg.out);
        }
        if (!cfg.out.empty()) {
            Sink kv(cfg.out + ".tc", out);
            kv.stream() << result.report.to_key_value();
            kv.finish(cfg.out + ".tc");
            Sink series(cfg.out + ".tc.tsv", out);
            series.stream() << result.report.series_tsv();
            series.finish(cfg.out + ".tc.tsv");
        }
        out << result.report.to_text();
        for (const auto& w : result.report.warnings)
            err << "warning: " << w << '\n';
        return exit_ok;
    });
}

int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        const mp::Context ctx(cfg.precision_bits);
        const auto system = cfg.system_description().instantiate(ctx);
        const auto state = parse_state(cfg.init, ctx);
        const StepConfig step_cfg{mp::from_decimal(cfg.tau, ctx), cfg.order};
        std::vector<std::size_t> workers = cfg.bench_workers;
        if (workers.empty())
            workers = {1, 2, 4};

        const auto records =
            run_benchmark(system, state, step_cfg, ctx, cfg.reduce_plan(), workers, cfg.probe_steps);
        Sink sink(cfg.out, out);
        sink.stream() << "# tsm bench: order=" << cfg.order << " prec_bits=" << cfg.precision_bits
                      << " probe_steps=" << cfg.probe_steps << " chunks=" << cfg.num_chunks
                      << " threshold=" << cfg.threshold << '\n'
                      << benchmark_table(records);
        sink.finish(cfg.out);
        for (const auto& r : records)
            if (!r.matches_serial)
                err << "warning: " << r.workers << "-worker probe differs from the serial probe\n";
        return exit_ok;
    });
}

int cmd_diagram(const RunConfig& cfg, const DiagramRequest& request, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&] {
        if (request.values.empty())
            throw ConfigError("diagram needs at least one sweep value");
        std::vector<RunSpec> sweep;
        for (auto v : request.values) {
            if (request.axis == SweepAxis::precision)
                sweep.push_back({v, cfg.order});
            else
                sweep.push_back({cfg.precision_bits, static_cast<std::size_t>(v)});
        }
        const auto description = cfg.system_description();
        const SystemFactory factory = [&](const mp::Context& ctx) { return description.instantiate(ctx); };
        const auto rows = tc_diagram(factory, cfg.init, sweep, request.axis, request.margin, cfg.tau,
                                     cfg.end_time(), cfg.agree_digits, cfg.stride, cfg.reduce_plan());
        Sink sink(cfg.out, out);
        sink.stream() << diagram_tsv(rows);
        sink.finish(cfg.out);
        return exit_ok;
    });
}

} // namespace tsm
