#include "dicke/runner.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <limits>
#include <iostream>
#include <sstream>
#include <thread>

#include "dicke/cache.hpp"
#include "dicke/csv.hpp"
#include "dicke/fidelity.hpp"
#include "dicke/ldos.hpp"
#include "dicke/parallel.hpp"
#include "dicke/spectral.hpp"

namespace dicke {

namespace {

constexpr const char* kCodeVersion = "dickesim 1.0.0";

namespace fs = std::filesystem;

struct RunContext {
    const ExperimentConfig& config;
    EigenCache cache;
    fs::path out;
    int probe = 0;
    int workers = 1;
    std::vector<std::pair<std::string, int>> convergence_log;  // label → K
    std::vector<std::string> warnings;

    explicit RunContext(const ExperimentConfig& cfg)
        : config(cfg), cache(cfg.cache_dir), out(cfg.out_dir) {
        fs::create_directories(out);
        probe = cfg.probe_increment > 0 ? cfg.probe_increment
                                        : default_probe_increment(cfg.params.n_max);
        const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        workers = cfg.workers > 0 ? cfg.workers : hw;
    }

    int converged_count_for(const ModelParams& params) {
        const auto base = cache.energies_only(params, config.sector);
        const auto probed =
            cache.energies_only(params.with_n_max(params.n_max + probe), config.sector);
        const int k = prefix_agreement_count(*base, *probed, config.convergence_tol);
        std::ostringstream label;
        label << "converged_count[variant=" << to_string(params.variant)
              << ",lambda=" << csv::format_double(params.lambda) << "]";
        convergence_log.emplace_back(label.str(), k);
        return k;
    }

    // smallest converged count over every coupling the experiment touches
    int resolve_converged(const std::vector<ModelParams>& refs) {
        int k = std::numeric_limits<int>::max();
        for (const auto& p : refs) k = std::min(k, converged_count_for(p));
        if (k < 2) throw ConvergenceError("truncation leaves fewer than 2 converged states");
        return k;
    }

    IndexRange resolve_window(int converged) const {
        const WindowSpec& w = config.window;
        IndexRange range;
        if (w.mode == WindowSpec::Mode::Absolute) {
            range.lo = static_cast<std::size_t>(w.lo);
            range.hi = static_cast<std::size_t>(w.hi);
            if (range.hi > static_cast<std::size_t>(converged)) {
                throw ConvergenceError("window [" + std::to_string(range.lo) + ", " +
                                       std::to_string(range.hi) + ") exceeds converged count " +
                                       std::to_string(converged));
            }
        } else {
            range.lo = static_cast<std::size_t>(w.lo * converged);
            range.hi = static_cast<std::size_t>(w.hi * converged);
        }
        if (range.size() < 2) throw ConvergenceError("resolved window has fewer than 2 states");
        return range;
    }

    void warn(const std::string& message) {
        warnings.push_back(message);
        std::cerr << "warning: " << message << '\n';
    }
};

std::string var_suffix(Variant v) { return to_string(v); }

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file: " + path.string());
    out << content;
}

void emit_sweep_csv(const fs::path& file, const char* x_name, const SweepResult& sweep) {
    csv::Writer w(file, {x_name, "gamma"});
    for (std::size_t k = 0; k < sweep.abscissa.size(); ++k) {
        w.row({csv::format_double(sweep.abscissa[k]), csv::format_double(sweep.gamma[k])});
    }
}

void emit_regimes_csv(const fs::path& file, const SweepResult& sweep) {
    csv::Writer w(file, {"segment", "lo_index", "hi_index", "x_lo", "x_hi", "slope", "intercept",
                         "sse"});
    for (std::size_t s = 0; s < sweep.segments.size(); ++s) {
        const auto& seg = sweep.segments[s];
        w.row({csv::format_index(s), csv::format_index(seg.lo), csv::format_index(seg.hi),
               csv::format_double(sweep.abscissa[seg.lo]),
               csv::format_double(sweep.abscissa[seg.hi - 1]), csv::format_double(seg.slope),
               csv::format_double(seg.intercept), csv::format_double(seg.sse)});
    }
}

void emit_trace_csv(const fs::path& file, const FaTrace& trace) {
    csv::Writer w(file, {"t", "re", "im", "modulus"});
    for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
        w.row({csv::format_double(trace.times[k]), csv::format_double(trace.values[k].real()),
               csv::format_double(trace.values[k].imag()),
               csv::format_double(trace.modulus[k])});
    }
}

// ---------------------------------------------------------------- experiments

void run_spectrum(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    report.converged_count = ctx.resolve_converged({cfg.params});
    const auto decomp = ctx.cache.get_or_compute(cfg.params, cfg.sector);

    const fs::path file = ctx.out / "spectrum.csv";
    csv::Writer w(file, {"index", "energy", "converged"});
    for (Eigen::Index k = 0; k < decomp->dim(); ++k) {
        w.row({csv::format_index(static_cast<std::size_t>(k)),
               csv::format_double(decomp->energies[k]),
               k < report.converged_count ? "1" : "0"});
    }
    report.outputs.push_back(file);
}

void run_level_stats(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    report.converged_count = ctx.resolve_converged({cfg.params});
    const auto decomp = ctx.cache.get_or_compute(cfg.params, cfg.sector);

    const Eigen::VectorXd levels = decomp->energies.head(report.converged_count);
    const Eigen::VectorXd unfolded = unfold(levels, cfg.discard_frac, cfg.poly_degree);
    const SpacingStatistics stats = spacing_statistics(unfolded);

    {
        const fs::path file = ctx.out / "spacings.csv";
        csv::Writer w(file, {"index", "spacing"});
        for (Eigen::Index k = 0; k < stats.spacings.size(); ++k) {
            w.row({csv::format_index(static_cast<std::size_t>(k)),
                   csv::format_double(stats.spacings[k])});
        }
        report.outputs.push_back(file);
    }
    {
        const fs::path file = ctx.out / "spacing_histogram.csv";
        csv::Writer w(file, {"s_lo", "s_hi", "density"});
        for (Eigen::Index b = 0; b + 1 < stats.hist_edges.size(); ++b) {
            w.row({csv::format_double(stats.hist_edges[b]),
                   csv::format_double(stats.hist_edges[b + 1]),
                   csv::format_double(stats.hist_density[b])});
        }
        report.outputs.push_back(file);
    }
    {
        const fs::path file = ctx.out / "level_stats.csv";
        csv::Writer w(file, {"lambda0", "variant", "levels_used", "mean_spacing", "ks_poisson",
                             "ks_wigner"});
        w.row({csv::format_double(cfg.params.lambda), to_string(cfg.params.variant),
               csv::format_index(static_cast<std::size_t>(unfolded.size())),
               csv::format_double(stats.spacings.mean()), csv::format_double(stats.ks_poisson),
               csv::format_double(stats.ks_wigner)});
        report.outputs.push_back(file);
    }
    write_text_file(ctx.out / "plot_level_stats.gp",
                    "set datafile separator ','\n"
                    "set xlabel 's'\nset ylabel 'P(s)'\n"
                    "poisson(x) = exp(-x)\nwigner(x) = pi*x/2*exp(-pi*x**2/4)\n"
                    "plot 'spacing_histogram.csv' using (($1+$2)/2):3 skip 1 with boxes "
                    "title 'P(s)', poisson(x), wigner(x)\n");
}

void run_ldos(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    const ModelParams pert_params = cfg.params.with_lambda(cfg.params.lambda + cfg.delta_lambda);
    report.converged_count = ctx.resolve_converged({cfg.params, pert_params});
    report.window = ctx.resolve_window(report.converged_count);

    const auto unpert = ctx.cache.get_or_compute(cfg.params, cfg.sector);
    const auto pert = ctx.cache.get_or_compute(pert_params, cfg.sector);
    const LdosHistogram hist =
        averaged_ldos(*unpert, *pert, report.window, cfg.ldos_bin_width);
    if (hist.leakage_warning) {
        ctx.warn("ldos leakage " + csv::format_double(hist.leakage) +
                 " exceeds 0.01; window may be under-converged");
    }

    {
        const fs::path file = ctx.out / "ldos_histogram.csv";
        csv::Writer w(file, {"e_lo", "e_hi", "weight"});
        for (Eigen::Index b = 0; b + 1 < hist.bin_edges.size(); ++b) {
            w.row({csv::format_double(hist.bin_edges[b]), csv::format_double(hist.bin_edges[b + 1]),
                   csv::format_double(hist.weights[b])});
        }
        report.outputs.push_back(file);
    }
    {
        const fs::path file = ctx.out / "ldos_summary.csv";
        csv::Writer w(file, {"lambda0", "delta_lambda", "window_lo", "window_hi", "mean_energy",
                             "gamma", "leakage"});
        w.row({csv::format_double(cfg.params.lambda), csv::format_double(cfg.delta_lambda),
               csv::format_index(report.window.lo), csv::format_index(report.window.hi),
               csv::format_double(hist.mean_energy), csv::format_double(hist.gamma),
               csv::format_double(hist.leakage)});
        report.outputs.push_back(file);
    }
    write_text_file(ctx.out / "plot_ldos.gp",
                    "set datafile separator ','\n"
                    "set xlabel 'E'\nset ylabel 'LDOS'\n"
                    "plot 'ldos_histogram.csv' using (($1+$2)/2):3 skip 1 with boxes "
                    "title 'averaged LDOS'\n");
}

void run_gamma_vs_delta(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    if (cfg.delta_lambdas.empty()) throw ConfigError("gamma-vs-delta needs a delta_lambdas grid");
    const double delta_max = cfg.delta_lambdas.back();
    report.converged_count = ctx.resolve_converged(
        {cfg.params, cfg.params.with_lambda(cfg.params.lambda + delta_max)});
    report.window = ctx.resolve_window(report.converged_count);

    const SweepResult sweep = gamma_vs_delta(cfg.params, report.window, cfg.delta_lambdas,
                                             ctx.cache.provider(cfg.sector), ctx.workers);

    // first-order validity: profile of H' in the unperturbed eigenbasis
    const Basis basis = Basis::sector(cfg.params.j, cfg.params.n_max, cfg.sector);
    const auto unpert = ctx.cache.get_or_compute(cfg.params, cfg.sector);
    const std::size_t margin =
        cfg.profile_margin > 0 ? cfg.profile_margin : report.window.size() / 2;
    const PerturbationProfile profile = perturbation_profile(
        build_perturbation_operator(cfg.params, basis), *unpert, report.window, margin);
    const double spacing = mean_level_spacing(*unpert, report.window);
    const double delta_star = perturbation_threshold(profile, spacing);

    emit_sweep_csv(ctx.out / "gamma_vs_delta.csv", "delta_lambda", sweep);
    report.outputs.push_back(ctx.out / "gamma_vs_delta.csv");
    emit_regimes_csv(ctx.out / "regimes.csv", sweep);
    report.outputs.push_back(ctx.out / "regimes.csv");
    {
        const fs::path file = ctx.out / "perturbation_profile.csv";
        csv::Writer w(file, {"offset", "mean_abs"});
        for (std::size_t k = 0; k < profile.offsets.size(); ++k) {
            w.row({std::to_string(profile.offsets[k]), csv::format_double(profile.mean_abs[k])});
        }
        report.outputs.push_back(file);
    }
    {
        const fs::path file = ctx.out / "threshold.csv";
        csv::Writer w(file, {"mean_level_spacing", "max_offdiag", "delta_lambda_star"});
        w.row({csv::format_double(spacing), csv::format_double(profile.max_abs_offdiag),
               csv::format_double(delta_star)});
        report.outputs.push_back(file);
    }
    write_text_file(ctx.out / "plot_gamma_vs_delta.gp",
                    "set datafile separator ','\n"
                    "set logscale xy\nset xlabel 'delta lambda'\nset ylabel 'Gamma'\n"
                    "plot 'gamma_vs_delta.csv' using 1:2 skip 1 with linespoints title 'Gamma'\n");
}

void run_gamma_vs_lambda(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    const double lambda_max = cfg.lambdas.back();
    std::vector<ModelParams> refs;
    for (const Variant v : {Variant::Full, Variant::Rwa}) {
        ModelParams p = cfg.params;
        p.variant = v;
        refs.push_back(p.with_lambda(lambda_max));
        refs.push_back(p.with_lambda(lambda_max + cfg.delta_lambda));
    }
    report.converged_count = ctx.resolve_converged(refs);
    report.window = ctx.resolve_window(report.converged_count);

    const auto provider = ctx.cache.provider(cfg.sector);
    const VariantSweeps sweeps = gamma_vs_lambda(cfg.params, report.window, cfg.lambdas,
                                                 cfg.delta_lambda, provider, provider,
                                                 ctx.workers);

    for (const auto& [variant, sweep] :
         {std::pair{Variant::Full, &sweeps.full}, std::pair{Variant::Rwa, &sweeps.rwa}}) {
        const fs::path file = ctx.out / ("gamma_vs_lambda_" + var_suffix(variant) + ".csv");
        emit_sweep_csv(file, "lambda0", *sweep);
        report.outputs.push_back(file);
        const fs::path regimes = ctx.out / ("regimes_" + var_suffix(variant) + ".csv");
        emit_regimes_csv(regimes, *sweep);
        report.outputs.push_back(regimes);
    }
    write_text_file(ctx.out / "plot_gamma_vs_lambda.gp",
                    "set datafile separator ','\n"
                    "set xlabel 'lambda0'\nset ylabel 'Gamma'\n"
                    "plot 'gamma_vs_lambda_full.csv' using 1:2 skip 1 with linespoints "
                    "title 'full', 'gamma_vs_lambda_rwa.csv' using 1:2 skip 1 with linespoints "
                    "title 'rwa'\n");
}

void run_fidelity(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    std::vector<double> deltas = cfg.delta_lambdas;
    if (deltas.empty()) deltas.push_back(cfg.delta_lambda);
    const double delta_max = deltas.back();

    report.converged_count = ctx.resolve_converged(
        {cfg.params, cfg.params.with_lambda(cfg.params.lambda + delta_max)});
    report.window = ctx.resolve_window(report.converged_count);

    const auto unpert = ctx.cache.get_or_compute(cfg.params, cfg.sector);

    // shared grid scaled by the fastest decay in the set
    double gamma_max = 0.0;
    std::vector<double> gammas(deltas.size(), 0.0);
    std::vector<std::shared_ptr<const EigenDecomposition>> perts(deltas.size());
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        perts[k] = ctx.cache.get_or_compute(
            cfg.params.with_lambda(cfg.params.lambda + deltas[k]), cfg.sector);
        gammas[k] = width_gamma(averaged_overlaps(*unpert, *perts[k], report.window));
        gamma_max = std::max(gamma_max, gammas[k]);
    }
    Eigen::VectorXd times = default_time_grid(gamma_max, cfg.params.omega, cfg.time_samples);
    if (cfg.t_max > 0.0) {
        times = Eigen::VectorXd::LinSpaced(cfg.time_samples, 0.0, cfg.t_max);
    }

    csv::Writer index(ctx.out / "fa_index.csv",
                      {"trace", "delta_lambda", "gamma", "max_drop", "file"});
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        const FaTrace trace = fidelity_amplitude(*unpert, *perts[k], report.window, times);
        const double drop = max_adjacent_drop(trace);
        if (drop > 0.5) {
            ctx.warn("fa trace " + std::to_string(k + 1) + " drops by " +
                     csv::format_double(drop) + " in one step (unexpected hypersensitivity)");
        }
        const std::string name = "fa_trace_" + std::to_string(k + 1) + ".csv";
        emit_trace_csv(ctx.out / name, trace);
        report.outputs.push_back(ctx.out / name);
        index.row({csv::format_index(k + 1), csv::format_double(deltas[k]),
                   csv::format_double(gammas[k]), csv::format_double(drop), name});
    }
    report.outputs.push_back(ctx.out / "fa_index.csv");
    write_text_file(ctx.out / "plot_fidelity.gp",
                    "set datafile separator ','\n"
                    "set xlabel 't'\nset ylabel '|O(t)|'\n"
                    "plot for [k=1:*] sprintf('fa_trace_%d.csv', k) using 1:4 skip 1 "
                    "with lines title sprintf('trace %d', k)\n");
}

void run_fit(RunContext& ctx, RunReport& report) {
    const auto& cfg = ctx.config;
    if (!(cfg.delta_lambda > 0.0)) throw ConfigError("fit needs a positive delta_lambda");
    const ModelParams pert_params = cfg.params.with_lambda(cfg.params.lambda + cfg.delta_lambda);
    report.converged_count = ctx.resolve_converged({cfg.params, pert_params});
    report.window = ctx.resolve_window(report.converged_count);

    const auto unpert = ctx.cache.get_or_compute(cfg.params, cfg.sector);
    const auto pert = ctx.cache.get_or_compute(pert_params, cfg.sector);
    const double gamma = width_gamma(averaged_overlaps(*unpert, *pert, report.window));

    Eigen::VectorXd times = default_time_grid(gamma, cfg.params.omega, cfg.time_samples);
    if (cfg.t_max > 0.0) times = Eigen::VectorXd::LinSpaced(cfg.time_samples, 0.0, cfg.t_max);
    const FaTrace trace = fidelity_amplitude(*unpert, *pert, report.window, times);

    // default fit range ends where the decay does, before the finite-size
    // saturation floor takes over
    double t_hi = cfg.fit_t_hi;
    if (t_hi <= 0.0) {
        t_hi = times[times.size() - 1];
        for (Eigen::Index k = 0; k < trace.modulus.size(); ++k) {
            if (trace.modulus[k] <= 0.05) {
                t_hi = trace.times[k];
                break;
            }
        }
    }
    const DecayFit fit = fit_decay(trace, cfg.fit_t_lo, t_hi);

    emit_trace_csv(ctx.out / "fa_trace_1.csv", trace);
    report.outputs.push_back(ctx.out / "fa_trace_1.csv");
    {
        const fs::path file = ctx.out / "decay_fit.csv";
        csv::Writer w(file, {"lambda0", "delta_lambda", "gamma", "a", "b", "c", "residual",
                             "t_lo", "t_hi"});
        w.row({csv::format_double(cfg.params.lambda), csv::format_double(cfg.delta_lambda),
               csv::format_double(gamma), csv::format_double(fit.a), csv::format_double(fit.b),
               csv::format_double(fit.c), csv::format_double(fit.residual),
               csv::format_double(cfg.fit_t_lo), csv::format_double(t_hi)});
        report.outputs.push_back(file);
    }
    write_text_file(ctx.out / "plot_fit.gp",
                    "set datafile separator ','\n"
                    "set xlabel 't'\nset ylabel '|O(t)|'\n"
                    "plot 'fa_trace_1.csv' using 1:4 skip 1 with lines title 'trace'\n");
}

void write_manifest(const RunContext& ctx, const RunReport& report, double elapsed_seconds) {
    std::ostringstream m;
    m << "# dickesim run manifest\n";
    m << "code_version = " << kCodeVersion << '\n';
    for (const auto& [key, value] : config_echo(ctx.config)) {
        m << key << " = " << value << '\n';
    }
    m << "probe_increment_effective = " << ctx.probe << '\n';
    m << "workers_effective = " << ctx.workers << '\n';
    for (const auto& [label, k] : ctx.convergence_log) m << label << " = " << k << '\n';
    m << "converged_count_min = " << report.converged_count << '\n';
    if (!report.window.empty()) {
        m << "window_resolved = [" << report.window.lo << ", " << report.window.hi << ")\n";
    }
    m << "cache_computed = " << ctx.cache.computed() << '\n';
    m << "cache_disk_hits = " << ctx.cache.disk_hits() << '\n';
    m << "cache_memo_hits = " << ctx.cache.memo_hits() << '\n';
    m << "elapsed_seconds = " << elapsed_seconds << '\n';
    for (const auto& w : ctx.warnings) m << "warning = " << w << '\n';
    for (const auto& f : report.outputs) m << "output = " << f.filename().string() << '\n';
    write_text_file(ctx.out / "manifest.txt", m.str());
}

} // namespace

RunReport run(const ExperimentConfig& config) {
    config.validate();
    RunContext ctx(config);
    RunReport report;

    const auto t0 = std::chrono::steady_clock::now();
    switch (config.kind) {
        case ExperimentKind::Spectrum: run_spectrum(ctx, report); break;
        case ExperimentKind::LevelStats: run_level_stats(ctx, report); break;
        case ExperimentKind::Ldos: run_ldos(ctx, report); break;
        case ExperimentKind::GammaVsDelta: run_gamma_vs_delta(ctx, report); break;
        case ExperimentKind::GammaVsLambda: run_gamma_vs_lambda(ctx, report); break;
        case ExperimentKind::Fidelity: run_fidelity(ctx, report); break;
        case ExperimentKind::Fit: run_fit(ctx, report); break;
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(ctx, report, elapsed);
    return report;
}

int run_cli(const ExperimentConfig& config) {
    try {
        run(config);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

} // namespace dicke
