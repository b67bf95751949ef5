#include "dicke/fidelity.hpp"

#include <cmath>
#include <numbers>

namespace dicke {

namespace {

// Shared spectral evaluation of Σ_i φ_u(i) Σ_j w_ij φ_p(j) over a window.
struct TraceCore {
    Eigen::MatrixXd weights;      // dim × W, column c holds w_{·,lo+c}
    Eigen::VectorXd pert_e;       // E'_j
    Eigen::VectorXd unpert_e;     // E_i over the window

    TraceCore(const EigenDecomposition& unpert, const EigenDecomposition& pert,
              IndexRange window) {
        if (unpert.dim() != pert.dim()) {
            throw ConfigError("decompositions live on different bases");
        }
        if (window.empty()) throw ConfigError("empty state window");
        if (window.hi > static_cast<std::size_t>(unpert.dim())) {
            throw ConvergenceError("window exceeds available states");
        }
        const auto lo = static_cast<Eigen::Index>(window.lo);
        const auto count = static_cast<Eigen::Index>(window.size());
        const Eigen::MatrixXd proj =
            pert.vectors.transpose() * unpert.vectors.middleCols(lo, count);
        weights = proj.array().square();
        pert_e = pert.energies;
        unpert_e = unpert.energies.segment(lo, count);
    }

    std::complex<double> evaluate(double t) const {
        // inner sums over perturbed levels, then the window phase
        const Eigen::ArrayXd pp = pert_e.array() * t;
        const Eigen::VectorXd cos_p = pp.cos();
        const Eigen::VectorXd sin_p = pp.sin();
        const Eigen::VectorXd s_re = weights.transpose() * cos_p;
        const Eigen::VectorXd s_im = -(weights.transpose() * sin_p);

        const Eigen::ArrayXd up = unpert_e.array() * t;
        const Eigen::ArrayXd cos_u = up.cos();
        const Eigen::ArrayXd sin_u = up.sin();
        const double re = (cos_u * s_re.array() - sin_u * s_im.array()).sum();
        const double im = (cos_u * s_im.array() + sin_u * s_re.array()).sum();
        return {re, im};
    }
};

} // namespace

FaTrace fidelity_amplitude(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                           IndexRange window, const Eigen::VectorXd& times) {
    const TraceCore core(unpert, pert, window);
    const std::complex<double> norm = core.evaluate(0.0);

    FaTrace trace;
    trace.times = times;
    trace.values.resize(times.size());
    trace.modulus.resize(times.size());
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        trace.values[k] = core.evaluate(times[k]) / norm;
        trace.modulus[k] = std::abs(trace.values[k]);
    }
    return trace;
}

Eigen::VectorXcd sector_trace(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                              const Eigen::VectorXd& times) {
    const TraceCore core(unpert, pert, {0, static_cast<std::size_t>(unpert.dim())});
    Eigen::VectorXcd values(times.size());
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        // unnormalized: the window mean times the window count is the trace
        values[k] = core.evaluate(times[k]);
    }
    return values;
}

Eigen::VectorXd averaged_loschmidt(const Eigen::VectorXcd& trace, std::size_t dim) {
    if (dim < 1) throw ConfigError("sector dimension must be at least 1");
    const double d = static_cast<double>(dim);
    Eigen::VectorXd avg(trace.size());
    for (Eigen::Index k = 0; k < trace.size(); ++k) {
        avg[k] = (d + std::norm(trace[k])) / (d * (d + 1.0));
    }
    return avg;
}

double max_adjacent_drop(const FaTrace& trace) {
    double drop = 0.0;
    for (Eigen::Index k = 0; k + 1 < trace.modulus.size(); ++k) {
        drop = std::max(drop, trace.modulus[k] - trace.modulus[k + 1]);
    }
    return drop;
}

Eigen::VectorXd default_time_grid(double gamma_estimate, double omega, int samples) {
    if (samples < 2) throw ConfigError("time grid needs at least two samples");
    if (!(omega > 0.0)) throw ConfigError("omega must be positive");
    const double t_max =
        gamma_estimate > 1e-9 * omega ? 20.0 / gamma_estimate : 20.0 * std::numbers::pi / omega;
    return Eigen::VectorXd::LinSpaced(samples, 0.0, t_max);
}

DecayFit fit_decay(const FaTrace& trace, double t_lo, double t_hi) {
    if (!(t_hi > t_lo)) throw ConfigError("fit range must have positive length");

    std::vector<double> ts, ys;
    for (Eigen::Index k = 0; k < trace.times.size(); ++k) {
        const double t = trace.times[k];
        if (t >= t_lo && t <= t_hi) {
            ts.push_back(t);
            ys.push_back(trace.modulus[k]);
        }
    }
    if (ts.size() < 30) throw ConfigError("fit range covers fewer than 30 samples");
    const Eigen::Map<const Eigen::VectorXd> t(ts.data(), static_cast<Eigen::Index>(ts.size()));
    const Eigen::Map<const Eigen::VectorXd> y(ys.data(), static_cast<Eigen::Index>(ys.size()));
    if (y.minCoeff() > 0.9) {
        throw NumericalError("trace shows no decay within the fit range");
    }

    // time for |O| to reach e^{-1/2} (Gaussian rate seed) and e^{-1} (exponential)
    const auto first_below = [&](double level) {
        for (Eigen::Index k = 0; k < y.size(); ++k) {
            if (y[k] <= level && t[k] > 0.0) return t[k];
        }
        return t[y.size() - 1];
    };
    const double b0 = 1.0 / (std::sqrt(2.0) * first_below(std::exp(-0.5)));
    const double c0 = 1.0 / first_below(std::exp(-1.0));

    // a = sin²θ keeps the Gaussian fraction in [0,1]; b = |β|, c = γ² stay
    // non-negative without clipping.
    const ScalarModel model = [](double tv, const Eigen::VectorXd& p) {
        const double a = std::sin(p[0]) * std::sin(p[0]);
        const double b = p[1];
        const double c = p[2] * p[2];
        return a * std::exp(-b * b * tv * tv) + (1.0 - a) * std::exp(-c * tv);
    };

    const double starts[] = {0.0, std::numbers::pi / 4.0, std::numbers::pi / 2.0};
    LevMarResult best;
    best.rms = std::numeric_limits<double>::infinity();
    for (const double theta0 : starts) {
        Eigen::VectorXd p0(3);
        p0 << theta0, b0, std::sqrt(c0);
        const LevMarResult r = levmar_fit(model, t, y, p0);
        if (r.rms < best.rms) best = r;
    }
    if (!std::isfinite(best.rms)) throw NumericalError("decay fit did not converge");

    DecayFit fit;
    fit.a = std::sin(best.params[0]) * std::sin(best.params[0]);
    fit.b = std::abs(best.params[1]);
    fit.c = best.params[2] * best.params[2];
    fit.residual = best.rms;
    return fit;
}

DecayTable decay_comparison(const ModelParams& base, const std::vector<double>& lambda0_list,
                            IndexRange window, const std::vector<double>& delta_list,
                            const Eigen::VectorXd& times, const DecompositionProvider& provider) {
    if (lambda0_list.empty() || delta_list.empty()) {
        throw ConfigError("decay comparison needs non-empty grids");
    }
    DecayTable table;
    table.lambda0 = lambda0_list;
    table.delta_lambda = delta_list;
    table.traces.reserve(lambda0_list.size());
    for (const double lambda0 : lambda0_list) {
        const auto unpert = provider(base.with_lambda(lambda0));
        std::vector<FaTrace> row;
        row.reserve(delta_list.size());
        for (const double delta : delta_list) {
            const auto pert = provider(base.with_lambda(lambda0 + delta));
            row.push_back(fidelity_amplitude(*unpert, *pert, window, times));
        }
        table.traces.push_back(std::move(row));
    }
    return table;
}

} // namespace dicke
