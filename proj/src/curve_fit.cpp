#include "dicke/curve_fit.hpp"

#include <cmath>
#include <limits>

#include "dicke/common.hpp"

namespace dicke {

LineSegment fit_line(const std::vector<double>& x, const std::vector<double>& y,
                     std::size_t lo, std::size_t hi) {
    if (hi > x.size() || hi - lo < 2 || x.size() != y.size()) {
        throw ConfigError("fit_line: bad segment bounds");
    }
    const double n = static_cast<double>(hi - lo);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = lo; k < hi; ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw NumericalError("fit_line: degenerate abscissa");
    LineSegment seg;
    seg.lo = lo;
    seg.hi = hi;
    seg.slope = (n * sxy - sx * sy) / denom;
    seg.intercept = (sy - seg.slope * sx) / n;
    seg.sse = 0.0;
    for (std::size_t k = lo; k < hi; ++k) {
        const double r = y[k] - (seg.slope * x[k] + seg.intercept);
        seg.sse += r * r;
    }
    return seg;
}

std::vector<LineSegment> segmented_linear_fit(const std::vector<double>& x,
                                              const std::vector<double>& y, int n_segments,
                                              std::size_t min_points) {
    const std::size_t n = x.size();
    if (n != y.size()) throw ConfigError("segmented fit: size mismatch");
    if (n_segments < 1) throw ConfigError("segmented fit: need at least one segment");
    min_points = std::max<std::size_t>(min_points, 2);
    if (n < static_cast<std::size_t>(n_segments) * min_points) {
        throw ConfigError("segmented fit: too few points for requested segments");
    }

    // dp[s][e]: best SSE covering [0, e) with s segments
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> cost(n + 1, std::vector<double>(n + 1, inf));
    for (std::size_t lo = 0; lo < n; ++lo) {
        for (std::size_t hi = lo + min_points; hi <= n; ++hi) {
            cost[lo][hi] = fit_line(x, y, lo, hi).sse;
        }
    }
    std::vector<std::vector<double>> dp(n_segments + 1, std::vector<double>(n + 1, inf));
    std::vector<std::vector<std::size_t>> prev(n_segments + 1, std::vector<std::size_t>(n + 1, 0));
    dp[0][0] = 0.0;
    for (int s = 1; s <= n_segments; ++s) {
        for (std::size_t e = min_points; e <= n; ++e) {
            for (std::size_t b = 0; b + min_points <= e; ++b) {
                if (dp[s - 1][b] == inf || cost[b][e] == inf) continue;
                const double c = dp[s - 1][b] + cost[b][e];
                if (c < dp[s][e]) {
                    dp[s][e] = c;
                    prev[s][e] = b;
                }
            }
        }
    }
    if (dp[n_segments][n] == inf) throw NumericalError("segmented fit: no feasible partition");

    std::vector<LineSegment> segments(n_segments);
    std::size_t e = n;
    for (int s = n_segments; s >= 1; --s) {
        const std::size_t b = prev[s][e];
        segments[s - 1] = fit_line(x, y, b, e);
        e = b;
    }
    return segments;
}

std::vector<LineSegment> best_segmented_fit(const std::vector<double>& x,
                                            const std::vector<double>& y, int max_segments,
                                            std::size_t min_points) {
    const double n = static_cast<double>(x.size());
    std::vector<LineSegment> best;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= max_segments; ++k) {
        if (x.size() < static_cast<std::size_t>(k) * std::max<std::size_t>(min_points, 2)) break;
        auto segs = segmented_linear_fit(x, y, k, min_points);
        double sse = 0.0;
        for (const auto& s : segs) sse += s.sse;
        // 3k-1 effective parameters: slope+intercept per segment plus breakpoints.
        // The SSE floor keeps near-exact fits from splitting spuriously.
        const double bic =
            n * std::log(std::max(sse, n * 1e-16) / n) + (3.0 * k - 1.0) * std::log(n);
        if (bic < best_bic) {
            best_bic = bic;
            best = std::move(segs);
        }
    }
    if (best.empty()) throw ConfigError("best_segmented_fit: too few points");
    return best;
}

LevMarResult levmar_fit(const ScalarModel& model, const Eigen::VectorXd& t,
                        const Eigen::VectorXd& y, const Eigen::VectorXd& initial,
                        int max_iterations, double tol) {
    const Eigen::Index n = t.size();
    const Eigen::Index p = initial.size();
    if (y.size() != n || n < p) throw ConfigError("levmar_fit: bad problem size");

    const auto residuals = [&](const Eigen::VectorXd& params) {
        Eigen::VectorXd r(n);
        for (Eigen::Index k = 0; k < n; ++k) r[k] = model(t[k], params) - y[k];
        return r;
    };

    Eigen::VectorXd params = initial;
    Eigen::VectorXd r = residuals(params);
    double sse = r.squaredNorm();
    double damping = 1e-3;

    LevMarResult result;
    for (int iter = 0; iter < max_iterations; ++iter) {
        result.iterations = iter + 1;

        Eigen::MatrixXd jac(n, p);
        for (Eigen::Index c = 0; c < p; ++c) {
            const double h = 1e-7 * std::max(1.0, std::abs(params[c]));
            Eigen::VectorXd shifted = params;
            shifted[c] += h;
            jac.col(c) = (residuals(shifted) - r) / h;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;
        if (jtr.lpNorm<Eigen::Infinity>() < tol) {
            result.converged = true;
            break;
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt) {
            Eigen::MatrixXd a = jtj;
            a.diagonal() += damping * jtj.diagonal().cwiseMax(1e-12);
            const Eigen::VectorXd step = a.ldlt().solve(-jtr);
            const Eigen::VectorXd trial = params + step;
            const Eigen::VectorXd rt = residuals(trial);
            const double sse_t = rt.squaredNorm();
            if (sse_t < sse) {
                const bool tiny = step.lpNorm<Eigen::Infinity>() <
                                  1e-10 * (1.0 + params.lpNorm<Eigen::Infinity>());
                params = trial;
                r = rt;
                sse = sse_t;
                damping = std::max(damping * 0.3, 1e-12);
                stepped = true;
                if (tiny) result.converged = true;
                break;
            }
            damping *= 10.0;
        }
        if (!stepped || result.converged) {
            result.converged = true;
            break;
        }
    }
    result.params = params;
    result.rms = std::sqrt(sse / static_cast<double>(n));
    return result;
}

} // namespace dicke
