#include "dicke/ldos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "dicke/parallel.hpp"

namespace dicke {

namespace {

void check_pair(const EigenDecomposition& unpert, const EigenDecomposition& pert) {
    if (unpert.dim() != pert.dim()) {
        throw ConfigError("decompositions live on different bases");
    }
}

void check_window(const EigenDecomposition& d, IndexRange window) {
    if (window.empty()) throw ConfigError("empty state window");
    if (window.hi > static_cast<std::size_t>(d.dim())) {
        throw ConvergenceError("window exceeds available states");
    }
}

void finish_moments(OverlapSet& s) {
    s.total_weight = s.weight.sum();
    if (s.total_weight <= 0.0) throw NumericalError("overlap set carries no weight");
    s.mean_energy = s.weight.dot(s.energy) / s.total_weight;
}

} // namespace

DecompositionProvider make_direct_provider(Parity sector) {
    return [sector](const ModelParams& p) {
        const Basis basis = Basis::sector(p.j, p.n_max, sector);
        return std::make_shared<const EigenDecomposition>(diagonalize(build_hamiltonian(p, basis)));
    };
}

OverlapSet overlap_weights(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                           std::size_t i) {
    check_pair(unpert, pert);
    if (i >= static_cast<std::size_t>(unpert.dim())) throw ConfigError("state index out of range");

    const auto idx = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd proj = pert.vectors.transpose() * unpert.vectors.col(idx);

    OverlapSet s;
    s.weight = proj.array().square();
    s.energy = pert.energies.array() - unpert.energies[idx];
    finish_moments(s);
    return s;
}

OverlapSet averaged_overlaps(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                             IndexRange window) {
    check_pair(unpert, pert);
    check_window(unpert, window);
    check_window(pert, window);

    const Eigen::Index dim = unpert.dim();
    const auto w_count = static_cast<Eigen::Index>(window.size());
    const auto lo = static_cast<Eigen::Index>(window.lo);
    const Eigen::MatrixXd proj = pert.vectors.transpose() * unpert.vectors.middleCols(lo, w_count);

    OverlapSet s;
    s.energy.resize(dim * w_count);
    s.weight.resize(dim * w_count);
    const double inv_w = 1.0 / static_cast<double>(w_count);
    for (Eigen::Index c = 0; c < w_count; ++c) {
        const double e_i = unpert.energies[lo + c];
        s.energy.segment(c * dim, dim) = pert.energies.array() - e_i;
        s.weight.segment(c * dim, dim) = proj.col(c).array().square() * inv_w;
    }
    finish_moments(s);
    return s;
}

double width_gamma(const OverlapSet& overlaps, double target) {
    if (!(target > 0.0 && target <= 1.0)) throw ConfigError("containment target must be in (0, 1]");
    if (overlaps.total_weight + 1e-12 < target) {
        throw NumericalError("insufficient total weight for containment target");
    }
    const Eigen::Index n = overlaps.energy.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const Eigen::ArrayXd dist = (overlaps.energy.array() - overlaps.mean_energy).abs();
    std::sort(order.begin(), order.end(),
              [&dist](Eigen::Index a, Eigen::Index b) { return dist[a] < dist[b]; });

    double cumulative = 0.0;
    for (const Eigen::Index k : order) {
        cumulative += overlaps.weight[k];
        if (cumulative >= target - 1e-12) return dist[k];
    }
    return dist[order.back()];
}

Eigen::VectorXcd characteristic_function(const OverlapSet& overlaps,
                                         const Eigen::VectorXd& times) {
    Eigen::VectorXcd values(times.size());
    const auto& e = overlaps.energy.array();
    const auto& w = overlaps.weight.array();
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        const double t = times[k];
        if (t == 0.0) {
            values[k] = std::complex<double>(w.sum(), 0.0);
            continue;
        }
        const Eigen::ArrayXd phase = e * t;
        values[k] = std::complex<double>((w * phase.cos()).sum(), -(w * phase.sin()).sum());
    }
    return values;
}

LdosHistogram averaged_ldos(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                            IndexRange window, double bin_width,
                            std::optional<std::pair<double, double>> grid) {
    const OverlapSet overlaps = averaged_overlaps(unpert, pert, window);

    LdosHistogram h;
    h.mean_energy = overlaps.mean_energy;
    h.gamma = width_gamma(overlaps);

    double grid_lo, grid_hi;
    if (grid) {
        grid_lo = grid->first;
        grid_hi = grid->second;
        if (!(grid_hi > grid_lo)) throw ConfigError("histogram grid must have positive span");
        if (bin_width <= 0.0) bin_width = (grid_hi - grid_lo) / 200.0;
        const auto bins = static_cast<Eigen::Index>(
            std::ceil((grid_hi - grid_lo) / bin_width - 1e-9));
        grid_hi = grid_lo + bin_width * static_cast<double>(bins);
        h.bin_edges = Eigen::VectorXd::LinSpaced(bins + 1, grid_lo, grid_hi);
    } else {
        // default grid: centered on ⟨E⟩, spanning the whole support
        double half_span = std::max(h.mean_energy - overlaps.energy.minCoeff(),
                                    overlaps.energy.maxCoeff() - h.mean_energy);
        if (half_span <= 0.0) half_span = 0.5;
        if (bin_width <= 0.0) bin_width = 2.0 * half_span / 200.0;
        const auto half_bins =
            static_cast<Eigen::Index>(std::ceil(half_span / bin_width - 1e-9));
        grid_lo = h.mean_energy - bin_width * static_cast<double>(half_bins);
        grid_hi = h.mean_energy + bin_width * static_cast<double>(half_bins);
        h.bin_edges = Eigen::VectorXd::LinSpaced(2 * half_bins + 1, grid_lo, grid_hi);
    }

    const auto bins = h.bin_edges.size() - 1;
    h.weights = Eigen::VectorXd::Zero(bins);
    h.leakage = 0.0;
    for (Eigen::Index k = 0; k < overlaps.energy.size(); ++k) {
        const double e = overlaps.energy[k];
        if (e < grid_lo || e > grid_hi) {
            h.leakage += overlaps.weight[k];
            continue;
        }
        auto b = static_cast<Eigen::Index>((e - grid_lo) / bin_width);
        b = std::min(b, bins - 1);
        h.weights[b] += overlaps.weight[k];
    }
    h.leakage_warning = h.leakage > 0.01;
    return h;
}

namespace {

std::vector<LineSegment> log_log_segments(const std::vector<double>& abscissa,
                                          const std::vector<double>& gamma) {
    if (abscissa.size() < 2) return {};
    std::vector<double> lx(abscissa.size()), ly(gamma.size());
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
        if (!(abscissa[k] > 0.0) || !(gamma[k] > 0.0)) return {};
        lx[k] = std::log(abscissa[k]);
        ly[k] = std::log(gamma[k]);
    }
    const int max_segments = static_cast<int>(std::min<std::size_t>(3, abscissa.size() / 4));
    if (max_segments < 1) return {fit_line(lx, ly, 0, lx.size())};
    return best_segmented_fit(lx, ly, max_segments, 4);
}

void check_increasing(const std::vector<double>& v, const char* what) {
    if (v.empty()) throw ConfigError(std::string(what) + " grid is empty");
    for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] > v[k - 1])) throw ConfigError(std::string(what) + " grid must be increasing");
    }
}

} // namespace

SweepResult gamma_vs_delta(const ModelParams& params0, IndexRange window,
                           const std::vector<double>& delta_list,
                           const DecompositionProvider& provider, int workers) {
    check_increasing(delta_list, "delta_lambda");
    if (delta_list.front() <= 0.0) throw ConfigError("delta_lambda values must be positive");

    const auto unpert = provider(params0);
    SweepResult sweep;
    sweep.abscissa = delta_list;
    sweep.gamma.assign(delta_list.size(), 0.0);
    parallel_for(delta_list.size(), workers, [&](std::size_t k) {
        const auto pert = provider(params0.with_lambda(params0.lambda + delta_list[k]));
        sweep.gamma[k] = width_gamma(averaged_overlaps(*unpert, *pert, window));
    });
    sweep.segments = log_log_segments(sweep.abscissa, sweep.gamma);
    return sweep;
}

VariantSweeps gamma_vs_lambda(const ModelParams& base, IndexRange window,
                              const std::vector<double>& lambda_list, double delta_lambda,
                              const DecompositionProvider& provider_full,
                              const DecompositionProvider& provider_rwa, int workers) {
    check_increasing(lambda_list, "lambda");
    if (lambda_list.front() < 0.0) throw ConfigError("lambda values must be non-negative");
    if (!(delta_lambda > 0.0)) throw ConfigError("delta_lambda must be positive");

    const auto sweep_one = [&](Variant variant, const DecompositionProvider& provider) {
        SweepResult sweep;
        sweep.abscissa = lambda_list;
        sweep.gamma.assign(lambda_list.size(), 0.0);
        ModelParams p = base;
        p.variant = variant;
        parallel_for(lambda_list.size(), workers, [&](std::size_t k) {
            const auto unpert = provider(p.with_lambda(lambda_list[k]));
            const auto pert = provider(p.with_lambda(lambda_list[k] + delta_lambda));
            sweep.gamma[k] = width_gamma(averaged_overlaps(*unpert, *pert, window));
        });
        sweep.segments = log_log_segments(sweep.abscissa, sweep.gamma);
        return sweep;
    };
    return VariantSweeps{sweep_one(Variant::Full, provider_full),
                         sweep_one(Variant::Rwa, provider_rwa)};
}

double PerturbationProfile::max_off_diagonal() const {
    double best = 0.0;
    for (std::size_t k = 0; k < offsets.size(); ++k) {
        if (offsets[k] != 0) best = std::max(best, mean_abs[k]);
    }
    return best;
}

PerturbationProfile perturbation_profile(const Eigen::MatrixXd& perturbation,
                                         const EigenDecomposition& unpert, IndexRange window,
                                         std::size_t margin) {
    check_window(unpert, window);
    if (perturbation.rows() != unpert.dim() || perturbation.cols() != unpert.dim()) {
        throw ConfigError("perturbation operator dimension mismatch");
    }
    const std::size_t lo = window.lo > margin ? window.lo - margin : 0;
    const std::size_t hi = std::min(window.hi + margin, static_cast<std::size_t>(unpert.dim()));
    const auto len = static_cast<Eigen::Index>(hi - lo);

    const auto block = unpert.vectors.middleCols(static_cast<Eigen::Index>(lo), len);
    const Eigen::MatrixXd in_eigenbasis = block.transpose() * perturbation * block;

    PerturbationProfile profile;
    profile.offsets.reserve(2 * len - 1);
    profile.mean_abs.reserve(2 * len - 1);
    for (Eigen::Index d = -(len - 1); d <= len - 1; ++d) {
        double sum = 0.0;
        Eigen::Index count = 0;
        for (Eigen::Index i = std::max<Eigen::Index>(0, d); i < len && i - d < len; ++i) {
            const double value = std::abs(in_eigenbasis(i, i - d));
            sum += value;
            ++count;
            if (d != 0) profile.max_abs_offdiag = std::max(profile.max_abs_offdiag, value);
        }
        profile.offsets.push_back(static_cast<int>(d));
        profile.mean_abs.push_back(sum / static_cast<double>(count));
    }
    return profile;
}

double perturbation_threshold(const PerturbationProfile& profile, double mean_spacing) {
    if (!(mean_spacing > 0.0)) throw ConfigError("mean level spacing must be positive");
    if (profile.max_abs_offdiag <= 0.0) {
        return std::numeric_limits<double>::infinity();  // perturbation is diagonal here
    }
    return mean_spacing / profile.max_abs_offdiag;
}

} // namespace dicke
