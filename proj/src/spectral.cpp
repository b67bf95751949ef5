#include "dicke/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace dicke {

namespace {

void check_square_finite(const Eigen::MatrixXd& h) {
    if (h.rows() != h.cols() || h.rows() == 0) {
        throw ConfigError("matrix must be square and non-empty");
    }
    if (!h.allFinite()) {
        throw NumericalError("matrix has non-finite entries");
    }
}

// Sign convention: largest-magnitude component of each eigenvector positive.
// Ties resolve to the first maximal component, so the result is deterministic.
void fix_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::Index imax = 0;
        double best = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double mag = std::abs(vectors(r, k));
            if (mag > best) {
                best = mag;
                imax = r;
            }
        }
        if (vectors(imax, k) < 0.0) vectors.col(k) = -vectors.col(k);
    }
}

void validate_decomposition(const Eigen::MatrixXd& h, const EigenDecomposition& d) {
    const Eigen::MatrixXd residual = h * d.vectors - d.vectors * d.energies.asDiagonal();
    for (Eigen::Index k = 0; k < d.dim(); ++k) {
        const double bound = 1e-8 * (1.0 + std::abs(d.energies[k]));
        const double r = residual.col(k).norm();
        if (!(r <= bound)) {
            throw NumericalError("eigenpair " + std::to_string(k) + " residual " +
                                 std::to_string(r) + " exceeds bound " + std::to_string(bound));
        }
    }
    Eigen::MatrixXd gram = d.vectors.transpose() * d.vectors;
    gram.diagonal().array() -= 1.0;
    const double ortho = gram.cwiseAbs().maxCoeff();
    if (!(ortho <= 1e-9)) {
        throw NumericalError("eigenbasis orthogonality deviation " + std::to_string(ortho));
    }
}

} // namespace

EigenDecomposition diagonalize(const Eigen::MatrixXd& h) {
    check_square_finite(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver failed to converge");
    }
    EigenDecomposition d;
    d.energies = solver.eigenvalues();
    d.vectors = solver.eigenvectors();
    fix_signs(d.vectors);
    validate_decomposition(h, d);
    return d;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& h) {
    check_square_finite(h);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigensolver failed to converge");
    }
    return solver.eigenvalues();
}

Eigen::VectorXd unfold(const Eigen::VectorXd& energies, double discard_frac, int poly_degree) {
    if (!(discard_frac >= 0.0 && discard_frac < 0.5)) {
        throw ConfigError("discard_frac must lie in [0, 0.5)");
    }
    if (poly_degree < 1) throw ConfigError("poly_degree must be at least 1");

    const auto n_total = energies.size();
    const auto n_edge = static_cast<Eigen::Index>(std::floor(discard_frac * n_total));
    const auto n = n_total - 2 * n_edge;
    if (n < 100) {
        throw ConfigError("too few levels after edge discard: " + std::to_string(n) +
                          " (need at least 100)");
    }
    const Eigen::VectorXd e = energies.segment(n_edge, n);
    for (Eigen::Index k = 1; k < n; ++k) {
        if (e[k] < e[k - 1]) throw ConfigError("energies must be sorted ascending");
    }

    // Fit the staircase N(E_k) = (global index) + 1/2 on a scaled abscissa.
    const double lo = e[0], hi = e[n - 1];
    if (!(hi > lo)) throw NumericalError("degenerate energy range in unfold");
    const auto x_of = [lo, hi](double energy) { return 2.0 * (energy - lo) / (hi - lo) - 1.0; };

    Eigen::MatrixXd vand(n, poly_degree + 1);
    Eigen::VectorXd staircase(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double x = x_of(e[k]);
        double p = 1.0;
        for (int c = 0; c <= poly_degree; ++c) {
            vand(k, c) = p;
            p *= x;
        }
        staircase[k] = static_cast<double>(n_edge + k) + 0.5;
    }
    const Eigen::VectorXd coeff = vand.colPivHouseholderQr().solve(staircase);

    Eigen::VectorXd unfolded = vand * coeff;
    for (Eigen::Index k = 1; k < n; ++k) {
        if (unfolded[k] <= unfolded[k - 1]) {
            throw NumericalError("unfolding fit is non-monotone over the retained range");
        }
    }
    return unfolded;
}

SpacingStatistics spacing_statistics(const Eigen::VectorXd& unfolded) {
    const auto n = unfolded.size();
    if (n < 2) throw ConfigError("need at least two levels for spacing statistics");

    SpacingStatistics st;
    st.spacings.resize(n - 1);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        const double s = unfolded[k + 1] - unfolded[k];
        if (s < 0.0) throw ConfigError("spacing input is not sorted ascending");
        st.spacings[k] = s;
    }

    std::vector<double> sorted(st.spacings.data(), st.spacings.data() + st.spacings.size());
    std::sort(sorted.begin(), sorted.end());
    const double m = static_cast<double>(sorted.size());

    const auto cdf_poisson = [](double s) { return 1.0 - std::exp(-s); };
    const auto cdf_wigner = [](double s) {
        return 1.0 - std::exp(-std::numbers::pi * s * s / 4.0);
    };
    double dp = 0.0, dw = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const double fp = cdf_poisson(sorted[k]);
        const double fw = cdf_wigner(sorted[k]);
        const double below = static_cast<double>(k) / m;
        const double above = static_cast<double>(k + 1) / m;
        dp = std::max({dp, std::abs(fp - below), std::abs(fp - above)});
        dw = std::max({dw, std::abs(fw - below), std::abs(fw - above)});
    }
    st.ks_poisson = dp;
    st.ks_wigner = dw;

    // display histogram of P(s) over [0, max(4, s_max)]
    const int bins = 40;
    const double s_hi = std::max(4.0, sorted.back());
    st.hist_edges.resize(bins + 1);
    st.hist_density = Eigen::VectorXd::Zero(bins);
    const double ds = s_hi / bins;
    for (int b = 0; b <= bins; ++b) st.hist_edges[b] = b * ds;
    for (double s : sorted) {
        int b = std::min(bins - 1, static_cast<int>(s / ds));
        st.hist_density[b] += 1.0;
    }
    st.hist_density /= m * ds;
    return st;
}

double mean_level_spacing(const EigenDecomposition& decomp, IndexRange window) {
    if (window.size() < 2) throw ConfigError("mean_level_spacing needs a window of at least 2");
    if (window.hi > static_cast<std::size_t>(decomp.dim())) {
        throw ConfigError("window exceeds spectrum size");
    }
    const double first = decomp.energies[static_cast<Eigen::Index>(window.lo)];
    const double last = decomp.energies[static_cast<Eigen::Index>(window.hi - 1)];
    return (last - first) / static_cast<double>(window.size() - 1);
}

} // namespace dicke
