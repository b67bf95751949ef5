// spectral.hpp — full symmetric eigendecomposition and level-statistics diagnostics

#pragma once

#include <Eigen/Dense>

#include <cstdint>

#include "dicke/common.hpp"

namespace dicke {

// Full spectrum of one real symmetric matrix.  Energies ascend; vectors are
// the matching orthonormal columns with the sign of each fixed so that its
// largest-magnitude component is positive.
struct EigenDecomposition {
    Eigen::VectorXd energies;
    Eigen::MatrixXd vectors;
    std::uint64_t fingerprint = 0;  // cache key of (params, sector), 0 if unkeyed

    Eigen::Index dim() const { return energies.size(); }
};

// Eigendecomposition with validation: throws NumericalError unless
//   ‖H v_k - E_k v_k‖₂ ≤ 1e-8 (1 + |E_k|)  for every k, and
//   max |VᵀV - I| ≤ 1e-9.
EigenDecomposition diagonalize(const Eigen::MatrixXd& h);

// Eigenvalues-only path for convergence probes.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& h);

// Rescales a spectrum to unit mean spacing by fitting the cumulative level
// staircase with a polynomial.  discard_frac of the levels is dropped at each
// spectral edge before fitting; at least 100 levels must remain.
Eigen::VectorXd unfold(const Eigen::VectorXd& energies, double discard_frac = 0.1,
                       int poly_degree = 6);

struct SpacingStatistics {
    Eigen::VectorXd spacings;       // nearest-neighbor gaps of the unfolded input
    Eigen::VectorXd hist_edges;     // uniform bins for P(s)
    Eigen::VectorXd hist_density;   // normalized so Σ density·Δs = 1
    double ks_poisson = 0.0;        // sup distance to 1 - e^{-s}
    double ks_wigner = 0.0;         // sup distance to 1 - e^{-πs²/4}
};

// Nearest-neighbor spacing statistics of an unfolded spectrum.
SpacingStatistics spacing_statistics(const Eigen::VectorXd& unfolded);

// (E_last - E_first)/(count - 1) over a half-open index window.
double mean_level_spacing(const EigenDecomposition& decomp, IndexRange window);

} // namespace dicke
