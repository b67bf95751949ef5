// ldos.hpp — local density of states, its width Γ, and perturbation sweeps

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "dicke/curve_fit.hpp"
#include "dicke/hamiltonian.hpp"
#include "dicke/spectral.hpp"

namespace dicke {

// Produces the eigendecomposition of H(params) in a fixed sector.  Sweeps go
// through this hook so a cache can sit behind it.
using DecompositionProvider =
    std::function<std::shared_ptr<const EigenDecomposition>(const ModelParams&)>;

// Plain provider: build the sector basis, assemble, diagonalize.
DecompositionProvider make_direct_provider(Parity sector);

// Raw (E_ij, w_ij) pairs of one LDOS, unbinned.  weight sums to ~1 whether
// the set comes from a single state or from a window average.
struct OverlapSet {
    Eigen::VectorXd energy;  // E_ij = E'_j - E_i
    Eigen::VectorXd weight;  // |⟨j(λ)|i(λ₀)⟩|² (divided by window size when averaged)
    double total_weight = 0.0;
    double mean_energy = 0.0;  // first moment of the raw distribution
};

// Squared overlaps of one unperturbed eigenstate against every perturbed one.
OverlapSet overlap_weights(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                           std::size_t i);

// Arithmetic mean of single-state overlap sets over a window of states.
OverlapSet averaged_overlaps(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                             IndexRange window);

// Smallest σ with cumulative weight ≥ target inside |E - ⟨E⟩| ≤ σ, computed
// from the discrete distribution without binning.
double width_gamma(const OverlapSet& overlaps, double target = 0.7);

// Characteristic function Σ w e^{-iEt} of the raw distribution.
Eigen::VectorXcd characteristic_function(const OverlapSet& overlaps,
                                         const Eigen::VectorXd& times);

struct LdosHistogram {
    Eigen::VectorXd bin_edges;  // uniform grid, size bins+1
    Eigen::VectorXd weights;    // probability per bin
    double mean_energy = 0.0;
    double gamma = 0.0;
    double leakage = 0.0;       // probability mass outside the grid
    bool leakage_warning = false;  // leakage > 0.01: window likely under-converged
};

// Window-averaged LDOS binned for output.  mean and gamma come from the
// unbinned pairs.  bin_width 0 picks (grid span)/200; by default the grid
// spans the full support, so leakage only appears with an explicit grid.
LdosHistogram averaged_ldos(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                            IndexRange window, double bin_width = 0.0,
                            std::optional<std::pair<double, double>> grid = std::nullopt);

struct SweepResult {
    std::vector<double> abscissa;       // δλ or λ₀ values, strictly increasing
    std::vector<double> gamma;          // matching Γ values
    std::vector<LineSegment> segments;  // log-log fit segments over (abscissa, gamma)
};

// Γ(δλ) at fixed λ₀ with piecewise log-log slopes fitted per detected regime.
// Points are independent; `workers` > 1 computes them concurrently (the
// provider must then be thread-safe).
SweepResult gamma_vs_delta(const ModelParams& params0, IndexRange window,
                           const std::vector<double>& delta_list,
                           const DecompositionProvider& provider, int workers = 1);

// Γ(λ₀) at fixed δλ for both model variants on the same grid.
// δλ should stay within one regime across the sweep; callers pick it.
struct VariantSweeps {
    SweepResult full;
    SweepResult rwa;
};
VariantSweeps gamma_vs_lambda(const ModelParams& base, IndexRange window,
                              const std::vector<double>& lambda_list, double delta_lambda,
                              const DecompositionProvider& provider_full,
                              const DecompositionProvider& provider_rwa, int workers = 1);

// Mean |H'_{ij}| per antidiagonal i-j of the perturbation operator in the
// unperturbed eigenbasis, restricted to the window widened by margin states
// on each side.
struct PerturbationProfile {
    std::vector<int> offsets;
    std::vector<double> mean_abs;
    double max_abs_offdiag = 0.0;  // largest single |H'_{ij}|, i ≠ j, in the block

    double max_off_diagonal() const;  // largest antidiagonal mean away from d = 0
};
PerturbationProfile perturbation_profile(const Eigen::MatrixXd& perturbation,
                                         const EigenDecomposition& unpert, IndexRange window,
                                         std::size_t margin);

// First-order validity threshold δλ* = ΔE / max_{i≠j} |H'_{ij}| — perturbations
// beyond it leave the linear-response regime.
double perturbation_threshold(const PerturbationProfile& profile, double mean_spacing);

} // namespace dicke
