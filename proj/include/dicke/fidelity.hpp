// fidelity.hpp — fidelity amplitude O(t), Loschmidt-echo average, decay fits

#pragma once

#include <Eigen/Dense>

#include <vector>

#include "dicke/curve_fit.hpp"
#include "dicke/ldos.hpp"

namespace dicke {

// Windowed fidelity amplitude sampled on a time grid, normalized so O(0) = 1.
// Evaluated spectrally from overlaps and energy differences; propagators are
// never materialized.
struct FaTrace {
    Eigen::VectorXd times;
    Eigen::VectorXcd values;
    Eigen::VectorXd modulus;
};

// O(t) = (1/W) Σ_{i∈window} Σ_j |⟨j(λ)|i(λ₀)⟩|² e^{-i(E'_j - E_i)t}
FaTrace fidelity_amplitude(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                           IndexRange window, const Eigen::VectorXd& times);

// Unnormalized full-sector trace Tr[U'†(t) U(t)]; O(0) = sector dimension.
Eigen::VectorXcd sector_trace(const EigenDecomposition& unpert, const EigenDecomposition& pert,
                              const Eigen::VectorXd& times);

// Haar-averaged Loschmidt echo [d + |O(t)|²]/[d(d+1)] from the unnormalized
// sector trace.
Eigen::VectorXd averaged_loschmidt(const Eigen::VectorXcd& trace, std::size_t dim);

// Largest single-step decrease of |O| between adjacent samples; an abrupt
// drop (> 0.5 at trace resolution) would flag hypersensitivity.
double max_adjacent_drop(const FaTrace& trace);

// 600 samples on [0, 20/Γ]; falls back to a few field periods when Γ ~ 0.
Eigen::VectorXd default_time_grid(double gamma_estimate, double omega, int samples = 600);

// |O(t)| ≈ a e^{-b²t²} + (1-a) e^{-ct} with a ∈ [0,1], b,c ≥ 0.
struct DecayFit {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double residual = 0.0;  // RMS over the fitted samples
};

// Bounded nonlinear least squares of the trace modulus over t ∈ [t_lo, t_hi].
// Multi-start over the Gaussian fraction; rates seeded from the measured
// decay times.  Throws NumericalError when |O| never falls below 0.9 in
// range (fit would be ill-posed).
DecayFit fit_decay(const FaTrace& trace, double t_lo, double t_hi);

// |O(t)| traces for each (λ₀, δλ) pair on one shared time grid.
struct DecayTable {
    std::vector<double> lambda0;
    std::vector<double> delta_lambda;
    std::vector<std::vector<FaTrace>> traces;  // [lambda0 index][delta index]
};
DecayTable decay_comparison(const ModelParams& base, const std::vector<double>& lambda0_list,
                            IndexRange window, const std::vector<double>& delta_list,
                            const Eigen::VectorXd& times, const DecompositionProvider& provider);

} // namespace dicke
