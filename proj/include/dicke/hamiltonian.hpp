// hamiltonian.hpp — Dicke and rotating-wave Hamiltonians on a sector basis

#pragma once

#include <Eigen/Dense>

#include <string>

#include "dicke/hilbert.hpp"

namespace dicke {

enum class Variant { Full, Rwa };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& s);

// One Hamiltonian instance:
//   H(λ) = ω₀ J_z + ω a†a + (λ/√(2j)) (a† + a)(J₊ + J₋)        [Full]
//   H(λ) = ω₀ J_z + ω a†a + (λ/√(2j)) (a† J₋ + a J₊)            [Rwa]
struct ModelParams {
    double omega = 1.0;    // field frequency (ħ = 1)
    double omega0 = 1.0;   // atomic level splitting
    double lambda = 0.0;   // atom-field coupling
    double j = 20.0;       // pseudospin length, half-integer
    int n_max = 350;       // boson cutoff
    Variant variant = Variant::Full;

    // λ_c = √(ω ω₀)/2; the RWA critical coupling is 2λ_c.
    double critical_coupling() const;

    void validate() const;  // throws ConfigError

    ModelParams with_lambda(double new_lambda) const {
        ModelParams p = *this;
        p.lambda = new_lambda;
        return p;
    }
    ModelParams with_n_max(int new_n_max) const {
        ModelParams p = *this;
        p.n_max = new_n_max;
        return p;
    }
};

// Dense real symmetric H(λ) over `basis`.  Entries appear only between
// states with |Δn| ≤ 1, |Δm| ≤ 1; the matrix equals its transpose exactly
// because H = diag + λ·H′ with H′ assembled once per unordered pair.
Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const Basis& basis);

// The λ-independent interaction operator H′ = [H(λ+δλ) - H(λ)]/δλ:
// (1/√(2j))(a†+a)(J₊+J₋) for Full, (1/√(2j))(a†J₋ + aJ₊) for Rwa.
Eigen::MatrixXd build_perturbation_operator(const ModelParams& params, const Basis& basis);

int default_probe_increment(int n_max);

// Largest K with |a_k - b_k| ≤ tol for all k < K (spectra sorted ascending).
int prefix_agreement_count(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol);

// Number of truncation-converged eigenvalues: diagonalizes at n_max and at
// n_max + probe_increment and returns the largest K such that the first K
// ascending eigenvalues agree within tol.  K = 0 signals an unusable cutoff.
// Pass the already-computed spectrum at n_max to skip one diagonalization.
int converged_state_count(const ModelParams& params, const Basis& basis,
                          double tol = 1e-8, int probe_increment = 0,
                          const Eigen::VectorXd* energies_at_n_max = nullptr);

} // namespace dicke
