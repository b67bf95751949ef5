#include "dicke/hamiltonian.hpp"

#include <cmath>

#include "dicke/spectral.hpp"

namespace dicke {

const char* to_string(Variant v) {
    return v == Variant::Full ? "full" : "rwa";
}

Variant variant_from_string(const std::string& s) {
    if (s == "full") return Variant::Full;
    if (s == "rwa") return Variant::Rwa;
    throw ConfigError("unknown model variant '" + s + "' (expected full|rwa)");
}

double ModelParams::critical_coupling() const {
    return 0.5 * std::sqrt(omega * omega0);
}

void ModelParams::validate() const {
    if (!(omega > 0.0)) throw ConfigError("omega must be positive");
    if (!(omega0 > 0.0)) throw ConfigError("omega0 must be positive");
    if (!(lambda >= 0.0)) throw ConfigError("lambda must be non-negative");
    checked_two_j(j);
    if (n_max < 1) throw ConfigError("n_max must be at least 1");
}

namespace {

void check_basis(const ModelParams& params, const Basis& basis) {
    if (!basis.compatible_with(params.j, params.n_max)) {
        throw ConfigError("basis was built for different (j, n_max) than params");
    }
}

// spin ladder coefficient c±(m) = √(j(j+1) - m(m±1))
double spin_raise(double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m + 1.0)); }
double spin_lower(double j, double m) { return std::sqrt(j * (j + 1.0) - m * (m - 1.0)); }

} // namespace

Eigen::MatrixXd build_perturbation_operator(const ModelParams& params, const Basis& basis) {
    params.validate();
    check_basis(params, basis);

    const auto dim = static_cast<Eigen::Index>(basis.size());
    const double j = basis.j();
    const double g = 1.0 / std::sqrt(2.0 * j);
    Eigen::MatrixXd hp = Eigen::MatrixXd::Zero(dim, dim);

    // Assemble only pairs where the second state has n+1 bosons; the
    // transpose entry is the hermitian counterpart (a vs a†).
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const BasisState& s = basis.state(a);
        const double m = basis.m_of(s);
        const double boson = std::sqrt(static_cast<double>(s.n + 1));

        // a† J₋ : (n, m) -> (n+1, m-1), co-rotating
        if (const std::size_t b = basis.index_of(s.n + 1, s.m_idx - 1); b != Basis::npos) {
            const double v = g * boson * spin_lower(j, m);
            hp(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
            hp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
        }
        // a† J₊ : (n, m) -> (n+1, m+1), counter-rotating (Full only)
        if (params.variant == Variant::Full) {
            if (const std::size_t b = basis.index_of(s.n + 1, s.m_idx + 1); b != Basis::npos) {
                const double v = g * boson * spin_raise(j, m);
                hp(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
                hp(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
            }
        }
    }
    return hp;
}

Eigen::MatrixXd build_hamiltonian(const ModelParams& params, const Basis& basis) {
    params.validate();
    check_basis(params, basis);

    Eigen::MatrixXd h = params.lambda * build_perturbation_operator(params, basis);
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const BasisState& s = basis.state(a);
        const auto ia = static_cast<Eigen::Index>(a);
        h(ia, ia) = params.omega * s.n + params.omega0 * basis.m_of(s);
    }
    return h;
}

int default_probe_increment(int n_max) {
    return std::max(10, n_max / 10);
}

int prefix_agreement_count(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
    const Eigen::Index n = std::min(a.size(), b.size());
    int k = 0;
    while (k < n && std::abs(a[k] - b[k]) <= tol) ++k;
    return k;
}

int converged_state_count(const ModelParams& params, const Basis& basis,
                          double tol, int probe_increment,
                          const Eigen::VectorXd* energies_at_n_max) {
    params.validate();
    check_basis(params, basis);
    if (!(tol > 0.0)) throw ConfigError("convergence tol must be positive");
    if (probe_increment < 0) throw ConfigError("probe_increment must be non-negative");
    if (probe_increment == 0) {
        // comparing a spectrum to itself: every state counts as converged
        return static_cast<int>(basis.size());
    }

    Eigen::VectorXd base;
    if (energies_at_n_max != nullptr) {
        base = *energies_at_n_max;
    } else {
        base = symmetric_eigenvalues(build_hamiltonian(params, basis));
    }

    const ModelParams probe_params = params.with_n_max(params.n_max + probe_increment);
    const Basis probe_basis = basis.sector()
        ? Basis::sector(params.j, probe_params.n_max, *basis.sector())
        : Basis::full(params.j, probe_params.n_max);
    const Eigen::VectorXd probe = symmetric_eigenvalues(build_hamiltonian(probe_params, probe_basis));
    return prefix_agreement_count(base, probe, tol);
}

} // namespace dicke
