// production_scale — quantitative targets at full production size (j = 20, n = 350).
//
// Slow (tens of minutes of dense eigensolves); skipped unless
// DICKESIM_PAPER_SCALE=1 is set.  Exits 77 when skipped so ctest reports it
// as a skip, 0/1 otherwise.
//
// Window conventions: the averaging window "200 states around eigenstate
// 500" reads two ways.  Counting within the odd sector gives states
// [400, 600); counting across both parity sectors puts eigenstate 500 near
// odd index 250, i.e. odd states [200, 300).  The measured spacing profile
// matches the quoted ΔE ≈ 0.07 only under the second reading (the first
// gives 0.052), and only the second makes ΔE/max|H'| land on the quoted
// δλ* ≈ 0.003, so that is the reading asserted here.  Both are printed.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string_view>

#include "dicke/hamiltonian.hpp"
#include "dicke/ldos.hpp"
#include "dicke/spectral.hpp"

using namespace dicke;

namespace {

bool check(bool ok, const char* what, double value) {
    std::printf("[%s] %s (%.6g)\n", ok ? "PASS" : "FAIL", what, value);
    std::fflush(stdout);
    return ok;
}

} // namespace

int main() {
    const char* gate = std::getenv("DICKESIM_PAPER_SCALE");
    if (gate == nullptr || std::string_view(gate) != "1") {
        std::printf("skipped: set DICKESIM_PAPER_SCALE=1 to run the production-size checks\n");
        return 77;
    }

    ModelParams p;
    p.lambda = 0.8;
    p.j = 20.0;
    p.n_max = 350;
    p.variant = Variant::Full;

    const Basis basis = Basis::sector(p.j, p.n_max, Parity::Odd);
    bool ok = check(basis.size() == 7195, "odd sector dimension 7195",
                    static_cast<double>(basis.size()));

    std::printf("diagonalizing at n_max = %d...\n", p.n_max);
    std::fflush(stdout);
    const EigenDecomposition decomp = diagonalize(build_hamiltonian(p, basis));

    std::printf("probing cutoff n_max = %d...\n", p.n_max + 35);
    std::fflush(stdout);
    const int converged = converged_state_count(p, basis, 1e-6, 35, &decomp.energies);
    ok = check(converged >= 700, "at least 700 converged states (covers both window readings)",
               converged) && ok;

    const Eigen::MatrixXd perturbation = build_perturbation_operator(p, basis);

    // sector-counted reading of the window (odd states [400, 600))
    const IndexRange sector_window{400, 600};
    const double sector_spacing = mean_level_spacing(decomp, sector_window);
    std::printf("       odd states [400, 600): mean spacing %.6g\n", sector_spacing);
    const double sector_delta_star = perturbation_threshold(
        perturbation_profile(perturbation, decomp, sector_window, 100), sector_spacing);
    ok = check(sector_delta_star >= 0.001 && sector_delta_star <= 0.009,
               "validity threshold near 0.003, odd states [400, 600)", sector_delta_star) && ok;

    // both-sector counting: eigenstate 500 of the interleaved spectrum
    const IndexRange reference_window{200, 300};
    const double spacing = mean_level_spacing(decomp, reference_window);
    ok = check(spacing >= 0.06 && spacing <= 0.08,
               "mean level spacing near 0.07, odd states [200, 300)", spacing) && ok;
    const double delta_star = perturbation_threshold(
        perturbation_profile(perturbation, decomp, reference_window, 100), spacing);
    ok = check(delta_star >= 0.001 && delta_star <= 0.009,
               "validity threshold near 0.003, odd states [200, 300)", delta_star) && ok;

    return ok ? 0 : 1;
}
