#include <doctest.h>

#include <cmath>
#include <random>

#include "dicke/ldos.hpp"

using namespace dicke;

namespace {

EigenDecomposition decompose(const Eigen::MatrixXd& h) { return diagonalize(h); }

Eigen::MatrixXd two_level(double lambda) {
    Eigen::MatrixXd h(2, 2);
    h << 0.5, lambda, lambda, 0.5;
    return h;
}

Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) m(a, b) = m(b, a) = gauss(rng);
    }
    return m;
}

} // namespace

TEST_CASE("zero perturbation puts all weight on the matching state") {
    std::mt19937 rng(11);
    const EigenDecomposition d = decompose(random_symmetric(12, rng));
    const OverlapSet s = overlap_weights(d, d, 4);
    CHECK(s.total_weight == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.weight[4] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(width_gamma(s) < 1e-10);
}

TEST_CASE("degenerate two-level model: eigenvectors never rotate") {
    const double lambda = 0.4, delta = 0.05;
    const EigenDecomposition unpert = decompose(two_level(lambda));
    const EigenDecomposition pert = decompose(two_level(lambda + delta));

    for (const std::size_t i : {0u, 1u}) {
        const OverlapSet s = overlap_weights(unpert, pert, i);
        CHECK(s.weight[i] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(s.energy[i]) == doctest::Approx(delta).epsilon(1e-10));
    }
    // window over both states: two masses at ±δλ, so Γ accumulates to δλ
    const OverlapSet both = averaged_overlaps(unpert, pert, {0, 2});
    CHECK(std::abs(both.mean_energy) < 1e-12);
    CHECK(width_gamma(both) == doctest::Approx(delta).epsilon(1e-9));
}

TEST_CASE("first-order perturbation theory on a small instance") {
    // diagonal unperturbed part with well-separated levels
    const Eigen::Index n = 6;
    Eigen::VectorXd e0(n);
    e0 << 0.0, 1.1, 2.3, 3.6, 5.0, 6.5;
    std::mt19937 rng(3);
    const Eigen::MatrixXd hp = random_symmetric(n, rng, 0.5);
    const double delta = 1e-3;

    const EigenDecomposition unpert = decompose(Eigen::MatrixXd(e0.asDiagonal()));
    const EigenDecomposition pert =
        decompose(Eigen::MatrixXd(e0.asDiagonal()) + delta * hp);
    // the unperturbed basis is the identity here, so hp is already in it
    for (Eigen::Index i = 0; i < n; ++i) {
        const OverlapSet s = overlap_weights(unpert, pert, static_cast<std::size_t>(i));
        double depletion = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double first_order = std::pow(delta * hp(j, i) / (e0[i] - e0[j]), 2);
            depletion += first_order;
            CHECK(s.weight[j] == doctest::Approx(first_order).epsilon(0.02));
        }
        CHECK(s.weight[i] == doctest::Approx(1.0 - depletion).epsilon(1e-6));
    }
}

TEST_CASE("first-order width matches the exact width for small perturbations") {
    const Eigen::Index n = 40;
    Eigen::VectorXd e0(n);
    for (Eigen::Index k = 0; k < n; ++k) e0[k] = 1.05 * static_cast<double>(k);
    std::mt19937 rng(17);
    const Eigen::MatrixXd hp = random_symmetric(n, rng, 0.4);
    const double delta = 2e-3;
    const IndexRange window{10, 30};

    const EigenDecomposition unpert = decompose(Eigen::MatrixXd(e0.asDiagonal()));
    const EigenDecomposition pert = decompose(Eigen::MatrixXd(e0.asDiagonal()) + delta * hp);
    const double gamma_exact = width_gamma(averaged_overlaps(unpert, pert, window));

    OverlapSet pt;
    const auto w_count = static_cast<Eigen::Index>(window.size());
    pt.energy.resize(n * w_count);
    pt.weight.resize(n * w_count);
    for (Eigen::Index c = 0; c < w_count; ++c) {
        const Eigen::Index i = static_cast<Eigen::Index>(window.lo) + c;
        double depletion = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const Eigen::Index k = c * n + j;
            pt.energy[k] = e0[j] + delta * hp(j, j) - e0[i];
            if (j == i) continue;
            const double w = std::pow(delta * hp(j, i) / (e0[i] - e0[j]), 2);
            pt.weight[k] = w / static_cast<double>(w_count);
            depletion += w;
        }
        pt.weight[c * n + i] = (1.0 - depletion) / static_cast<double>(w_count);
    }
    pt.total_weight = pt.weight.sum();
    pt.mean_energy = pt.weight.dot(pt.energy) / pt.total_weight;
    const double gamma_pt = width_gamma(pt);

    CHECK(gamma_exact == doctest::Approx(gamma_pt).epsilon(0.10));
}

TEST_CASE("width accumulation rules") {
    SUBCASE("finely discretized uniform density on [-1, 1]") {
        const Eigen::Index n = 20001;
        OverlapSet s;
        s.energy = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
        s.weight = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
        s.total_weight = 1.0;
        s.mean_energy = 0.0;
        CHECK(width_gamma(s) == doctest::Approx(0.7).epsilon(1e-3));
    }
    SUBCASE("point mass") {
        OverlapSet s;
        s.energy = Eigen::VectorXd::Constant(1, 2.5);
        s.weight = Eigen::VectorXd::Constant(1, 1.0);
        s.total_weight = 1.0;
        s.mean_energy = 2.5;
        CHECK(width_gamma(s) == 0.0);
    }
    SUBCASE("two equal masses at plus and minus one") {
        OverlapSet s;
        s.energy.resize(2);
        s.energy << -1.0, 1.0;
        s.weight = Eigen::VectorXd::Constant(2, 0.5);
        s.total_weight = 1.0;
        s.mean_energy = 0.0;
        CHECK(width_gamma(s) == doctest::Approx(1.0).epsilon(1e-14));
    }
    SUBCASE("growing the target never shrinks the width") {
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Index n = 50;
            OverlapSet s;
            s.energy.resize(n);
            s.weight.resize(n);
            for (Eigen::Index k = 0; k < n; ++k) {
                s.energy[k] = 4.0 * unit(rng) - 2.0;
                s.weight[k] = unit(rng);
            }
            s.weight /= s.weight.sum();
            s.total_weight = s.weight.sum();
            s.mean_energy = s.weight.dot(s.energy) / s.total_weight;
            CHECK(width_gamma(s, 0.9) >= width_gamma(s, 0.7));
        }
    }
    SUBCASE("insufficient weight is an error") {
        OverlapSet s;
        s.energy = Eigen::VectorXd::Constant(1, 0.0);
        s.weight = Eigen::VectorXd::Constant(1, 0.5);
        s.total_weight = 0.5;
        s.mean_energy = 0.0;
        CHECK_THROWS_AS(width_gamma(s, 0.7), NumericalError);
    }
}

TEST_CASE("overlap weights are symmetric under swapping the roles") {
    std::mt19937 rng(31);
    const EigenDecomposition a = decompose(random_symmetric(10, rng));
    const EigenDecomposition b = decompose(random_symmetric(10, rng));
    for (std::size_t i = 0; i < 10; ++i) {
        const OverlapSet forward = overlap_weights(a, b, i);
        for (std::size_t j = 0; j < 10; ++j) {
            const OverlapSet backward = overlap_weights(b, a, j);
            CHECK(forward.weight[static_cast<Eigen::Index>(j)] ==
                  doctest::Approx(backward.weight[static_cast<Eigen::Index>(i)]).epsilon(1e-12));
        }
    }
}

TEST_CASE("every single-state weight list is normalized") {
    std::mt19937 rng(37);
    const EigenDecomposition a = decompose(random_symmetric(30, rng));
    const EigenDecomposition b = decompose(random_symmetric(30, rng));
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(overlap_weights(a, b, i).total_weight == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("averaged ldos histogram bookkeeping") {
    std::mt19937 rng(41);
    const EigenDecomposition a = decompose(random_symmetric(24, rng));
    const EigenDecomposition b = decompose(random_symmetric(24, rng));

    SUBCASE("default grid keeps every count") {
        const LdosHistogram h = averaged_ldos(a, b, {4, 16});
        CHECK(h.weights.sum() + h.leakage == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(h.leakage == 0.0);
        CHECK(h.gamma > 0.0);
    }
    SUBCASE("single state at zero perturbation occupies one bin") {
        const LdosHistogram h = averaged_ldos(a, a, {7, 8});
        CHECK(h.weights.maxCoeff() > 1.0 - 1e-9);
        const double bin_width = h.bin_edges[1] - h.bin_edges[0];
        CHECK(h.gamma < bin_width);
        CHECK(h.weights.sum() + h.leakage == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("an explicit narrow grid reports leakage") {
        const LdosHistogram h =
            averaged_ldos(a, b, {4, 16}, 0.0, std::pair{-0.5, 0.5});
        CHECK(h.leakage > 0.0);
        CHECK(h.weights.sum() + h.leakage == doctest::Approx(1.0).epsilon(1e-9));
        if (h.leakage > 0.01) CHECK(h.leakage_warning);
    }
    SUBCASE("empty window is rejected") {
        CHECK_THROWS_AS(averaged_ldos(a, b, {5, 5}), ConfigError);
    }
}

TEST_CASE("characteristic function of a two-mass distribution") {
    const double p = 0.3, e1 = -0.8, e2 = 1.7;
    OverlapSet s;
    s.energy.resize(2);
    s.energy << e1, e2;
    s.weight.resize(2);
    s.weight << p, 1.0 - p;
    s.total_weight = 1.0;
    s.mean_energy = p * e1 + (1.0 - p) * e2;

    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(50, 0.0, 12.0);
    const Eigen::VectorXcd phi = characteristic_function(s, times);
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        const double expected =
            p * p + (1.0 - p) * (1.0 - p) + 2.0 * p * (1.0 - p) * std::cos((e1 - e2) * times[k]);
        CHECK(std::norm(phi[k]) == doctest::Approx(expected).epsilon(1e-12));
    }
    CHECK(phi[0] == std::complex<double>(1.0, 0.0));
}

TEST_CASE("segmented log-log fit recovers synthetic regimes") {
    // piecewise power law: slope 1, then 2, then 1
    std::vector<double> x, y;
    for (int k = 0; k < 30; ++k) {
        const double lx = -8.0 + 0.25 * k;
        x.push_back(lx);
        double ly;
        if (lx < -6.0) ly = lx;                       // slope 1
        else if (lx < -3.0) ly = 2.0 * lx + 6.0;      // slope 2, continuous
        else ly = lx + 3.0;                           // slope 1 again
        y.push_back(ly);
    }
    const auto segs = segmented_linear_fit(x, y, 3, 4);
    REQUIRE(segs.size() == 3);
    CHECK(segs[0].slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(segs[1].slope == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(segs[2].slope == doctest::Approx(1.0).epsilon(1e-9));

    const auto chosen = best_segmented_fit(x, y, 3, 4);
    CHECK(chosen.size() == 3);
}

TEST_CASE("gamma sweep on a small model is deterministic across worker counts") {
    ModelParams p;
    p.lambda = 0.2;
    p.j = 1.5;
    p.n_max = 16;
    p.variant = Variant::Full;
    const std::vector<double> deltas{0.01, 0.02, 0.04, 0.08};
    const auto provider = make_direct_provider(Parity::Odd);
    const SweepResult serial = gamma_vs_delta(p, {5, 15}, deltas, provider, 1);
    const SweepResult threaded = gamma_vs_delta(p, {5, 15}, deltas, provider, 2);
    REQUIRE(serial.gamma.size() == deltas.size());
    for (std::size_t k = 0; k < deltas.size(); ++k) {
        CHECK(serial.gamma[k] > 0.0);
        CHECK(serial.gamma[k] == threaded.gamma[k]);
        // continuity at δλ = 0: the width shrinks toward the small end
        if (k > 0) CHECK(serial.gamma[k] > serial.gamma[k - 1]);
    }
}

TEST_CASE("perturbation profile of an operator diagonal in the eigenbasis") {
    std::mt19937 rng(53);
    const Eigen::MatrixXd h = random_symmetric(18, rng);
    const EigenDecomposition d = decompose(h);
    // H' = H is a function of H, hence diagonal in its eigenbasis
    const PerturbationProfile profile = perturbation_profile(h, d, {4, 14}, 4);
    for (std::size_t k = 0; k < profile.offsets.size(); ++k) {
        if (profile.offsets[k] != 0) CHECK(profile.mean_abs[k] < 1e-10);
    }
    // residual off-diagonals are rounding noise, so the threshold blows up
    CHECK(perturbation_threshold(profile, 0.5) > 1e9);

    PerturbationProfile exactly_diagonal;
    exactly_diagonal.offsets = {-1, 0, 1};
    exactly_diagonal.mean_abs = {0.0, 3.0, 0.0};
    CHECK(perturbation_threshold(exactly_diagonal, 0.5) ==
          std::numeric_limits<double>::infinity());
}

TEST_CASE("perturbation threshold from a banded profile") {
    PerturbationProfile profile;
    profile.offsets = {-2, -1, 0, 1, 2};
    profile.mean_abs = {0.5, 2.0, 9.0, 2.0, 0.5};
    profile.max_abs_offdiag = 3.5;
    CHECK(profile.max_off_diagonal() == 2.0);
    CHECK(perturbation_threshold(profile, 0.07) == doctest::Approx(0.02));
}
