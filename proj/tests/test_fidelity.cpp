#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include "dicke/fidelity.hpp"

using namespace dicke;

namespace {

Eigen::MatrixXd random_symmetric(Eigen::Index n, std::mt19937& rng, double scale = 1.0) {
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = 0; b <= a; ++b) m(a, b) = m(b, a) = gauss(rng);
    }
    return m;
}

FaTrace synthetic_trace(const Eigen::VectorXd& times, const Eigen::VectorXd& modulus) {
    FaTrace t;
    t.times = times;
    t.modulus = modulus;
    t.values.resize(times.size());
    for (Eigen::Index k = 0; k < times.size(); ++k) t.values[k] = modulus[k];
    return t;
}

} // namespace

TEST_CASE("zero perturbation keeps the trace at unity") {
    std::mt19937 rng(61);
    const EigenDecomposition d = diagonalize(random_symmetric(16, rng));
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(64, 0.0, 30.0);
    const FaTrace trace = fidelity_amplitude(d, d, {3, 12}, times);
    CHECK(trace.values[0] == std::complex<double>(1.0, 0.0));
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        CHECK(trace.modulus[k] == doctest::Approx(1.0).epsilon(1e-10));
    }
}

TEST_CASE("single-state window with two overlap weights beats analytically") {
    Eigen::MatrixXd h0(2, 2), h1(2, 2);
    h0 << 0.0, 0.3, 0.3, 1.0;
    h1 << 0.15, 0.42, 0.42, 0.88;
    const EigenDecomposition unpert = diagonalize(h0);
    const EigenDecomposition pert = diagonalize(h1);

    const OverlapSet s = overlap_weights(unpert, pert, 0);
    const double p = s.weight[0];
    const double e1 = s.energy[0], e2 = s.energy[1];

    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(80, 0.0, 40.0);
    const FaTrace trace = fidelity_amplitude(unpert, pert, {0, 1}, times);
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        const double expected = p * p + (1.0 - p) * (1.0 - p) +
                                2.0 * p * (1.0 - p) * std::cos((e1 - e2) * times[k]);
        CHECK(trace.modulus[k] * trace.modulus[k] == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("trace equals the characteristic function of the averaged overlaps") {
    std::mt19937 rng(67);
    const EigenDecomposition a = diagonalize(random_symmetric(20, rng));
    const EigenDecomposition b = diagonalize(random_symmetric(20, rng));
    const IndexRange window{5, 15};
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(200, 0.0, 25.0);

    const FaTrace trace = fidelity_amplitude(a, b, window, times);
    const OverlapSet overlaps = averaged_overlaps(a, b, window);
    const Eigen::VectorXcd phi = characteristic_function(overlaps, times);
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        CHECK(std::abs(trace.values[k] - phi[k] / overlaps.total_weight) < 1e-9);
    }
}

TEST_CASE("time reversal conjugates the trace and modulus stays bounded") {
    std::mt19937 rng(71);
    const EigenDecomposition a = diagonalize(random_symmetric(14, rng));
    const EigenDecomposition b = diagonalize(random_symmetric(14, rng));
    Eigen::VectorXd times(9);
    times << -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0;
    const FaTrace trace = fidelity_amplitude(a, b, {2, 10}, times);
    for (Eigen::Index k = 0; k < times.size(); ++k) {
        CHECK(trace.modulus[k] <= 1.0 + 1e-9);
        const Eigen::Index mirror = times.size() - 1 - k;
        CHECK(std::abs(trace.values[k] - std::conj(trace.values[mirror])) < 1e-12);
    }
}

TEST_CASE("averaged Loschmidt echo identities") {
    SUBCASE("algebraic endpoints") {
        Eigen::VectorXcd trace(2);
        trace << std::complex<double>(20.0, 0.0), std::complex<double>(0.0, 0.0);
        const Eigen::VectorXd avg = averaged_loschmidt(trace, 20);
        CHECK(avg[0] == doctest::Approx(1.0).epsilon(1e-14));  // O(0) = d
        CHECK(avg[1] == doctest::Approx(1.0 / 21.0).epsilon(1e-14));  // echo floor
        CHECK_THROWS_AS(averaged_loschmidt(trace, 0), ConfigError);
    }

    SUBCASE("Monte-Carlo Haar average matches the closed form") {
        const Eigen::Index dim = 12;
        std::mt19937 rng(73);
        const EigenDecomposition a = diagonalize(random_symmetric(dim, rng));
        const EigenDecomposition b = diagonalize(random_symmetric(dim, rng));
        Eigen::VectorXd times(4);
        times << 0.3, 0.9, 2.1, 5.0;
        const Eigen::VectorXcd trace = sector_trace(a, b, times);
        const Eigen::VectorXd predicted = averaged_loschmidt(trace, static_cast<std::size_t>(dim));

        std::normal_distribution<double> gauss(0.0, 1.0);
        const int samples = 4000;
        for (Eigen::Index ti = 0; ti < times.size(); ++ti) {
            const double t = times[ti];
            // A(t) = V' e^{+iE't} V'^T V e^{-iEt} V^T
            Eigen::MatrixXcd phase_p(dim, dim), phase_u(dim, dim);
            phase_p.setZero();
            phase_u.setZero();
            for (Eigen::Index k = 0; k < dim; ++k) {
                phase_p(k, k) = std::polar(1.0, b.energies[k] * t);
                phase_u(k, k) = std::polar(1.0, -a.energies[k] * t);
            }
            const Eigen::MatrixXcd op = b.vectors * phase_p * b.vectors.transpose() *
                                        a.vectors * phase_u * a.vectors.transpose();
            double mean = 0.0, m2 = 0.0;
            for (int s = 1; s <= samples; ++s) {
                Eigen::VectorXcd psi(dim);
                for (Eigen::Index k = 0; k < dim; ++k) psi[k] = {gauss(rng), gauss(rng)};
                psi.normalize();
                const double echo = std::norm(std::complex<double>(psi.dot(op * psi)));
                const double delta = echo - mean;
                mean += delta / s;
                m2 += delta * (echo - mean);
            }
            const double se = std::sqrt(m2 / (samples - 1.0) / samples);
            CHECK(std::abs(mean - predicted[ti]) < 3.0 * se);
        }
    }
}

TEST_CASE("decay fit recovers synthetic generators") {
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(240, 0.0, 24.0);

    SUBCASE("pure Gaussian") {
        Eigen::VectorXd mod(times.size());
        for (Eigen::Index k = 0; k < times.size(); ++k) {
            mod[k] = std::exp(-std::pow(0.2 * times[k], 2));
        }
        const DecayFit fit = fit_decay(synthetic_trace(times, mod), 0.0, 24.0);
        CHECK(fit.a == doctest::Approx(1.0).epsilon(0.02));
        CHECK(fit.b == doctest::Approx(0.2).epsilon(0.05));
        CHECK(fit.residual < 1e-6);
    }
    SUBCASE("pure exponential") {
        Eigen::VectorXd mod(times.size());
        for (Eigen::Index k = 0; k < times.size(); ++k) mod[k] = std::exp(-0.3 * times[k]);
        const DecayFit fit = fit_decay(synthetic_trace(times, mod), 0.0, 24.0);
        CHECK(fit.a <= 0.05);
        CHECK(fit.c == doctest::Approx(0.3).epsilon(0.04));
        CHECK(fit.residual < 1e-6);
    }
    SUBCASE("gaussian-exponential mixture") {
        const double a = 0.55, b = 0.25, c = 0.12;
        Eigen::VectorXd mod(times.size());
        for (Eigen::Index k = 0; k < times.size(); ++k) {
            mod[k] = a * std::exp(-b * b * times[k] * times[k]) + (1 - a) * std::exp(-c * times[k]);
        }
        const DecayFit fit = fit_decay(synthetic_trace(times, mod), 0.0, 24.0);
        CHECK(fit.a == doctest::Approx(a).epsilon(0.05));
        CHECK(fit.b == doctest::Approx(b).epsilon(0.05));
        CHECK(fit.c == doctest::Approx(c).epsilon(0.05));
    }
    SUBCASE("a flat trace is ill-posed") {
        const Eigen::VectorXd mod = Eigen::VectorXd::Constant(times.size(), 0.97);
        CHECK_THROWS_AS(fit_decay(synthetic_trace(times, mod), 0.0, 24.0), NumericalError);
    }
    SUBCASE("too few samples in range") {
        const Eigen::VectorXd mod = Eigen::VectorXd::Constant(times.size(), 0.5);
        CHECK_THROWS_AS(fit_decay(synthetic_trace(times, mod), 0.0, 0.5), ConfigError);
    }
}

TEST_CASE("decay comparison tabulates traces on one shared grid") {
    ModelParams base;
    base.j = 1.5;
    base.n_max = 16;
    base.variant = Variant::Full;
    const auto provider = make_direct_provider(Parity::Odd);
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(40, 0.0, 12.0);
    const std::vector<double> lambda0s{0.2, 0.5};
    const std::vector<double> deltas{0.02, 0.06};

    const DecayTable table = decay_comparison(base, lambda0s, {4, 12}, deltas, times, provider);
    REQUIRE(table.traces.size() == 2);
    REQUIRE(table.traces[0].size() == 2);
    for (std::size_t li = 0; li < lambda0s.size(); ++li) {
        for (std::size_t di = 0; di < deltas.size(); ++di) {
            const FaTrace& trace = table.traces[li][di];
            CHECK(trace.values[0] == std::complex<double>(1.0, 0.0));
            CHECK(trace.modulus.maxCoeff() <= 1.0 + 1e-9);
            // matches a direct evaluation of the same pair
            const auto unpert = provider(base.with_lambda(lambda0s[li]));
            const auto pert = provider(base.with_lambda(lambda0s[li] + deltas[di]));
            const FaTrace direct = fidelity_amplitude(*unpert, *pert, {4, 12}, times);
            CHECK((trace.modulus - direct.modulus).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
    CHECK_THROWS_AS(decay_comparison(base, {}, {4, 12}, deltas, times, provider), ConfigError);
}

TEST_CASE("trace utilities") {
    const Eigen::VectorXd times = Eigen::VectorXd::LinSpaced(100, 0.0, 10.0);
    Eigen::VectorXd mod(times.size());
    for (Eigen::Index k = 0; k < times.size(); ++k) mod[k] = std::exp(-0.4 * times[k]);
    CHECK(max_adjacent_drop(synthetic_trace(times, mod)) < 0.05);

    const Eigen::VectorXd grid = default_time_grid(0.5, 1.0, 600);
    CHECK(grid.size() == 600);
    CHECK(grid[grid.size() - 1] == doctest::Approx(40.0));
    const Eigen::VectorXd fallback = default_time_grid(0.0, 2.0, 10);
    CHECK(fallback[fallback.size() - 1] == doctest::Approx(10.0 * std::numbers::pi));
}
