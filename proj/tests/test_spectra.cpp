#include <doctest.h>

#include <floquet/circuit.hpp>
#include <floquet/rng.hpp>
#include <floquet/spectra.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

using namespace floquet;

namespace {

constexpr double kPi = std::numbers::pi;

UnitaryMatrix diag_phases(const std::vector<double>& phases) {
    const Eigen::Index n = static_cast<Eigen::Index>(phases.size());
    UnitaryMatrix u = UnitaryMatrix::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        u(j, j) = std::polar(1.0, phases[static_cast<std::size_t>(j)]);
    return u;
}

// Midpoint-rule average of f over [a, b].
template <typename F>
double window_average(F&& f, double a, double b, int points) {
    double acc = 0.0;
    const double h = (b - a) / points;
    for (int k = 0; k < points; ++k) acc += f(a + (k + 0.5) * h);
    return acc / points;
}

// Series coefficients of an analytic function via DFT on a circle of radius r;
// aliasing error is bounded by the tail beyond m terms, ~ 2^-64 here.
std::vector<double> taylor_coeffs(int count, double r, int m) {
    std::vector<double> out;
    for (int n = 1; n <= count; ++n) {
        std::complex<double> acc{0.0, 0.0};
        for (int j = 0; j < m; ++j) {
            const double ang = 2.0 * kPi * j / m;
            const std::complex<double> x = std::polar(r, ang);
            acc += sigma_correlator(x) * std::polar(1.0, -ang * n);
        }
        out.push_back((acc / static_cast<double>(m)).real() / std::pow(r, n));
    }
    return out;
}

}  // namespace

TEST_SUITE("spectra") {

TEST_CASE("eigenphases wrap to [0, 2pi) and multiply back to the determinant") {
    const QuasiEnergySpectrum id4 = eigenphases(UnitaryMatrix::Identity(4, 4));
    REQUIRE(id4.phases.size() == 4);
    for (double th : id4.phases) CHECK(th == 0.0);

    const QuasiEnergySpectrum pm = eigenphases(diag_phases({0.0, kPi}));
    REQUIRE(pm.phases.size() == 2);
    std::vector<double> sorted = pm.phases;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sorted[1] == doctest::Approx(kPi).epsilon(1e-12));

    const UnitaryMatrix u = cue_sample(8, SeedSpec{17, 0});
    const QuasiEnergySpectrum sp = eigenphases(u);
    std::complex<double> prod{1.0, 0.0};
    for (double th : sp.phases) {
        CHECK(th >= 0.0);
        CHECK(th < 2.0 * kPi);
        prod *= std::polar(1.0, th);
    }
    CHECK(std::abs(prod - u.determinant()) <= 1e-8);
}

TEST_CASE("eigenphases rejects non-unitary input") {
    UnitaryMatrix m = UnitaryMatrix::Identity(3, 3);
    m(0, 0) = 2.0;
    CHECK_THROWS_AS(eigenphases(m), std::runtime_error);
}

TEST_CASE("sff_exact matches hand values and matrix powers") {
    QuasiEnergySpectrum idspec;
    idspec.phases.assign(5, 0.0);
    CHECK(sff_exact(idspec, 0) == doctest::Approx(25.0));
    CHECK(sff_exact(idspec, 3) == doctest::Approx(25.0));

    const QuasiEnergySpectrum pm = eigenphases(diag_phases({0.0, kPi}));
    CHECK(sff_exact(pm, 1) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sff_exact(pm, 2) == doctest::Approx(4.0).epsilon(1e-12));

    for (int dim : {8, 32, 64}) {
        const UnitaryMatrix u = cue_sample(dim, SeedSpec{23, static_cast<std::uint64_t>(dim)});
        const QuasiEnergySpectrum sp = eigenphases(u);
        for (long long t : {1LL, 2LL, 3LL, 5LL, 16LL}) {
            UnitaryMatrix ut = UnitaryMatrix::Identity(dim, dim);
            for (long long k = 0; k < t; ++k) ut = ut * u;
            const double direct = std::norm(ut.trace());
            CHECK(sff_exact(sp, t) == doctest::Approx(direct).epsilon(1e-8));
            CHECK(sff_exact(sp, -t) == doctest::Approx(sff_exact(sp, t)).epsilon(1e-12));
        }
        CHECK(sff_exact(sp, 0) == doctest::Approx(static_cast<double>(dim) * dim));
    }
}

TEST_CASE("sampled spectra are deterministic and worker-count independent") {
    const EnsembleModel model = EnsembleModel::from_single_cue(6);
    const auto a = sample_spectra(model, 20, 505, 1);
    const auto b = sample_spectra(model, 20, 505, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t s = 0; s < a.size(); ++s) {
        REQUIRE(a[s].phases.size() == b[s].phases.size());
        for (std::size_t j = 0; j < a[s].phases.size(); ++j)
            CHECK(a[s].phases[j] == b[s].phases[j]);
    }
}

TEST_CASE("single CUE form factor follows the ramp and plateau") {
    const EnsembleModel model = EnsembleModel::from_single_cue(4);
    const std::vector<long long> ts = {1, 2, 3, 4, 16};
    const auto est = sff_mc(model, ts, 6000, 909, 0);
    REQUIRE(est.size() == ts.size());
    for (const SffEstimate& e : est) {
        REQUIRE(e.n_samples == 6000);
        REQUIRE(e.std_error > 0.0);
        const double pred = cue_sff(4, e.t);
        CHECK(std::abs(e.mean - pred) <= 5.0 * e.std_error);
    }
}

TEST_CASE("circuit form factor at t = 1 matches the exact second moment") {
    const CircuitSpec spec = standard_orderings(OrderingKind::brickwork, 1, 4, 2,
                                                Boundary::periodic, SeedSpec{0, 0});
    const EnsembleModel model = EnsembleModel::from_circuit(spec);
    const auto est = sff_mc(model, {1}, 2000, 1234, 0);
    REQUIRE(est.size() == 1);
    CHECK(std::abs(est[0].mean - 1.0) <= 5.0 * est[0].std_error);
}

TEST_CASE("noninteracting form factor obeys the product law") {
    // K(t) = min(|t|, q)^L away from t = 0; here q = 8, L = 2, t = 2 -> 4.
    const EnsembleModel model = EnsembleModel::from_noninteracting(8, 2);
    CHECK(model.dim() == 64);
    const auto est = sff_mc(model, {2}, 3000, 4321, 0);
    CHECK(std::abs(est[0].mean - 4.0) <= 5.0 * est[0].std_error);
}

TEST_CASE("r2bar_estimate bins ordered pair differences") {
    QuasiEnergySpectrum two;
    two.phases = {0.0, kPi};
    const R2Histogram h = r2bar_estimate({two}, 2);
    REQUIRE(h.densities.size() == 2);
    REQUIRE(h.bin_edges.size() == 3);
    CHECK(h.bin_edges[1] == doctest::Approx(kPi));
    // Both ordered pairs sit at separation pi, in the second bin:
    // density = 2 / (2pi * pi * 1).
    CHECK(h.densities[0] == 0.0);
    CHECK(h.densities[1] == doctest::Approx(2.0 / (2.0 * kPi * kPi)).epsilon(1e-12));

    CHECK_THROWS_AS(r2bar_estimate({}, 2), std::invalid_argument);
    CHECK_THROWS_AS(r2bar_estimate({two}, 0), std::invalid_argument);
}

TEST_CASE("CUE pair histogram matches the bin-averaged prediction") {
    const EnsembleModel model = EnsembleModel::from_single_cue(8);
    const auto spectra = sample_spectra(model, 10000, 777, 0);
    const std::size_t bins = 32;
    const R2Histogram h = r2bar_estimate(spectra, bins);
    REQUIRE(h.densities.size() == bins);
    for (std::size_t b = 0; b < bins; ++b) {
        const double pred = cue_r2bar_bin_average(8, h.bin_edges[b], h.bin_edges[b + 1]);
        REQUIRE(h.std_errors[b] > 0.0);
        CHECK(std::abs(h.densities[b] - pred) <= 5.0 * h.std_errors[b]);
    }
}

TEST_CASE("pair histogram Fourier transform reproduces the form factor") {
    // K(t) = 2pi sum_b estimate_b e^{-i t center_b} w + N for t != 0 once the
    // excluded diagonal is restored.
    const std::size_t n = 8;
    const EnsembleModel model = EnsembleModel::from_single_cue(n);
    const auto spectra = sample_spectra(model, 4000, 31007, 0);
    const std::size_t bins = 64;
    const R2Histogram h = r2bar_estimate(spectra, bins);
    const double w = 2.0 * kPi / bins;

    const auto est_mc = sff_mc(model, {1, 2, 3}, 4000, 886699, 0);
    for (const SffEstimate& e : est_mc) {
        std::complex<double> acc{0.0, 0.0};
        double var = 0.0;
        for (std::size_t b = 0; b < bins; ++b) {
            const double center = 0.5 * (h.bin_edges[b] + h.bin_edges[b + 1]);
            acc += h.densities[b] * std::polar(1.0, -center * static_cast<double>(e.t)) * w;
            var += std::pow(2.0 * kPi * w * h.std_errors[b], 2);
        }
        const double fourier = 2.0 * kPi * acc.real() + static_cast<double>(n);
        const double sigma = std::sqrt(var + e.std_error * e.std_error);
        CHECK(std::abs(fourier - e.mean) <= 5.0 * sigma);
    }
}

TEST_CASE("cue_r2bar closed form values") {
    CHECK(cue_r2bar(3, kPi) == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-12));
    CHECK(cue_r2bar(1, 1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(cue_r2bar(3, 0.0), std::domain_error);
    CHECK_THROWS_AS(cue_r2bar(3, 2.0 * kPi), std::domain_error);

    // Where the fast oscillation crosses its mean value 1/2, the exact and
    // smoothed correlations coincide.
    const std::size_t n = 5;
    const double dphi = kPi / (2.0 * n);
    CHECK(cue_r2bar(n, dphi) == doctest::Approx(sigma_r2bar(n, dphi)).epsilon(1e-12));
}

TEST_CASE("cue_r2bar minus sigma_r2bar is the pure oscillation") {
    const std::size_t n = 7;
    for (int k = 1; k <= 40; ++k) {
        const double dphi = 2.0 * kPi * k / 41.0;
        const double osc = -(std::pow(std::sin(0.5 * n * dphi), 2) - 0.5) /
                           (4.0 * kPi * kPi * std::pow(std::sin(0.5 * dphi), 2));
        CHECK(cue_r2bar(n, dphi) - sigma_r2bar(n, dphi) ==
              doctest::Approx(osc).epsilon(1e-12));
    }
}

TEST_CASE("cue_r2bar_bin_average matches quadrature") {
    const std::size_t n = 8;
    const double a = 0.3;
    const double b = 1.1;
    const double quad = window_average([&](double x) { return cue_r2bar(n, x); }, a, b, 200001);
    CHECK(cue_r2bar_bin_average(n, a, b) == doctest::Approx(quad).epsilon(1e-9));
    // A bin touching zero separation has a finite average.
    const double z = cue_r2bar_bin_average(n, 0.0, 2.0 * kPi / 64.0);
    CHECK(std::isfinite(z));
    const double quad0 = window_average([&](double x) { return cue_r2bar(n, x); }, 1e-9,
                                        2.0 * kPi / 64.0, 200001);
    CHECK(z == doctest::Approx(quad0).epsilon(1e-6));
}

TEST_CASE("averaging the oscillation over one fast period gives sigma") {
    const std::size_t n = 64;
    const double width = 2.0 * kPi / static_cast<double>(n);
    const double a = kPi - 0.5 * width;
    const double b = kPi + 0.5 * width;
    const double avg_cue = window_average([&](double x) { return cue_r2bar(n, x); }, a, b, 20001);
    const double avg_sigma =
        window_average([&](double x) { return sigma_r2bar(n, x); }, a, b, 20001);
    CHECK(avg_cue == doctest::Approx(avg_sigma).epsilon(1e-6));
}

TEST_CASE("connected scaled correlation") {
    CHECK(cue_r2_connected_scaled(1.0) == doctest::Approx(0.0));
    CHECK(cue_r2_connected_scaled(0.5) ==
          doctest::Approx(-4.0 / (kPi * kPi)).epsilon(1e-12));
    CHECK(std::abs(cue_r2_connected_scaled(10.25)) <= 1.0 / std::pow(kPi * 10.25, 2));
    CHECK_THROWS_AS(cue_r2_connected_scaled(0.0), std::domain_error);
}

TEST_CASE("cue_sff ramp and plateau") {
    CHECK(cue_sff(5, 0) == doctest::Approx(25.0));
    CHECK(cue_sff(5, 3) == doctest::Approx(3.0));
    CHECK(cue_sff(5, 9) == doctest::Approx(5.0));
    CHECK(cue_sff(5, -3) == doctest::Approx(3.0));
}

TEST_CASE("sigma_correlator is the ramp generating function") {
    CHECK(sigma_correlator({0.5, 0.0}).real() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(sigma_correlator({0.0, 0.0})) == 0.0);
    CHECK_THROWS_AS(sigma_correlator({1.0, 0.0}), std::domain_error);

    const std::vector<double> coeffs = taylor_coeffs(6, 0.5, 64);
    for (int c = 1; c <= 6; ++c)
        CHECK(coeffs[static_cast<std::size_t>(c) - 1] ==
              doctest::Approx(static_cast<double>(c)).epsilon(1e-9));
}

TEST_CASE("sigma_r2bar closed form values") {
    CHECK(sigma_r2bar(3, kPi) == doctest::Approx(17.0 / (8.0 * kPi * kPi)).epsilon(1e-12));
    CHECK_THROWS_AS(sigma_r2bar(3, 0.0), std::domain_error);
}

}  // TEST_SUITE
