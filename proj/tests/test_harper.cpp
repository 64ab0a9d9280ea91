#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "qpf/errors.hpp"
#include "qpf/harper.hpp"

using namespace qpf;

namespace {

RotationEstimate harper_rho(const HarperParams& p, std::size_t n = 20000) {
    return rotation_number(harper_lift(p), n, default_seeds(), EstimatorMethod::weighted);
}

}  // namespace

TEST_CASE("cocycle steps are unimodular") {
    const auto p = HarperParams::almost_mathieu(1.3, 0.4);
    for (double theta : {0.0, 0.2, 0.77}) {
        const auto m = cocycle_step(p, theta);
        CHECK(m.determinant() == doctest::Approx(1.0));
        CHECK(m.a == doctest::Approx(2.6 * std::cos(kTwoPi * theta) - 0.4));
    }
}

TEST_CASE("projective action is a degree-one lift") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> c(-6.0, 6.0);
    std::uniform_real_distribution<double> y(-3.0, 3.0);
    for (int i = 0; i < 2000; ++i) {
        const double cc = c(rng);
        const double a = y(rng);
        const double b = a + std::abs(y(rng)) + 1e-9;
        CHECK(projective_action(cc, a) <= projective_action(cc, b));
        CHECK(projective_action(cc, a + 1.0) == doctest::Approx(projective_action(cc, a) + 1.0));
        // The image direction is M (cos pi a, sin pi a) with M = [[c, -1], [1, 0]].
        const double img = projective_action(cc, a);
        const double vx = cc * std::cos(kPi * a) - std::sin(kPi * a);
        const double vy = std::cos(kPi * a);
        CHECK(std::abs(std::cos(kPi * img) * vy - std::sin(kPi * img) * vx) <= 1e-9 * (1.0 + std::hypot(vx, vy)));
    }
}

TEST_CASE("free Harper rotation numbers follow the elliptic eigen-angle formula") {
    CHECK(harper_rho({CircleFunction::zero(), 0.0}).value == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(std::abs(harper_rho({CircleFunction::zero(), -2.0}, 200000).value) <= 1e-3);
    for (double e : {-1.9, -1.2, -0.3, 0.7, 1.5, 1.95})
        CHECK(std::abs(harper_rho({CircleFunction::zero(), e}).value - oracle::free_ids(e)) <= 1e-8);
}

TEST_CASE("outside the spectrum the rotation number is 0 or 1") {
    CHECK(std::abs(harper_rho(HarperParams::almost_mathieu(1.0, -4.0)).value) <= 1e-9);
    CHECK(std::abs(harper_rho(HarperParams::almost_mathieu(1.0, 4.5)).value - 1.0) <= 1e-9);
}

TEST_CASE("truncated spectra against a Sturm count") {
    const auto v = CircleFunction::cosine(4.0);
    const std::size_t n = 300;
    const auto spec = truncated_spectrum(v, kGoldenMean, n, 0.125);
    REQUIRE(spec.size() == n);
    CHECK(std::is_sorted(spec.begin(), spec.end()));
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i)
        diag[i] = v(0.125 + static_cast<double>(i) * kGoldenMean);
    for (double e = -6.0; e <= 6.0; e += 0.173) {
        const auto count = static_cast<std::size_t>(std::lower_bound(spec.begin(), spec.end(), e) - spec.begin());
        CHECK(count == oracle::sturm_count(diag, e));
    }
    CHECK_THROWS_AS(truncated_spectrum(v, kGoldenMean, 0, 0.0), InvalidArgument);
}

TEST_CASE("integrated density of states") {
    const auto zero = CircleFunction::zero();
    CHECK(ids(zero, kGoldenMean, 0.0, 2000).value == doctest::Approx(0.5).epsilon(1e-3));
    const IntegratedDensity d(zero, kGoldenMean, 400);
    CHECK(d(d.spectrum_min() - 0.1).value == 0.0);
    CHECK(d(d.spectrum_max() + 0.1).value == 1.0);
    CHECK(d(0.3).boundary == "dirichlet");
    CHECK(d(0.3).phases.size() == 8);
    for (double e = -2.4; e <= 2.4; e += 0.3)
        CHECK(std::abs(d(e).value - oracle::free_ids(e)) <= 1.0 / 400.0 + 1e-12);

    const IntegratedDensity am(CircleFunction::cosine(4.0), kGoldenMean, 500);
    for (double e = -5.0; e <= 5.0; e += 0.37)
        CHECK(am(e).value == doctest::Approx(oracle::almost_mathieu_ids(2.0, kGoldenMean, e, 500)));
}

TEST_CASE("rotation number and IDS agree for almost Mathieu") {
    const IntegratedDensity am(CircleFunction::cosine(4.0), kGoldenMean, 2000);
    for (double e : {-3.4, -1.5, 0.0, 1.5, 3.4}) {
        const double rho = harper_rho(HarperParams::almost_mathieu(2.0, e)).value;
        CHECK(std::abs(rho - am(e).value) <= 0.01);
    }
}

TEST_CASE("gap labels") {
    const auto l0 = label_rotation(0.0, kGoldenMean, 1e-6, 20);
    REQUIRE(l0.has_value());
    CHECK(l0->k == 0);
    const auto l1 = label_rotation(1.0, kGoldenMean, 1e-6, 20);
    REQUIRE(l1.has_value());
    CHECK(l1->k == 0);
    const auto lm = label_rotation(1.0 - kGoldenMean, kGoldenMean, 1e-9, 20);
    REQUIRE(lm.has_value());
    CHECK(lm->k == -1);
    CHECK_FALSE(label_rotation(0.5, kGoldenMean, 1e-6, 20).has_value());

    EstimatorSettings s;
    s.n = 20000;
    s.method = EstimatorMethod::weighted;
    const auto v = CircleFunction::cosine(4.0);
    const auto g1 = gap_label(v, kGoldenMean, 1.2, 1.8, 1e-4, 20, s);
    REQUIRE(g1.has_value());
    CHECK(g1->k == 1);
    CHECK(g1->residual <= 1e-4);
    const auto g2 = gap_label(v, kGoldenMean, -3.4, -3.3, 1e-4, 20, s);
    REQUIRE(g2.has_value());
    CHECK(g2->k == 2);
    const auto below = gap_label(v, kGoldenMean, -6.0, -5.0, 1e-4, 20, s);
    REQUIRE(below.has_value());
    CHECK(below->k == 0);
}

TEST_CASE("property: E -> rho is non-decreasing") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> e(-5.0, 5.0);
    for (int i = 0; i < 100; ++i) {
        double a = e(rng), b = e(rng);
        if (a > b)
            std::swap(a, b);
        const auto ra = harper_rho(HarperParams::almost_mathieu(1.5, a), 4000);
        const auto rb = harper_rho(HarperParams::almost_mathieu(1.5, b), 4000);
        CHECK(ra.value <= rb.value + 2.0 * (ra.error_radius + rb.error_radius));
    }
}
