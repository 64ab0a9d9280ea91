#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "qpf/errors.hpp"
#include "qpf/scan.hpp"

using namespace qpf;

namespace {

EstimatorSettings weighted(std::size_t n) {
    EstimatorSettings s;
    s.n = n;
    s.method = EstimatorMethod::weighted;
    return s;
}

FamilySpec arnold(double alpha, double beta = 0.0) {
    return FamilySpec{"arnold", {{"alpha", alpha}, {"beta", beta}}, "cos", {}};
}

}  // namespace

TEST_CASE("family specs") {
    const FamilySpec t;
    CHECK(t.param("rho0") == 0.0);
    CHECK(t.param("omega") == kGoldenMean);
    CHECK_THROWS_AS(t.param("alpha"), InvalidArgument);
    CHECK(t.with("rho0", 0.3).param("rho0") == 0.3);
    CHECK(family_parameters("harper") == std::vector<std::string>{"energy", "eps", "lambda", "omega"});
    CHECK(family_parameters("nope").empty());

    CHECK_THROWS_AS(build_family({"nope", {}, "cos", {}}), InvalidArgument);
    CHECK_THROWS_AS(build_family({"arnold", {{"gamma", 1.0}}, "cos", {}}), InvalidArgument);
    CHECK_THROWS_AS(build_family({"arnold", {{"alpha", NAN}}, "cos", {}}), InvalidArgument);
    CHECK_THROWS_AS(build_family(arnold(1.5)), AlphaOutOfRange);

    const auto lift = build_family(arnold(0.8, 0.3).with("tau", 0.3));
    CHECK(lift(0.1, 0.2) == doctest::Approx(oracle::arnold(0.8, 0.3, 0.3, 0.1, 0.2)));
    const auto eps = build_family(arnold(0.8, 0.3).with("tau", 0.3).with("eps", 0.01));
    CHECK(eps(0.1, 0.2) == doctest::Approx(lift(0.1, 0.2) + 0.01));

    const auto table = build_family({"arnold", {{"beta", 1.0}}, "table", {0.0, 0.5, 0.0, -0.5}});
    CHECK(table(0.25, 0.0) == 0.5);
}

TEST_CASE("axes") {
    const Axis a{"tau", -0.2, 0.2, 5};
    CHECK(a.at(0) == -0.2);
    CHECK(a.at(4) == 0.2);
    CHECK(a.at(2) == doctest::Approx(0.0));
    CHECK(a.spacing() == doctest::Approx(0.1));
}

TEST_CASE("translation sweep is the identity line with no plateaus") {
    const SweepSpec spec{FamilySpec{}, {"rho0", 0.0, 0.5, 51}, std::nullopt, weighted(2000)};
    const auto pts = sweep_1d(spec);
    REQUIRE(pts.size() == 51);
    for (const auto& p : pts)
        CHECK(std::abs(p.estimate.value - p.param) <= 1e-12);
    CHECK(detect_plateaus(pts, {}).empty());
}

TEST_CASE("unforced Arnold tongue of rotation number 0") {
    const SweepSpec spec{arnold(0.5), {"tau", -0.2, 0.2, 401}, std::nullopt, weighted(20000)};
    const auto pts = sweep_1d(spec);
    const auto plateaus = detect_plateaus(pts, {});
    REQUIRE(plateaus.size() == 1);
    const auto& p = plateaus[0];
    const double edge = 0.5 / kTwoPi;
    CHECK(std::abs(p.hi - edge) <= spec.axis1.spacing());
    CHECK(std::abs(p.lo + edge) <= spec.axis1.spacing());
    CHECK(p.width() == doctest::Approx(0.5 / kPi).epsilon(0.02));
    CHECK(std::abs(p.value) <= 1e-9);
    REQUIRE(p.witness.has_value());
    CHECK(p.witness->k == 0);
    CHECK(p.witness->l == 0);
    CHECK(p.witness->p == 1);
    CHECK(p.witness->q == 1);
    CHECK(p.witness->residual <= 1e-9);
    CHECK_FALSE(p.unwitnessed);
    for (std::size_t i = 1; i < pts.size(); ++i)
        CHECK(pts[i].estimate.value >=
              pts[i - 1].estimate.value - 2.0 * (pts[i].estimate.error_radius + pts[i - 1].estimate.error_radius));
}

TEST_CASE("a tongue collapsed to a point leaves no plateau") {
    // Rigid rotation: the rho = 0 tongue has zero width.
    const SweepSpec spec{arnold(0.0), {"tau", -0.05, 0.05, 101}, std::nullopt, weighted(5000)};
    const auto plateaus = detect_plateaus(sweep_1d(spec), {});
    for (const auto& p : plateaus)
        CHECK(p.width() <= spec.axis1.spacing());
}

TEST_CASE("qpf Arnold staircase is reproduced at doubled n") {
    const SweepSpec a{arnold(0.8, 0.3), {"tau", 0.0, 1.0, 41}, std::nullopt, weighted(20000)};
    SweepSpec b = a;
    b.estimator.n = 40000;
    const auto pa = sweep_1d(a);
    const auto pb = sweep_1d(b);
    for (std::size_t i = 0; i < pa.size(); ++i)
        CHECK(std::abs(pa[i].estimate.value - pb[i].estimate.value) <= 1e-4);
    for (const auto& p : detect_plateaus(pa, {}))
        if (p.cells() > 3)
            CHECK_FALSE(p.unwitnessed);
}

TEST_CASE("2-D sweeps are row-major and schedule independent") {
    SweepSpec spec{arnold(0.7), {"tau", -0.1, 0.1, 5}, Axis{"beta", 0.0, 0.2, 3}, weighted(2000)};
    const auto serial = sweep_2d(spec);
    spec.estimator.jobs = 4;
    const auto parallel = sweep_2d(spec);
    CHECK(serial.cells == parallel.cells);
    REQUIRE(serial.cells.size() == 15);
    const auto direct = rotation_number(build_family(arnold(0.7, 0.1).with("tau", 0.05)), weighted(2000));
    CHECK(serial.at(3, 1) == direct);
    CHECK_THROWS_AS(sweep_2d({arnold(0.7), {"tau", 0, 1, 3}, std::nullopt, {}}), InvalidArgument);
    CHECK_THROWS_AS(sweep_1d({arnold(0.7), {"tau", 0, 1, 1}, std::nullopt, {}}), InvalidArgument);
    CHECK_THROWS_AS(sweep_1d({arnold(0.7), {"rho0", 0, 1, 3}, std::nullopt, {}}), InvalidArgument);
}

TEST_CASE("plateau without a witness is flagged") {
    std::vector<SweepPoint> pts;
    for (int i = 0; i < 6; ++i)
        pts.push_back({0.01 * i, RotationEstimate{0.123456789, 1e-12, 100, {}, EstimatorMethod::weighted, {}}});
    const auto p = detect_plateaus(pts, {0.0, kGoldenMean, 1e-9, 3, 3});
    REQUIRE(p.size() == 1);
    CHECK_FALSE(p[0].witness.has_value());
    CHECK(p[0].unwitnessed);
}

TEST_CASE("tongue boundaries") {
    const auto s = weighted(20000);
    const double edge = 0.5 / kTwoPi;
    const auto right = tongue_boundary(arnold(0.5), "tau", 0.0, 0.0, 0.2, 1e-7, s);
    CHECK(std::abs(right.param - edge) <= 1e-6);
    CHECK(right.hi - right.lo <= 1e-7);
    const auto left = tongue_boundary(arnold(0.5), "tau", 0.0, -0.2, 0.0, 1e-7, s, Edge::left);
    CHECK(std::abs(left.param + edge) <= 1e-6);

    const auto rel = tongue_boundary(arnold(0.5), "tau", RationalRelation{0, 0, 1, 1, 0.0}, 0.0, 0.2, 1e-7, s);
    CHECK(rel.param == right.param);

    const auto t = tongue_boundary(FamilySpec{}, "rho0", 0.25, 0.0, 0.5, 1e-9, s);
    CHECK(std::abs(t.param - 0.25) <= 1e-9);

    const auto again = tongue_boundary(arnold(0.5), "tau", 0.0, 0.0, 0.2, 1e-7, s);
    CHECK(again.param == right.param);

    CHECK_THROWS_AS(tongue_boundary(arnold(0.5), "tau", 0.0, 0.1, 0.2, 1e-7, s), BracketInvalid);
    CHECK_THROWS_AS(tongue_boundary(arnold(0.5), "tau", 0.0, 0.2, 0.0, 1e-7, s), BracketInvalid);
}

TEST_CASE("qpf tongue edge is stable under doubling n") {
    const auto a = tongue_boundary(arnold(0.9, 0.05), "tau", 0.0, 0.0, 0.3, 1e-6, weighted(20000));
    const auto b = tongue_boundary(arnold(0.9, 0.05), "tau", 0.0, 0.0, 0.3, 1e-6, weighted(40000));
    CHECK(std::abs(a.param - b.param) < 1e-4);
    CHECK(a.param > 0.0);
    CHECK(a.param < 0.9 / kTwoPi);
}
