#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kobdyn/backward.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace kobdyn;

namespace {
MapSpec moebius_g() { return MapSpec::disc_moebius(3.0, 1.0, 1.0, 3.0); }
} // namespace

TEST_CASE("preimage through the closed-form inverse") {
    const CPoint zero{Cx(0.0, 0.0)};
    const CPoint got = preimage(moebius_g(), zero, zero);
    CHECK(std::abs(got[0] - Cx(-1.0 / 3.0, 0.0)) < 1e-14);

    const CPoint a{Cx(0.4, 0.1), Cx(-0.2, 0.3)};
    const MapSpec aut = MapSpec::ball_automorphism(a);
    const CPoint target{Cx(0.2, 0.0), Cx(0.1, -0.3)};
    const CPoint pre = preimage(aut, target, origin(2));
    CHECK(dist(pre.coords(), aut(target.coords())) < 1e-12);
}

TEST_CASE("preimage by Newton picks the branch near the guess") {
    const MapSpec sq =
        MapSpec::custom(1, [](const CVec& z) { return CVec{z[0] * z[0]}; }, "sq");
    const CPoint got = preimage(sq, CPoint{Cx(0.25, 0.0)}, CPoint{Cx(0.4, 0.0)});
    CHECK(std::abs(got[0] - Cx(0.5, 0.0)) < 1e-11);
    const CPoint other = preimage(sq, CPoint{Cx(0.25, 0.0)}, CPoint{Cx(-0.4, 0.0)});
    CHECK(std::abs(other[0] - Cx(-0.5, 0.0)) < 1e-11);
    // Singular Jacobian at the critical point.
    CHECK_THROWS(preimage(sq, CPoint{Cx(0.25, 0.0)}, CPoint{Cx(0.0, 0.0)}));
}

TEST_CASE("backward orbit of the rational map matches the closed form") {
    const BackwardOrbit orbit = backward_orbit(moebius_g(), BPoint{Cx(-1.0, 0.0)},
                                               CPoint{Cx(0.0, 0.0)}, 20);
    REQUIRE(orbit.points.size() == 21);
    for (int k = 0; k <= 20; ++k)
        CHECK(std::abs(orbit.points[k][0] - Cx(oracles::g_orbit_backward(k), 0.0)) < 1e-10);
    for (double s : orbit.steps)
        CHECK(s == doctest::Approx(oracles::kHalfLog2).epsilon(1e-10));
    CHECK(orbit.s == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(*orbit.alpha == doctest::Approx(2.0).epsilon(1e-8));
    REQUIRE(orbit.limit.has_value());
    CHECK(dist(orbit.limit->coords(), CVec{Cx(-1.0, 0.0)}) < 1e-6);
    for (double r : orbit.residuals) CHECK(r < 1e-10);
    REQUIRE(orbit.k_region_tail.has_value());
    CHECK(*orbit.k_region_tail <= 32);
}

TEST_CASE("backward orbit of the identity is constant") {
    const BPoint p{Cx(0.0, 1.0)};
    const CPoint w0{Cx(0.0, 0.4)};
    const BackwardOrbit orbit = backward_orbit(MapSpec::identity(1), p, w0, 6);
    CHECK(orbit.s == doctest::Approx(1.0));
    for (const CPoint& w : orbit.points) CHECK(dist(w.coords(), w0.coords()) < 1e-14);
    CHECK_FALSE(orbit.limit.has_value());
}

TEST_CASE("backward orbit of the quarter-turn slice map") {
    const BPoint p{Cx(0.0, 0.0), Cx(1.0, 0.0)};
    const BackwardOrbit orbit = backward_orbit(MapSpec::slice_rotation(0.25, 0.5), p,
                                               CPoint{Cx(0.0, 0.0), Cx(0.9, 0.0)}, 30);
    REQUIRE(orbit.points.size() == 31);
    const double alpha = oracles::slice_rotation_boundary_derivative(0.5); // 4/3
    CHECK(*orbit.alpha == doctest::Approx(alpha).epsilon(1e-8));
    CHECK(orbit.s <= alpha + 1e-3);
    REQUIRE(orbit.limit.has_value());
    CHECK(dist(orbit.limit->coords(), p.coords()) < 1e-5);
    for (const CPoint& w : orbit.points) {
        CHECK(std::abs(w[0]) < 1e-9);           // stays in the slice
        CHECK(std::abs(w[1]) >= 0.9 - 1e-12);   // distance to the limit manifold
    }
    for (double r : orbit.residuals) CHECK(r < 1e-10);
    REQUIRE(orbit.k_region_tail.has_value());
    CHECK(*orbit.k_region_tail <= 32);
}

TEST_CASE("orbit limits satisfy the step bound on the dilation") {
    // The orbit limit is a regular fixed point with alpha at most the
    // hyperbolic step quantity.
    const BackwardOrbit orbit = backward_orbit(moebius_g(), BPoint{Cx(-1.0, 0.0)},
                                               CPoint{Cx(0.0, 0.0)}, 15);
    REQUIRE(orbit.limit.has_value());
    const DilationResult d = dilation_coefficient(moebius_g(), *orbit.limit);
    CHECK(d.alpha <= orbit.s + 1e-3);
}

TEST_CASE("automorphism orbits have constant steps") {
    const BPoint p{Cx(-1.0, 0.0), Cx(0.0, 0.0)};
    const BackwardOrbit orbit =
        backward_orbit(MapSpec::siegel(1.0), p, CPoint(0.9 * p.coords()), 10);
    REQUIRE(orbit.steps.size() == 10);
    for (double s : orbit.steps)
        CHECK(s == doctest::Approx(orbit.steps[0]).epsilon(1e-12));
}

TEST_CASE("backward orbit requires a regular fixed point") {
    CHECK_THROWS_AS(backward_orbit(MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)}),
                                   BPoint{Cx(1.0, 0.0), Cx(0.0, 0.0)},
                                   origin(2), 5),
                    std::invalid_argument);
}

TEST_CASE("contact curve of the rotation flow") {
    const auto S = Semigroup::ball_rotation({1.0, 0.0});
    std::vector<double> grid;
    for (int j = 0; j <= 100; ++j) grid.push_back(0.01 * j);
    const ContactCurve c = contact_curve(S, BPoint{Cx(1.0, 0.0), Cx(0.0, 0.0)}, grid);
    CHECK(c.ok);
    REQUIRE(c.curve.size() == 101);
    for (int j = 0; j <= 100; ++j) {
        const Cx expect = std::polar(1.0, 6.283185307179586477 * 0.01 * j);
        CHECK(std::abs(c.curve[j][0] - expect) < 1e-8);
        CHECK(std::abs(c.curve[j][1]) < 1e-8);
    }
    CHECK(c.modulus == doctest::Approx(6.283185307179586477 * 0.01).epsilon(0.02));
}

TEST_CASE("contact curve of the dilation flow is constant") {
    const auto S = Semigroup::siegel_dilation();
    const ContactCurve c = contact_curve(S, BPoint{Cx(-1.0, 0.0), Cx(0.0, 0.0)},
                                         {0.0, 0.2, 0.4, 0.6, 0.8, 1.0});
    CHECK(c.ok);
    CHECK(c.modulus < 1e-9);
}

TEST_CASE("singleton grid gives a single-point curve") {
    const auto S = Semigroup::siegel_dilation();
    const BPoint p{Cx(-1.0, 0.0), Cx(0.0, 0.0)};
    const ContactCurve c = contact_curve(S, p, {0.0});
    REQUIRE(c.curve.size() == 1);
    CHECK(dist(c.curve[0].coords(), p.coords()) < 1e-12);
    CHECK(c.modulus == 0.0);
}

TEST_CASE("contact curve refuses a non-contact base point") {
    const auto S = Semigroup::generator_ode(GeneratorSpec::field(
        1, [](const CVec& z) { return CVec{-z[0]}; }, "linear_decay"));
    CHECK_THROWS_AS(contact_curve(S, BPoint{Cx(1.0, 0.0)}, {0.5, 1.0}),
                    std::invalid_argument);
}

TEST_CASE("common fixed point verification passes for the dilation flow") {
    const auto S = Semigroup::siegel_dilation();
    const BPoint p{Cx(-1.0, 0.0), Cx(0.0, 0.0)};
    const CommonBrfpReport rep = common_brfp_verify(S, p, 1.0, {0.25, 0.5, 0.75});
    CHECK(rep.hypothesis_ok);
    CHECK(rep.isolated);
    CHECK(rep.verdict == CommonBrfpReport::Verdict::Pass);
    CHECK(rep.alpha_t0 == doctest::Approx(oracles::kE).epsilon(1e-5));
    for (const auto& sl : rep.slices) {
        CHECK(sl.push_gap < 1e-4);
        REQUIRE(sl.alpha_t.has_value());
        CHECK(*sl.alpha_t == doctest::Approx(std::exp(sl.t)).epsilon(1e-3));
        CHECK(sl.step_bound_excess <= 1e-10);
    }
    CHECK(rep.law.pass);
    CHECK(rep.law.lambda == doctest::Approx(oracles::kE).epsilon(1e-3));
}

TEST_CASE("verification reduces to the slice data on the singleton grid") {
    const auto S = Semigroup::siegel_dilation();
    const BPoint p{Cx(-1.0, 0.0), Cx(0.0, 0.0)};
    const CommonBrfpReport rep = common_brfp_verify(S, p, 1.0, {1.0});
    CHECK(rep.verdict == CommonBrfpReport::Verdict::Pass);
}

TEST_CASE("rotation counterexample is reported as a hypothesis violation") {
    const auto S = Semigroup::ball_rotation({1.0, 0.0});
    const BPoint p{Cx(1.0, 0.0), Cx(0.0, 0.0)};
    const CommonBrfpReport rep = common_brfp_verify(S, p, 1.0, {0.25, 0.5, 0.75});
    CHECK(rep.verdict == CommonBrfpReport::Verdict::HypothesisViolation);
    CHECK_FALSE(rep.isolated);
    CHECK(rep.violations.size() >= 2); // unit dilation off the attractor + not isolated
    // The half-turn slice moves p to the opposite point.
    REQUIRE(rep.slices.size() == 3);
    CHECK(rep.slices[1].t == doctest::Approx(0.5));
    CHECK(dist(rep.slices[1].contact_value, CVec{Cx(-1.0, 0.0), Cx(0.0, 0.0)}) < 1e-8);
    CHECK(rep.slices[1].classification != "regular_fixed");
}
