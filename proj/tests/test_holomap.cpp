#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "kobdyn/holomap.hpp"
#include "oracles.hpp"

#include <cmath>

using namespace kobdyn;

namespace {
MapSpec moebius_g() { return MapSpec::disc_moebius(3.0, 1.0, 1.0, 3.0); }
} // namespace

TEST_CASE("evaluate on the closed forms") {
    const MapSpec id2 = MapSpec::identity(2);
    const CVec z{Cx(0.3, 0.1), Cx(-0.2, 0.4)};
    CHECK(dist(id2(z), z) == 0.0);

    const MapSpec g = moebius_g();
    CHECK(std::abs(g(CVec{Cx(0.0, 0.0)})[0] - Cx(1.0 / 3.0, 0.0)) < 1e-15);

    const MapSpec sr = MapSpec::slice_rotation(0.25, 0.5);
    const CVec img = sr(CVec{Cx(0.2, 0.0), Cx(0.4, 0.0)});
    CHECK(std::abs(img[0] - Cx(0.0, 0.2)) < 1e-15);
    CHECK(std::abs(img[1] - Cx(0.3, 0.0)) < 1e-15);
}

TEST_CASE("checked evaluation keeps results interior") {
    // Passes the construction sampling but escapes on a thin set.
    auto sneaky = [](const CVec& z) {
        if (std::abs(z[0] - Cx(0.1234567, 0.7654321)) < 1e-9)
            return CVec{Cx(1.4, 0.0) * z[0]};
        return z;
    };
    const MapSpec f = MapSpec::custom(1, sneaky, "sneaky");
    CHECK_NOTHROW(evaluate(f, CPoint{Cx(0.5, 0.0)}));
    CHECK_THROWS(evaluate(f, CPoint{Cx(0.1234567, 0.7654321)}));
}

TEST_CASE("self-map validation rejects escaping maps") {
    CHECK_THROWS(MapSpec::custom(1, [](const CVec& z) { return CVec{1.5 * z[0]}; }, "bad"));
    // Moebius map pushing the circle across the boundary fails the
    // 64-sample check.
    CHECK_THROWS(MapSpec::disc_moebius(1.0, 0.5, 0.0, 1.0));
    CHECK_THROWS(MapSpec::diagonal(CVec{Cx(1.2, 0.0)}));
}

TEST_CASE("composition") {
    const MapSpec g = moebius_g();
    const MapSpec gg = compose(g, g);
    CHECK(std::abs(gg(CVec{Cx(0.0, 0.0)})[0] - Cx(0.6, 0.0)) < 1e-15);

    const MapSpec id1 = MapSpec::identity(1);
    const MapSpec gid = compose(g, id1);
    for (const CVec& z : interior_samples(1, 20)) CHECK(dist(gid(z), g(z)) < 1e-15);

    const CPoint a{Cx(0.4, 0.2), Cx(-0.1, 0.3)};
    const MapSpec aut = MapSpec::ball_automorphism(a);
    const MapSpec inv = compose(aut, aut);
    for (const CVec& z : interior_samples(2, 20)) CHECK(dist(inv(z), z) < 1e-12);
}

TEST_CASE("iterate") {
    const CPoint z{Cx(0.8, 0.0), Cx(0.0, 0.0)};
    const MapSpec d = MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)});
    CHECK(iterate(d, z, 0).size() == 1);
    const auto orbit = iterate(d, z, 3);
    CHECK(std::abs(orbit[3][0] - Cx(0.1, 0.0)) < 1e-15);

    const MapSpec g = moebius_g();
    const auto gorbit = iterate(g, CPoint{Cx(0.0, 0.0)}, 8);
    for (int k = 0; k <= 8; ++k)
        CHECK(std::abs(gorbit[k][0] - Cx(oracles::g_orbit_forward(k), 0.0)) < 1e-13);
}

TEST_CASE("trichotomy classification") {
    const MapClass cg = classify_map(moebius_g());
    REQUIRE(cg.kind == MapClass::Kind::NonElliptic);
    CHECK(dist(cg.dw_point->coords(), CVec{Cx(1.0, 0.0)}) < 1e-5);

    const MapClass cd = classify_map(MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)}));
    REQUIRE(cd.kind == MapClass::Kind::StronglyElliptic);
    CHECK(norm(cd.fixed_point->coords()) < 1e-9);

    const MapClass cr = classify_map(MapSpec::diagonal(CVec{Cx(0.0, 1.0), Cx(1.0, 0.0)}));
    CHECK(cr.kind == MapClass::Kind::RotationalElliptic);

    const MapClass cs = classify_map(MapSpec::siegel(1.0));
    REQUIRE(cs.kind == MapClass::Kind::NonElliptic);
    CHECK(dist(cs.dw_point->coords(), CVec{Cx(1.0, 0.0), Cx(0.0, 0.0)}) < 1e-5);

    CHECK(classify_map(MapSpec::identity(2)).kind == MapClass::Kind::RotationalElliptic);
    CHECK(classify_map(MapSpec::slice_rotation(0.25, 0.5)).kind ==
          MapClass::Kind::RotationalElliptic);
}

TEST_CASE("classification is stable under automorphism conjugation") {
    const CPoint a{Cx(0.3, 0.0), Cx(0.1, 0.2)};
    const MapSpec psi = MapSpec::ball_automorphism(a);
    auto conjugate = [&](const MapSpec& f) { return compose(psi, compose(f, psi)); };

    CHECK(classify_map(conjugate(MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)}))).kind ==
          MapClass::Kind::StronglyElliptic);
    CHECK(classify_map(conjugate(MapSpec::diagonal(CVec{Cx(0.0, 1.0), Cx(1.0, 0.0)}))).kind ==
          MapClass::Kind::RotationalElliptic);
    CHECK(classify_map(conjugate(MapSpec::siegel(1.0))).kind == MapClass::Kind::NonElliptic);
}

TEST_CASE("interior fixed points") {
    auto x = interior_fixed_point(MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)}));
    REQUIRE(x.has_value());
    CHECK(norm(x->coords()) < 1e-10);

    const MapSpec sr = MapSpec::slice_rotation(0.25, 0.5);
    auto y = interior_fixed_point(sr);
    REQUIRE(y.has_value());
    CHECK(norm(y->coords()) < 1e-8);
    CHECK(dist(sr(y->coords()), y->coords()) < 1e-10);

    CHECK_FALSE(interior_fixed_point(moebius_g()).has_value());
}

TEST_CASE("limit retraction of a strong contraction is the fixed point") {
    const RetractionResult r =
        limit_retraction(MapSpec::diagonal(CVec{Cx(0.5, 0.0), Cx(0.5, 0.0)}));
    CHECK(r.manifold_dim == 0);
    for (const CVec& s : interior_samples(2, 10, 0.8)) CHECK(norm(r.project(s)) < 1e-10);
    CHECK(r.convergence_residual < 1e-8);
}

TEST_CASE("limit retraction of an automorphism is the identity") {
    const RetractionResult r =
        limit_retraction(MapSpec::ball_automorphism(CPoint{Cx(0.3, 0.0), Cx(0.1, 0.0)}));
    CHECK(r.manifold_dim == 2);
    for (const CVec& s : interior_samples(2, 10, 0.8)) CHECK(dist(r.project(s), s) < 1e-9);
}

TEST_CASE("limit retraction of the quarter-turn slice map") {
    const MapSpec sr = MapSpec::slice_rotation(0.25, 0.5);
    const RetractionResult r = limit_retraction(sr);
    CHECK(r.manifold_dim == 1);
    CHECK(r.close_return_time % 4 == 0);
    for (const CVec& s : interior_samples(2, 10, 0.8)) {
        const CVec pi = r.project(s);
        CHECK(std::abs(pi[0] - s[0]) < 1e-9);
        CHECK(std::abs(pi[1]) < 1e-9);
    }
    for (const CVec& s : interior_samples(2, 10, 0.8)) {
        CHECK(dist(r.project(r.project(s)), r.project(s)) < 1e-8);
        CHECK(dist(r.project(sr(s)), sr(r.project(s))) < 1e-8);
    }
    CHECK_THROWS(limit_retraction(moebius_g()));
}

TEST_CASE("holomorphic maps contract the distance") {
    const auto maps = {moebius_g(), MapSpec::slice_rotation(0.25, 0.5), MapSpec::siegel(1.0),
                       compose(MapSpec::siegel(0.5), MapSpec::slice_rotation(0.1, 0.3))};
    for (const MapSpec& f : maps) {
        const auto zs = interior_samples(f.dim(), 30, 0.95);
        for (size_t i = 0; i + 1 < zs.size(); i += 2) {
            const double before = kobayashi_distance(zs[i], zs[i + 1]);
            const double after = kobayashi_distance(f(zs[i]), f(zs[i + 1]));
            CHECK(after <= before + 1e-10);
        }
    }
}

TEST_CASE("strict distance decrease off the limit manifold") {
    const MapSpec sr = MapSpec::slice_rotation(0.25, 0.5);
    const CVec zero(2);
    int found = 0;
    double margin = 1e9;
    for (std::uint64_t i = 1; found < 100; ++i) {
        const CVec z = interior_samples(2, 1, 0.95, i)[0];
        if (std::abs(z[1]) < 0.2) continue;
        ++found;
        const double before = kobayashi_distance(z, zero);
        const double after = kobayashi_distance(sr(z), zero);
        CHECK(before - after > 0.0);
        margin = std::min(margin, before - after);
    }
    CHECK(margin > 1e-4);
}
