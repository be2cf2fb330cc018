#pragma once

#include "kobdyn/points.hpp"

#include <optional>
#include <vector>

namespace kobdyn {

// --- Kobayashi geometry of the disc and the ball, in the convention where
// --- the disc distance is arctanh|.| (curvature -4).

// Kobayashi distance between interior points of the same domain.
double kobayashi_distance(const CVec& z, const CVec& w);
double kobayashi_distance(const CPoint& z, const CPoint& w);

// Infinitesimal Kobayashi metric at z in direction v.
double kobayashi_metric(const CVec& z, const CVec& v);
double kobayashi_metric(const CPoint& z, const CVec& v);

// The involutive automorphism of the ball swapping 0 and a, evaluated on the
// closed ball. For a = 0 this is z -> -z.
CVec ball_involution(const CVec& a, const CVec& z);

// Complex geodesic through z0 with radial boundary limit p, together with its
// left inverse and retraction. Realized as the linear slice toward p
// transported by the involution at z0.
class GeodesicSpec {
public:
    GeodesicSpec(const CPoint& z0, const BPoint& p);

    const CPoint& pole() const { return z0_; }
    const BPoint& target() const { return p_; }

    // phi(zeta), valid for |zeta| <= 1.
    CVec eval(Cx zeta) const;
    // Left inverse rho~ : closed domain -> closed disc, rho~(phi(zeta)) = zeta.
    Cx left_inverse(const CVec& z) const;
    // Retraction rho = phi o rho~ onto the geodesic disc.
    CVec retract(const CVec& z) const;

private:
    CPoint z0_;
    BPoint p_;
    CVec q_; // boundary image of p under the involution at z0
};

GeodesicSpec geodesic(const CPoint& z0, const BPoint& p);

// Boundary approach height with pole at the origin:
//   lim_{w->p} [k(z,w) - k(0,w)] = (1/2) log(|1-<z,p>|^2 / (1-|z|^2)).
double horosphere_height(const BPoint& p, const CVec& z);
double horosphere_height(const BPoint& p, const CPoint& z);

struct KRegionQuery {
    KRegionQuery(CPoint pole, BPoint vertex, double amplitude)
        : z0(std::move(pole)), p(std::move(vertex)), M(amplitude) {
        if (!(M > 1.0)) throw std::invalid_argument("KRegionQuery: amplitude must be > 1");
    }
    CPoint z0;
    BPoint p;
    double M;
};

// Membership test: height(p, z) + k(z0, z) < log M, transported to pole 0.
bool in_K_region(const KRegionQuery& q, const CPoint& z);
bool in_K_region(const KRegionQuery& q, const CVec& z);

struct ApproachClass {
    bool special = false;
    bool restricted = false;
    double max_retraction_gap = 0.0; // max Kobayashi gap to the geodesic over the tail
    double max_stolz_ratio = 0.0;    // max |1-zeta|/(1-|zeta|) over the tail
    int stolz_amplitude = 0;         // smallest wedge amplitude that contains the tail, 0 if none
};

// Classifies a sequence approaching p: "special" when the Kobayashi gap to
// the geodesic retraction vanishes on the tail, "restricted" when the left
// inverse stays in a Stolz wedge of amplitude 2, 4, 8 or 16.
ApproachClass classify_approach(const BPoint& p, const std::vector<CPoint>& pts);

} // namespace kobdyn
