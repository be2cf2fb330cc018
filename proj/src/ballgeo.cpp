#include "kobdyn/ballgeo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kobdyn {

std::vector<CVec> interior_samples(int dim, int count, double max_norm, std::uint64_t salt) {
    std::vector<CVec> out;
    out.reserve(count);
    double u[6];
    std::uint64_t i = 1 + salt * 7919;
    while (static_cast<int>(out.size()) < count) {
        halton(i++, 2 * dim, u);
        CVec z(dim);
        for (int d = 0; d < dim; ++d) z[d] = Cx(2.0 * u[2 * d] - 1.0, 2.0 * u[2 * d + 1] - 1.0);
        if (norm(z) < max_norm) out.push_back(z);
    }
    return out;
}

std::vector<CPoint> orbit_seeds(int dim, int count) {
    std::vector<CPoint> out;
    out.reserve(count);
    double u[6];
    const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
        halton(i, 2 * dim, u);
        CVec z(dim);
        for (int d = 0; d < dim; ++d) {
            double r = (0.15 + 0.35 * u[2 * d]) * scale;
            double ph = 6.283185307179586477 * u[2 * d + 1];
            z[d] = Cx(r * std::cos(ph), r * std::sin(ph));
        }
        out.emplace_back(z);
    }
    return out;
}

// tanh^2 k = 1 - (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2. Evaluated through
//   u = (A - B)/A,  A = |1-<z,w>|^2,  B = (1-|z|^2)(1-|w|^2),
//   A - B = |z-w|^2 - sum_{i<j} |z_i w_j - z_j w_i|^2,
// (Lagrange identity for the Gram term) which stays accurate both for
// nearby points and near the boundary.
double kobayashi_distance(const CVec& z, const CVec& w) {
    if (z.size() != w.size())
        throw std::invalid_argument("kobayashi_distance: dimension mismatch");
    const Cx zw = inner(z, w);
    const double A = std::norm(Cx(1.0, 0.0) - zw);
    double gram = 0.0;
    for (int i = 0; i < z.size(); ++i)
        for (int j = i + 1; j < z.size(); ++j) gram += std::norm(z[i] * w[j] - z[j] * w[i]);
    double amb = norm_sq(z - w) - gram;
    if (amb < 0.0) amb = 0.0;
    double u = amb / A;
    if (u >= 1.0) u = 1.0 - 1e-17;
    const double x = std::sqrt(u);
    return std::log1p(x) - 0.5 * std::log1p(-u);
}

double kobayashi_distance(const CPoint& z, const CPoint& w) {
    return kobayashi_distance(z.coords(), w.coords());
}

double kobayashi_metric(const CVec& z, const CVec& v) {
    if (z.size() != v.size())
        throw std::invalid_argument("kobayashi_metric: dimension mismatch");
    const double d = 1.0 - norm_sq(z);
    const double num = d * norm_sq(v) + std::norm(inner(v, z));
    return std::sqrt(num) / d;
}

double kobayashi_metric(const CPoint& z, const CVec& v) {
    return kobayashi_metric(z.coords(), v);
}

CVec ball_involution(const CVec& a, const CVec& z) {
    const double na2 = norm_sq(a);
    if (na2 == 0.0) return -1.0 * z;
    if (a.size() != z.size())
        throw std::invalid_argument("ball_involution: dimension mismatch");
    const double s = std::sqrt(std::max(0.0, 1.0 - na2));
    const Cx za = inner(z, a);
    const Cx proj = za / na2; // z = proj*a + orthogonal part
    CVec r(z.size());
    const Cx den = Cx(1.0, 0.0) - za;
    for (int i = 0; i < z.size(); ++i) {
        const Cx pa = proj * a[i];
        r[i] = (a[i] - pa - s * (z[i] - pa)) / den;
    }
    return r;
}

GeodesicSpec::GeodesicSpec(const CPoint& z0, const BPoint& p) : z0_(z0), p_(p) {
    if (z0.dim() != p.dim())
        throw std::invalid_argument("GeodesicSpec: dimension mismatch");
    q_ = ball_involution(z0.coords(), p.coords());
}

CVec GeodesicSpec::eval(Cx zeta) const {
    return ball_involution(z0_.coords(), zeta * q_);
}

Cx GeodesicSpec::left_inverse(const CVec& z) const {
    return inner(ball_involution(z0_.coords(), z), q_);
}

CVec GeodesicSpec::retract(const CVec& z) const { return eval(left_inverse(z)); }

GeodesicSpec geodesic(const CPoint& z0, const BPoint& p) { return GeodesicSpec(z0, p); }

double horosphere_height(const BPoint& p, const CVec& z) {
    if (p.dim() != z.size())
        throw std::invalid_argument("horosphere_height: dimension mismatch");
    const double a = std::norm(Cx(1.0, 0.0) - inner(z, p.coords()));
    const double b = 1.0 - norm_sq(z);
    return 0.5 * (std::log(a) - std::log(b));
}

double horosphere_height(const BPoint& p, const CPoint& z) {
    return horosphere_height(p, z.coords());
}

bool in_K_region(const KRegionQuery& q, const CVec& z) {
    // Transport to pole 0 by the involution at z0; it is an isometry
    // swapping z0 and 0, so heights and distances move with it.
    const CVec& a = q.z0.coords();
    if (norm_sq(a) == 0.0)
        return horosphere_height(q.p, z) + kobayashi_distance(CVec(z.size()), z) < std::log(q.M);
    const CVec tz = ball_involution(a, z);
    const BPoint tp(ball_involution(a, q.p.coords()));
    return horosphere_height(tp, tz) + kobayashi_distance(CVec(z.size()), tz) < std::log(q.M);
}

bool in_K_region(const KRegionQuery& q, const CPoint& z) { return in_K_region(q, z.coords()); }

ApproachClass classify_approach(const BPoint& p, const std::vector<CPoint>& pts) {
    const int n = static_cast<int>(pts.size());
    if (n < 8) throw std::invalid_argument("classify_approach: need at least 8 points");
    if (dist(pts.back().coords(), p.coords()) > 1e-3)
        throw std::invalid_argument("classify_approach: sequence does not converge to p");

    const GeodesicSpec g(origin(p.dim()), p);
    const int tail_start = n - std::max(4, n / 2);

    ApproachClass out;
    double prev_gap = -1.0;
    bool decreasing = true;
    for (int k = tail_start; k < n; ++k) {
        const CVec& z = pts[k].coords();
        const CVec r = g.retract(z);
        const double gap = kobayashi_distance(z, r);
        out.max_retraction_gap = std::max(out.max_retraction_gap, gap);
        if (prev_gap >= 0.0 && gap > prev_gap * 1.1 + 1e-12) decreasing = false;
        prev_gap = gap;

        const Cx zeta = g.left_inverse(z);
        const double denom = 1.0 - std::abs(zeta);
        const double ratio = denom > 0.0 ? std::abs(Cx(1.0, 0.0) - zeta) / denom
                                         : std::numeric_limits<double>::infinity();
        out.max_stolz_ratio = std::max(out.max_stolz_ratio, ratio);
    }
    out.special = out.max_retraction_gap < 1e-6 && decreasing;
    for (int M : {2, 4, 8, 16}) {
        if (out.max_stolz_ratio <= M) {
            out.stolz_amplitude = M;
            break;
        }
    }
    out.restricted = out.stolz_amplitude != 0;
    return out;
}

} // namespace kobdyn
