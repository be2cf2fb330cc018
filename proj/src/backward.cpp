#include "kobdyn/backward.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace kobdyn {

namespace {

using EMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::Matrix<Cx, Eigen::Dynamic, 1>;

CVec newton_preimage(const MapSpec& f, const CVec& target, CVec z) {
    auto feval = [&f](const CVec& x) { return f(x); };
    double res = norm(f(z) - target);
    for (int it = 0; it < 100; ++it) {
        if (res < 1e-12) return z;
        const CMat J = numeric_jacobian(feval, z, 1e-7);
        EMat A(z.size(), z.size());
        EVec rhs(z.size());
        const CVec F = f(z) - target;
        for (int i = 0; i < z.size(); ++i) {
            rhs(i) = -F[i];
            for (int j = 0; j < z.size(); ++j) A(i, j) = J.at(i, j);
        }
        Eigen::FullPivLU<EMat> lu(A);
        lu.setThreshold(1e-12);
        if (lu.rank() < z.size())
            throw std::runtime_error("preimage: Jacobian numerically singular");
        const EVec delta = lu.solve(rhs);
        bool accepted = false;
        for (double lambda = 1.0; lambda > 1e-6; lambda *= 0.5) {
            CVec zt = z;
            for (int i = 0; i < z.size(); ++i) zt[i] += lambda * delta(i);
            if (norm(zt) >= 1.0 - 1e-13) continue;
            const double rt = norm(f(zt) - target);
            if (rt < (1.0 - 0.25 * lambda) * res) {
                z = zt;
                res = rt;
                accepted = true;
                break;
            }
        }
        if (!accepted) throw std::runtime_error("preimage: Newton stagnation");
    }
    if (res < 1e-11) return z;
    throw std::runtime_error("preimage: Newton stagnation after 100 iterations");
}

} // namespace

CPoint preimage(const MapSpec& f, const CPoint& target, const CPoint& guess) {
    if (auto closed = f.closed_inverse(target.coords())) {
        if (norm(*closed) >= 1.0 - kInteriorMargin)
            throw std::runtime_error("preimage: closed-form preimage escapes the domain");
        if (dist(f(*closed), target.coords()) < 1e-11) return CPoint(*closed);
        return CPoint(newton_preimage(f, target.coords(), *closed));
    }
    return CPoint(newton_preimage(f, target.coords(), guess.coords()));
}

namespace {

// Pull a guess strictly inside the ball; it only seeds Newton.
CVec clamp_interior(CVec z) {
    const double n = norm(z);
    if (n >= 1.0 - 1e-9) return ((1.0 - 1e-9) / n) * z;
    return z;
}

} // namespace

BackwardOrbit backward_orbit(const MapSpec& f, const BPoint& p, const CPoint& w0, int n) {
    if (n < 0) throw std::invalid_argument("backward_orbit: n must be >= 0");
    const ContactClassification cls = classify_boundary_point(f, p);
    if (cls.kind != ContactClassification::Kind::RegularFixed)
        throw std::invalid_argument(
            "backward_orbit: p is not a regular boundary fixed point of f");

    BackwardOrbit out;
    out.alpha = cls.alpha;
    const double alpha = *cls.alpha;
    out.points.push_back(w0);

    for (int k = 0; k < n; ++k) {
        const CVec& wk = out.points.back().coords();
        CVec guess = k == 0
                         ? CVec(p.coords() + (1.0 / alpha) * (wk - p.coords()))
                         : CVec(wk + (1.0 / alpha) *
                                         (wk - out.points[out.points.size() - 2].coords()));
        guess = clamp_interior(guess);
        CPoint next = w0;
        try {
            next = preimage(f, out.points.back(), CPoint(guess));
        } catch (const std::exception& e) {
            out.truncated = true;
            std::ostringstream note;
            note << "preimage failed at index " << (k + 1) << ": " << e.what();
            out.note = note.str();
            break;
        }
        if (dist(next.coords(), p.coords()) > dist(wk, p.coords()) + 0.1) {
            out.truncated = true;
            std::ostringstream note;
            note << "orbit diverges away from p at index " << (k + 1);
            out.note = note.str();
            break;
        }
        out.residuals.push_back(dist(f(next.coords()), wk));
        out.steps.push_back(kobayashi_distance(next.coords(), wk));
        out.points.push_back(next);
        if (1.0 - norm(next.coords()) < 1e-12) {
            out.truncated = true;
            out.note = "orbit reached boundary resolution";
            break;
        }
    }

    double sup_step = 0.0;
    for (double s : out.steps) sup_step = std::max(sup_step, s);
    out.s = std::exp(2.0 * sup_step);

    // Limit: tail heading to the boundary with direction matching p.
    const CVec& last = out.points.back().coords();
    const double nl = norm(last);
    if (out.points.size() >= 2 && 1.0 - nl < 0.05) {
        const CVec dir = (1.0 / nl) * last;
        if (dist(dir, p.coords()) < 1e-5) out.limit = BPoint(dir);
    }

    // Smallest tested amplitude whose region holds the tail (pole 0).
    const size_t tail_start = out.points.size() / 2;
    for (int M : {2, 4, 8, 16, 32}) {
        bool all = true;
        const KRegionQuery q(origin(p.dim()), p, static_cast<double>(M));
        for (size_t i = tail_start; i < out.points.size() && all; ++i)
            all = in_K_region(q, out.points[i]);
        if (all) {
            out.k_region_tail = M;
            break;
        }
    }
    return out;
}

ContactCurve contact_curve(const Semigroup& S, const BPoint& p,
                           const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("contact_curve: empty grid");
    const double t_max = *std::max_element(t_grid.begin(), t_grid.end());
    const ContactClassification pre = classify_boundary_point(time_slice(S, t_max), p);
    if (pre.kind != ContactClassification::Kind::RegularContact &&
        pre.kind != ContactClassification::Kind::RegularFixed)
        throw std::invalid_argument(
            "contact_curve: p is not a regular contact point of the deepest slice");

    ContactCurve out;
    out.t = t_grid;
    for (double tj : t_grid) {
        const RadialLimit rl = radial_limit(time_slice(S, tj), p);
        if (!rl.cauchy || !rl.boundary) {
            out.ok = false;
            out.offending_t.push_back(tj);
            continue;
        }
        out.curve.emplace_back(rl.value);
    }
    if (!out.ok) {
        std::ostringstream note;
        note << "no boundary limit at " << out.offending_t.size()
             << " slice(s); first offending t = " << out.offending_t.front();
        out.note = note.str();
    }
    for (size_t j = 0; j + 1 < out.curve.size(); ++j)
        out.modulus =
            std::max(out.modulus, dist(out.curve[j].coords(), out.curve[j + 1].coords()));
    return out;
}

namespace {

std::string kind_name(ContactClassification::Kind k) {
    switch (k) {
    case ContactClassification::Kind::NotContact: return "not_contact";
    case ContactClassification::Kind::RegularContact: return "regular_contact";
    case ContactClassification::Kind::RegularFixed: return "regular_fixed";
    case ContactClassification::Kind::NonRegular: return "non_regular";
    default: return "undetermined";
    }
}

} // namespace

CommonBrfpReport common_brfp_verify(const Semigroup& S, const BPoint& p, double t0,
                                    const std::vector<double>& t_grid, int orbit_len) {
    if (!(t0 > 0.0)) throw std::invalid_argument("common_brfp_verify: t0 must be > 0");
    CommonBrfpReport rep;
    const MapSpec f0 = time_slice(S, t0);

    const ContactClassification cls0 = classify_boundary_point(f0, p);
    if (cls0.kind != ContactClassification::Kind::RegularFixed) {
        rep.hypothesis_ok = false;
        rep.violations.push_back("p is not a regular fixed point of the time-t0 slice (" +
                                 kind_name(cls0.kind) + ")");
    } else {
        rep.alpha_t0 = *cls0.alpha;
        if (std::abs(rep.alpha_t0 - 1.0) < 1e-9) {
            // Unit dilation is admissible only at the attracting boundary
            // point of a non-elliptic map.
            bool dw_ok = false;
            try {
                const MapClass mc = classify_map(f0);
                dw_ok = mc.kind == MapClass::Kind::NonElliptic &&
                        dist(mc.dw_point->coords(), p.coords()) < 1e-5;
            } catch (const inconclusive_error&) {
                dw_ok = false;
            }
            if (!dw_ok) {
                rep.hypothesis_ok = false;
                rep.violations.push_back(
                    "alpha = 1 at p but p is not the attracting boundary point of the slice");
            }
        }
    }

    // Isolation: local boundary scan around p. Any regular fixed point with
    // comparable dilation beyond p's own 3h-cluster breaks isolation.
    if (cls0.kind == ContactClassification::Kind::RegularFixed) {
        const double h_chord = 2.0 * std::sin(0.5 * 1.0 * 0.017453292519943295);
        ScanGrid patch;
        patch.step_deg = 1.0;
        patch.patch_center = p;
        patch.patch_radius = 15.0 * h_chord;
        const auto hits = scan_brfp(f0, rep.alpha_t0 + 1e-6, patch);
        double own_diameter = 0.0;
        int far_hits = 0;
        for (const auto& h : hits) {
            const double d = dist(h.p.coords(), p.coords());
            if (d <= 3.0 * h_chord)
                own_diameter = std::max(own_diameter, d);
            else
                ++far_hits;
        }
        rep.nearby_fixed_points = far_hits;
        rep.isolated = far_hits == 0 && own_diameter < 3.0 * h_chord &&
                       (hits.size() <= 1 || own_diameter < 3.0 * h_chord);
        // A thick own-cluster (several grid nodes fixed) is not isolated.
        int own_hits = static_cast<int>(hits.size()) - far_hits;
        if (own_hits > 1) rep.isolated = false;
        if (!rep.isolated) {
            rep.hypothesis_ok = false;
            std::ostringstream v;
            v << "p is not isolated at 1 degree resolution (" << far_hits
              << " other fixed grid points nearby, own cluster " << own_hits << " nodes)";
            rep.violations.push_back(v.str());
        }
    }

    // Backward orbit for the time-t0 slice.
    const CPoint w0((1.0 - 0.1) * p.coords());
    if (cls0.kind == ContactClassification::Kind::RegularFixed)
        rep.orbit = backward_orbit(f0, p, w0, orbit_len);

    // Per-slice diagnostics: contact value, classification, pushed sequence.
    for (double t : t_grid) {
        CommonBrfpReport::Slice sl;
        sl.t = t;
        const MapSpec ft = time_slice(S, t);
        const RadialLimit rl = radial_limit(ft, p);
        sl.contact_value = rl.value;
        sl.contact_boundary = rl.boundary;
        const ContactClassification ct = classify_boundary_point(ft, p);
        sl.classification = kind_name(ct.kind);
        if (ct.alpha) sl.alpha_t = ct.alpha;

        if (rep.orbit.points.size() >= 2) {
            double excess = 0.0;
            CVec prev_push = S.flow(t, rep.orbit.points[0].coords());
            for (size_t k = 0; k + 1 < rep.orbit.points.size(); ++k) {
                const CVec push_next = S.flow(t, rep.orbit.points[k + 1].coords());
                const double pushed_step = kobayashi_distance(prev_push, push_next);
                excess = std::max(excess, pushed_step - rep.orbit.steps[k]);
                prev_push = push_next;
            }
            sl.step_bound_excess = excess;
            const double np = norm(prev_push);
            if (1.0 - np < 0.2) {
                sl.pushed_limit = BPoint((1.0 / np) * prev_push);
                sl.push_gap = dist(sl.pushed_limit->coords(), p.coords());
            } else {
                sl.push_gap = dist(prev_push, p.coords());
            }
        }
        rep.slices.push_back(std::move(sl));
    }

    // Dilation power law across grid and t0.
    std::vector<double> law_grid = t_grid;
    law_grid.push_back(t0);
    std::sort(law_grid.begin(), law_grid.end());
    law_grid.erase(std::unique(law_grid.begin(), law_grid.end()), law_grid.end());
    rep.law = dilation_law_fit(S, p, law_grid);

    if (!rep.hypothesis_ok) {
        rep.verdict = CommonBrfpReport::Verdict::HypothesisViolation;
        return rep;
    }
    bool pass = true;
    for (const auto& sl : rep.slices) {
        if (!sl.alpha_t || sl.classification != "regular_fixed") pass = false;
        if (!(sl.push_gap < 1e-4)) pass = false;
    }
    if (!rep.law.hypothesis_ok || !rep.law.pass) pass = false;
    rep.verdict = pass ? CommonBrfpReport::Verdict::Pass : CommonBrfpReport::Verdict::Fail;
    return rep;
}

} // namespace kobdyn
