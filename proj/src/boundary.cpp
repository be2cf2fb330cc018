#include "kobdyn/boundary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace kobdyn {

namespace {

constexpr double kDegree = 0.017453292519943295769; // radians

CVec radial_point(const BPoint& p, double r) { return r * p.coords(); }

// Richardson step for a first-order tail: picks the rung where successive
// extrapolants stop improving and reports that plateau gap as the error.
struct Extrapolated {
    Cx value;
    double error;
};

Extrapolated richardson_limit(const std::vector<Cx>& seq) {
    std::vector<Cx> acc(seq.size() - 1);
    for (size_t j = 0; j + 1 < seq.size(); ++j) acc[j] = 2.0 * seq[j + 1] - seq[j];
    if (acc.size() < 3) return {acc.back(), std::abs(acc.back() - acc.front())};
    // Deep rungs quantize and can repeat exactly, so a single tiny gap is
    // not trustworthy; ask for two adjacent small gaps.
    size_t best = 1;
    double best_score = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j + 2 < acc.size(); ++j) {
        const double score =
            std::abs(acc[j + 1] - acc[j]) + std::abs(acc[j + 2] - acc[j + 1]);
        if (score < best_score) {
            best_score = score;
            best = j + 1;
        }
    }
    return {acc[best], best_score};
}

} // namespace

RadialLimit radial_limit(const MapSpec& f, const BPoint& p) {
    if (f.dim() != p.dim()) throw std::invalid_argument("radial_limit: dimension mismatch");
    RadialLimit out;
    CVec prev, prev2;
    bool have_prev = false, have_prev2 = false;
    for (int j = 4; j <= 40; ++j) {
        const double r = 1.0 - std::ldexp(1.0, -j);
        const CVec v = f(radial_point(p, r));
        if (have_prev) {
            const double gap = dist(v, prev);
            out.tail_gap = gap;
            if (gap < 1e-9 && j >= 8) {
                // First-order tail: one extrapolation step sharpens the limit.
                out.value = 2.0 * v - prev;
                out.cauchy = true;
                out.rungs = j;
                out.boundary = 1.0 - norm(out.value) < 1e-7;
                return out;
            }
        }
        prev2 = prev;
        have_prev2 = have_prev;
        prev = v;
        have_prev = true;
    }
    out.rungs = 40;
    out.value = have_prev2 ? CVec(2.0 * prev - prev2) : prev;
    out.cauchy = false;
    out.boundary = 1.0 - norm(out.value) < 1e-7;
    return out;
}

DilationResult dilation_coefficient(const MapSpec& f, const BPoint& p) {
    const RadialLimit rl = radial_limit(f, p);
    if (!rl.cauchy)
        throw inconclusive_error("dilation_coefficient: radial limit undetermined",
                                 "non-Cauchy radial tail");
    if (!rl.boundary)
        throw std::invalid_argument(
            "dilation_coefficient: radial limit is interior; p is not a contact point");

    DilationResult out;
    out.target = BPoint(rl.value);
    const CVec q = out.target->coords();

    std::vector<Cx> ratios;
    std::vector<Cx> julia;
    const CVec zero(p.dim());
    for (int j = 8; j <= 40; ++j) {
        const double one_minus_r = std::ldexp(1.0, -j);
        const double r = 1.0 - one_minus_r;
        const CVec z = radial_point(p, r);
        const CVec w = f(z);
        const Cx ratio = (Cx(1.0, 0.0) - inner(w, q)) / one_minus_r;
        out.samples.emplace_back(r, ratio.real());
        if (std::abs(ratio) > 1e8) {
            out.infinite = true;
            out.converged = true;
            return out;
        }
        ratios.push_back(ratio);
        if (j <= 30)
            julia.push_back(
                std::exp(2.0 * (kobayashi_distance(zero, z) - kobayashi_distance(zero, w))));
    }

    const Extrapolated ex = richardson_limit(ratios);
    const double alpha = ex.value.real();
    if (!(alpha > 0.0) || ex.error > 0.01 * std::max(std::abs(ex.value), 1.0))
        throw inconclusive_error("dilation_coefficient: oscillating ratios",
                                 "radial quotient did not settle");
    const Extrapolated exj = richardson_limit(julia);
    out.alpha = alpha;
    out.julia_alpha = exj.value.real();
    out.converged = true;
    out.lower_bound = std::exp(-2.0 * kobayashi_distance(zero, f(zero)));
    out.error_estimate =
        std::max({ex.error, std::abs(ex.value.imag()), std::abs(out.alpha - out.julia_alpha)});
    return out;
}

ContactClassification classify_boundary_point(const MapSpec& f, const BPoint& p) {
    ContactClassification out;
    const RadialLimit rl = radial_limit(f, p);
    if (!rl.cauchy) {
        out.kind = ContactClassification::Kind::Undetermined;
        std::ostringstream note;
        note << "radial tail not Cauchy after " << rl.rungs << " rungs (gap " << rl.tail_gap
             << ")";
        out.note = note.str();
        return out;
    }
    if (!rl.boundary) {
        out.kind = ContactClassification::Kind::NotContact;
        out.interior_limit = rl.value;
        return out;
    }
    DilationResult dr;
    try {
        dr = dilation_coefficient(f, p);
    } catch (const inconclusive_error& e) {
        out.kind = ContactClassification::Kind::Undetermined;
        out.note = e.what();
        return out;
    }
    out.q = dr.target;
    if (dr.infinite) {
        out.kind = ContactClassification::Kind::NonRegular;
        out.note = "radial quotient exceeded 1e8";
        return out;
    }
    out.alpha = dr.alpha;
    out.kind = dist(dr.target->coords(), p.coords()) < 1e-8
                   ? ContactClassification::Kind::RegularFixed
                   : ContactClassification::Kind::RegularContact;
    return out;
}

ChainRuleReport chain_rule_check(const MapSpec& f, const MapSpec& g, const BPoint& p) {
    const DilationResult df = dilation_coefficient(f, p);
    if (df.infinite)
        throw std::invalid_argument("chain_rule_check: alpha_p(f) must be finite");
    const DilationResult dg = dilation_coefficient(g, *df.target);
    const DilationResult dgf = dilation_coefficient(compose(g, f), p);
    ChainRuleReport rep;
    rep.alpha_p_f = df.alpha;
    rep.alpha_fp_g = dg.infinite ? std::numeric_limits<double>::infinity() : dg.alpha;
    rep.alpha_p_gf = dgf.infinite ? std::numeric_limits<double>::infinity() : dgf.alpha;
    if (dg.infinite || dgf.infinite) {
        rep.pass = dg.infinite && dgf.infinite;
        rep.relative_residual = rep.pass ? 0.0 : std::numeric_limits<double>::infinity();
        return rep;
    }
    rep.relative_residual =
        std::abs(rep.alpha_p_gf - rep.alpha_fp_g * rep.alpha_p_f) / std::abs(rep.alpha_p_gf);
    rep.pass = rep.relative_residual < 1e-4;
    return rep;
}

LambdaFitReport dilation_law_fit(const Semigroup& S, const BPoint& p,
                                 const std::vector<double>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("dilation_law_fit: empty grid");
    LambdaFitReport rep;
    for (double t : t_grid) {
        const ContactClassification c = classify_boundary_point(time_slice(S, t), p);
        if (c.kind != ContactClassification::Kind::RegularFixed) {
            rep.hypothesis_ok = false;
            rep.offending_t.push_back(t);
            continue;
        }
        rep.alphas.emplace_back(t, *c.alpha);
    }
    if (!rep.hypothesis_ok) return rep;
    double num = 0.0, den = 0.0;
    for (const auto& [t, a] : rep.alphas) {
        num += t * std::log(a);
        den += t * t;
    }
    const double slope = num / den;
    rep.lambda = std::exp(slope);
    for (const auto& [t, a] : rep.alphas)
        rep.max_residual = std::max(rep.max_residual, std::abs(std::log(a) - t * slope));
    rep.pass = rep.max_residual < 1e-3;
    return rep;
}

// --- boundary grid scan ------------------------------------------------------

namespace {

struct ChartPoint {
    CVec p;
    std::vector<double> angles_deg;
};

// Chart of the unit sphere by polar factors with a phase per complex
// coordinate; degenerate angle combinations are emitted once.
std::vector<ChartPoint> chart_points(int dim, const ScanGrid& grid) {
    const double h = grid.step_deg;
    if (!(h > 0.0)) throw std::invalid_argument("scan_brfp: step must be positive");
    const int full = std::max(1, static_cast<int>(std::lround(360.0 / h)));
    const int quarter = std::max(1, static_cast<int>(std::lround(90.0 / h)));

    const bool patched = grid.patch_center.has_value();
    const CVec center = patched ? grid.patch_center->coords() : CVec(dim);
    auto keep = [&](const CVec& p) { return !patched || dist(p, center) <= grid.patch_radius; };

    std::vector<ChartPoint> out;
    auto phase = [&](int i) { return std::polar(1.0, i * h * kDegree); };

    if (dim == 1) {
        for (int i = 0; i < full; ++i) {
            CVec p{phase(i)};
            if (keep(p)) out.push_back({p, {i * h}});
        }
        return out;
    }
    if (dim == 2) {
        for (int ip = 0; ip <= quarter; ++ip) {
            const double psi = ip * h * kDegree;
            const double c = std::cos(psi), s = std::sin(psi);
            const int na = ip == quarter ? 1 : full;
            const int nb = ip == 0 ? 1 : full;
            for (int ia = 0; ia < na; ++ia)
                for (int ib = 0; ib < nb; ++ib) {
                    CVec p{c * phase(ia), s * phase(ib)};
                    if (keep(p)) out.push_back({p, {ip * h, ia * h, ib * h}});
                }
        }
        return out;
    }
    // dim == 3
    if (!patched && std::pow(360.0 / h, 3) * std::pow(90.0 / h, 2) > 5e8)
        throw std::invalid_argument("scan_brfp: grid too fine for dimension 3");
    for (int ip = 0; ip <= quarter; ++ip) {
        const double psi1 = ip * h * kDegree;
        const double c1 = std::cos(psi1), s1 = std::sin(psi1);
        const int na = ip == quarter ? 1 : full;
        const int nq = ip == 0 ? 1 : quarter + 1;
        for (int iq = 0; iq < nq; ++iq) {
            const double psi2 = iq * h * kDegree;
            const double c2 = std::cos(psi2), s2 = std::sin(psi2);
            const int nb = (ip == 0 || iq == quarter) ? 1 : full;
            const int nc = (ip == 0 || iq == 0) ? 1 : full;
            for (int ia = 0; ia < na; ++ia)
                for (int ib = 0; ib < nb; ++ib)
                    for (int ic = 0; ic < nc; ++ic) {
                        CVec p{c1 * phase(ia), s1 * c2 * phase(ib), s1 * s2 * phase(ic)};
                        if (keep(p))
                            out.push_back({p, {ip * h, iq * h, ia * h, ib * h, ic * h}});
                    }
        }
    }
    return out;
}

int scan_thread_count() {
    if (const char* env = std::getenv("KOBDYN_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return std::min(n, 64);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(std::min(hw, 16u));
}

// Spatial hash over the 2*dim real coordinates; link radius sets the cell.
class PointHash {
public:
    PointHash(const std::vector<const CVec*>& pts, double cell) : cell_(cell), pts_(pts) {
        for (size_t i = 0; i < pts.size(); ++i) cells_[key(*pts[i])].push_back(i);
    }

    template <typename Fn>
    void for_neighbors(size_t i, Fn&& fn) const {
        const CVec& p = *pts_[i];
        int base[6];
        const int d = coords(p, base);
        int off[6] = {0};
        visit(base, off, 0, d, i, fn);
    }

private:
    int coords(const CVec& p, int* out) const {
        int d = 0;
        for (int k = 0; k < p.size(); ++k) {
            out[d++] = static_cast<int>(std::floor((p[k].real() + 2.0) / cell_));
            out[d++] = static_cast<int>(std::floor((p[k].imag() + 2.0) / cell_));
        }
        return d;
    }
    static std::uint64_t pack(const int* c, int d) {
        std::uint64_t k = 1469598103934665603ull;
        for (int i = 0; i < d; ++i) {
            k ^= static_cast<std::uint64_t>(c[i] + (1 << 20));
            k *= 1099511628211ull;
        }
        return k;
    }
    std::uint64_t key(const CVec& p) const {
        int c[6];
        const int d = coords(p, c);
        return pack(c, d);
    }
    template <typename Fn>
    void visit(const int* base, int* off, int axis, int d, size_t self, Fn&& fn) const {
        if (axis == d) {
            int cur[6];
            for (int i = 0; i < d; ++i) cur[i] = base[i] + off[i];
            auto it = cells_.find(pack(cur, d));
            if (it == cells_.end()) return;
            for (size_t j : it->second)
                if (j != self) fn(j);
            return;
        }
        for (int s = -1; s <= 1; ++s) {
            off[axis] = s;
            visit(base, off, axis + 1, d, self, fn);
        }
    }

    double cell_;
    const std::vector<const CVec*>& pts_;
    std::unordered_map<std::uint64_t, std::vector<size_t>> cells_;
};

} // namespace

std::vector<BrfpHit> scan_brfp(const MapSpec& f, double A, const ScanGrid& grid) {
    if (!(A >= 1.0)) throw std::invalid_argument("scan_brfp: A must be >= 1");
    const std::vector<ChartPoint> pts = chart_points(f.dim(), grid);
    const double h_chord = 2.0 * std::sin(0.5 * grid.step_deg * kDegree);

    // Cheap reject first: a grid point whose single radial probe lands far
    // from itself cannot carry a fixed point at this dilation bound.
    const double r0 = 1.0 - std::ldexp(1.0, -10);
    const double prefilter =
        std::max({3.0 * h_chord, 0.02, 2.0 * (A + 2.0) * std::ldexp(1.0, -10)});

    const int nthreads = std::max(
        1, std::min(scan_thread_count(), static_cast<int>(pts.size() / 4096) + 1));
    std::vector<std::vector<size_t>> candidate_lists(nthreads);
    {
        std::vector<std::thread> pool;
        const size_t chunk = (pts.size() + nthreads - 1) / nthreads;
        for (int tix = 0; tix < nthreads; ++tix) {
            pool.emplace_back([&, tix]() {
                const size_t lo = tix * chunk, hi = std::min(pts.size(), lo + chunk);
                for (size_t i = lo; i < hi; ++i) {
                    const CVec z = r0 * pts[i].p;
                    if (dist(f(z), z) <= prefilter) candidate_lists[tix].push_back(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }

    std::vector<BrfpHit> hits;
    for (const auto& list : candidate_lists)
        for (size_t i : list) {
            const BPoint bp(pts[i].p);
            const ContactClassification c = classify_boundary_point(f, bp);
            if (c.kind != ContactClassification::Kind::RegularFixed) continue;
            if (!(*c.alpha <= A + 1e-9)) continue;
            hits.push_back(BrfpHit{bp, *c.alpha, false, pts[i].angles_deg, 0, 0, 0.0});
        }

    std::sort(hits.begin(), hits.end(),
              [](const BrfpHit& a, const BrfpHit& b) { return a.chart_deg < b.chart_deg; });

    const size_t n = hits.size();
    if (n == 0) return hits;
    std::vector<const CVec*> positions(n);
    for (size_t i = 0; i < n; ++i) positions[i] = &hits[i].p.coords();

    // Union-find with hashed neighborhood lookups at link radius 3h.
    std::vector<int> parent(n);
    for (size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int i) {
        while (parent[i] != i) i = parent[i] = parent[parent[i]];
        return i;
    };
    {
        const PointHash hash(positions, 3.0 * h_chord);
        for (size_t i = 0; i < n; ++i)
            hash.for_neighbors(i, [&](size_t j) {
                if (dist(*positions[i], *positions[j]) < 3.0 * h_chord) {
                    const int a = find(static_cast<int>(i)), b = find(static_cast<int>(j));
                    if (a != b) parent[a] = b;
                }
            });
    }
    std::vector<int> cluster_of(n);
    std::vector<int> roots;
    for (size_t i = 0; i < n; ++i) {
        const int r = find(static_cast<int>(i));
        auto it = std::find(roots.begin(), roots.end(), r);
        if (it == roots.end()) {
            roots.push_back(r);
            cluster_of[i] = static_cast<int>(roots.size()) - 1;
        } else {
            cluster_of[i] = static_cast<int>(it - roots.begin());
        }
    }
    const int nclusters = static_cast<int>(roots.size());
    std::vector<std::vector<size_t>> members(nclusters);
    for (size_t i = 0; i < n; ++i) members[cluster_of[i]].push_back(i);

    std::vector<double> diameter(nclusters, 0.0);
    for (int c = 0; c < nclusters; ++c) {
        const auto& m = members[c];
        if (m.size() <= 256) {
            for (size_t i = 0; i < m.size(); ++i)
                for (size_t j = i + 1; j < m.size(); ++j)
                    diameter[c] =
                        std::max(diameter[c], dist(*positions[m[i]], *positions[m[j]]));
        } else {
            // Large clusters cannot be 3h-thin; a radius bound is enough.
            for (size_t j = 1; j < m.size(); ++j)
                diameter[c] = std::max(diameter[c], dist(*positions[m[0]], *positions[m[j]]));
        }
    }
    std::vector<bool> crowded(nclusters, false);
    {
        const PointHash hash(positions, 10.0 * h_chord);
        for (size_t i = 0; i < n; ++i)
            hash.for_neighbors(i, [&](size_t j) {
                if (cluster_of[i] != cluster_of[j] &&
                    dist(*positions[i], *positions[j]) < 10.0 * h_chord) {
                    crowded[cluster_of[i]] = true;
                    crowded[cluster_of[j]] = true;
                }
            });
    }
    for (size_t i = 0; i < n; ++i) {
        const int c = cluster_of[i];
        hits[i].cluster = c;
        hits[i].cluster_size = static_cast<int>(members[c].size());
        hits[i].cluster_diameter = diameter[c];
        hits[i].isolated = diameter[c] < 3.0 * h_chord && !crowded[c];
    }
    return hits;
}

} // namespace kobdyn
