#include "kobdyn/holomap.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <sstream>

namespace kobdyn {

namespace {

constexpr double kTwoPi = 6.283185307179586477;

using EMat = Eigen::Matrix<Cx, Eigen::Dynamic, Eigen::Dynamic>;
using EVec = Eigen::Matrix<Cx, Eigen::Dynamic, 1>;

EMat to_eigen(const CMat& m) {
    EMat e(m.size(), m.size());
    for (int i = 0; i < m.size(); ++i)
        for (int j = 0; j < m.size(); ++j) e(i, j) = m.at(i, j);
    return e;
}

EVec to_eigen(const CVec& v) {
    EVec e(v.size());
    for (int i = 0; i < v.size(); ++i) e(i) = v[i];
    return e;
}

CVec from_eigen(const EVec& e) {
    CVec v(static_cast<int>(e.size()));
    for (int i = 0; i < v.size(); ++i) v[i] = e(i);
    return v;
}

// Time-t slice of the half-space dilation of the ball of dimension 2,
// written in a form with no pole at z1 = 1:
//   z1' = (e^t(1+z1) - (1-z1)) / (e^t(1+z1) + (1-z1)),
//   z2' = 2 e^{t/2} z2 / (e^t(1+z1) + (1-z1)).
CVec siegel_flow(double t, const CVec& z) {
    const double et = std::exp(t);
    const Cx up = et * (1.0 + z[0]);
    const Cx um = 1.0 - z[0];
    const Cx den = up + um;
    return CVec{(up - um) / den, (2.0 * std::exp(0.5 * t)) * z[1] / den};
}

} // namespace

MapSpec::MapSpec(Variant v, int dim, std::string label)
    : v_(std::move(v)), dim_(dim), label_(std::move(label)) {
    validate();
}

CVec MapSpec::operator()(const CVec& z) const {
    if (z.size() != dim_) throw std::invalid_argument("MapSpec: dimension mismatch");
    return std::visit(
        [&](const auto& m) -> CVec {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, mapspec::BallAutomorphism>) {
                return m.unitary * ball_involution(m.a, z);
            } else if constexpr (std::is_same_v<T, mapspec::DiscMoebius>) {
                return CVec{(m.a * z[0] + m.b) / (m.c * z[0] + m.d)};
            } else if constexpr (std::is_same_v<T, mapspec::Diagonal>) {
                CVec r(z.size());
                for (int i = 0; i < z.size(); ++i) r[i] = m.mu[i] * z[i];
                return r;
            } else if constexpr (std::is_same_v<T, mapspec::SliceRotation>) {
                const Cx rot = std::polar(1.0, kTwoPi * m.theta);
                return CVec{rot * z[0], z[1] * (z[1] + m.a) / (1.0 + m.a * z[1])};
            } else if constexpr (std::is_same_v<T, mapspec::SiegelMap>) {
                return siegel_flow(m.t, z);
            } else if constexpr (std::is_same_v<T, mapspec::FlowMap>) {
                return m.backend->flow(m.t, z);
            } else if constexpr (std::is_same_v<T, mapspec::Composite>) {
                CVec r = z;
                for (const MapSpec& part : m.chain) r = part(r);
                return r;
            } else {
                CVec r = m.eval(z);
                if (r.size() != dim_)
                    throw std::runtime_error("MapSpec: custom evaluator changed dimension");
                return r;
            }
        },
        v_);
}

CMat FlowBackend::flow_jacobian(double t, const CVec& z) const {
    return numeric_jacobian([this, t](const CVec& x) { return flow(t, x); }, z);
}

CMat MapSpec::jacobian(const CVec& z) const {
    if (const auto* fm = std::get_if<mapspec::FlowMap>(&v_))
        return fm->backend->flow_jacobian(fm->t, z);
    return numeric_jacobian([this](const CVec& x) { return (*this)(x); }, z);
}

std::optional<CVec> MapSpec::closed_inverse(const CVec& target) const {
    return std::visit(
        [&](const auto& m) -> std::optional<CVec> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, mapspec::BallAutomorphism>) {
                return ball_involution(m.a, m.unitary.adjoint() * target);
            } else if constexpr (std::is_same_v<T, mapspec::DiscMoebius>) {
                return CVec{(m.d * target[0] - m.b) / (m.a - m.c * target[0])};
            } else if constexpr (std::is_same_v<T, mapspec::Diagonal>) {
                CVec r(target.size());
                for (int i = 0; i < target.size(); ++i) {
                    if (std::abs(m.mu[i]) == 0.0) return std::nullopt;
                    r[i] = target[i] / m.mu[i];
                }
                return r;
            } else if constexpr (std::is_same_v<T, mapspec::SiegelMap>) {
                return siegel_flow(-m.t, target);
            } else if constexpr (std::is_same_v<T, mapspec::FlowMap>) {
                return m.backend->flow_inverse(m.t, target);
            } else if constexpr (std::is_same_v<T, mapspec::Composite>) {
                CVec r = target;
                for (auto it = m.chain.rbegin(); it != m.chain.rend(); ++it) {
                    auto pre = it->closed_inverse(r);
                    if (!pre) return std::nullopt;
                    r = *pre;
                }
                return r;
            } else {
                return std::nullopt;
            }
        },
        v_);
}

void MapSpec::validate() const {
    for (const CVec& z : interior_samples(dim_, 200)) {
        if (norm((*this)(z)) >= 1.0)
            throw std::invalid_argument("MapSpec(" + label_ +
                                        "): sample image escapes the ball; not a self-map");
    }
    if (const auto* mo = std::get_if<mapspec::DiscMoebius>(&v_)) {
        for (int k = 0; k < 64; ++k) {
            const Cx e = std::polar(1.0, kTwoPi * k / 64.0);
            const Cx img = (mo->a * e + mo->b) / (mo->c * e + mo->d);
            if (std::abs(img) > 1.0 + 1e-12)
                throw std::invalid_argument("MapSpec(" + label_ +
                                            "): boundary sample escapes the closed disc");
        }
    }
}

MapSpec MapSpec::ball_automorphism(const CPoint& a) {
    return ball_automorphism(a, CMat::identity(a.dim()));
}

MapSpec MapSpec::ball_automorphism(const CPoint& a, const CMat& unitary) {
    if (unitary.size() != a.dim())
        throw std::invalid_argument("ball_automorphism: unitary dimension mismatch");
    if (unitary.unitarity_defect() > 1e-12)
        throw std::invalid_argument("ball_automorphism: matrix is not unitary");
    return MapSpec(mapspec::BallAutomorphism{a.coords(), unitary}, a.dim(), "aut");
}

MapSpec MapSpec::disc_moebius(Cx a, Cx b, Cx c, Cx d) {
    if (std::abs(a * d - b * c) < 1e-14)
        throw std::invalid_argument("disc_moebius: degenerate coefficients");
    return MapSpec(mapspec::DiscMoebius{a, b, c, d}, 1, "moebius");
}

MapSpec MapSpec::diagonal(const CVec& mu) {
    for (int i = 0; i < mu.size(); ++i)
        if (std::abs(mu[i]) > 1.0)
            throw std::invalid_argument("diagonal: |mu_i| must be <= 1");
    return MapSpec(mapspec::Diagonal{mu}, mu.size(), "diagonal");
}

MapSpec MapSpec::slice_rotation(double theta, double a) {
    if (!(a > 0.0 && a < 1.0))
        throw std::invalid_argument("slice_rotation: a must be in (0,1)");
    return MapSpec(mapspec::SliceRotation{theta, a}, 2, "slice_rotation");
}

MapSpec MapSpec::siegel(double t) { return MapSpec(mapspec::SiegelMap{t}, 2, "siegel"); }

MapSpec MapSpec::flow(std::shared_ptr<const FlowBackend> backend, double t) {
    if (!backend) throw std::invalid_argument("flow: null backend");
    const int dim = backend->dimension();
    std::ostringstream label;
    label << backend->label() << "@t=" << t;
    return MapSpec(mapspec::FlowMap{std::move(backend), t}, dim, label.str());
}

MapSpec MapSpec::custom(int dim, std::function<CVec(const CVec&)> eval, std::string label) {
    return MapSpec(mapspec::Custom{dim, std::move(eval), label}, dim, std::move(label));
}

MapSpec MapSpec::identity(int dim) {
    CVec mu(dim);
    for (int i = 0; i < dim; ++i) mu[i] = 1.0;
    return MapSpec(mapspec::Diagonal{mu}, dim, "identity");
}

CPoint evaluate(const MapSpec& f, const CPoint& z) {
    CVec img = f(z.coords());
    if (norm(img) >= 1.0 - kInteriorMargin)
        throw std::runtime_error("evaluate: image is not interior (integrity violation)");
    return CPoint(img);
}

MapSpec compose(const MapSpec& f, const MapSpec& g) {
    if (f.dim() != g.dim()) throw std::invalid_argument("compose: dimension mismatch");
    std::vector<MapSpec> chain;
    if (const auto* cg = std::get_if<mapspec::Composite>(&g.variant()))
        chain = cg->chain;
    else
        chain.push_back(g);
    if (const auto* cf = std::get_if<mapspec::Composite>(&f.variant()))
        chain.insert(chain.end(), cf->chain.begin(), cf->chain.end());
    else
        chain.push_back(f);
    return MapSpec(mapspec::Composite{std::move(chain)}, f.dim(),
                   f.label() + "*" + g.label());
}

std::vector<CPoint> iterate(const MapSpec& f, const CPoint& z, int n) {
    if (n < 0) throw std::invalid_argument("iterate: n must be >= 0");
    std::vector<CPoint> orbit;
    orbit.reserve(n + 1);
    orbit.push_back(z);
    CVec cur = z.coords();
    for (int k = 0; k < n; ++k) {
        cur = f(cur);
        orbit.push_back(CPoint(cur));
    }
    return orbit;
}

namespace {

struct SeedOutcome {
    enum class Kind { Interior, Boundary, Recurrent, Undetermined };
    Kind kind = Kind::Undetermined;
    CVec limit;
    long steps = 0;
};

constexpr int kOrbitCap = 100000;
constexpr double kBoundaryProximity = 1e-6;
constexpr double kInteriorConvergence = 1e-10;
constexpr double kCloseReturnWindow = 1e-4;

SeedOutcome run_orbit(const MapSpec& f, const CVec& seed) {
    SeedOutcome out;
    CVec z = seed;
    CVec ref;
    bool have_ref = false, excursion = false;
    for (long k = 1; k <= kOrbitCap; ++k) {
        CVec z1 = f(z);
        const double inc = dist(z1, z);
        const double nz = norm(z1);
        if (nz > 1.0 - kBoundaryProximity) {
            // Boundary run: iterate further until the direction settles.
            std::vector<CVec> dirs;
            dirs.push_back((1.0 / nz) * z1);
            for (int extra = 1; extra <= 20000; ++extra) {
                z1 = f(z1);
                const double n2 = norm(z1);
                if (n2 == 0.0) break;
                CVec d2 = (1.0 / n2) * z1;
                if (extra >= 50 && dist(d2, dirs[extra - 50]) < 1e-7) {
                    out.kind = SeedOutcome::Kind::Boundary;
                    out.limit = d2;
                    out.steps = k + extra;
                    return out;
                }
                dirs.push_back(d2);
            }
            out.kind = SeedOutcome::Kind::Boundary;
            out.limit = dirs.back();
            out.steps = k + static_cast<long>(dirs.size());
            return out;
        }
        if (inc < kInteriorConvergence) {
            out.kind = SeedOutcome::Kind::Interior;
            out.limit = z1;
            out.steps = k;
            return out;
        }
        if (k == 32) {
            ref = z1;
            have_ref = true;
        } else if (have_ref) {
            const double d = dist(z1, ref);
            if (d > 10.0 * kCloseReturnWindow) excursion = true;
            else if (excursion && d < kCloseReturnWindow) {
                out.kind = SeedOutcome::Kind::Recurrent;
                out.limit = z1;
                out.steps = k;
                return out;
            }
        }
        z = z1;
    }
    out.steps = kOrbitCap;
    return out;
}

} // namespace

MapClass classify_map(const MapSpec& f) {
    const auto seeds = orbit_seeds(f.dim(), 5);
    std::vector<SeedOutcome> outcomes;
    outcomes.reserve(seeds.size());
    for (const CPoint& s : seeds) outcomes.push_back(run_orbit(f, s.coords()));

    int boundary = 0, interior = 0, recurrent = 0;
    for (const auto& o : outcomes) {
        switch (o.kind) {
        case SeedOutcome::Kind::Boundary: ++boundary; break;
        case SeedOutcome::Kind::Interior: ++interior; break;
        case SeedOutcome::Kind::Recurrent: ++recurrent; break;
        default: {
            std::ostringstream diag;
            diag << "orbit did not settle after " << o.steps << " iterations";
            throw inconclusive_error("classify_map: inconclusive", diag.str());
        }
        }
    }

    auto mutual_close = [&](SeedOutcome::Kind kind, double tol) {
        double worst = 0.0;
        for (size_t i = 0; i < outcomes.size(); ++i)
            for (size_t j = i + 1; j < outcomes.size(); ++j)
                if (outcomes[i].kind == kind && outcomes[j].kind == kind)
                    worst = std::max(worst, dist(outcomes[i].limit, outcomes[j].limit));
        return worst < tol;
    };

    const int n = static_cast<int>(outcomes.size());
    if (boundary == n) {
        if (!mutual_close(SeedOutcome::Kind::Boundary, 1e-5))
            throw inconclusive_error("classify_map: inconclusive",
                                     "orbits reach the boundary at disagreeing points");
        CVec acc(f.dim());
        for (const auto& o : outcomes) acc = acc + o.limit;
        return MapClass{MapClass::Kind::NonElliptic, std::nullopt, BPoint(acc)};
    }
    if (boundary > 0)
        throw inconclusive_error("classify_map: inconclusive",
                                 "some orbits reach the boundary, others stay inside");
    if (interior == n && mutual_close(SeedOutcome::Kind::Interior, 1e-5)) {
        CVec acc(f.dim());
        for (const auto& o : outcomes) acc = acc + (1.0 / n) * o.limit;
        CPoint x(acc);
        if (auto polished = interior_fixed_point(f)) x = *polished;
        return MapClass{MapClass::Kind::StronglyElliptic, x, std::nullopt};
    }
    (void)recurrent;
    return MapClass{MapClass::Kind::RotationalElliptic, std::nullopt, std::nullopt};
}

CMat numeric_jacobian(const std::function<CVec(const CVec&)>& f, const CVec& z, double step) {
    const int n = z.size();
    CMat J(n);
    for (int j = 0; j < n; ++j) {
        CVec zp = z, zm = z;
        zp[j] += step;
        zm[j] -= step;
        const CVec fp = f(zp), fm = f(zm);
        for (int i = 0; i < n; ++i) J.at(i, j) = (fp[i] - fm[i]) / (2.0 * step);
    }
    return J;
}

namespace {

// Damped Newton on F(z) = f(z) - z. Fails (nullopt) when iterates leave the
// safe interior region or the step stops making progress.
std::optional<CVec> newton_fixed_point(const MapSpec& f, CVec z) {
    auto feval = [&f](const CVec& x) { return f(x); };
    for (int it = 0; it < 100; ++it) {
        if (norm(z) > 1.0 - 1e-6) return std::nullopt;
        const CVec F = f(z) - z;
        const double res = norm(F);
        if (res < 1e-12) return z;
        CMat J = numeric_jacobian(feval, z, 1e-7);
        EMat A = to_eigen(J) - EMat::Identity(z.size(), z.size());
        EVec rhs = -to_eigen(F);
        Eigen::FullPivLU<EMat> lu(A);
        lu.setThreshold(1e-10);
        EVec delta;
        if (lu.rank() < z.size()) {
            // Fixed-point manifolds leave (df - I) rank deficient; take the
            // minimum-norm least-squares step instead.
            delta = A.completeOrthogonalDecomposition().solve(rhs);
        } else {
            delta = lu.solve(rhs);
        }
        bool accepted = false;
        double lambda = 1.0;
        for (int half = 0; half < 24; ++half) {
            CVec zt = z + from_eigen(EVec(lambda * delta));
            if (norm(zt) < 1.0 - 1e-12) {
                if (norm(f(zt) - zt) < (1.0 - 0.25 * lambda) * res) {
                    z = zt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if (!accepted) break; // stagnation; the final check decides
    }
    if (norm(f(z) - z) < 1e-10 && norm(z) < 1.0 - kInteriorMargin) return z;
    return std::nullopt;
}

} // namespace

std::optional<CPoint> interior_fixed_point(const MapSpec& f) {
    for (const CPoint& s : orbit_seeds(f.dim(), 10)) {
        if (auto x = newton_fixed_point(f, s.coords())) {
            if (norm(f(*x) - *x) < 1e-10) return CPoint(*x);
        }
    }
    // Orbit fallback for maps Newton cannot hold on to.
    for (const CPoint& s : orbit_seeds(f.dim(), 3)) {
        CVec z = s.coords();
        for (int k = 0; k < 5000; ++k) {
            CVec z1 = f(z);
            if (norm(z1) > 1.0 - 1e-6) break;
            if (dist(z1, z) < 1e-12) {
                if (norm(f(z1) - z1) < 1e-10) return CPoint(z1);
                break;
            }
            z = z1;
        }
    }
    return std::nullopt;
}

RetractionResult limit_retraction(const MapSpec& f) {
    auto x = interior_fixed_point(f);
    if (!x)
        throw std::invalid_argument(
            "limit_retraction: no interior fixed point located; map is not elliptic");

    const CMat J = f.jacobian(x->coords());
    Eigen::ComplexEigenSolver<EMat> es(to_eigen(J));
    if (es.info() != Eigen::Success)
        throw std::runtime_error("limit_retraction: eigenvalue computation failed");
    Eigen::FullPivLU<EMat> vlu(es.eigenvectors());
    vlu.setThreshold(1e-6);
    if (vlu.rank() < f.dim())
        throw std::invalid_argument("limit_retraction: differential is not diagonalizable");

    RetractionResult out{*x, {}, 0, 1, 0, 0.0, 0.0, nullptr};
    std::vector<double> angles;
    double attract_max = 0.0;
    for (int i = 0; i < f.dim(); ++i) {
        const Cx mu = es.eigenvalues()(i);
        out.eigenvalues.push_back(mu);
        if (std::abs(mu) > 1.0 - 1e-8) {
            ++out.manifold_dim;
            angles.push_back(std::arg(mu));
        } else {
            attract_max = std::max(attract_max, std::abs(mu));
        }
    }

    // Close returns of the unitary angles: smallest n with all e^{i n theta}
    // within 1e-9 of 1, best effort up to 10^6.
    long n_star = 1;
    double best_res = 0.0;
    if (!angles.empty()) {
        std::vector<Cx> rot(angles.size()), cur(angles.size(), Cx(1.0, 0.0));
        for (size_t i = 0; i < angles.size(); ++i) rot[i] = std::polar(1.0, angles[i]);
        best_res = std::numeric_limits<double>::infinity();
        long best_n = 1;
        for (long n = 1; n <= 1000000; ++n) {
            double r = 0.0;
            for (size_t i = 0; i < angles.size(); ++i) {
                cur[i] *= rot[i];
                r = std::max(r, std::abs(cur[i] - 1.0));
            }
            if (r < best_res) {
                best_res = r;
                best_n = n;
            }
            if (r < 1e-9) break;
        }
        n_star = best_n;
    }
    out.close_return_time = n_star;
    out.close_return_residual = angles.empty() ? 0.0 : best_res;

    long m = 1;
    if (attract_max > 0.0) {
        const double per_step = std::log10(attract_max);
        m = static_cast<long>(std::ceil(-12.0 / (static_cast<double>(n_star) * per_step)));
        m = std::max<long>(m, 1);
    }
    // Keep the evaluator affordable even when returns are poor.
    m = std::min<long>(m, std::max<long>(1, 200000 / std::max<long>(n_star, 1)));
    const long total = n_star * m;
    out.iterations = total;
    out.project = [f, total](const CVec& z) {
        CVec r = z;
        for (long k = 0; k < total; ++k) r = f(r);
        return r;
    };

    double conv = 0.0;
    for (const CVec& s : interior_samples(f.dim(), 25, 0.8)) {
        const CVec once = out.project(s);
        const CVec twice = out.project(once);
        conv = std::max(conv, dist(once, twice));
    }
    out.convergence_residual = conv;
    return out;
}

CVec siegel_time_slice(double t, const CVec& z) { return siegel_flow(t, z); }

} // namespace kobdyn
