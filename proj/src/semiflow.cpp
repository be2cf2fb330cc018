#include "kobdyn/semiflow.hpp"

#include <cmath>
#include <sstream>

namespace kobdyn {

namespace {
constexpr double kTwoPi = 6.283185307179586477;
}

GeneratorSpec::GeneratorSpec(int dim, std::function<CVec(const CVec&)> fn, std::string label)
    : dim_(dim), fn_(std::move(fn)), label_(std::move(label)) {
    // Continuity/finiteness probe on a sample set.
    for (const CVec& z : interior_samples(dim_, 32)) {
        const CVec g = fn_(z);
        for (int i = 0; i < g.size(); ++i)
            if (!std::isfinite(g[i].real()) || !std::isfinite(g[i].imag()))
                throw std::invalid_argument("GeneratorSpec: field is not finite on samples");
    }
}

GeneratorSpec GeneratorSpec::berkson_porta(Cx tau, std::vector<Cx> poly_coeffs) {
    if (std::abs(std::abs(tau) - 1.0) > 1e-12)
        throw std::invalid_argument("berkson_porta: tau must be a boundary point");
    if (poly_coeffs.empty()) throw std::invalid_argument("berkson_porta: empty polynomial");
    auto fn = [tau, poly = std::move(poly_coeffs)](const CVec& z) {
        Cx p = 0.0;
        for (auto it = poly.rbegin(); it != poly.rend(); ++it) p = p * z[0] + *it;
        return CVec{(z[0] - tau) * (std::conj(tau) * z[0] - 1.0) * p};
    };
    return GeneratorSpec(1, std::move(fn), "berkson_porta");
}

GeneratorSpec GeneratorSpec::field(int dim, std::function<CVec(const CVec&)> fn,
                                   std::string label) {
    return GeneratorSpec(dim, std::move(fn), std::move(label));
}

// --- Dormand-Prince 5(4) with FSAL ---------------------------------------

namespace dp5 {
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 35.0 / 384 - 5179.0 / 57600, e3 = 500.0 / 1113 - 7571.0 / 16695,
                 e4 = 125.0 / 192 - 393.0 / 640, e5 = -2187.0 / 6784 + 92097.0 / 339200,
                 e6 = 11.0 / 84 - 187.0 / 2100, e7 = -1.0 / 40;
constexpr double kTol = 1e-11;

// One adaptive integration over a caller-supplied state type. Vec must give
// size(), operator[], copies; the guard sees each accepted state.
template <typename Vec, typename Rhs, typename Guard>
Vec integrate(Rhs rhs, Vec z, double t_total, long max_steps, Guard guard) {
    const int n = static_cast<int>(z.size());
    double t = 0.0;
    Vec k1 = rhs(z);
    double vn = 0.0;
    for (int i = 0; i < n; ++i) vn += std::norm(k1[i]);
    double h = std::min(t_total, 1e-2 / (std::sqrt(vn) + 1.0));
    long steps = 0;

    auto stage = [n](const Vec& y, double hh,
                     std::initializer_list<std::pair<double, const Vec*>> terms) {
        Vec r = y;
        for (const auto& [c, k] : terms)
            for (int i = 0; i < n; ++i) r[i] += hh * c * (*k)[i];
        return r;
    };

    while (t < t_total) {
        if (++steps > max_steps)
            throw std::runtime_error("integrate_generator: step budget exhausted");
        h = std::min(h, t_total - t);

        const Vec k2 = rhs(stage(z, h, {{a21, &k1}}));
        const Vec k3 = rhs(stage(z, h, {{a31, &k1}, {a32, &k2}}));
        const Vec k4 = rhs(stage(z, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
        const Vec k5 = rhs(stage(z, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
        const Vec k6 =
            rhs(stage(z, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
        const Vec z5 = stage(z, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
        const Vec k7 = rhs(z5);

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            const Cx e =
                h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = kTol + kTol * std::max(std::abs(z[i]), std::abs(z5[i]));
            const double q = std::abs(e) / sc;
            err += q * q;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            t += h;
            z = z5;
            k1 = k7;
            guard(z);
            h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(err + 1e-300, -0.2)));
        } else {
            h *= std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return z;
}

} // namespace dp5

CVec integrate_generator(const GeneratorSpec& G, CVec z, double t_total) {
    if (t_total < 0.0) throw std::invalid_argument("integrate_generator: t must be >= 0");
    if (t_total == 0.0) return z;
    const long max_steps = static_cast<long>(1e6 * std::max(1.0, std::ceil(t_total)));
    return dp5::integrate([&G](const CVec& y) { return G(y); }, z, t_total, max_steps,
                          [](const CVec& y) {
                              if (1.0 - norm(y) < 1e-13)
                                  throw std::runtime_error("integrate_generator: generator not "
                                                           "semi-complete at this tolerance");
                          });
}

// Tangent flow: dJ/dt = DG(z) J alongside dz/dt = G(z), J(0) = I.
CMat integrate_generator_jacobian(const GeneratorSpec& G, const CVec& z0, double t_total) {
    const int n = z0.size();
    std::vector<Cx> y(n + n * n, Cx(0.0, 0.0));
    for (int i = 0; i < n; ++i) y[i] = z0[i];
    for (int i = 0; i < n; ++i) y[n + i * n + i] = 1.0;

    auto rhs = [&G, n](const std::vector<Cx>& s) {
        CVec z(n);
        for (int i = 0; i < n; ++i) z[i] = s[i];
        const CVec g = G(z);
        const CMat dg = numeric_jacobian([&G](const CVec& x) { return G(x); }, z, 1e-6);
        std::vector<Cx> out(s.size(), Cx(0.0, 0.0));
        for (int i = 0; i < n; ++i) out[i] = g[i];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                Cx acc = 0.0;
                for (int k = 0; k < n; ++k) acc += dg.at(i, k) * s[n + k * n + j];
                out[n + i * n + j] = acc;
            }
        return out;
    };
    const long max_steps = static_cast<long>(1e6 * std::max(1.0, std::ceil(t_total)));
    const auto yT =
        dp5::integrate(rhs, y, t_total, max_steps, [](const std::vector<Cx>&) {});
    CMat J(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) J.at(i, j) = yT[n + i * n + j];
    return J;
}

// --- Semigroup -------------------------------------------------------------

Semigroup::Semigroup(Variant v, int dim, std::string label)
    : v_(std::move(v)), dim_(dim), label_(std::move(label)) {
    const double tol = integrated() ? 1e-9 : 1e-12;
    for (const CVec& z : interior_samples(dim_, 16, 0.9))
        if (dist(flow(0.0, z), z) > tol)
            throw std::invalid_argument("Semigroup(" + label_ + "): phi_0 is not the identity");
}

Semigroup Semigroup::disc_hyperbolic(double lambda) {
    if (!(lambda > 0.0)) throw std::invalid_argument("disc_hyperbolic: lambda must be > 0");
    std::ostringstream l;
    l << "disc_hyperbolic(" << lambda << ")";
    return Semigroup(semigroup::DiscHyperbolic{lambda}, 1, l.str());
}

Semigroup Semigroup::ball_rotation(std::vector<double> theta) {
    const int dim = static_cast<int>(theta.size());
    if (dim < 1 || dim > CVec::kMaxDim)
        throw std::invalid_argument("ball_rotation: dimension must be 1..3");
    return Semigroup(semigroup::BallRotation{std::move(theta)}, dim, "ball_rotation");
}

Semigroup Semigroup::siegel_dilation() {
    return Semigroup(semigroup::SiegelDilation{}, 2, "siegel_dilation");
}

Semigroup Semigroup::generator_ode(GeneratorSpec gen) {
    const int dim = gen.dim();
    const std::string label = "generator_ode(" + gen.label() + ")";
    return Semigroup(semigroup::GeneratorODE{std::move(gen)}, dim, label);
}

bool Semigroup::integrated() const {
    return std::holds_alternative<semigroup::GeneratorODE>(v_);
}

CVec Semigroup::flow(double t, const CVec& z) const {
    if (z.size() != dim_) throw std::invalid_argument("Semigroup::flow: dimension mismatch");
    return std::visit(
        [&](const auto& s) -> CVec {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, semigroup::DiscHyperbolic>) {
                // Pole-free form of C^{-1}(e^{lambda t} C(z)).
                const double e = std::exp(s.lambda * t);
                const Cx up = e * (1.0 + z[0]), um = 1.0 - z[0];
                return CVec{(up - um) / (up + um)};
            } else if constexpr (std::is_same_v<T, semigroup::BallRotation>) {
                CVec r(z.size());
                for (int i = 0; i < z.size(); ++i)
                    r[i] = std::polar(1.0, kTwoPi * s.theta[i] * t) * z[i];
                return r;
            } else if constexpr (std::is_same_v<T, semigroup::SiegelDilation>) {
                return siegel_time_slice(t, z);
            } else {
                return integrate_generator(s.gen, z, t);
            }
        },
        v_);
}

std::optional<CVec> Semigroup::flow_inverse(double t, const CVec& z) const {
    if (integrated()) return std::nullopt;
    return flow(-t, z);
}

CMat Semigroup::flow_jacobian(double t, const CVec& z) const {
    if (const auto* ode = std::get_if<semigroup::GeneratorODE>(&v_)) {
        if (t == 0.0) return CMat::identity(dim_);
        return integrate_generator_jacobian(ode->gen, z, t);
    }
    return FlowBackend::flow_jacobian(t, z);
}

CPoint evaluate_t(const Semigroup& S, double t, const CPoint& z) {
    if (t < 0.0) throw std::invalid_argument("evaluate_t: t must be >= 0");
    return CPoint(S.flow(t, z.coords()));
}

MapSpec time_slice(const Semigroup& S, double t) {
    if (t < 0.0) throw std::invalid_argument("time_slice: t must be >= 0");
    return MapSpec::flow(std::make_shared<const Semigroup>(S), t);
}

SemigroupPropertyReport check_semigroup_property(const Semigroup& S,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<CPoint>& z_samples) {
    if (t_grid.empty() || z_samples.empty())
        throw std::invalid_argument("check_semigroup_property: empty grid");
    SemigroupPropertyReport rep;
    rep.threshold = S.integrated() ? 1e-7 : 1e-12;
    for (double s : t_grid)
        for (double t : t_grid)
            for (const CPoint& z : z_samples) {
                const CVec lhs = S.flow(s + t, z.coords());
                const CVec rhs = S.flow(s, S.flow(t, z.coords()));
                rep.max_residual = std::max(rep.max_residual, dist(lhs, rhs));
            }
    rep.pass = rep.max_residual < rep.threshold;
    return rep;
}

CVec generator_value(const GeneratorSpec& G, const CPoint& z) {
    if (z.dim() != G.dim()) throw std::invalid_argument("generator_value: dimension mismatch");
    return G(z.coords());
}

} // namespace kobdyn
