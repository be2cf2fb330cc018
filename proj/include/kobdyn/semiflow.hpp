#pragma once

#include "kobdyn/holomap.hpp"

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace kobdyn {

// Holomorphic vector field driving a semigroup. Either the disc form
// G(z) = (z - tau)(conj(tau) z - 1) p(z) with polynomial p, or an explicit
// field on the ball.
class GeneratorSpec {
public:
    static GeneratorSpec berkson_porta(Cx tau, std::vector<Cx> poly_coeffs);
    static GeneratorSpec field(int dim, std::function<CVec(const CVec&)> fn, std::string label);

    int dim() const { return dim_; }
    const std::string& label() const { return label_; }
    CVec operator()(const CVec& z) const { return fn_(z); }

private:
    GeneratorSpec(int dim, std::function<CVec(const CVec&)> fn, std::string label);
    int dim_;
    std::function<CVec(const CVec&)> fn_;
    std::string label_;
};

namespace semigroup {
// phi_t(z) = C^{-1}(e^{lambda t} C(z)), C(z) = (1+z)/(1-z); disc, lambda > 0.
struct DiscHyperbolic {
    double lambda;
};
// phi_t = diag(e^{2 pi i theta_j t}).
struct BallRotation {
    std::vector<double> theta;
};
// Dilation automorphism flow of the ball of dimension 2 in the half-space
// model (e^t, e^{t/2} scaling), conjugated back to the ball.
struct SiegelDilation {};
// phi_t integrated from dz/dt = G(z).
struct GeneratorODE {
    GeneratorSpec gen;
};
} // namespace semigroup

// One-parameter semigroup of self-maps. Construction checks phi_0 = id on
// samples. Also usable as a flow backend for MapSpec.
class Semigroup final : public FlowBackend {
public:
    using Variant = std::variant<semigroup::DiscHyperbolic, semigroup::BallRotation,
                                 semigroup::SiegelDilation, semigroup::GeneratorODE>;

    static Semigroup disc_hyperbolic(double lambda);
    static Semigroup ball_rotation(std::vector<double> theta);
    static Semigroup siegel_dilation();
    static Semigroup generator_ode(GeneratorSpec gen);

    int dimension() const override { return dim_; }
    CVec flow(double t, const CVec& z) const override;
    std::optional<CVec> flow_inverse(double t, const CVec& z) const override;
    // Integrated flows differentiate through the tangent flow.
    CMat flow_jacobian(double t, const CVec& z) const override;
    std::string label() const override { return label_; }

    bool integrated() const; // true when backed by the ODE integrator
    const Variant& variant() const { return v_; }

private:
    Semigroup(Variant v, int dim, std::string label);
    Variant v_;
    int dim_;
    std::string label_;
};

CPoint evaluate_t(const Semigroup& S, double t, const CPoint& z);

// Time-t slice as a validated self-map.
MapSpec time_slice(const Semigroup& S, double t);

struct SemigroupPropertyReport {
    double max_residual = 0.0;
    double threshold = 0.0;
    bool pass = false;
};

// max over the grids of |phi_{s+t}(z) - phi_s(phi_t(z))|.
SemigroupPropertyReport check_semigroup_property(const Semigroup& S,
                                                 const std::vector<double>& t_grid,
                                                 const std::vector<CPoint>& z_samples);

CVec generator_value(const GeneratorSpec& G, const CPoint& z);

// Adaptive embedded Runge-Kutta (Dormand-Prince 5(4)) for dz/dt = G(z).
// Local tolerance 1e-11; throws when the trajectory leaves the ball closer
// than 1e-13 or the step budget (10^6 per unit time) is exhausted.
CVec integrate_generator(const GeneratorSpec& G, CVec z, double t_total);

// Differential of the time-t flow map via the tangent flow dJ/dt = DG(z) J.
CMat integrate_generator_jacobian(const GeneratorSpec& G, const CVec& z0, double t_total);

} // namespace kobdyn
