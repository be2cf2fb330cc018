#pragma once

#include "kobdyn/boundary.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kobdyn {

// Solves f(result) = target to 1e-11: closed-form inverse when the variant
// has one, damped Newton on the finite-difference Jacobian otherwise.
// Throws on Newton stagnation or a numerically singular Jacobian.
CPoint preimage(const MapSpec& f, const CPoint& target, const CPoint& guess);

struct BackwardOrbit {
    std::vector<CPoint> points;
    std::vector<double> steps;     // k_D(w_k, w_{k+1})
    std::vector<double> residuals; // |f(w_{k+1}) - w_k|
    double s = 1.0;                // exp(2 sup steps)
    std::optional<BPoint> limit;
    std::optional<int> k_region_tail; // smallest M in {2,4,8,16,32} holding the tail
    std::optional<double> alpha;      // dilation of f at p
    bool truncated = false;
    std::string note;
};

// Backward iteration sequence for f at a regular boundary fixed point p:
// w_{k+1} solves f(w_{k+1}) = w_k, warm-started along the linearized
// contraction toward p. Reports hyperbolic step, limit and K-region tail.
BackwardOrbit backward_orbit(const MapSpec& f, const BPoint& p, const CPoint& w0, int n);

struct ContactCurve {
    std::vector<double> t;
    std::vector<BPoint> curve;
    double modulus = 0.0; // max gap between adjacent curve points
    bool ok = true;
    std::vector<double> offending_t; // slices without a boundary radial limit
    std::string note;
};

// Curve t -> boundary limit of phi_t at p over the grid. A slice that fails
// to produce a boundary limit is reported, never interpolated.
ContactCurve contact_curve(const Semigroup& S, const BPoint& p,
                           const std::vector<double>& t_grid);

struct CommonBrfpReport {
    enum class Verdict { Pass, Fail, HypothesisViolation };

    struct Slice {
        double t = 0.0;
        CVec contact_value;          // radial limit of the time-t slice at p
        bool contact_boundary = false;
        std::string classification;  // kind of p under phi_t
        std::optional<double> alpha_t;
        std::optional<BPoint> pushed_limit; // limit of phi_t(w_n)
        double push_gap = 0.0;              // |pushed_limit - p|
        double step_bound_excess = 0.0;     // max_n k(z_n,z_{n+1}) - k(w_n,w_{n+1})
    };

    bool hypothesis_ok = true;
    std::vector<std::string> violations;
    double alpha_t0 = 0.0;
    bool isolated = false;
    int nearby_fixed_points = 0; // scan hits around p beyond its own cluster
    BackwardOrbit orbit;
    std::vector<Slice> slices;
    LambdaFitReport law;
    Verdict verdict = Verdict::Fail;
};

// Full verification run: p an isolated repelling fixed point of the time-t0
// slice, backward orbit pushed through the flow, per-slice classification,
// and the power-law fit of t -> alpha_t. Hypothesis failures (non-isolated
// point, unit dilation off the attracting point) are reported, not thrown.
CommonBrfpReport common_brfp_verify(const Semigroup& S, const BPoint& p, double t0,
                                    const std::vector<double>& t_grid, int orbit_len = 10);

} // namespace kobdyn
