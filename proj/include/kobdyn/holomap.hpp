#pragma once

#include "kobdyn/ballgeo.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kobdyn {

// Type-erased one-parameter flow, so maps can wrap time slices of semigroups
// without depending on the semigroup module.
struct FlowBackend {
    virtual ~FlowBackend() = default;
    virtual int dimension() const = 0;
    virtual CVec flow(double t, const CVec& z) const = 0;
    // Closed-form inverse of the time-t slice when one exists.
    virtual std::optional<CVec> flow_inverse(double /*t*/, const CVec& /*z*/) const {
        return std::nullopt;
    }
    // Differential of the time-t slice. The default finite difference is
    // fine for closed forms; integrated flows override it with the tangent
    // flow, since differencing through an integrator loses the tolerance.
    virtual CMat flow_jacobian(double t, const CVec& z) const;
    virtual std::string label() const = 0;
};

class MapSpec;

namespace mapspec {
struct BallAutomorphism {
    CVec a;
    CMat unitary;
};
struct DiscMoebius {
    Cx a, b, c, d;
};
struct Diagonal {
    CVec mu;
};
// (z, w) -> (e^{2 pi i theta} z, w(w+a)/(1+aw)) on the ball of dimension 2.
struct SliceRotation {
    double theta;
    double a;
};
// Time-t dilation automorphism of the ball of dimension 2, conjugated from
// the unbounded half-space model; t may be negative (it is a group).
struct SiegelMap {
    double t;
};
struct FlowMap {
    std::shared_ptr<const FlowBackend> backend;
    double t;
};
struct Composite {
    std::vector<MapSpec> chain; // applied left to right
};
struct Custom {
    int dim;
    std::function<CVec(const CVec&)> eval;
    std::string label;
};
} // namespace mapspec

// Validated holomorphic self-map of the disc or ball. Construction runs the
// self-map sampling check (200 quasi-random interior points; 64 boundary
// samples for disc Moebius maps) and throws on failure.
class MapSpec {
public:
    using Variant = std::variant<mapspec::BallAutomorphism, mapspec::DiscMoebius,
                                 mapspec::Diagonal, mapspec::SliceRotation, mapspec::SiegelMap,
                                 mapspec::FlowMap, mapspec::Composite, mapspec::Custom>;

    static MapSpec ball_automorphism(const CPoint& a);
    static MapSpec ball_automorphism(const CPoint& a, const CMat& unitary);
    static MapSpec disc_moebius(Cx a, Cx b, Cx c, Cx d);
    static MapSpec diagonal(const CVec& mu);
    static MapSpec slice_rotation(double theta, double a);
    static MapSpec siegel(double t);
    static MapSpec flow(std::shared_ptr<const FlowBackend> backend, double t);
    static MapSpec custom(int dim, std::function<CVec(const CVec&)> eval, std::string label);
    static MapSpec identity(int dim);

    int dim() const { return dim_; }
    const Variant& variant() const { return v_; }
    const std::string& label() const { return label_; }

    // Raw evaluation on coordinates; valid on the open domain and, for the
    // closed-form variants, on its closure.
    CVec operator()(const CVec& z) const;

    // Closed-form preimage when the variant is invertible; interiority of
    // the result is NOT checked here.
    std::optional<CVec> closed_inverse(const CVec& target) const;

    // Differential at z: finite differences, except flow-backed maps which
    // delegate to their backend.
    CMat jacobian(const CVec& z) const;

private:
    MapSpec(Variant v, int dim, std::string label);
    void validate() const;

    Variant v_;
    int dim_;
    std::string label_;

    friend MapSpec compose(const MapSpec& f, const MapSpec& g);
};

// Checked evaluation: result must be interior.
CPoint evaluate(const MapSpec& f, const CPoint& z);

// compose(f,g)(z) = f(g(z)).
MapSpec compose(const MapSpec& f, const MapSpec& g);

// Forward orbit z, f(z), ..., f^n(z).
std::vector<CPoint> iterate(const MapSpec& f, const CPoint& z, int n);

struct MapClass {
    enum class Kind { RotationalElliptic, StronglyElliptic, NonElliptic };
    Kind kind;
    std::optional<CPoint> fixed_point; // StronglyElliptic
    std::optional<BPoint> dw_point;    // NonElliptic
};

// Orbit-statistics trichotomy: orbits from 5 seeds either reach a common
// boundary point, a common interior point, or stay bounded without
// converging (detected through close returns).
MapClass classify_map(const MapSpec& f);

// Interior solution of f(x) = x, if one exists: orbit convergence first,
// then damped Newton from 10 seeds. Empty for non-elliptic maps.
std::optional<CPoint> interior_fixed_point(const MapSpec& f);

struct RetractionResult {
    CPoint fixed_point;
    std::vector<Cx> eigenvalues;    // of the differential at the fixed point
    int manifold_dim = 0;           // count of unit-modulus eigenvalues
    long close_return_time = 0;     // n* with all unitary angles near a full turn
    long iterations = 0;            // total iterate count the evaluator applies
    double close_return_residual = 0.0;
    double convergence_residual = 0.0; // max_k |f^{2K} - f^K| over samples
    std::function<CVec(const CVec&)> project;
};

// Limit retraction of an elliptic map, seeded by close returns of the
// unit-modulus eigenvalue angles of the differential at the fixed point.
RetractionResult limit_retraction(const MapSpec& f);

// Complex Jacobian of f at z by central differences.
CMat numeric_jacobian(const std::function<CVec(const CVec&)>& f, const CVec& z,
                      double step = 1e-6);

// Closed form shared with the semigroup module: time-t slice of the ball
// dilation conjugated from the half-space model (dimension 2, t any real).
CVec siegel_time_slice(double t, const CVec& z);

} // namespace kobdyn
