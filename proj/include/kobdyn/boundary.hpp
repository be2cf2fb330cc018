#pragma once

#include "kobdyn/semiflow.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kobdyn {

struct RadialLimit {
    CVec value;
    bool boundary = false; // 1 - |value| < 1e-7
    bool cauchy = false;
    int rungs = 0;         // deepest radius 1 - 2^{-j} evaluated
    double tail_gap = 0.0; // last Cauchy increment
};

// Limit of f((1-2^{-j}) p) along j <= 40, Cauchy tolerance 1e-9, with a
// first-order extrapolation of the tail.
RadialLimit radial_limit(const MapSpec& f, const BPoint& p);

struct DilationResult {
    double alpha = 0.0;
    bool infinite = false;
    bool converged = false;
    std::optional<BPoint> target;                  // boundary image q
    std::vector<std::pair<double, double>> samples; // (r_j, Re ratio_j)
    double error_estimate = 0.0;
    double julia_alpha = 0.0; // cross-check from the distance-difference form
    double lower_bound = 0.0; // exp(-2 k(f(0), 0))
};

// Boundary dilation coefficient at p from the radial quotient
// (1 - <f(r p), q>) / (1 - r), Richardson-extrapolated in (1-r), with the
// distance-difference form as an independent cross-check.
DilationResult dilation_coefficient(const MapSpec& f, const BPoint& p);

struct ContactClassification {
    enum class Kind { NotContact, RegularContact, RegularFixed, NonRegular, Undetermined };
    Kind kind = Kind::Undetermined;
    std::optional<CVec> interior_limit; // NotContact
    std::optional<BPoint> q;            // contact target
    std::optional<double> alpha;        // finite dilation
    std::string note;
};

ContactClassification classify_boundary_point(const MapSpec& f, const BPoint& p);

struct ChainRuleReport {
    double alpha_p_f = 0.0;
    double alpha_fp_g = 0.0;
    double alpha_p_gf = 0.0;
    double relative_residual = 0.0;
    bool pass = false;
};

// Residual of alpha_p(g o f) = alpha_{f(p)}(g) * alpha_p(f); pass < 1e-4.
ChainRuleReport chain_rule_check(const MapSpec& f, const MapSpec& g, const BPoint& p);

struct LambdaFitReport {
    bool hypothesis_ok = true;
    std::vector<double> offending_t; // grid times where p is not regular fixed
    double lambda = 0.0;
    double max_residual = 0.0; // max |log alpha_t - t log lambda|
    bool pass = false;
    std::vector<std::pair<double, double>> alphas; // (t, alpha_t)
};

// Least squares fit of log alpha_t = t log lambda through the origin over
// the grid; requires p to be regular fixed for every slice.
LambdaFitReport dilation_law_fit(const Semigroup& S, const BPoint& p,
                                 const std::vector<double>& t_grid);

struct ScanGrid {
    double step_deg = 1.0;
    std::optional<BPoint> patch_center; // restrict to a boundary patch
    double patch_radius = 0.0;          // Euclidean radius of the patch
};

struct BrfpHit {
    BPoint p;
    double alpha = 0.0;
    bool isolated = false;
    std::vector<double> chart_deg; // chart angles of this grid point, degrees
    int cluster = 0;
    int cluster_size = 0;
    double cluster_diameter = 0.0;
};

// Grid scan of the boundary for regular fixed points with alpha <= A.
// Returns one row per fixed grid point; rows within 3h merge into clusters,
// and a cluster is isolated when its diameter is < 3h and no other cluster
// comes within 10h. Rows are ordered by chart coordinates.
std::vector<BrfpHit> scan_brfp(const MapSpec& f, double A, const ScanGrid& grid);

} // namespace kobdyn
