#pragma once

#include "kobdyn/cvec.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace kobdyn {

// Raised when an orbit/limit computation cannot reach a verdict at the
// configured thresholds. Carries the diagnostics that were available.
class inconclusive_error : public std::runtime_error {
public:
    inconclusive_error(const std::string& what, std::string diagnostics)
        : std::runtime_error(what), diagnostics_(std::move(diagnostics)) {}
    const std::string& diagnostics() const { return diagnostics_; }

private:
    std::string diagnostics_;
};

constexpr double kInteriorMargin = 1e-14; // points with 1-|z| below this are rejected
constexpr double kBoundaryTol = 1e-12;

// Interior point of the disc (N=1) or ball (N=2,3).
class CPoint {
public:
    explicit CPoint(CVec z) : z_(std::move(z)) {
        if (norm(z_) >= 1.0 - kInteriorMargin)
            throw std::invalid_argument("CPoint: norm must be < 1 - 1e-14");
    }
    CPoint(std::initializer_list<Cx> xs) : CPoint(CVec(xs)) {}

    int dim() const { return z_.size(); }
    bool is_disc() const { return z_.size() == 1; }
    const CVec& coords() const { return z_; }
    const Cx& operator[](int i) const { return z_[i]; }

private:
    CVec z_;
};

// Boundary point; the constructor normalizes and then asserts unit norm.
class BPoint {
public:
    explicit BPoint(CVec p) : p_(std::move(p)) {
        double n = norm(p_);
        if (n == 0.0) throw std::invalid_argument("BPoint: zero vector");
        p_ = (1.0 / n) * p_;
        if (std::abs(norm(p_) - 1.0) > kBoundaryTol)
            throw std::invalid_argument("BPoint: could not normalize to unit norm");
    }
    BPoint(std::initializer_list<Cx> xs) : BPoint(CVec(xs)) {}

    int dim() const { return p_.size(); }
    const CVec& coords() const { return p_; }
    const Cx& operator[](int i) const { return p_[i]; }

private:
    CVec p_;
};

inline CPoint origin(int dim) { return CPoint(CVec(dim)); }

// Deterministic interior sample points, spread through the ball with norms
// up to max_norm. Used for self-map validation and invariant checks.
std::vector<CVec> interior_samples(int dim, int count, double max_norm = 0.995,
                                   std::uint64_t salt = 0);

// Interior seeds whose coordinates all have moduli in [0.15, 0.5]/sqrt(dim);
// orbit classification needs every coordinate to carry signal.
std::vector<CPoint> orbit_seeds(int dim, int count);

} // namespace kobdyn
