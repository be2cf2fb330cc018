#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <stdexcept>

namespace kobdyn {

using Cx = std::complex<double>;

// Fixed-capacity complex vector for points and tangent vectors of the disc
// (N=1) and the ball (N=2,3). Value semantics, no heap.
class CVec {
public:
    static constexpr int kMaxDim = 3;

    CVec() = default;
    explicit CVec(int n) : n_(check_dim(n)) {}
    CVec(std::initializer_list<Cx> xs) {
        if (static_cast<int>(xs.size()) > kMaxDim)
            throw std::invalid_argument("CVec: dimension must be 1..3");
        for (Cx x : xs) d_[n_++] = x;
    }

    int size() const { return n_; }
    Cx& operator[](int i) { return d_[i]; }
    const Cx& operator[](int i) const { return d_[i]; }
    Cx* begin() { return d_.data(); }
    Cx* end() { return d_.data() + n_; }
    const Cx* begin() const { return d_.data(); }
    const Cx* end() const { return d_.data() + n_; }

    friend bool operator==(const CVec& a, const CVec& b) {
        if (a.n_ != b.n_) return false;
        for (int i = 0; i < a.n_; ++i)
            if (a.d_[i] != b.d_[i]) return false;
        return true;
    }

private:
    static int check_dim(int n) {
        if (n < 1 || n > kMaxDim) throw std::invalid_argument("CVec: dimension must be 1..3");
        return n;
    }
    std::array<Cx, kMaxDim> d_{};
    int n_ = 0;
};

// Hermitian inner product <a,b> = sum a_i * conj(b_i).
inline Cx inner(const CVec& a, const CVec& b) {
    Cx s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += a[i] * std::conj(b[i]);
    return s;
}

inline double norm_sq(const CVec& a) {
    double s = 0.0;
    for (int i = 0; i < a.size(); ++i) s += std::norm(a[i]);
    return s;
}

inline double norm(const CVec& a) { return std::sqrt(norm_sq(a)); }

inline CVec operator+(const CVec& a, const CVec& b) {
    CVec r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline CVec operator-(const CVec& a, const CVec& b) {
    CVec r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline CVec operator*(Cx s, const CVec& a) {
    CVec r(a.size());
    for (int i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline CVec operator*(double s, const CVec& a) { return Cx(s, 0.0) * a; }

inline double dist(const CVec& a, const CVec& b) { return norm(a - b); }

inline CVec normalized(const CVec& a) {
    double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return (1.0 / n) * a;
}

// Square complex matrix, same fixed capacity. Row major.
class CMat {
public:
    CMat() = default;
    explicit CMat(int n) : n_(n) {
        if (n < 1 || n > CVec::kMaxDim) throw std::invalid_argument("CMat: dimension must be 1..3");
    }
    static CMat identity(int n) {
        CMat m(n);
        for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
        return m;
    }

    int size() const { return n_; }
    Cx& at(int i, int j) { return d_[i * CVec::kMaxDim + j]; }
    const Cx& at(int i, int j) const { return d_[i * CVec::kMaxDim + j]; }

    CVec operator*(const CVec& v) const {
        CVec r(n_);
        for (int i = 0; i < n_; ++i) {
            Cx s = 0.0;
            for (int j = 0; j < n_; ++j) s += at(i, j) * v[j];
            r[i] = s;
        }
        return r;
    }

    CMat adjoint() const {
        CMat r(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) r.at(i, j) = std::conj(at(j, i));
        return r;
    }

    // max |(U U^H - I)_{ij}|
    double unitarity_defect() const {
        double worst = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                Cx s = 0.0;
                for (int k = 0; k < n_; ++k) s += at(i, k) * std::conj(at(j, k));
                if (i == j) s -= 1.0;
                worst = std::max(worst, std::abs(s));
            }
        return worst;
    }

private:
    std::array<Cx, CVec::kMaxDim * CVec::kMaxDim> d_{};
    int n_ = 0;
};

// Van der Corput radical inverse; the workhorse behind the deterministic
// quasi-random sample sets used for self-map validation and property checks.
inline double radical_inverse(std::uint64_t i, std::uint32_t base) {
    double f = 1.0, r = 0.0;
    while (i > 0) {
        f /= base;
        r += f * static_cast<double>(i % base);
        i /= base;
    }
    return r;
}

// Halton point in [0,1)^dims, dims <= 6.
inline void halton(std::uint64_t i, int dims, double* out) {
    static constexpr std::uint32_t kBases[6] = {2, 3, 5, 7, 11, 13};
    for (int d = 0; d < dims; ++d) out[d] = radical_inverse(i, kBases[d]);
}

} // namespace kobdyn
