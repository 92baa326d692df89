#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "carom/errors.hpp"

// Scoring-process models. A run of consecutive points is either a
// Bernoulli process (success rate lambda, mu_n = lambda^n) or a two-type
// Markov process: the matrix entry k[i][j] is the probability to score
// from a type-j shot and leave a type-i shot, so the survival curve is
// mu_n = 1^T K^n P_start, which for distinct eigenvalues rho1 < rho2
// collapses to the two-geometric form (1-Y) rho1^n + Y rho2^n.

namespace carom {

inline constexpr double kDegenerateEigenTol = 1e-12;

// ---------------------------------------------------------------------------
// Bernoulli baseline
// ---------------------------------------------------------------------------

struct BernoulliModel {
    double lambda = 0.0;  // per-shot success probability, in [0, 1)

    explicit BernoulliModel(double lam) : lambda(lam) {
        if (!(lam >= 0.0) || lam >= 1.0)
            throw ValidationError("lambda must be in [0, 1), got " + std::to_string(lam));
    }
};

inline double bernoulli_survival(const BernoulliModel& b, int n) {
    return std::pow(b.lambda, n);
}

// m = lambda / (1 - lambda)
inline double bernoulli_mean(const BernoulliModel& b) {
    if (b.lambda >= 1.0) throw DivergenceError("bernoulli mean diverges at lambda = 1");
    return b.lambda / (1.0 - b.lambda);
}

// ---------------------------------------------------------------------------
// Two-type matrices and the general-N Markov model
// ---------------------------------------------------------------------------

struct Vec2 {
    double x1 = 0.0, x2 = 0.0;
    double sum() const { return x1 + x2; }
};

// 2x2 scoring matrix; entry k12 = score from an easy (type-2) shot
// leaving a difficult (type-1) one. Column j sums to kappa_j, the
// probability to score on a type-j shot.
struct Mat2 {
    double k11 = 0.0, k12 = 0.0, k21 = 0.0, k22 = 0.0;

    double trace() const { return k11 + k22; }
    double det() const { return k11 * k22 - k12 * k21; }
    double kappa1() const { return k11 + k21; }
    double kappa2() const { return k12 + k22; }
    Vec2 apply(const Vec2& v) const {
        return {k11 * v.x1 + k12 * v.x2, k21 * v.x1 + k22 * v.x2};
    }
};

// N-type scoring model: sub-stochastic K (column sums <= 1) plus the
// initial shot-type distribution. For N = 2 the first component of
// p_start is p0, the probability that the opponent left a difficult shot.
class MarkovModel {
public:
    MarkovModel(std::vector<double> k_row_major, std::vector<double> p_start)
        : k_(std::move(k_row_major)), p_(std::move(p_start)) {
        n_ = p_.size();
        if (n_ == 0 || k_.size() != n_ * n_)
            throw ValidationError("matrix/vector size mismatch");
        for (double v : k_)
            if (!(v >= 0.0)) throw ValidationError("negative matrix entry");
        double psum = 0.0;
        for (double v : p_) {
            if (!(v >= 0.0)) throw ValidationError("negative p_start entry");
            psum += v;
        }
        if (std::abs(psum - 1.0) > 1e-9)
            throw ValidationError("p_start must sum to 1, got " + std::to_string(psum));
        for (std::size_t j = 0; j < n_; ++j) {
            double col = 0.0;
            for (std::size_t i = 0; i < n_; ++i) col += k(i, j);
            if (col > 1.0 + 1e-12)
                throw ValidationError("column " + std::to_string(j + 1) +
                                      " sums to " + std::to_string(col) + " > 1");
        }
    }

    MarkovModel(const Mat2& k, double p0)
        : MarkovModel({k.k11, k.k12, k.k21, k.k22}, {p0, 1.0 - p0}) {}

    std::size_t n_types() const { return n_; }
    double k(std::size_t i, std::size_t j) const { return k_[i * n_ + j]; }
    double kappa(std::size_t j) const {
        double col = 0.0;
        for (std::size_t i = 0; i < n_; ++i) col += k(i, j);
        return col;
    }
    const std::vector<double>& p_start() const { return p_; }
    double p0() const { return p_[0]; }

    Mat2 k2() const {
        if (n_ != 2) throw ValidationError("k2() requires a 2-type model");
        return {k_[0], k_[1], k_[2], k_[3]};
    }

private:
    std::vector<double> k_;
    std::vector<double> p_;
    std::size_t n_ = 0;
};

// mu_n = 1^T K^n P_start by iterated matrix-vector products; no
// eigendecomposition, so any N works.
inline double markov_survival(const MarkovModel& mm, int n) {
    const std::size_t N = mm.n_types();
    std::vector<double> p = mm.p_start();
    std::vector<double> next(N);
    for (int step = 0; step < n; ++step) {
        for (std::size_t i = 0; i < N; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < N; ++j) acc += mm.k(i, j) * p[j];
            next[i] = acc;
        }
        p.swap(next);
    }
    double mu = 0.0;
    for (double v : p) mu += v;
    return mu;
}

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// A is N x N row-major and is destroyed.
inline std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                       std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (std::abs(a[piv * n + col]) < 1e-14)
            throw DivergenceError("singular system: spectral radius not below 1");
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r * n + col] / a[col * n + col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t ri = n; ri-- > 0;) {
        double acc = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c) acc -= a[ri * n + c] * x[c];
        x[ri] = acc / a[ri * n + ri];
    }
    return x;
}

}  // namespace detail

// Exact geometric-series sum m = 1^T K (I-K)^{-1} P_start via a linear
// solve; equals sum over n >= 1 of markov_survival(mm, n).
inline double markov_mean(const MarkovModel& mm) {
    const std::size_t N = mm.n_types();
    std::vector<double> a(N * N);
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = 0; j < N; ++j)
            a[i * N + j] = (i == j ? 1.0 : 0.0) - mm.k(i, j);
    std::vector<double> x = detail::solve_dense(std::move(a), mm.p_start(), N);
    // 1^T K (I-K)^{-1} P = 1^T (I-K)^{-1} P - 1
    double total = 0.0;
    for (double v : x) total += v;
    double m = total - 1.0;
    if (!std::isfinite(m) || m < -1e-9)
        throw DivergenceError("series sum is not finite: spectral radius not below 1");
    return m;
}

inline double markov_mean(const Mat2& k, double p0) {
    return markov_mean(MarkovModel(k, p0));
}

// ---------------------------------------------------------------------------
// 2x2 eigenstructure
// ---------------------------------------------------------------------------

// Eigenpairs of a non-negative 2x2 matrix, rho1 <= rho2 (real since the
// discriminant (k11-k22)^2 + 4 k12 k21 is non-negative). Eigenvectors are
// scaled so their largest-magnitude component is +1.
struct Eigen2 {
    double rho1 = 0.0, rho2 = 0.0;
    Vec2 v1, v2;
    bool degenerate = false;  // rho1 == rho2 within tolerance
};

namespace detail {

inline Vec2 eigvec2(const Mat2& k, double rho) {
    // (K - rho I) v = 0: rows give candidates (k12, rho-k11) and (rho-k22, k21);
    // pick the larger one to avoid the null candidate.
    Vec2 a{k.k12, rho - k.k11};
    Vec2 b{rho - k.k22, k.k21};
    double na = std::abs(a.x1) + std::abs(a.x2);
    double nb = std::abs(b.x1) + std::abs(b.x2);
    Vec2 v = na >= nb ? a : b;
    if (na == 0.0 && nb == 0.0) v = {1.0, 0.0};  // scalar matrix: any direction
    double big = std::abs(v.x1) >= std::abs(v.x2) ? v.x1 : v.x2;
    return {v.x1 / big, v.x2 / big};
}

}  // namespace detail

inline Eigen2 eigen2(const Mat2& k) {
    if (k.k11 < 0 || k.k12 < 0 || k.k21 < 0 || k.k22 < 0)
        throw ValidationError("eigen2 requires a non-negative matrix");
    const double t = k.trace();
    const double d = k.det();
    const double disc = (k.k11 - k.k22) * (k.k11 - k.k22) + 4.0 * k.k12 * k.k21;
    const double sq = std::sqrt(std::max(disc, 0.0));
    Eigen2 e;
    e.rho2 = 0.5 * (t + sq);
    // rho1 via the determinant product to avoid cancellation in (t - sq)/2
    e.rho1 = e.rho2 != 0.0 ? d / e.rho2 : 0.5 * (t - sq);
    e.degenerate = (e.rho2 - e.rho1) <= kDegenerateEigenTol * std::max(1.0, e.rho2);
    e.v1 = detail::eigvec2(k, e.rho1);
    e.v2 = detail::eigvec2(k, e.rho2);
    if (k.k12 == 0.0 && k.k21 == 0.0 && k.k11 == k.k22) {
        // scalar matrix: any basis works; a defective matrix instead keeps
        // its single eigenvector in both slots, with the degenerate flag set
        e.v1 = {1.0, 0.0};
        e.v2 = {0.0, 1.0};
    }
    return e;
}

// ---------------------------------------------------------------------------
// Two-geometric (spectral) form of the survival curve
// ---------------------------------------------------------------------------

// mu_n = (1-Y) rho1^n + Y rho2^n together with the average it implies.
struct SpectralFit {
    double rho1 = 0.0;
    double rho2 = 0.0;
    double y = 0.0;
    double m = 0.0;    // (1-Y) rho1/(1-rho1) + Y rho2/(1-rho2)
    double sse = 0.0;  // fit residual; 0 for exact decompositions
};

// Largest Y keeping mu_n in [0, 1] and non-increasing (mu_1 = 1 there);
// the admissible range is [0, y_max].
inline double y_max(double rho1, double rho2) {
    return (1.0 - rho1) / (rho2 - rho1);
}

inline bool y_admissible(double rho1, double rho2, double y) {
    return y >= 0.0 && y <= y_max(rho1, rho2);
}

// Inverts m = (1-Y) rho1/(1-rho1) + Y rho2/(1-rho2) for Y.
inline double y_from(double rho1, double rho2, double m) {
    if (!(rho1 > 0.0) || !(rho2 < 1.0))
        throw ValidationError("y_from requires rho1, rho2 in (0, 1)");
    if (rho1 >= rho2) throw DegenerateError("y_from requires rho1 < rho2");
    const double r1 = rho1 / (1.0 - rho1);
    const double r2 = rho2 / (1.0 - rho2);
    return (m - r1) / (r2 - r1);
}

inline double spectral_survival(const SpectralFit& f, int n) {
    if (!y_admissible(f.rho1, f.rho2, f.y))
        throw ValidationError("Y = " + std::to_string(f.y) +
                              " puts the curve outside [0, 1]");
    return (1.0 - f.y) * std::pow(f.rho1, n) + f.y * std::pow(f.rho2, n);
}

inline double spectral_mean(double rho1, double rho2, double y) {
    return (1.0 - y) * rho1 / (1.0 - rho1) + y * rho2 / (1.0 - rho2);
}

// Exact spectral decomposition of a 2-type model: eigenvalues from
// eigen2 and Y from expanding P_start on the eigenbasis, so that
// spectral_survival reproduces markov_survival for every n.
inline SpectralFit spectral_from_model(const MarkovModel& mm) {
    const Eigen2 e = eigen2(mm.k2());
    if (e.degenerate)
        throw DegenerateError("coincident eigenvalues: no two-geometric form");
    // solve [v1 v2] c = P_start, then Y = (1^T v2) c2
    const double det = e.v1.x1 * e.v2.x2 - e.v2.x1 * e.v1.x2;
    if (det == 0.0) throw DegenerateError("eigenbasis is singular");
    const double p1 = mm.p0();
    const double p2 = 1.0 - p1;
    const double c2 = (e.v1.x1 * p2 - e.v1.x2 * p1) / det;
    SpectralFit f;
    f.rho1 = e.rho1;
    f.rho2 = e.rho2;
    f.y = c2 * e.v2.sum();
    f.m = spectral_mean(f.rho1, f.rho2, f.y);
    f.sse = 0.0;
    return f;
}

}  // namespace carom
