#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "carom/errors.hpp"
#include "carom/models.hpp"

// Inversion of the underdetermined map (K, p0) -> (rho1, rho2, m).
// Only three quantities are measurable from a score sheet, so K is
// reconstructed as a function of two free parameters (k12 and p0) and
// the probability constraints carve out a feasible region, reported as
// per-entry intervals.

namespace carom {

inline constexpr double kBoundaryTol = 1e-12;

// Probability constraints on a scoring matrix: every entry and both
// column sums strictly inside (0, 1), closed at the boundary within
// kBoundaryTol so exact-zero entries are admitted.
inline bool validate_k(const Mat2& k, double eps = kBoundaryTol) {
    for (double v : {k.k11, k.k12, k.k21, k.k22})
        if (!(v >= -eps) || v > 1.0 + eps) return false;
    return k.kappa1() <= 1.0 + eps && k.kappa2() <= 1.0 + eps;
}

// Type-ordering convention: type 2 is the easy shot, so it scores at
// least as often as type 1. Break this and every reconstruction gains a
// label-swapped mirror image.
inline bool easy_type_ordered(const Mat2& k, double eps = kBoundaryTol) {
    return k.kappa1() <= k.kappa2() + eps;
}

// Snaps boundary-tolerance noise (entries within kBoundaryTol outside
// [0, 1]) onto the boundary, so validated matrices construct clean models.
inline Mat2 snap_to_unit(const Mat2& k) {
    auto snap = [](double v) { return std::min(std::max(v, 0.0), 1.0); };
    return {snap(k.k11), snap(k.k12), snap(k.k21), snap(k.k22)};
}

namespace detail {

// Real roots of a x^2 + b x + c = 0, degenerating to the linear case.
inline int quadratic_roots(double a, double b, double c, double out[2]) {
    if (std::abs(a) < 1e-15) {
        if (std::abs(b) < 1e-15) return 0;
        out[0] = -c / b;
        return 1;
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return 0;
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(sq, b));
    out[0] = q / a;
    out[1] = q != 0.0 ? c / q : 0.0;
    return 2;
}

}  // namespace detail

// Reconstructs the candidate matrices consistent with (rho1, rho2, m)
// at the given free parameters. Matching the spectrum fixes trace and
// determinant; matching the average fixes mu_1 = kappa1 p0 + kappa2 (1-p0)
// (with mu_0 = 1 and the recurrence mu_{n+2} = s mu_{n+1} - d mu_n this
// pins the whole curve). For k12 > 0 that condition is quadratic in k11;
// both roots are checked and the feasible one(s) returned. For k12 = 0
// the matrix is triangular, {k11, k22} = {rho1, rho2}, and the condition
// is linear in k21 instead.
//
// An empty result means the point (k12, p0) is infeasible, not an error.
inline std::vector<Mat2> recover_k(double rho1, double rho2, double m, double k12,
                                   double p0) {
    if (!(rho1 > 0.0) || !(rho2 < 1.0) || !(rho1 < rho2))
        throw ValidationError("recover_k requires 0 < rho1 < rho2 < 1");
    if (!(m > 0.0)) throw ValidationError("recover_k requires m > 0");
    if (!(k12 >= 0.0) || k12 >= 1.0)
        throw ValidationError("recover_k requires k12 in [0, 1)");
    if (!(p0 >= 0.0) || p0 > 1.0) throw ValidationError("recover_k requires p0 in [0, 1]");
    const double y = y_from(rho1, rho2, m);
    if (!y_admissible(rho1, rho2, y))
        throw ValidationError("average m = " + std::to_string(m) +
                              " is inconsistent with the eigenvalue pair");

    const double s = rho1 + rho2;
    const double d = rho1 * rho2;
    const double mu1 = rho1 + y * (rho2 - rho1);
    std::vector<Mat2> out;

    if (k12 == 0.0) {
        for (auto [k11, k22] : {std::pair{rho1, rho2}, std::pair{rho2, rho1}}) {
            if (p0 > 0.0) {
                const double k21 = (mu1 - (1.0 - p0) * k22) / p0 - k11;
                Mat2 k{k11, 0.0, k21, k22};
                if (validate_k(k)) out.push_back(snap_to_unit(k));
            } else if (std::abs(k22 - mu1) <= 1e-9) {
                // the start is always type 2 and never sees column 1, so
                // k21 is a free parameter; emit the extremes of its range
                for (double k21 : {0.0, 1.0 - k11}) {
                    Mat2 k{k11, 0.0, k21, k22};
                    if (validate_k(k)) out.push_back(snap_to_unit(k));
                }
            }
        }
        return out;
    }

    // quadratic in k11 from p0*kappa1 + (1-p0)*kappa2 = mu1 after
    // substituting k22 = s - k11 and k21 = (k11 k22 - d)/k12
    const double a = p0;
    const double b = -(p0 * s + (2.0 * p0 - 1.0) * k12);
    const double c = p0 * d + k12 * (mu1 - (1.0 - p0) * (k12 + s));
    double roots[2];
    const int n_roots = detail::quadratic_roots(a, b, c, roots);
    for (int r = 0; r < n_roots; ++r) {
        const double k11 = roots[r];
        const double k22 = s - k11;
        const double k21 = (k11 * k22 - d) / k12;
        Mat2 k{k11, k12, k21, k22};
        if (validate_k(k)) out.push_back(snap_to_unit(k));
    }
    if (out.size() == 2 && std::abs(out[0].k11 - out[1].k11) <= 1e-14)
        out.pop_back();  // coincident roots
    return out;
}

// How the initial-difficulty parameter is treated in a sweep.
struct P0Policy {
    bool swept = false;
    double value = 0.5;

    static P0Policy fixed(double v) { return {false, v}; }
    static P0Policy sweep() { return {true, 0.0}; }
};

struct SweepOptions {
    int grid = 512;          // samples per swept axis
    int bisect_steps = 40;   // refinement at each feasibility flip
    bool require_easy_type_ordering = true;
};

// Per-entry bounds on K over the feasible (k12 [, p0]) region.
struct IntervalMatrix {
    Mat2 lo, hi;
    std::int64_t n_feasible = 0;  // feasible coarse-grid points
    P0Policy p0_policy;

    Mat2 center() const {
        return {0.5 * (lo.k11 + hi.k11), 0.5 * (lo.k12 + hi.k12),
                0.5 * (lo.k21 + hi.k21), 0.5 * (lo.k22 + hi.k22)};
    }
    Mat2 halfwidth() const {
        return {0.5 * (hi.k11 - lo.k11), 0.5 * (hi.k12 - lo.k12),
                0.5 * (hi.k21 - lo.k21), 0.5 * (hi.k22 - lo.k22)};
    }
};

namespace detail {

struct IntervalAccumulator {
    Mat2 lo{1e300, 1e300, 1e300, 1e300};
    Mat2 hi{-1e300, -1e300, -1e300, -1e300};
    std::int64_t count = 0;

    void absorb(const Mat2& k) {
        lo.k11 = std::min(lo.k11, k.k11);
        lo.k12 = std::min(lo.k12, k.k12);
        lo.k21 = std::min(lo.k21, k.k21);
        lo.k22 = std::min(lo.k22, k.k22);
        hi.k11 = std::max(hi.k11, k.k11);
        hi.k12 = std::max(hi.k12, k.k12);
        hi.k21 = std::max(hi.k21, k.k21);
        hi.k22 = std::max(hi.k22, k.k22);
    }
};

}  // namespace detail

// Sweeps k12 over a uniform grid on [0, 1) (and p0 over [0, 1] when the
// policy says so), keeps every reconstruction passing the probability
// constraints and the type-ordering convention, and reduces to per-entry
// min/max. Each feasibility flip along an axis is refined by bisection,
// so interval endpoints do not depend on the grid landing exactly on the
// feasible boundary.
inline IntervalMatrix feasible_region(double rho1, double rho2, double m,
                                      const P0Policy& policy,
                                      const SweepOptions& opt = {}) {
    if (opt.grid < 100) throw ValidationError("sweep grid must be >= 100");
    detail::IntervalAccumulator acc;

    auto feasible_at = [&](double k12, double p0, bool count_it) {
        std::vector<Mat2> ks = recover_k(rho1, rho2, m, k12, p0);
        bool any = false;
        for (const Mat2& k : ks) {
            if (opt.require_easy_type_ordering && !easy_type_ordered(k)) continue;
            acc.absorb(k);
            any = true;
        }
        if (any && count_it) ++acc.count;
        return any;
    };

    auto bisect = [&](double a, double b, bool a_feasible, auto eval) {
        for (int step = 0; step < opt.bisect_steps; ++step) {
            const double mid = 0.5 * (a + b);
            if (eval(mid) == a_feasible)
                a = mid;
            else
                b = mid;
        }
    };

    std::vector<double> p0s;
    if (policy.swept) {
        p0s.reserve(opt.grid);
        for (int j = 0; j < opt.grid; ++j)
            p0s.push_back(static_cast<double>(j) / (opt.grid - 1));
    } else {
        if (!(policy.value >= 0.0) || policy.value > 1.0)
            throw ValidationError("p0 must be in [0, 1]");
        p0s.push_back(policy.value);
    }
    std::vector<double> k12s;
    k12s.reserve(opt.grid);
    for (int i = 0; i < opt.grid; ++i)
        k12s.push_back(static_cast<double>(i) / opt.grid);

    for (double p0 : p0s) {
        std::vector<char> row(k12s.size());
        for (std::size_t i = 0; i < k12s.size(); ++i)
            row[i] = feasible_at(k12s[i], p0, true);
        for (std::size_t i = 0; i + 1 < k12s.size(); ++i)
            if (row[i] != row[i + 1])
                bisect(k12s[i], k12s[i + 1], row[i],
                       [&](double x) { return feasible_at(x, p0, false); });
    }
    if (policy.swept) {
        for (double k12 : k12s) {
            std::vector<char> col(p0s.size());
            for (std::size_t j = 0; j < p0s.size(); ++j)
                col[j] = feasible_at(k12, p0s[j], false);
            for (std::size_t j = 0; j + 1 < p0s.size(); ++j)
                if (col[j] != col[j + 1])
                    bisect(p0s[j], p0s[j + 1], col[j],
                           [&](double x) { return feasible_at(k12, x, false); });
        }
    }

    if (acc.count == 0)
        throw InfeasibleError("no feasible matrix for rho1 = " + std::to_string(rho1) +
                              ", rho2 = " + std::to_string(rho2) +
                              ", m = " + std::to_string(m));
    return IntervalMatrix{acc.lo, acc.hi, acc.count, policy};
}

struct ParameterCount {
    int unknowns = 0;
    int relations = 0;
    int free = 0;
};

// N^2 + N - 1 unknowns (the matrix plus the start distribution) against
// the N + 1 measurables (the average and N eigenvalues).
inline ParameterCount parameter_count(int n_types) {
    if (n_types < 1) throw ValidationError("n_types must be >= 1");
    return {n_types * n_types + n_types - 1, n_types + 1, n_types * n_types - 2};
}

}  // namespace carom
