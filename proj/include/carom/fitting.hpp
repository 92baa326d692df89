#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "carom/errors.hpp"
#include "carom/histogram.hpp"
#include "carom/models.hpp"

// Estimation of the scoring models from an empirical survival curve.
// The average m is taken as known (it comes straight off the score
// sheet), so the Bernoulli fit is closed-form and the two-geometric fit
// reduces to two unknowns (rho1, rho2) with Y eliminated through m.

namespace carom {

struct BernoulliFit {
    BernoulliModel model;
    double sse = 0.0;
};

struct FitReport {
    BernoulliFit bernoulli;
    SpectralFit markov;
    int n_used = 0;        // curve points entering the objective
    bool converged = false;
    int restarts = 0;      // multi-start attempts run
    bool degenerate = false;  // rho2 - rho1 below the identifiability gap
    // degenerate, or Y ~ 1: either way the second geometric carries no
    // signal and the model is effectively a Bernoulli process
    bool effectively_bernoullian = false;
};

// No feasible interior point; the Bernoulli closed form is still valid.
class DegenerateFitError : public InfeasibleError {
public:
    DegenerateFitError(const std::string& msg, BernoulliFit fb)
        : InfeasibleError(msg), fallback(std::move(fb)) {}
    BernoulliFit fallback;
};

// All multi-starts exhausted their iteration budget.
class FitConvergenceError : public std::runtime_error {
public:
    FitConvergenceError(const std::string& msg, SpectralFit b)
        : std::runtime_error(msg), best(b) {}
    SpectralFit best;
};

struct FitOptions {
    int max_iterations = 10000;   // per start
    double objective_tol = 1e-12; // stop when the simplex f-spread is below
                                  // this fraction of the best f
    double step_tol = 1e-9;       // or the (rho1, rho2) spread is below this
    bool log_space = false;       // residuals in log(mu) instead of mu (non-default)
    double bernoullian_y = 0.995; // identifiability guard thresholds
    double bernoullian_gap = 0.01;
};

// lambda = m/(m+1), the Bernoulli rate reproducing the observed average.
inline BernoulliModel fit_bernoulli(const ScoreHistogram& h) {
    const double m = mean_score(h);
    return BernoulliModel(m / (m + 1.0));
}

namespace detail {

inline double clamp01(double x, double margin) {
    return std::min(std::max(x, margin), 1.0 - margin);
}

inline double logit(double x) { return std::log(x / (1.0 - x)); }
inline double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Objective state for the two-geometric least squares.
struct Markov2Objective {
    const std::vector<double>* mu;  // data, indices 1..n_max used
    std::size_t n_max;
    double m;
    double lambda;  // m/(m+1); rho1 is confined to (0, lambda) so Y >= 0
    bool log_space;

    struct Point {
        double rho1 = 0.0, rho2 = 0.0;
        double y = 0.0;    // admissible (clamped) mixing scalar
        double sse = 0.0;  // residual at (rho1, rho2, y)
        double f = 0.0;    // sse plus the infeasibility penalty
    };

    // Transform: rho1 = lambda*s1, rho2 = rho1 + (1-rho1)*s2 with
    // s1, s2 = sigmoid of the unconstrained coordinates. rho1 < lambda
    // keeps Y positive; Y > y_max is pushed back by a quadratic penalty.
    Point eval(double t1, double t2) const {
        const double s1 = clamp01(sigmoid(t1), 1e-12);
        const double s2 = clamp01(sigmoid(t2), 1e-12);
        const double rho1 = lambda * s1;
        const double rho2 = rho1 + (1.0 - rho1) * s2;
        const double y = y_from(rho1, rho2, m);
        const double ymax = y_max(rho1, rho2);
        const double yc = std::min(y, ymax);
        double sse = 0.0;
        double p1 = 1.0, p2 = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            p1 *= rho1;
            p2 *= rho2;
            const double model = (1.0 - yc) * p1 + yc * p2;
            const double data = (*mu)[n];
            if (log_space) {
                if (data <= 0.0 || model <= 0.0) continue;
                const double r = std::log(data) - std::log(model);
                sse += r * r;
            } else {
                const double r = data - model;
                sse += r * r;
            }
        }
        Point p{rho1, rho2, yc, sse, sse};
        if (y > ymax) p.f += 1e3 * (y - ymax) * (y - ymax);
        return p;
    }
};

}  // namespace detail

// Least-squares fit of mu_n = (1-Y) rho1^n + Y rho2^n over n = 1..n_max
// (n_max = largest observed n plus one, so the terminal zero is part of
// the objective), with Y tied to the known average. Deterministic: a
// fixed 5x5 start ladder (the rho1 < rho2 pairs of {0.1,0.3,0.5,0.7,0.9})
// plus one start at the Bernoulli-equivalent point rho2 = lambda, whose
// residual equals the Bernoulli one; Nelder-Mead refines each start and
// the best final result wins (ties broken by lexicographic (rho1, rho2)).
inline FitReport fit_markov2(const SurvivalCurve& curve, double m,
                             const FitOptions& opt = {}) {
    if (!(m > 0.0)) throw ValidationError("fit_markov2 requires m > 0");
    const std::size_t n_max = curve.max_index();
    if (n_max < 4)
        throw ValidationError("fit_markov2 needs at least 3 nonzero curve points");
    const double lambda = m / (m + 1.0);

    BernoulliFit bern{BernoulliModel(lambda), 0.0};
    {
        double p = 1.0;
        for (std::size_t n = 1; n <= n_max; ++n) {
            p *= lambda;
            if (opt.log_space) {
                if (curve[n] <= 0.0) continue;
                const double r = std::log(curve[n]) - std::log(p);
                bern.sse += r * r;
            } else {
                const double r = curve[n] - p;
                bern.sse += r * r;
            }
        }
    }

    detail::Markov2Objective obj{&curve.values(), n_max, m, lambda, opt.log_space};

    // start ladder in (rho1, rho2) space
    static constexpr std::array<double, 5> ladder = {0.1, 0.3, 0.5, 0.7, 0.9};
    std::vector<std::array<double, 2>> starts;
    for (double a : ladder)
        for (double b : ladder)
            if (a < b) starts.push_back({a, b});
    starts.push_back({0.5 * lambda, lambda});  // Bernoulli-equivalent point

    using Point = detail::Markov2Objective::Point;
    struct Vertex {
        double t1 = 0.0, t2 = 0.0, f = 0.0;
        Point p{};
    };
    auto make_vertex = [&obj](double t1, double t2) {
        Vertex v{t1, t2, 0.0, obj.eval(t1, t2)};
        v.f = v.p.f;
        return v;
    };
    Point best{};
    double best_f = std::numeric_limits<double>::infinity();
    bool any_converged = false;

    // One Nelder-Mead descent from (t1, t2) with the given simplex size.
    auto descend = [&](double t1, double t2, double offset, bool& converged) {
        std::array<Vertex, 3> simplex{make_vertex(t1, t2),
                                      make_vertex(t1 + offset, t2),
                                      make_vertex(t1, t2 + offset)};

        for (int it = 0; it < opt.max_iterations; ++it) {
            std::sort(simplex.begin(), simplex.end(),
                      [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
            const double fspread = simplex[2].f - simplex[0].f;
            const double rspread =
                std::max(std::abs(simplex[0].p.rho1 - simplex[2].p.rho1),
                         std::abs(simplex[0].p.rho2 - simplex[2].p.rho2));
            if (fspread <= opt.objective_tol * simplex[0].f || rspread < opt.step_tol) {
                converged = true;
                break;
            }
            const double c1 = 0.5 * (simplex[0].t1 + simplex[1].t1);
            const double c2 = 0.5 * (simplex[0].t2 + simplex[1].t2);
            auto try_at = [&](double alpha) {
                return make_vertex(c1 + alpha * (c1 - simplex[2].t1),
                                   c2 + alpha * (c2 - simplex[2].t2));
            };
            Vertex refl = try_at(1.0);
            if (refl.f < simplex[0].f) {
                Vertex expa = try_at(2.0);
                simplex[2] = expa.f < refl.f ? expa : refl;
            } else if (refl.f < simplex[1].f) {
                simplex[2] = refl;
            } else {
                Vertex contr = refl.f < simplex[2].f ? try_at(0.5) : try_at(-0.5);
                if (contr.f < std::min(refl.f, simplex[2].f)) {
                    simplex[2] = contr;
                } else {
                    for (int i = 1; i < 3; ++i)
                        simplex[i] = make_vertex(
                            0.5 * (simplex[i].t1 + simplex[0].t1),
                            0.5 * (simplex[i].t2 + simplex[0].t2));
                }
            }
        }
        std::sort(simplex.begin(), simplex.end(),
                  [](const Vertex& a, const Vertex& b) { return a.f < b.f; });
        return simplex[0];
    };

    for (const auto& s : starts) {
        const double s1 = detail::clamp01(s[0] / lambda, 0.02);
        const double s2 = detail::clamp01((s[1] - s[0]) / (1.0 - s[0]), 0.02);

        // progressively smaller fresh simplexes guard against the simplex
        // collapsing short of the minimum
        bool converged = false;
        Vertex v{detail::logit(s1), detail::logit(s2), 0.0, {}};
        for (double offset : {0.7, 0.05, 0.005, 0.0005})
            v = descend(v.t1, v.t2, offset, converged);
        any_converged = any_converged || converged;

        const Point cand = v.p;
        if (cand.f < best_f ||
            (cand.f == best_f &&
             (cand.rho1 < best.rho1 ||
              (cand.rho1 == best.rho1 && cand.rho2 < best.rho2)))) {
            best = cand;
            best_f = cand.f;
        }
    }

    if (!std::isfinite(best_f))
        throw DegenerateFitError("no feasible interior point", bern);
    if (!any_converged)
        throw FitConvergenceError(
            "no start converged within the iteration budget",
            SpectralFit{best.rho1, best.rho2, best.y, m, best.sse});

    // the Bernoulli curve is a member of the family (rho2 = lambda, Y = 1),
    // so the fit must never come back worse than the closed form
    if (bern.sse < best.sse)
        best = Point{0.5 * lambda, lambda, 1.0, bern.sse, bern.sse};

    FitReport report{bern,
                     SpectralFit{best.rho1, best.rho2, best.y,
                                 spectral_mean(best.rho1, best.rho2, best.y), best.sse},
                     static_cast<int>(n_max),
                     any_converged,
                     static_cast<int>(starts.size()),
                     false,
                     false};
    report.degenerate = (best.rho2 - best.rho1) < opt.bernoullian_gap;
    report.effectively_bernoullian = report.degenerate || best.y > opt.bernoullian_y;
    return report;
}

}  // namespace carom
