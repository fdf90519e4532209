#pragma once

#include <functional>
#include <random>
#include <string>

#include "robustfair/linalg.hpp"
#include "robustfair/model.hpp"

namespace robustfair {

enum class Solver { kTrs, kPgd, kRandom, kNone };

const char* to_string(Solver s);
Solver solver_from_string(const std::string& name);

/// Outcome of one per-sample inner maximization over the ball |delta| <= r.
struct PerturbationResult {
  Vec delta;
  double lambda = 0.0;      // boundary multiplier; 0 off the boundary
  double delta_norm = 0.0;
  bool boundary_active = false;
  int iterations = 0;
  Solver solver = Solver::kNone;
};

/// Violation magnitudes of the first-order optimality system for the
/// ball-constrained maximization: stationarity |-g + lambda*delta|,
/// primal max(0, |delta| - r), dual max(0, -lambda), and complementary
/// slackness |lambda * (|delta| - r)|.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

/// Maximizes the local quadratic model
///     q(delta) = g . delta + 0.5 delta^T H delta
/// over |delta| <= r via eigendecomposition of H plus bisection on the
/// boundary multiplier.
///
/// Branches:
///  - |g| <= 1e-12: delta = 0 (any direction ties at this order).
///  - H strictly negative definite and the stationary point -H^{-1} g falls
///    inside the ball: interior solution, lambda = 0.
///  - otherwise the maximizer sits on the boundary; lambda >= max(0, d_max)
///    is found by bisection on |delta(lambda)| - r, where
///    delta(lambda) = -(H - lambda I)^{-1} g.
///
/// tol < 0 selects the default 1e-8 * max(1, radius).
PerturbationResult trs_solve(const LossLocalModel& local, double radius, double tol = -1.0,
                             int max_iter = 200);

/// g(lambda) = |(D - lambda I)^{-1} Q^T grad| - radius, the function whose
/// root on (d_max, inf) gives the boundary multiplier.
double secular_value(const EigenDecomposition& eig, const Vec& grad, double lambda,
                     double radius);

/// |d_max| + sqrt(n) |grad| / r. The secular value at this multiplier is
/// guaranteed <= 0, closing the bisection bracket.
double lambda_upper_bound(double d_max, double grad_norm, int n, double radius);

/// Bisection for the secular root. Requires secular(lo) > 0 >= secular(hi);
/// a bracket already narrower than tol returns its midpoint.
double bisect_lambda(const EigenDecomposition& eig, const Vec& grad, double radius,
                     double lambda_low, double lambda_high, double tol, int max_iter = 200,
                     int* iterations_out = nullptr);

/// Loss and gradient of the perturbed sample as a function of delta.
struct LossEval {
  double value = 0.0;
  Vec grad;
};
using LossOracle = std::function<LossEval(const Vec& delta)>;

struct PgdOptions {
  double alpha = -1.0;     // < 0 selects radius / 4
  int max_iter = 50;
  double stop_tol = -1.0;  // < 0 selects 1e-10 * max(1, radius)
};

/// Projected gradient ascent from delta = 0:
///     delta <- project_ball(delta + alpha * grad, r)
/// stopping on step size <= stop_tol or max_iter. The result is compared
/// against delta = 0 and never returns a loss below the unperturbed one.
PerturbationResult pgd_solve(const LossOracle& oracle, int n, double radius,
                             const PgdOptions& opts = {});

/// min{1, r/|v|} v.
Vec project_ball(Vec v, double radius);

/// Standard normal direction rescaled to |delta| = r exactly.
PerturbationResult random_perturb(std::mt19937_64& rng, int n, double radius);

KktResiduals kkt_residual(const Vec& grad_at_perturbed, const Vec& delta, double lambda,
                          double radius);

}  // namespace robustfair
