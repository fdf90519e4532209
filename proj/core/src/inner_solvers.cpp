#include "robustfair/inner_solvers.hpp"

#include <cmath>

#include "robustfair/errors.hpp"
#include "robustfair/rng.hpp"

namespace robustfair {

const char* to_string(Solver s) {
  switch (s) {
    case Solver::kTrs: return "TRS";
    case Solver::kPgd: return "PGD";
    case Solver::kRandom: return "RANDOM";
    case Solver::kNone: return "NONE";
  }
  return "NONE";
}

Solver solver_from_string(const std::string& name) {
  if (name == "TRS") return Solver::kTrs;
  if (name == "PGD") return Solver::kPgd;
  if (name == "RANDOM") return Solver::kRandom;
  if (name == "NONE") return Solver::kNone;
  throw ValidationError("unknown solver name: " + name);
}

namespace {

constexpr double kDegenerateGradNorm = 1e-12;
constexpr double kNegativeDefinite = -1e-12;

double secular_from_spectrum(const Vec& d, const Vec& g_rot, double lambda, double radius) {
  double s = 0.0;
  for (size_t i = 0; i < d.size(); ++i) {
    const double y = g_rot[i] / (d[i] - lambda);
    s += y * y;
  }
  return std::sqrt(s) - radius;
}

bool near_boundary(double delta_norm, double radius) {
  return std::abs(delta_norm - radius) <= 1e-6 * std::max(1.0, radius);
}

}  // namespace

double secular_value(const EigenDecomposition& eig, const Vec& grad, double lambda,
                     double radius) {
  if (grad.size() != static_cast<size_t>(eig.n))
    throw ValidationError("secular_value: dimension mismatch");
  for (double d : eig.d)
    if (std::abs(d - lambda) <= 1e-14)
      throw ValidationError("secular_value: lambda coincides with an eigenvalue");
  return secular_from_spectrum(eig.d, eig.qt_apply(grad), lambda, radius);
}

double lambda_upper_bound(double d_max, double grad_norm, int n, double radius) {
  if (radius <= 0.0) throw ValidationError("lambda_upper_bound: radius must be positive");
  return std::abs(d_max) + std::sqrt(static_cast<double>(n)) * grad_norm / radius;
}

double bisect_lambda(const EigenDecomposition& eig, const Vec& grad, double radius,
                     double lambda_low, double lambda_high, double tol, int max_iter,
                     int* iterations_out) {
  if (lambda_high < lambda_low)
    throw ValidationError("bisect_lambda: inverted bracket");
  const Vec g_rot = eig.qt_apply(grad);
  const double width_tol = 1e-12 * std::max(1.0, lambda_high);

  double lo = lambda_low;
  double hi = lambda_high;
  if (iterations_out) *iterations_out = 0;
  if (hi - lo <= std::max(width_tol, tol)) return 0.5 * (lo + hi);

  const double f_lo = secular_from_spectrum(eig.d, g_rot, lo, radius);
  const double f_hi = secular_from_spectrum(eig.d, g_rot, hi, radius);
  if (std::abs(f_lo) <= tol) return lo;
  if (f_lo < 0.0) throw SolverError("bisect_lambda: secular value not positive at lower end");
  if (f_hi > tol) throw SolverError("bisect_lambda: secular value positive at upper end");
  if (std::abs(f_hi) <= tol) return hi;

  for (int it = 0; it < max_iter; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = secular_from_spectrum(eig.d, g_rot, mid, radius);
    if (iterations_out) *iterations_out = it + 1;
    if (std::abs(f_mid) <= tol) return mid;
    if (f_mid > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= width_tol) return 0.5 * (lo + hi);
  }
  throw SolverError("bisect_lambda: no convergence within max iterations");
}

PerturbationResult trs_solve(const LossLocalModel& local, double radius, double tol,
                             int max_iter) {
  const int n = static_cast<int>(local.grad.size());
  if (radius <= 0.0) throw ValidationError("trs_solve: radius must be positive");
  if (!all_finite(local.grad) || !all_finite(local.hess.data()))
    throw ValidationError("trs_solve: non-finite local model");
  if (local.hess.order() != n) throw ValidationError("trs_solve: grad/hess size mismatch");
  if (tol < 0.0) tol = 1e-8 * std::max(1.0, radius);

  PerturbationResult out;
  out.solver = Solver::kTrs;
  out.delta.assign(n, 0.0);

  const double grad_norm = norm2(local.grad);
  if (grad_norm <= kDegenerateGradNorm) return out;

  const EigenDecomposition eig = sym_eig(local.hess);
  const double d_max = eig.d.front();

  if (d_max <= kNegativeDefinite) {
    // Strictly concave model: the unconstrained stationary point is the
    // maximizer whenever it is feasible.
    Vec interior = solve_shifted(eig, 0.0, local.grad);
    if (norm2(interior) <= radius) {
      out.delta = std::move(interior);
      out.delta_norm = norm2(out.delta);
      return out;
    }
  }

  // Boundary solve. The secular function has poles at eigenvalues of H, so
  // the lower end sits just above max(0, d_max) rather than at 0; the gap
  // shrinks geometrically if the root is pinched against the pole.
  const double base = std::max(0.0, d_max);
  const double lambda_high = lambda_upper_bound(d_max, grad_norm, n, radius);
  const Vec g_rot = eig.qt_apply(local.grad);

  double eps = 1e-9 * std::max(1.0, std::abs(d_max));
  const double eps_floor = 1e-13 * std::max(1.0, std::abs(d_max));
  double hi = lambda_high;
  double lo = base + eps;
  while (secular_from_spectrum(eig.d, g_rot, lo, radius) <= 0.0) {
    hi = lo;  // still a valid sign for the upper end
    eps *= 1e-3;
    if (eps < eps_floor)
      throw SolverError("trs_solve: cannot establish a bisection bracket near the pole");
    lo = base + eps;
  }

  int iters = 0;
  out.lambda = bisect_lambda(eig, local.grad, radius, lo, hi, tol, max_iter, &iters);
  out.iterations = iters;
  out.delta = solve_shifted(eig, out.lambda, local.grad);
  out.delta_norm = norm2(out.delta);
  if (out.delta_norm > radius) {
    // Width-limited bisection against a near-pole root can overshoot by more
    // than tol; primal feasibility wins over the exact multiplier.
    const double scale = radius / out.delta_norm;
    for (double& x : out.delta) x *= scale;
    out.delta_norm = radius;
  }
  out.boundary_active = near_boundary(out.delta_norm, radius);

  // Model value at the returned step; a maximizer can never do worse than
  // delta = 0.
  const Vec h_delta = local.hess.apply(out.delta);
  const double model_value = dot(local.grad, out.delta) + 0.5 * dot(out.delta, h_delta);
  if (model_value < -1e-12) {
    out = PerturbationResult{};
    out.solver = Solver::kTrs;
    out.delta.assign(n, 0.0);
  }
  return out;
}

Vec project_ball(Vec v, double radius) {
  if (radius < 0.0) throw ValidationError("project_ball: negative radius");
  const double n = norm2(v);
  if (n > radius) {
    const double scale = radius / n;
    for (double& x : v) x *= scale;
  }
  return v;
}

PerturbationResult pgd_solve(const LossOracle& oracle, int n, double radius,
                             const PgdOptions& opts) {
  if (radius <= 0.0) throw ValidationError("pgd_solve: radius must be positive");
  if (n < 1) throw ValidationError("pgd_solve: dimension must be >= 1");
  const double alpha = opts.alpha < 0.0 ? radius / 4.0 : opts.alpha;
  if (alpha <= 0.0) throw ValidationError("pgd_solve: step size must be positive");
  const double stop_tol =
      opts.stop_tol < 0.0 ? 1e-10 * std::max(1.0, radius) : opts.stop_tol;

  PerturbationResult out;
  out.solver = Solver::kPgd;
  out.delta.assign(n, 0.0);

  LossEval eval = oracle(out.delta);
  const double base_value = eval.value;

  for (int k = 0; k < opts.max_iter; ++k) {
    if (!std::isfinite(eval.value) || !all_finite(eval.grad))
      throw SolverError("pgd_solve: non-finite loss or gradient at iterate " +
                        std::to_string(k));
    Vec cand(n);
    for (int i = 0; i < n; ++i) cand[i] = out.delta[i] + alpha * eval.grad[i];
    cand = project_ball(std::move(cand), radius);

    double step_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const double di = cand[i] - out.delta[i];
      step_sq += di * di;
    }
    out.delta = std::move(cand);
    out.iterations = k + 1;
    eval = oracle(out.delta);
    if (std::sqrt(step_sq) <= stop_tol) break;
  }

  if (eval.value < base_value) out.delta.assign(n, 0.0);  // never worse than no perturbation
  out.delta_norm = norm2(out.delta);
  out.boundary_active = near_boundary(out.delta_norm, radius);
  return out;
}

PerturbationResult random_perturb(std::mt19937_64& rng, int n, double radius) {
  if (radius < 0.0) throw ValidationError("random_perturb: negative radius");
  if (n < 1) throw ValidationError("random_perturb: dimension must be >= 1");

  PerturbationResult out;
  out.solver = Solver::kRandom;
  out.delta.assign(n, 0.0);
  if (radius == 0.0) return out;

  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) out.delta[i] = normal_double(rng);
    norm = norm2(out.delta);
    ++out.iterations;
  } while (norm == 0.0);

  const double scale = radius / norm;
  for (double& x : out.delta) x *= scale;
  out.delta_norm = norm2(out.delta);
  out.boundary_active = true;
  return out;
}

KktResiduals kkt_residual(const Vec& grad_at_perturbed, const Vec& delta, double lambda,
                          double radius) {
  if (grad_at_perturbed.size() != delta.size())
    throw ValidationError("kkt_residual: dimension mismatch");
  KktResiduals r;
  double s = 0.0;
  for (size_t i = 0; i < delta.size(); ++i) {
    const double v = -grad_at_perturbed[i] + lambda * delta[i];
    s += v * v;
  }
  r.stationarity = std::sqrt(s);
  const double dn = norm2(delta);
  r.primal = std::max(0.0, dn - radius);
  r.dual = std::max(0.0, -lambda);
  r.complementarity = std::abs(lambda * (dn - radius));
  return r;
}

}  // namespace robustfair
