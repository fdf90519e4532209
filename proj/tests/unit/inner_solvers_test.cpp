#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "../support/oracles.hpp"
#include "robustfair/errors.hpp"
#include "robustfair/inner_solvers.hpp"
#include "robustfair/rng.hpp"

using namespace robustfair;
using testsupport::AffineInstance;
using testsupport::AffineInstanceGen;

namespace {

LossLocalModel local_of(const AffineInstance& a) {
  return loss_local_model({a.w, a.b}, a.x, a.y);
}

LossOracle oracle_of(const AffineInstance& a) {
  return [a](const Vec& delta) {
    const double z = dot(a.w, a.x) + a.b + dot(a.w, delta);
    LossEval e{bce_from_logit(z, a.y), Vec(a.w.size())};
    const double residual = sigmoid(z) - static_cast<double>(a.y);
    for (size_t i = 0; i < a.w.size(); ++i) e.grad[i] = residual * a.w[i];
    return e;
  };
}

}  // namespace

TEST_CASE("trs_solve degenerate gradient") {
  LossLocalModel local{0.0, {0.0, 0.0}, SymmetricMatrix::scaled_outer(0.25, {1.0, 1.0})};
  const PerturbationResult res = trs_solve(local, 0.1);
  CHECK(norm2(res.delta) == 0.0);
  CHECK(res.lambda == 0.0);
  CHECK_FALSE(res.boundary_active);
}

TEST_CASE("trs_solve rank-1 boundary instance") {
  const AffineInstance a{{3.0, 4.0}, 0.0, {0.0, 0.0}, 0, 0.1};
  const PerturbationResult res = trs_solve(local_of(a), a.r);
  CHECK(res.delta[0] == doctest::Approx(0.06).epsilon(1e-7));
  CHECK(res.delta[1] == doctest::Approx(0.08).epsilon(1e-7));
  CHECK(res.boundary_active);
  CHECK(std::abs(res.delta_norm - 0.1) <= 1e-8);

  // tighter bisection pins the multiplier
  const PerturbationResult tight = trs_solve(local_of(a), a.r, 1e-12);
  CHECK(std::abs(tight.lambda - 31.25) <= 1e-6);

  // dense angular grid search over the boundary agrees
  const LossLocalModel local = local_of(a);
  const Vec grid = testsupport::grid_max_quadratic_circle(local.grad, local.hess, a.r, 10000);
  CHECK(norm2({grid[0] - res.delta[0], grid[1] - res.delta[1]}) <= 1e-3 * a.r);

  // stationarity of the quadratic model
  const Vec hd = local.hess.apply(res.delta);
  double st = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double v = -local.grad[i] - hd[i] + res.lambda * res.delta[i];
    st += v * v;
  }
  CHECK(std::sqrt(st) <= 1e-6 * std::max(1.0, norm2(local.grad)));
}

TEST_CASE("trs_solve interior branch on a strictly concave model") {
  LossLocalModel local{0.0, {0.1, 0.0}, SymmetricMatrix::diagonal({-2.0, -1.0})};
  const PerturbationResult res = trs_solve(local, 0.1);
  CHECK(res.lambda == 0.0);
  CHECK_FALSE(res.boundary_active);
  CHECK(res.delta[0] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(std::abs(res.delta[1]) <= 1e-12);

  const Vec grid = testsupport::grid_max_quadratic_disc(local.grad, local.hess, 0.1, 2000, 50);
  const Vec hd = local.hess.apply(res.delta);
  const Vec hg = local.hess.apply(grid);
  const double val_res = dot(local.grad, res.delta) + 0.5 * dot(res.delta, hd);
  const double val_grid = dot(local.grad, grid) + 0.5 * dot(grid, hg);
  CHECK(val_res >= val_grid - 1e-6);
}

TEST_CASE("trs_solve concave model with infeasible stationary point") {
  LossLocalModel local{0.0, {1.0, 0.0}, SymmetricMatrix::diagonal({-2.0, -1.0})};
  const PerturbationResult res = trs_solve(local, 0.1);
  CHECK(res.boundary_active);
  CHECK(std::abs(res.delta_norm - 0.1) <= 1e-8);
  CHECK(res.lambda >= 0.0);
}

TEST_CASE("trs_solve survives a root pinched against the pole") {
  LossLocalModel local{0.0, {1e-10, 0.0}, SymmetricMatrix::scaled_outer(0.25, {1.0, 0.0})};
  const PerturbationResult res = trs_solve(local, 0.2);
  CHECK(res.delta_norm <= 0.2 + 1e-9);
  CHECK(res.lambda >= 0.25);
  CHECK(res.delta[0] >= 0.0);
}

TEST_CASE("trs_solve input validation") {
  LossLocalModel local{0.0, {1.0, 0.0}, SymmetricMatrix(2)};
  CHECK_THROWS_AS(trs_solve(local, 0.0), ValidationError);
  local.grad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(trs_solve(local, 0.1), ValidationError);
}

TEST_CASE("secular_value closed cases") {
  const EigenDecomposition zero = sym_eig(SymmetricMatrix(2));
  CHECK(secular_value(zero, {1.0, 0.0}, 2.0, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(std::abs(secular_value(zero, {1.0, 0.0}, 1e12, 0.5) + 0.5) <= 1e-9);
  CHECK_THROWS_AS(secular_value(zero, {1.0, 0.0}, 0.0, 0.5), ValidationError);

  const EigenDecomposition diag = sym_eig(SymmetricMatrix::diagonal({2.0, 1.0}));
  // |(0.5, 1/3)| - 0.1 = sqrt(13)/6 - 0.1
  CHECK(secular_value(diag, {1.0, 1.0}, 4.0, 0.1) ==
        doctest::Approx(std::sqrt(13.0) / 6.0 - 0.1).epsilon(1e-12));
}

TEST_CASE("lambda_upper_bound closed cases") {
  CHECK(lambda_upper_bound(0.0, 1.0, 2, 0.5) ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(lambda_upper_bound(-3.0, 0.0, 4, 0.1) == doctest::Approx(3.0));

  // rank-1 instance: bound exceeds the true multiplier
  const double bound = lambda_upper_bound(6.25, 2.5, 2, 0.1);
  CHECK(bound == doctest::Approx(6.25 + 25.0 * std::sqrt(2.0)).epsilon(1e-14));
  CHECK(bound > 31.25);
}

TEST_CASE("bisect_lambda closed cases") {
  const EigenDecomposition zero = sym_eig(SymmetricMatrix(2));
  const Vec g{1.0, 0.0};
  const double root = bisect_lambda(zero, g, 0.5, 1e-9, 2.829, 1e-10);
  CHECK(std::abs(root - 2.0) <= 1e-8);

  const AffineInstance a{{3.0, 4.0}, 0.0, {0.0, 0.0}, 0, 0.1};
  const LossLocalModel local = local_of(a);
  const EigenDecomposition eig = sym_eig(local.hess);
  const double d_max = eig.d.front();
  const double hi = lambda_upper_bound(d_max, norm2(local.grad), 2, a.r);
  const double lambda =
      bisect_lambda(eig, local.grad, a.r, d_max + 1e-9 * d_max, hi, 1e-12);
  CHECK(std::abs(lambda - 31.25) <= 1e-6);

  // already-converged bracket returns its midpoint
  const double mid = bisect_lambda(zero, g, 0.5, 2.0, 2.0 + 1e-10, 1e-8);
  CHECK(mid == doctest::Approx(2.0).epsilon(1e-9));

  // sign violation: the root is below the given bracket
  CHECK_THROWS_AS(bisect_lambda(zero, g, 10.0, 0.2, 5.0, 1e-10), SolverError);
}

TEST_CASE("project_ball") {
  const Vec p = project_ball({3.0, 4.0}, 1.0);
  CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-15));

  const Vec q = project_ball({0.1, 0.0}, 1.0);
  CHECK(q[0] == 0.1);
  CHECK(q[1] == 0.0);

  CHECK(norm2(project_ball({0.0, 0.0}, 2.0)) == 0.0);
  CHECK_THROWS_AS(project_ball({1.0}, -1.0), ValidationError);
}

TEST_CASE("pgd_solve fixed point and one-step projection") {
  const LossOracle flat = [](const Vec& d) { return LossEval{0.0, Vec(d.size(), 0.0)}; };
  const PerturbationResult res = pgd_solve(flat, 2, 0.1);
  CHECK(norm2(res.delta) == 0.0);
  CHECK(res.iterations == 1);

  // constant gradient long enough to overshoot in one step
  const Vec g{3.0, 4.0};
  const LossOracle linear = [&](const Vec& d) { return LossEval{dot(g, d), g}; };
  PgdOptions opts;
  opts.alpha = 1.0;
  const PerturbationResult one = pgd_solve(linear, 2, 1.0, opts);
  CHECK(one.delta[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(one.delta[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(one.boundary_active);
}

TEST_CASE("pgd_solve never returns a loss below the unperturbed one") {
  // inconsistent oracle: the "gradient" points where the value falls
  const Vec g{1.0, 0.0};
  const LossOracle trap = [&](const Vec& d) { return LossEval{-dot(g, d), g}; };
  const PerturbationResult res = pgd_solve(trap, 2, 0.5);
  CHECK(norm2(res.delta) == 0.0);
}

TEST_CASE("pgd_solve iterates stay feasible") {
  AffineInstanceGen gen(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const AffineInstance a = gen.next();
    const LossOracle inner = oracle_of(a);
    double worst = 0.0;
    const LossOracle recording = [&](const Vec& d) {
      worst = std::max(worst, norm2(d));
      return inner(d);
    };
    pgd_solve(recording, static_cast<int>(a.w.size()), a.r);
    CHECK(worst <= a.r + 1e-12);
  }
}

TEST_CASE("pgd_solve rejects non-finite gradients") {
  const LossOracle nan_oracle = [](const Vec& d) {
    return LossEval{0.0, Vec(d.size(), std::numeric_limits<double>::quiet_NaN())};
  };
  CHECK_THROWS_AS(pgd_solve(nan_oracle, 2, 0.1), SolverError);
}

TEST_CASE("random_perturb") {
  std::mt19937_64 rng(mix_seed(31));
  const PerturbationResult res = random_perturb(rng, 2, 0.1);
  CHECK(std::abs(res.delta_norm - 0.1) <= 1e-12);
  CHECK(res.boundary_active);

  std::mt19937_64 rng_zero(mix_seed(31));
  const PerturbationResult zero = random_perturb(rng_zero, 3, 0.0);
  CHECK(norm2(zero.delta) == 0.0);

  std::mt19937_64 r1(mix_seed(7)), r2(mix_seed(7)), r3(mix_seed(8));
  const Vec a = random_perturb(r1, 4, 0.5).delta;
  const Vec b = random_perturb(r2, 4, 0.5).delta;
  const Vec c = random_perturb(r3, 4, 0.5).delta;
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("kkt_residual arithmetic") {
  const KktResiduals clean = kkt_residual({0.0, 0.0}, {0.0, 0.0}, 0.0, 0.1);
  CHECK(clean.stationarity == 0.0);
  CHECK(clean.primal == 0.0);
  CHECK(clean.dual == 0.0);
  CHECK(clean.complementarity == 0.0);

  // |delta| = 2r with lambda = 1
  const double r = 0.25;
  const KktResiduals bad = kkt_residual({0.0, 0.0}, {2.0 * r, 0.0}, 1.0, r);
  CHECK(bad.primal == doctest::Approx(r).epsilon(1e-15));
  CHECK(bad.complementarity == doctest::Approx(r).epsilon(1e-15));

  const KktResiduals dual = kkt_residual({0.0}, {0.0}, -0.5, 1.0);
  CHECK(dual.dual == doctest::Approx(0.5));
}

TEST_CASE("kkt stationarity against the true perturbed gradient") {
  AffineInstanceGen gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const AffineInstance a = gen.next();
    const testsupport::ClosedForm oracle = testsupport::affine_closed_form(a);

    const double zp = dot(a.w, a.x) + a.b + dot(a.w, oracle.delta);
    const double residual = sigmoid(zp) - static_cast<double>(a.y);
    Vec true_grad(a.w.size());
    for (size_t i = 0; i < a.w.size(); ++i) true_grad[i] = residual * a.w[i];

    const KktResiduals res = kkt_residual(true_grad, oracle.delta, oracle.lambda, a.r);
    CHECK(res.stationarity <= 5e-3 * std::max(1.0, norm2(true_grad)));
    CHECK(res.primal <= 1e-12);
    CHECK(res.dual == 0.0);
  }
}

TEST_CASE("boundary solutions satisfy the quadratic-model optimality system") {
  AffineInstanceGen gen(202);
  for (int trial = 0; trial < 200; ++trial) {
    const AffineInstance a = gen.next();
    const LossLocalModel local = local_of(a);
    const double grad_norm = norm2(local.grad);
    if (grad_norm <= 1e-8) continue;

    const double tol = 1e-8 * std::max(1.0, a.r);
    const PerturbationResult res = trs_solve(local, a.r);
    const EigenDecomposition eig = sym_eig(local.hess);

    CHECK(res.lambda >= std::max(0.0, eig.d.front()));
    CHECK(std::abs(res.delta_norm - a.r) <= tol);
    CHECK(res.delta_norm <= a.r + 1e-9);

    const Vec hd = local.hess.apply(res.delta);
    double st = 0.0;
    for (size_t i = 0; i < res.delta.size(); ++i) {
      const double v = -local.grad[i] - hd[i] + res.lambda * res.delta[i];
      st += v * v;
    }
    CHECK(std::sqrt(st) <= 1e-6 * std::max(1.0, grad_norm));
  }
}

TEST_CASE("secular function is nonincreasing beyond the top eigenvalue") {
  testsupport::SymmetricGen gen(404);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + trial % 4;
    const SymmetricMatrix h = gen.next(n);
    const Vec g = gen.vector(n);
    if (norm2(g) < 1e-6) continue;
    const EigenDecomposition eig = sym_eig(h);
    const double d_max = eig.d.front();
    const double r = 0.05 + 0.15 * uniform_double(gen.rng());
    const double hi = lambda_upper_bound(d_max, norm2(g), n, r);

    double prev = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 40; ++k) {
      const double lambda = d_max + 1e-9 + (hi - d_max - 1e-9) * k / 40.0;
      const double value = secular_value(eig, g, lambda, r);
      CHECK(value <= prev + 1e-12);
      prev = value;
    }
  }
}

TEST_CASE("upper bound closes the bracket for random spectra") {
  testsupport::SymmetricGen gen(505);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + trial % 4;
    const SymmetricMatrix h = gen.next(n);
    const Vec g = gen.vector(n);
    const double r = 0.02 + 0.3 * uniform_double(gen.rng());
    const EigenDecomposition eig = sym_eig(h);
    const double hi = lambda_upper_bound(eig.d.front(), norm2(g), n, r);
    CHECK(secular_value(eig, g, hi, r) <= 0.0);
  }
}

TEST_CASE("TRS, PGD and the closed form agree on affine instances") {
  AffineInstanceGen gen(606);
  for (int trial = 0; trial < 200; ++trial) {
    const AffineInstance a = gen.next();
    const testsupport::ClosedForm cf = testsupport::affine_closed_form(a);
    const PerturbationResult trs = trs_solve(local_of(a), a.r);
    const PerturbationResult pgd = pgd_solve(oracle_of(a), static_cast<int>(a.w.size()), a.r);

    double trs_err = 0.0, pgd_err = 0.0;
    for (size_t i = 0; i < a.w.size(); ++i) {
      trs_err += (trs.delta[i] - cf.delta[i]) * (trs.delta[i] - cf.delta[i]);
      pgd_err += (pgd.delta[i] - trs.delta[i]) * (pgd.delta[i] - trs.delta[i]);
    }
    CHECK(std::sqrt(trs_err) <= 1e-3 * a.r);
    CHECK(std::sqrt(pgd_err) <= 1e-3 * a.r);
  }
}

TEST_CASE("optimized perturbations dominate random ones") {
  AffineInstanceGen gen(707);
  for (int trial = 0; trial < 100; ++trial) {
    const AffineInstance a = gen.next();
    const PerturbationResult trs = trs_solve(local_of(a), a.r);
    const PerturbationResult rnd =
        random_perturb(gen.rng(), static_cast<int>(a.w.size()), a.r);
    CHECK(testsupport::true_loss_at(a, trs.delta) >=
          testsupport::true_loss_at(a, rnd.delta) - 1e-12);
  }
}
