#pragma once

#include "robustfair/linalg.hpp"

namespace robustfair {

/// Affine binary classifier: logit(x) = w . x + b, prediction through a
/// sigmoid. Labels are stored as {0,1} integers throughout.
struct AffineModel {
  Vec w;
  double b = 0.0;
};

/// Numerically stable logistic function; no overflow for |z| <= 700.
double sigmoid(double z);

/// sigma'(z) = sigma(z) (1 - sigma(z)).
double sigmoid_prime(double z);

double predict_logit(const AffineModel& m, const Vec& x);

/// Binary cross entropy expressed in the logit, evaluated in the
/// log-sum-exp form max(z,0) - z*y + log1p(exp(-|z|)) which never takes the
/// log of zero.
double bce_from_logit(double z, int y);
double bce_loss(const AffineModel& m, const Vec& x, int y);

/// Loss value plus input-space derivatives at x:
///   grad = (sigma(z) - y) w
///   hess = sigma'(z) w w^T   (PSD, rank <= 1)
struct LossLocalModel {
  double value = 0.0;
  Vec grad;
  SymmetricMatrix hess;
};

LossLocalModel loss_local_model(const AffineModel& m, const Vec& x, int y);

/// Parameter-space gradient: d/dw = (sigma(z) - y) x, d/db = sigma(z) - y.
struct ParamGradient {
  Vec dw;
  double db = 0.0;
};

ParamGradient grad_params(const AffineModel& m, const Vec& x, int y);

}  // namespace robustfair
