#include "robustfair/model.hpp"

#include <cmath>

#include "robustfair/errors.hpp"

namespace robustfair {

namespace {

void check_dims(const AffineModel& m, const Vec& x, const char* who) {
  if (m.w.size() != x.size())
    throw ValidationError(std::string(who) + ": dimension mismatch between w and x");
}

void check_label(int y, const char* who) {
  if (y != 0 && y != 1) throw ValidationError(std::string(who) + ": label must be 0 or 1");
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double sigmoid_prime(double z) {
  const double s = sigmoid(z);
  return s * (1.0 - s);
}

double predict_logit(const AffineModel& m, const Vec& x) {
  check_dims(m, x, "predict_logit");
  return dot(m.w, x) + m.b;
}

double bce_from_logit(double z, int y) {
  check_label(y, "bce_from_logit");
  return std::max(z, 0.0) - z * static_cast<double>(y) + std::log1p(std::exp(-std::abs(z)));
}

double bce_loss(const AffineModel& m, const Vec& x, int y) {
  return bce_from_logit(predict_logit(m, x), y);
}

LossLocalModel loss_local_model(const AffineModel& m, const Vec& x, int y) {
  check_dims(m, x, "loss_local_model");
  check_label(y, "loss_local_model");
  const double z = dot(m.w, x) + m.b;
  const double residual = sigmoid(z) - static_cast<double>(y);

  LossLocalModel out{bce_from_logit(z, y), Vec(m.w.size()),
                     SymmetricMatrix::scaled_outer(sigmoid_prime(z), m.w)};
  for (size_t i = 0; i < m.w.size(); ++i) out.grad[i] = residual * m.w[i];
  return out;
}

ParamGradient grad_params(const AffineModel& m, const Vec& x, int y) {
  check_dims(m, x, "grad_params");
  check_label(y, "grad_params");
  const double residual = sigmoid(dot(m.w, x) + m.b) - static_cast<double>(y);

  ParamGradient g{Vec(x.size()), residual};
  for (size_t i = 0; i < x.size(); ++i) g.dw[i] = residual * x[i];
  return g;
}

}  // namespace robustfair
