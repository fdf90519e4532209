#include "robustfair/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "robustfair/errors.hpp"

namespace robustfair {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> v) { return std::sqrt(dot(v, v)); }

bool all_finite(std::span<const double> v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

SymmetricMatrix::SymmetricMatrix(int n) : n_(n) {
  if (n < 1) throw ValidationError("SymmetricMatrix: order must be >= 1");
  a_.assign(static_cast<size_t>(n) * n, 0.0);
}

SymmetricMatrix SymmetricMatrix::from_row_major(int n, std::span<const double> entries) {
  SymmetricMatrix m(n);
  if (entries.size() != static_cast<size_t>(n) * n)
    throw ValidationError("SymmetricMatrix: buffer size does not match order");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double lo = entries[static_cast<size_t>(i) * n + j];
      const double hi = entries[static_cast<size_t>(j) * n + i];
      if (std::abs(lo - hi) > 1e-12)
        throw ValidationError("SymmetricMatrix: entries are not symmetric");
      m.set(i, j, lo);
    }
  }
  return m;
}

SymmetricMatrix SymmetricMatrix::diagonal(const Vec& d) {
  SymmetricMatrix m(static_cast<int>(d.size()));
  for (int i = 0; i < m.n_; ++i) m.set(i, i, d[i]);
  return m;
}

SymmetricMatrix SymmetricMatrix::scaled_outer(double scale, const Vec& v) {
  SymmetricMatrix m(static_cast<int>(v.size()));
  for (int i = 0; i < m.n_; ++i)
    for (int j = 0; j <= i; ++j) m.set(i, j, scale * v[i] * v[j]);
  return m;
}

void SymmetricMatrix::set(int i, int j, double value) {
  a_[static_cast<size_t>(i) * n_ + j] = value;
  a_[static_cast<size_t>(j) * n_ + i] = value;
}

Vec SymmetricMatrix::apply(const Vec& x) const {
  Vec y(n_, 0.0);
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int j = 0; j < n_; ++j) s += (*this)(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

double SymmetricMatrix::max_abs() const {
  double m = 0.0;
  for (double v : a_) m = std::max(m, std::abs(v));
  return m;
}

Vec EigenDecomposition::qt_apply(const Vec& x) const {
  Vec y(n, 0.0);
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q[static_cast<size_t>(i) * n + j] * x[i];
    y[j] = s;
  }
  return y;
}

Vec EigenDecomposition::q_apply(const Vec& x) const {
  Vec y(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += q[static_cast<size_t>(i) * n + j] * x[j];
    y[i] = s;
  }
  return y;
}

namespace {

double off_diagonal_norm(const SymmetricMatrix& a) {
  const int n = a.order();
  double s = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

double frobenius(const SymmetricMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition sym_eig(const SymmetricMatrix& input) {
  const int n = input.order();
  if (!all_finite(input.data())) throw ValidationError("sym_eig: non-finite entries");

  SymmetricMatrix a = input;
  std::vector<double> q(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) q[static_cast<size_t>(i) * n + i] = 1.0;

  const double tol = 1e-12 * std::max(frobenius(a), 1e-300);
  constexpr int kMaxSweeps = 100;

  int sweep = 0;
  while (off_diagonal_norm(a) > tol && sweep < kMaxSweeps) {
    for (int p = 0; p < n - 1; ++p) {
      for (int qi = p + 1; qi < n; ++qi) {
        const double apq = a(p, qi);
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (a(qi, qi) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a(p, p);
        const double aqq = a(qi, qi);
        a.set(p, p, app - t * apq);
        a.set(qi, qi, aqq + t * apq);
        a.set(p, qi, 0.0);
        for (int r = 0; r < n; ++r) {
          if (r != p && r != qi) {
            const double arp = a(r, p);
            const double arq = a(r, qi);
            a.set(r, p, arp - s * (arq + tau * arp));
            a.set(r, qi, arq + s * (arp - tau * arq));
          }
          const double qrp = q[static_cast<size_t>(r) * n + p];
          const double qrq = q[static_cast<size_t>(r) * n + qi];
          q[static_cast<size_t>(r) * n + p] = qrp - s * (qrq + tau * qrp);
          q[static_cast<size_t>(r) * n + qi] = qrq + s * (qrp - tau * qrq);
        }
      }
    }
    ++sweep;
  }
  if (off_diagonal_norm(a) > tol)
    throw SolverError("sym_eig: Jacobi rotations did not converge in 100 sweeps");

  EigenDecomposition eig;
  eig.n = n;
  eig.d.resize(n);
  for (int i = 0; i < n; ++i) eig.d[i] = a(i, i);

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::stable_sort(perm.begin(), perm.end(),
                   [&](int lhs, int rhs) { return eig.d[lhs] > eig.d[rhs]; });

  Vec sorted(n);
  eig.q.assign(static_cast<size_t>(n) * n, 0.0);
  for (int j = 0; j < n; ++j) {
    sorted[j] = eig.d[perm[j]];
    for (int i = 0; i < n; ++i)
      eig.q[static_cast<size_t>(i) * n + j] = q[static_cast<size_t>(i) * n + perm[j]];
  }
  eig.d = std::move(sorted);
  return eig;
}

Vec solve_shifted(const EigenDecomposition& eig, double lambda, const Vec& g) {
  if (g.size() != static_cast<size_t>(eig.n))
    throw ValidationError("solve_shifted: dimension mismatch");
  for (double d : eig.d)
    if (std::abs(d - lambda) <= 1e-14)
      throw ValidationError("solve_shifted: shift coincides with an eigenvalue");

  Vec y = eig.qt_apply(g);
  for (int i = 0; i < eig.n; ++i) y[i] = -y[i] / (eig.d[i] - lambda);
  return eig.q_apply(y);
}

}  // namespace robustfair
