#pragma once

#include <span>
#include <vector>

namespace robustfair {

using Vec = std::vector<double>;

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> v);
bool all_finite(std::span<const double> v);

/// Dense symmetric matrix, row-major n x n.
///
/// Construction enforces |a(i,j) - a(j,i)| <= 1e-12 so every instance is
/// exactly symmetric internally (the upper triangle mirrors the lower).
class SymmetricMatrix {
 public:
  explicit SymmetricMatrix(int n);

  /// Builds from a full row-major buffer; rejects asymmetry beyond 1e-12.
  static SymmetricMatrix from_row_major(int n, std::span<const double> entries);
  static SymmetricMatrix diagonal(const Vec& d);
  /// scale * v v^T, the rank-1 form used for input-space Hessians.
  static SymmetricMatrix scaled_outer(double scale, const Vec& v);

  int order() const { return n_; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * n_ + j]; }
  /// Sets both (i,j) and (j,i).
  void set(int i, int j, double value);

  Vec apply(const Vec& x) const;  // A x
  double max_abs() const;
  const std::vector<double>& data() const { return a_; }

 private:
  int n_;
  std::vector<double> a_;
};

/// A = Q diag(d) Q^T with Q orthogonal and d sorted descending, so
/// d.front() is always the largest eigenvalue.
struct EigenDecomposition {
  int n = 0;
  std::vector<double> q;  // row-major; column j is the eigenvector for d[j]
  Vec d;

  Vec qt_apply(const Vec& x) const;  // Q^T x
  Vec q_apply(const Vec& x) const;   // Q x
};

/// Cyclic Jacobi eigendecomposition. Converges when the off-diagonal
/// Frobenius mass drops below 1e-12 * ||A||_F; at most 100 sweeps.
EigenDecomposition sym_eig(const SymmetricMatrix& a);

/// delta(lambda) = -(A - lambda I)^{-1} g computed through the
/// eigendecomposition. Rejects lambda within 1e-14 of an eigenvalue.
Vec solve_shifted(const EigenDecomposition& eig, double lambda, const Vec& g);

}  // namespace robustfair
