#pragma once

// Inverse of the constrained block matrix [[M, A^T], [A, 0]], written as
// [[M_dag, A_dag^T], [A_dag, Lambda]]. M may be singular as long as it is
// positive definite on the null space of A.

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "contact_hybrid/errors.hpp"
#include "contact_hybrid/taylor.hpp"

namespace contact_hybrid {

inline constexpr double kSingularCutoff = 1e-12;
inline constexpr double kExtensionTolerance = 1e-10;

struct BlockInverse {
  Eigen::MatrixXd mdag;    // q x q
  Eigen::MatrixXd adag_t;  // q x c
  Eigen::MatrixXd adag;    // c x q
  Eigen::MatrixXd lambda;  // c x c

  int dofs() const { return static_cast<int>(mdag.rows()); }
  int constraints() const { return static_cast<int>(lambda.rows()); }
};

// Throws RankDeficientConstraints when the rows of a are dependent and
// SingularBlockMatrix when the block matrix is numerically singular.
BlockInverse build_block_inverse(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                                 double cutoff = kSingularCutoff);

// Appends one constraint row via the Schur complement of the base inverse.
// Throws DegenerateExtension when a_k M_dag a_k^T is not positive.
BlockInverse extend_block_inverse(const BlockInverse& base, const Eigen::RowVectorXd& a_k,
                                  double tol_lin = kExtensionTolerance);

bool constraints_full_rank(const Eigen::MatrixXd& a, double cutoff = kSingularCutoff);
bool block_invertible(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                      double cutoff = kSingularCutoff);
bool reduced_inertia_invertible(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                                double cutoff = kSingularCutoff);

// Cross-checks block invertibility against invertibility of H^T M H with H a
// basis of ker(a). Returns the common verdict or throws InternalInconsistency.
bool check_reduced_equivalence(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                               double cutoff = kSingularCutoff);

// Worst absolute residual over the defining identities of the block inverse.
double block_inverse_residual(const BlockInverse& bi, const Eigen::MatrixXd& m,
                              const Eigen::MatrixXd& a);

// Solves [[M, A^T], [A, 0]] [x; y] = [f; g] by Gaussian elimination with
// partial pivoting on the leading value. Works for double and Taylor scalars.
template <class T>
std::pair<VecX<T>, VecX<T>> solve_saddle(const MatX<T>& m, const MatX<T>& a, const VecX<T>& f,
                                         const VecX<T>& g) {
  const int q = static_cast<int>(m.rows());
  const int c = static_cast<int>(a.rows());
  const int n = q + c;
  MatX<T> k(n, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= n; ++j) k(i, j) = T(0.0);
  k.topLeftCorner(q, q) = m;
  if (c > 0) {
    k.block(0, q, q, c) = a.transpose();
    k.block(q, 0, c, q) = a;
    k.block(q, n, c, 1) = g;
  }
  k.block(0, n, q, 1) = f;

  double scale = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(scalar_value(k(i, j))));
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::abs(scalar_value(k(col, col)));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(scalar_value(k(r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (!(best > kSingularCutoff * scale))
      throw SingularBlockMatrix("zero pivot in saddle-point elimination");
    if (piv != col) k.row(piv).swap(k.row(col));
    const T inv = T(1.0) / k(col, col);
    for (int r = col + 1; r < n; ++r) {
      if (scalar_value(k(r, col)) == 0.0 && k(r, col) == T(0.0)) continue;
      const T factor = k(r, col) * inv;
      for (int j = col; j <= n; ++j) k(r, j) -= factor * k(col, j);
    }
  }
  VecX<T> sol(n);
  for (int i = n - 1; i >= 0; --i) {
    T s = k(i, n);
    for (int j = i + 1; j < n; ++j) s -= k(i, j) * sol(j);
    sol(i) = s / k(i, i);
  }
  return {sol.head(q), sol.tail(c)};
}

}  // namespace contact_hybrid
