#include "contact_hybrid/block_inverse.hpp"

#include <algorithm>
#include <sstream>

namespace contact_hybrid {

namespace {

Eigen::MatrixXd assemble(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a) {
  const Eigen::Index q = m.rows();
  const Eigen::Index c = a.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(q + c, q + c);
  k.topLeftCorner(q, q) = m;
  k.topRightCorner(q, c) = a.transpose();
  k.bottomLeftCorner(c, q) = a;
  return k;
}

bool well_conditioned(const Eigen::MatrixXd& k, double cutoff) {
  if (k.size() == 0) return true;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(k).singularValues();
  return sv(0) > 0.0 && sv(sv.size() - 1) > cutoff * sv(0);
}

void check_shapes(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a) {
  if (m.rows() != m.cols() || (a.rows() > 0 && a.cols() != m.rows())) {
    std::ostringstream os;
    os << "shape mismatch: M is " << m.rows() << "x" << m.cols() << ", A is " << a.rows() << "x"
       << a.cols();
    throw InternalInconsistency(os.str());
  }
}

}  // namespace

bool constraints_full_rank(const Eigen::MatrixXd& a, double cutoff) {
  if (a.rows() == 0) return true;
  if (a.rows() > a.cols()) return false;
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(a).singularValues();
  return sv(0) > 0.0 && sv(sv.size() - 1) > cutoff * sv(0);
}

bool block_invertible(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a, double cutoff) {
  check_shapes(m, a);
  return well_conditioned(assemble(m, a), cutoff);
}

bool reduced_inertia_invertible(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                                double cutoff) {
  check_shapes(m, a);
  const Eigen::Index q = m.rows();
  if (a.rows() == 0) return well_conditioned(m, cutoff);
  if (!constraints_full_rank(a, cutoff)) return false;
  // Right singular vectors beyond the rank span ker(a).
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Index r = a.rows();
  if (r == q) return true;
  const Eigen::MatrixXd h = svd.matrixV().rightCols(q - r);
  const Eigen::MatrixXd reduced = h.transpose() * m * h;
  const double scale = std::max(m.norm(), 1e-300);
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(reduced).singularValues();
  return sv(sv.size() - 1) > cutoff * scale;
}

bool check_reduced_equivalence(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                               double cutoff) {
  if (!constraints_full_rank(a, cutoff))
    throw RankDeficientConstraints("constraint rows are linearly dependent");
  const bool block = block_invertible(m, a, cutoff);
  const bool reduced = reduced_inertia_invertible(m, a, cutoff);
  if (block != reduced)
    throw InternalInconsistency("block matrix and reduced inertia disagree on invertibility");
  return block;
}

BlockInverse build_block_inverse(const Eigen::MatrixXd& m, const Eigen::MatrixXd& a,
                                 double cutoff) {
  check_shapes(m, a);
  if (!constraints_full_rank(a, cutoff))
    throw RankDeficientConstraints("constraint rows are linearly dependent");
  const Eigen::MatrixXd k = assemble(m, a);
  if (!well_conditioned(k, cutoff))
    throw SingularBlockMatrix("inertia is not positive definite on the constraint null space");

  const Eigen::Index q = m.rows();
  const Eigen::Index c = a.rows();
  const Eigen::MatrixXd inv =
      k.fullPivLu().solve(Eigen::MatrixXd::Identity(q + c, q + c));
  BlockInverse bi;
  bi.mdag = inv.topLeftCorner(q, q);
  bi.adag_t = inv.topRightCorner(q, c);
  bi.adag = inv.bottomLeftCorner(c, q);
  bi.lambda = inv.bottomRightCorner(c, c);
  return bi;
}

BlockInverse extend_block_inverse(const BlockInverse& base, const Eigen::RowVectorXd& a_k,
                                  double tol_lin) {
  const Eigen::Index q = base.mdag.rows();
  const Eigen::Index c = base.lambda.rows();
  if (a_k.size() != q) throw InternalInconsistency("extension row has wrong length");

  const Eigen::VectorXd u = base.mdag * a_k.transpose();
  const double s = a_k.dot(u);
  const double scale = a_k.squaredNorm() * base.mdag.norm();
  if (!(s > tol_lin * scale) || !(s > 0.0))
    throw DegenerateExtension("new row lies in the span of the existing constraints");

  const Eigen::RowVectorXd w = a_k * base.adag_t;  // 1 x c
  BlockInverse out;
  out.mdag = base.mdag - u * u.transpose() / s;
  out.adag_t.resize(q, c + 1);
  out.adag_t.leftCols(c) = base.adag_t - u * w / s;
  out.adag_t.col(c) = u / s;
  out.adag = out.adag_t.transpose();
  out.lambda.resize(c + 1, c + 1);
  out.lambda.topLeftCorner(c, c) = base.lambda - w.transpose() * w / s;
  out.lambda.topRightCorner(c, 1) = w.transpose() / s;
  out.lambda.bottomLeftCorner(1, c) = w / s;
  out.lambda(c, c) = -1.0 / s;
  return out;
}

double block_inverse_residual(const BlockInverse& bi, const Eigen::MatrixXd& m,
                              const Eigen::MatrixXd& a) {
  const Eigen::Index q = m.rows();
  const Eigen::Index c = a.rows();
  double r = 0.0;
  auto upd = [&r](const Eigen::MatrixXd& x) {
    if (x.size() > 0) r = std::max(r, x.cwiseAbs().maxCoeff());
  };
  upd(a * bi.adag_t - Eigen::MatrixXd::Identity(c, c));
  upd(bi.adag * a.transpose() - Eigen::MatrixXd::Identity(c, c));
  upd(bi.mdag * a.transpose());
  upd(a * bi.mdag);
  upd(bi.mdag * m + bi.adag_t * a - Eigen::MatrixXd::Identity(q, q));
  upd(bi.adag * m + bi.lambda * a);
  return r;
}

}  // namespace contact_hybrid
