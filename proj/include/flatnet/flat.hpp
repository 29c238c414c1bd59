#pragma once

#include "flatnet/types.hpp"

namespace flatnet {

/// Dimension of the affine hull of the columns of `points`.
template <typename Derived>
Eigen::Index affine_rank(const Eigen::MatrixBase<Derived>& points, double rank_tol = kGeomTol) {
  using Scalar = typename Derived::Scalar;
  const auto n = points.cols();
  if (n <= 1) return 0;
  const MatrixX<Scalar> diffs = points.rightCols(n - 1).colwise() - points.col(0);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(diffs);
  const Scalar scale = std::max<Scalar>(Scalar(1), diffs.cwiseAbs().maxCoeff());
  qr.setThreshold(Scalar(rank_tol) / scale);
  return qr.rank();
}

/// Affine hull of the columns of `points` as a KFlat. The basis is the
/// orthonormalized span of the difference vectors; base is the first point.
template <typename Derived>
KFlat<typename Derived::Scalar> flat_from_affine_hull(const Eigen::MatrixBase<Derived>& points,
                                                      double rank_tol = kGeomTol) {
  using Scalar = typename Derived::Scalar;
  const auto d = points.rows();
  const auto n = points.cols();
  if (n < 1) throw GeometryError("affine hull: need at least one point");
  if (d < 1) throw GeometryError("affine hull: points must have dimension >= 1");
  if (!points.allFinite()) throw GeometryError("affine hull: non-finite coordinates");

  KFlat<Scalar> flat{points.col(0), MatrixX<Scalar>(d, 0)};
  if (n == 1) return flat;

  const MatrixX<Scalar> diffs = points.rightCols(n - 1).colwise() - points.col(0);
  Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(diffs);
  const Scalar scale = std::max<Scalar>(Scalar(1), diffs.cwiseAbs().maxCoeff());
  qr.setThreshold(Scalar(rank_tol) / scale);
  const auto rank = qr.rank();
  if (rank >= d) throw GeometryError("affine hull: points span R^d, not a flat (k must be < d)");
  const MatrixX<Scalar> q = qr.householderQ();
  flat.basis = q.leftCols(rank);
  return flat;
}

/// Orthogonal projection of q onto the flat.
template <FlatLike F, typename Derived>
VectorX<typename Derived::Scalar> project_onto_flat(const Eigen::MatrixBase<Derived>& q, const F& f) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> r = q - f.base;
  if (f.basis.cols() == 0) return f.base;
  return f.base + f.basis * (f.basis.transpose() * r);
}

/// || (I - B B^T)(q - base) ||
template <FlatLike F, typename Derived>
typename Derived::Scalar dist_point_flat(const Eigen::MatrixBase<Derived>& q, const F& f) {
  using Scalar = typename Derived::Scalar;
  if (q.size() != f.base.size()) throw GeometryError("dist_point_flat: dimension mismatch");
  VectorX<Scalar> r = q - f.base;
  if (f.basis.cols() > 0) r -= f.basis * (f.basis.transpose() * r);
  return r.norm();
}

}  // namespace flatnet
