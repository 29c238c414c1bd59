#pragma once

#include "flatnet/lp.hpp"
#include "flatnet/types.hpp"

namespace flatnet {

/// min over t of (base + B t - c)^T M (base + B t - c), solved in closed form
/// through the k x k system (B^T M B) t = -B^T M (base - c).
template <FlatLike F, typename Scalar>
Scalar ellipsoid_flat_min_value(const F& f, const Ellipsoid<Scalar>& e) {
  if (f.base.size() != e.dim()) throw GeometryError("flat/ellipsoid: dimension mismatch");
  const VectorX<Scalar> r = f.base - e.center;
  if (f.basis.cols() == 0) return r.dot(e.shape * r);
  const MatrixX<Scalar> mb = e.shape * f.basis;
  const MatrixX<Scalar> gram = f.basis.transpose() * mb;
  Eigen::LLT<MatrixX<Scalar>> llt(gram);
  if (llt.info() != Eigen::Success) throw GeometryError("flat/ellipsoid: singular B^T M B (internal error)");
  const VectorX<Scalar> t = llt.solve(-(mb.transpose() * r));
  const VectorX<Scalar> x = r + f.basis * t;
  return x.dot(e.shape * x);
}

template <FlatLike F, typename Scalar>
bool flat_intersects_ellipsoid(const F& f, const Ellipsoid<Scalar>& e) {
  return ellipsoid_flat_min_value(f, e) <= Scalar(1) + Scalar(kGeomTol);
}

/// Is there t with lo <= base + B t <= hi? Decided by LP feasibility over the
/// 2d slab constraints (t split into nonnegative parts, slacks added).
template <FlatLike F, typename Scalar>
bool flat_intersects_box(const F& f, const AxisBox<Scalar>& box) {
  const auto d = f.base.size();
  const auto k = f.basis.cols();
  if (box.dim() != d) throw GeometryError("flat/box: dimension mismatch");
  const Scalar tol = Scalar(kGeomTol);
  if (k == 0) return box.contains(VectorX<Scalar>(f.base), tol);

  // [ B -B I 0 ] [u v s s']^T = hi - base
  // [-B  B 0 I ]                = base - lo
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(2 * d, 2 * k + 2 * d);
  A.block(0, 0, d, k) = f.basis;
  A.block(0, k, d, k) = -f.basis;
  A.block(d, 0, d, k) = -f.basis;
  A.block(d, k, d, k) = f.basis;
  A.block(0, 2 * k, 2 * d, 2 * d).setIdentity();
  VectorX<Scalar> b(2 * d);
  b.head(d) = (box.hi - f.base).array() + tol;
  b.tail(d) = (f.base - box.lo).array() + tol;
  return lp_feasible(A, b);
}

/// Is there t and a convex combination of the vertices equal to base + B t?
template <FlatLike F, typename Scalar>
bool flat_intersects_polytope(const F& f, const ConvexPolytope<Scalar>& poly) {
  const auto d = f.base.size();
  const auto k = f.basis.cols();
  const auto n = poly.vertices.cols();
  if (poly.dim() != d) throw GeometryError("flat/polytope: dimension mismatch");
  if (n == 0) return false;
  MatrixX<Scalar> A = MatrixX<Scalar>::Zero(d + 1, n + 2 * k);
  A.topLeftCorner(d, n) = poly.vertices;
  A.block(0, n, d, k) = -f.basis;
  A.block(0, n + k, d, k) = f.basis;
  A.row(d).head(n).setOnes();
  VectorX<Scalar> b(d + 1);
  b.head(d) = f.base;
  b(d) = Scalar(1);
  return lp_feasible(A, b);
}

template <typename Scalar, typename Derived>
bool contains(const Ellipsoid<Scalar>& e, const Eigen::MatrixBase<Derived>& p) {
  const VectorX<Scalar> r = p - e.center;
  return r.dot(e.shape * r) <= Scalar(1);
}

template <typename Scalar, typename Derived>
bool contains(const AxisBox<Scalar>& b, const Eigen::MatrixBase<Derived>& p) {
  return b.contains(VectorX<Scalar>(p));
}

template <typename Scalar, typename Derived>
bool contains(const ConvexPolytope<Scalar>& poly, const Eigen::MatrixBase<Derived>& p) {
  const auto box = poly.bounding_box();
  if (!box.contains(VectorX<Scalar>(p), Scalar(kGeomTol))) return false;
  return in_convex_hull(poly.vertices, VectorX<Scalar>(p));
}

}  // namespace flatnet
