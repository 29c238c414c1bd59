#pragma once

#include <Eigen/Dense>

#include <concepts>
#include <stdexcept>
#include <string>

namespace flatnet {

// Predicate tolerance for geometric decisions and symmetry checks.
inline constexpr double kGeomTol = 1e-9;
inline constexpr double kSymmetryTol = 1e-12;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A k-dimensional affine flat: `base + basis * t`, t in R^k.
/// `basis` is d x k with orthonormal columns; k == 0 is a single point.
template <typename Scalar>
struct KFlat {
  VectorX<Scalar> base;
  MatrixX<Scalar> basis;

  Eigen::Index dim() const { return base.size(); }
  Eigen::Index k() const { return basis.cols(); }
};

/// Non-owning view of a flat stored in contiguous memory (see Net).
struct FlatView {
  Eigen::Map<const VectorX<double>> base;
  Eigen::Map<const MatrixX<double>> basis;

  Eigen::Index dim() const { return base.size(); }
  Eigen::Index k() const { return basis.cols(); }
};

template <typename F>
concept FlatLike = requires(const F& f) {
  { f.base.size() } -> std::convertible_to<Eigen::Index>;
  { f.basis.cols() } -> std::convertible_to<Eigen::Index>;
};

/// { x : (x - center)^T shape (x - center) <= 1 }, shape symmetric positive definite.
template <typename Scalar>
struct Ellipsoid {
  VectorX<Scalar> center;
  MatrixX<Scalar> shape;

  Eigen::Index dim() const { return center.size(); }

  static Ellipsoid ball(const VectorX<Scalar>& c, Scalar radius) {
    const auto d = c.size();
    return {c, MatrixX<Scalar>::Identity(d, d) / (radius * radius)};
  }

  /// Half-extents of the axis-aligned bounding box.
  VectorX<Scalar> half_extents() const {
    return shape.ldlt().solve(MatrixX<Scalar>::Identity(dim(), dim())).diagonal().cwiseSqrt();
  }
};

template <typename Scalar>
struct AxisBox {
  VectorX<Scalar> lo;
  VectorX<Scalar> hi;

  Eigen::Index dim() const { return lo.size(); }
  Scalar volume() const { return (hi - lo).prod(); }
  bool contains(const VectorX<Scalar>& p, Scalar tol = Scalar(0)) const {
    return ((p.array() >= lo.array() - tol) && (p.array() <= hi.array() + tol)).all();
  }

  static AxisBox unit(Eigen::Index d) {
    return {VectorX<Scalar>::Zero(d), VectorX<Scalar>::Ones(d)};
  }
};

/// V-representation: one vertex per column.
template <typename Scalar>
struct ConvexPolytope {
  MatrixX<Scalar> vertices;

  Eigen::Index dim() const { return vertices.rows(); }
  AxisBox<Scalar> bounding_box() const {
    return {vertices.rowwise().minCoeff(), vertices.rowwise().maxCoeff()};
  }
};

template <typename Scalar>
void check_ellipsoid(const Ellipsoid<Scalar>& e) {
  if (e.shape.rows() != e.dim() || e.shape.cols() != e.dim())
    throw GeometryError("ellipsoid: shape/center dimension mismatch");
  if (!e.center.allFinite() || !e.shape.allFinite())
    throw GeometryError("ellipsoid: non-finite entries");
  const Scalar scale = std::max<Scalar>(Scalar(1), e.shape.cwiseAbs().maxCoeff());
  if ((e.shape - e.shape.transpose()).cwiseAbs().maxCoeff() > Scalar(kSymmetryTol) * scale)
    throw GeometryError("ellipsoid: shape is not symmetric");
  Eigen::LLT<MatrixX<Scalar>> llt(e.shape);
  if (llt.info() != Eigen::Success)
    throw GeometryError("ellipsoid: shape is not positive definite");
}

template <FlatLike F>
void check_flat(const F& f, double tol = kGeomTol) {
  const auto d = f.base.size();
  const auto k = f.basis.cols();
  if (d < 1) throw GeometryError("flat: dimension must be >= 1");
  if (k >= d) throw GeometryError("flat: k must be < d");
  if (k > 0 && f.basis.rows() != d) throw GeometryError("flat: basis dimension mismatch");
  if (!f.base.allFinite()) throw GeometryError("flat: non-finite base");
  if (k > 0) {
    const auto gram = (f.basis.transpose() * f.basis).eval();
    if ((gram - decltype(gram)::Identity(k, k)).cwiseAbs().maxCoeff() > tol)
      throw GeometryError("flat: basis is not orthonormal");
  }
}

}  // namespace flatnet
