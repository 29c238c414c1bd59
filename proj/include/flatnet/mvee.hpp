#pragma once

#include "flatnet/flat.hpp"
#include "flatnet/types.hpp"

#include <algorithm>
#include <cmath>

namespace flatnet {

struct MveeOptions {
  double tol = 1e-7;
  int max_iterations = 100000;
};

/// Minimum-volume enclosing ellipsoid of the columns of `points`.
///
/// Khachiyan's barycentric iteration with Todd-Yildirim away steps: weights u
/// on the lifted points q_j = (p_j, 1); each step moves weight toward the point
/// with the largest Mahalanobis value q^T X(u)^{-1} q (or away from the active
/// point with the smallest), stopping once all values lie within (d+1)(1 ± tol).
/// The result is rescaled so every input point satisfies (x-c)^T M (x-c) <= 1.
template <typename Derived>
Ellipsoid<typename Derived::Scalar> mvee(const Eigen::MatrixBase<Derived>& points, MveeOptions opts = {}) {
  using Scalar = typename Derived::Scalar;
  const auto d = points.rows();
  const auto n = points.cols();
  if (n < d + 1) throw GeometryError("mvee: need at least d+1 points");
  if (affine_rank(points) < d) throw GeometryError("mvee: degenerate (lower-dimensional) point set");

  MatrixX<Scalar> q(d + 1, n);
  q.topRows(d) = points;
  q.row(d).setOnes();
  VectorX<Scalar> u = VectorX<Scalar>::Constant(n, Scalar(1) / Scalar(n));
  const Scalar dd = Scalar(d + 1);

  VectorX<Scalar> m(n);
  auto evaluate = [&] {
    const MatrixX<Scalar> x = q * u.asDiagonal() * q.transpose();
    Eigen::LDLT<MatrixX<Scalar>> ldlt(x);
    const MatrixX<Scalar> sol = ldlt.solve(q);
    m = (q.array() * sol.array()).colwise().sum().transpose();
  };

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    evaluate();
    Eigen::Index jmax = 0;
    const Scalar mmax = m.maxCoeff(&jmax);
    Eigen::Index jmin = -1;
    Scalar mmin = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (u(j) > Scalar(0) && m(j) < mmin) {
        mmin = m(j);
        jmin = j;
      }
    }
    const Scalar up = mmax / dd - Scalar(1);
    const Scalar down = Scalar(1) - mmin / dd;
    if (std::max(up, down) <= Scalar(opts.tol)) break;

    if (up >= down) {
      const Scalar step = (mmax - dd) / (dd * (mmax - Scalar(1)));
      u *= Scalar(1) - step;
      u(jmax) += step;
    } else {
      const Scalar uj = u(jmin);
      Scalar step = (dd - mmin) / (dd * (mmin - Scalar(1)));
      step = std::min(step, uj / (Scalar(1) - uj));
      u *= Scalar(1) + step;
      u(jmin) -= step;
      if (u(jmin) < Scalar(0)) u(jmin) = Scalar(0);
    }
  }

  const VectorX<Scalar> c = points * u;
  const MatrixX<Scalar> cov = points * u.asDiagonal() * points.transpose() - c * c.transpose();
  MatrixX<Scalar> shape = cov.ldlt().solve(MatrixX<Scalar>::Identity(d, d)) / Scalar(d);
  shape = (shape + shape.transpose()) / Scalar(2);

  Scalar worst = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const VectorX<Scalar> r = points.col(j) - c;
    worst = std::max(worst, r.dot(shape * r));
  }
  if (worst > Scalar(1)) shape /= worst;
  return {c, shape};
}

}  // namespace flatnet
