#pragma once

#include "flatnet/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace flatnet {

/// Phase-one simplex (Bland's rule) for { x >= 0 : A x = b }. Dense and meant
/// for the small systems that show up in flat/box and flat/polytope tests.
/// Returns the minimal total infeasibility sum_i |b_i - A_i x| over x >= 0.
template <typename Scalar>
Scalar lp_infeasibility(const MatrixX<Scalar>& A, const VectorX<Scalar>& b) {
  const auto m = A.rows();
  const auto n = A.cols();
  if (b.size() != m) throw GeometryError("lp: row count mismatch");
  if (m == 0) return Scalar(0);

  // Tableau [A | I | b] with the artificial objective in row m.
  const auto cols = n + m + 1;
  MatrixX<Scalar> t = MatrixX<Scalar>::Zero(m + 1, cols);
  for (Eigen::Index i = 0; i < m; ++i) {
    const Scalar sign = b(i) < 0 ? Scalar(-1) : Scalar(1);
    t.row(i).head(n) = sign * A.row(i);
    t(i, n + i) = Scalar(1);
    t(i, cols - 1) = sign * b(i);
  }
  // Reduced costs of minimizing sum of artificials.
  t.row(m).head(n) = -t.topRows(m).leftCols(n).colwise().sum();
  t(m, cols - 1) = -t.topRows(m).col(cols - 1).sum();

  std::vector<Eigen::Index> basis(m);
  for (Eigen::Index i = 0; i < m; ++i) basis[i] = n + i;

  const Scalar piv_tol = Scalar(1e-12) * std::max<Scalar>(Scalar(1), A.cwiseAbs().maxCoeff());
  const Eigen::Index max_iter = 50 * (m + n) + 100;
  for (Eigen::Index iter = 0; iter < max_iter; ++iter) {
    Eigen::Index enter = -1;
    for (Eigen::Index j = 0; j < n + m; ++j) {
      if (t(m, j) < -piv_tol) {
        enter = j;
        break;
      }
    }
    if (enter < 0) break;

    Eigen::Index leave = -1;
    Scalar best = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      if (t(i, enter) > piv_tol) {
        const Scalar ratio = t(i, cols - 1) / t(i, enter);
        if (ratio < best - piv_tol || (std::abs(ratio - best) <= piv_tol && leave >= 0 && basis[i] < basis[leave])) {
          best = ratio;
          leave = i;
        }
      }
    }
    if (leave < 0) break;  // unbounded direction cannot occur in phase one

    t.row(leave) /= t(leave, enter);
    for (Eigen::Index i = 0; i <= m; ++i) {
      if (i != leave && t(i, enter) != Scalar(0)) t.row(i) -= t(i, enter) * t.row(leave);
    }
    basis[leave] = enter;
  }
  return std::max(Scalar(0), -t(m, cols - 1));
}

template <typename Scalar>
bool lp_feasible(const MatrixX<Scalar>& A, const VectorX<Scalar>& b, Scalar tol = Scalar(kGeomTol)) {
  const Scalar scale = std::max<Scalar>(Scalar(1), b.size() ? b.cwiseAbs().maxCoeff() : Scalar(1));
  return lp_infeasibility(A, b) <= tol * scale * Scalar(std::max<Eigen::Index>(1, b.size()));
}

/// Is p in conv(columns of V)? Ties count as inside.
template <typename Scalar>
bool in_convex_hull(const MatrixX<Scalar>& V, const VectorX<Scalar>& p, Scalar tol = Scalar(kGeomTol)) {
  const auto d = V.rows();
  const auto n = V.cols();
  MatrixX<Scalar> A(d + 1, n);
  A.topRows(d) = V;
  A.row(d).setOnes();
  VectorX<Scalar> b(d + 1);
  b.head(d) = p;
  b(d) = Scalar(1);
  return lp_feasible(A, b, tol);
}

}  // namespace flatnet
