#pragma once

#include "flatnet/predicates.hpp"
#include "flatnet/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace flatnet {

/// c_d = pi^{d/2} / Gamma(d/2 + 1); c_0 = 1.
template <typename Scalar = double>
Scalar unit_ball_volume(int d) {
  if (d < 0) throw GeometryError("unit_ball_volume: negative dimension");
  const Scalar half = Scalar(d) / Scalar(2);
  return std::pow(std::numbers::pi_v<Scalar>, half) / std::tgamma(half + Scalar(1));
}

template <typename Scalar>
Scalar ellipsoid_volume(const Ellipsoid<Scalar>& e) {
  return unit_ball_volume<Scalar>(static_cast<int>(e.dim())) / std::sqrt(e.shape.determinant());
}

/// (d-1)-volume of E intersected with { x_axis = alpha }. The section is the
/// ellipsoid with shape C (M with row/column `axis` removed) and squared
/// radius 1 - delta^2 * (m_aa - b^T C^{-1} b).
template <typename Scalar>
Scalar slice_volume(const Ellipsoid<Scalar>& e, int axis, Scalar alpha) {
  const auto d = e.dim();
  if (axis < 0 || axis >= d) throw GeometryError("slice_volume: axis out of range");
  const Scalar delta = alpha - e.center(axis);
  if (d == 1) return e.shape(0, 0) * delta * delta <= Scalar(1) ? Scalar(1) : Scalar(0);

  std::vector<Eigen::Index> rest;
  for (Eigen::Index i = 0; i < d; ++i)
    if (i != axis) rest.push_back(i);
  const MatrixX<Scalar> c = e.shape(rest, rest);
  const VectorX<Scalar> b = e.shape(rest, axis);
  Eigen::LLT<MatrixX<Scalar>> llt(c);
  const Scalar schur = e.shape(axis, axis) - b.dot(llt.solve(b));
  const Scalar rho = Scalar(1) - delta * delta * schur;
  if (rho <= Scalar(0)) return Scalar(0);
  const int m = static_cast<int>(d - 1);
  return unit_ball_volume<Scalar>(m) * std::pow(rho, Scalar(m) / Scalar(2)) / std::sqrt(c.determinant());
}

/// Monte Carlo estimate of vol(body ∩ [0,1]^d); deterministic in `seed`.
template <typename Body>
double mc_volume_in_cube(const Body& body, std::int64_t samples, std::uint64_t seed) {
  if (samples < 1) throw GeometryError("mc_volume_in_cube: samples must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const auto d = body.dim();
  VectorX<double> p(d);
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < d; ++i) p(i) = unif(rng);
    if (contains(body, p)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace flatnet
