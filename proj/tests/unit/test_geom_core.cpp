#include <doctest.h>

#include "flatnet/geom_core.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace flatnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(v.size());
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

KFlat<double> line(VectorXd base, VectorXd dir) { return {std::move(base), dir.normalized()}; }

KFlat<double> point(VectorXd p) {
  const auto d = p.size();
  return {std::move(p), MatrixXd(d, 0)};
}

}  // namespace

TEST_CASE("affine hull of three collinear points is a line") {
  MatrixXd p(2, 3);
  p << 0, 1, 2, 0, 1, 2;
  CHECK(affine_rank(p) == 1);
  const auto f = flat_from_affine_hull(p);
  CHECK(f.k() == 1);
  CHECK(std::abs(std::abs(f.basis(0, 0)) - std::sqrt(0.5)) < 1e-12);
  CHECK(std::abs(std::abs(f.basis(1, 0)) - std::sqrt(0.5)) < 1e-12);
}

TEST_CASE("affine hull spanning the whole space is rejected") {
  MatrixXd p(3, 4);
  p << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  CHECK(affine_rank(p) == 3);
  CHECK_THROWS_AS(flat_from_affine_hull(p), GeometryError);
}

TEST_CASE("affine rank agrees with row reduction on random point sets") {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> pick(0, 4);
  for (int trial = 0; trial < 300; ++trial) {
    const int d = 2 + trial % 4;
    const int r = std::min(d, pick(rng));
    const int npts = 1 + pick(rng) + r;
    MatrixXd gen(d, r);
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < d; ++i) gen(i, j) = n(rng);
    VectorXd o(d);
    for (int i = 0; i < d; ++i) o(i) = n(rng);
    MatrixXd pts(d, npts);
    for (int j = 0; j < npts; ++j) {
      VectorXd c(r);
      for (int i = 0; i < r; ++i) c(i) = n(rng);
      pts.col(j) = o + gen * c;
    }
    CHECK(affine_rank(pts) == oracle::affine_rank(pts, 1e-8));
    if (affine_rank(pts) < d) {
      const auto f = flat_from_affine_hull(pts);
      CHECK_NOTHROW(check_flat(f));
      for (int j = 0; j < npts; ++j) CHECK(dist_point_flat(VectorXd(pts.col(j)), f) < 1e-9);
    }
  }
}

TEST_CASE("point to flat distance examples") {
  const auto f = line(vec({0, 0}), vec({1, 0}));
  CHECK(dist_point_flat(vec({5, 0}), f) == doctest::Approx(0));
  CHECK(dist_point_flat(vec({-3, 1}), f) == doctest::Approx(1));
  CHECK(dist_point_flat(vec({1, 1}), point(vec({0, 0}))) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(dist_point_flat(vec({1, 1, 1}), f), GeometryError);
}

TEST_CASE("projection onto a flat is idempotent and orthogonal") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 2 + trial % 5;
    const int k = trial % d;
    KFlat<double> f{VectorXd::NullaryExpr(d, [&] { return n(rng); }), oracle::random_orthonormal(d, k, rng)};
    const VectorXd q = VectorXd::NullaryExpr(d, [&] { return n(rng); });
    const VectorXd p = project_onto_flat(q, f);
    CHECK((project_onto_flat(p, f) - p).norm() < 1e-10);
    CHECK(dist_point_flat(p, f) < 1e-10);
    if (k > 0) CHECK((f.basis.transpose() * (q - p)).norm() < 1e-10);
    CHECK(std::abs((q - p).norm() - dist_point_flat(q, f)) < 1e-10);
  }
}

TEST_CASE("check_flat rejects malformed flats") {
  CHECK_THROWS_AS(check_flat(KFlat<double>{vec({0, 0}), MatrixXd::Identity(2, 2)}), GeometryError);
  MatrixXd b(2, 1);
  b << 1, 1;
  CHECK_THROWS_AS(check_flat(KFlat<double>{vec({0, 0}), b}), GeometryError);
  CHECK_NOTHROW(check_flat(line(vec({0, 0}), vec({1, 1}))));
}

TEST_CASE("ellipsoid predicate examples") {
  const auto e = Ellipsoid<double>::ball(vec({0, 0}), 1.0);
  CHECK(flat_intersects_ellipsoid(line(vec({0, 0.9}), vec({1, 0})), e));
  CHECK(ellipsoid_flat_min_value(line(vec({0, 0.9}), vec({1, 0})), e) == doctest::Approx(0.81));
  CHECK(flat_intersects_ellipsoid(line(vec({0, 1}), vec({1, 0})), e));
  CHECK_FALSE(flat_intersects_ellipsoid(line(vec({0, 1.01}), vec({1, 0})), e));
  CHECK(flat_intersects_ellipsoid(point(vec({0.5, 0.5})), e));
  CHECK_FALSE(flat_intersects_ellipsoid(point(vec({0.8, 0.8})), e));
  // Thin ellipse along the diagonal; the anti-diagonal line through the centre hits it.
  Ellipsoid<double> thin{vec({0.5, 0.5}), MatrixXd(2, 2)};
  MatrixXd r(2, 2);
  r << std::sqrt(0.5), -std::sqrt(0.5), std::sqrt(0.5), std::sqrt(0.5);
  thin.shape = r * vec({1 / (0.4 * 0.4), 1 / (0.01 * 0.01)}).asDiagonal() * r.transpose();
  CHECK(flat_intersects_ellipsoid(line(vec({0, 1}), vec({1, -1})), thin));
  CHECK_FALSE(flat_intersects_ellipsoid(line(vec({0, 0.05}), vec({1, 1})), thin));
  CHECK(flat_intersects_ellipsoid(line(vec({0, 0.01}), vec({1, 1})), thin));
  CHECK(flat_intersects_ellipsoid(line(vec({0.1, 0.1}), vec({1, 1})), thin));
}

TEST_CASE("ellipsoid predicate agrees with direct minimization") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  int compared = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 2;
    const int k = trial % d;
    if (k > 2) continue;
    Ellipsoid<double> e{VectorXd::NullaryExpr(d, [&] { return u(rng); }), oracle::random_spd(d, 0.05, 0.5, rng)};
    KFlat<double> f{VectorXd::NullaryExpr(d, [&] { return u(rng); }), oracle::random_orthonormal(d, k, rng)};
    const double exact = oracle::flat_ellipsoid_min(f.base, f.basis, e.center, e.shape);
    const double mine = ellipsoid_flat_min_value(f, e);
    CHECK(mine <= exact + 1e-9 * std::max(1.0, exact));
    CHECK(mine == doctest::Approx(exact).epsilon(1e-6));
    if (std::abs(exact - 1) < 1e-6) continue;
    ++compared;
    CHECK(flat_intersects_ellipsoid(f, e) == (exact <= 1));
  }
  CHECK(compared > 900);
}

TEST_CASE("box predicate examples") {
  const AxisBox<double> box{vec({0.2, 0.2}), vec({0.4, 0.3})};
  CHECK(flat_intersects_box(line(vec({0, 0.25}), vec({1, 0})), box));
  CHECK_FALSE(flat_intersects_box(line(vec({0, 0.35}), vec({1, 0})), box));
  CHECK(flat_intersects_box(line(vec({0, 0}), vec({1, 1})), box));
  CHECK_FALSE(flat_intersects_box(line(vec({0, 0.5}), vec({1, 1})), box));
  CHECK(flat_intersects_box(line(vec({0.4, 0}), vec({0, 1})), box));
  CHECK(flat_intersects_box(point(vec({0.3, 0.3})), box));
  CHECK_FALSE(flat_intersects_box(point(vec({0.5, 0.3})), box));
}

TEST_CASE("box predicate agrees with the slab method for lines") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 2 + trial % 3;
    VectorXd a = VectorXd::NullaryExpr(d, [&] { return u(rng); });
    VectorXd b = VectorXd::NullaryExpr(d, [&] { return u(rng); });
    const AxisBox<double> box{a.cwiseMin(b), a.cwiseMax(b)};
    const auto f = KFlat<double>{VectorXd::NullaryExpr(d, [&] { return u(rng); }), oracle::random_orthonormal(d, 1, rng)};
    CHECK(flat_intersects_box(f, box) == oracle::line_meets_box(f.base, f.basis.col(0), box.lo, box.hi));
  }
}

TEST_CASE("polytope predicate examples") {
  ConvexPolytope<double> tri{MatrixXd(2, 3)};
  tri.vertices << 0.1, 0.5, 0.3, 0.1, 0.1, 0.6;
  CHECK(flat_intersects_polytope(line(vec({0, 0.3}), vec({1, 0})), tri));
  CHECK(flat_intersects_polytope(line(vec({0, 0.6}), vec({1, 0})), tri));
  CHECK_FALSE(flat_intersects_polytope(line(vec({0, 0.65}), vec({1, 0})), tri));
  CHECK_FALSE(flat_intersects_polytope(line(vec({0, 0.8}), vec({1, 1})), tri));
  CHECK(flat_intersects_polytope(point(vec({0.3, 0.2})), tri));
  CHECK_FALSE(flat_intersects_polytope(point(vec({0.1, 0.5})), tri));
  CHECK(contains(tri, vec({0.3, 0.2})));
  CHECK_FALSE(contains(tri, vec({0.45, 0.5})));
  // A cube's polytope predicate matches the box predicate.
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> u(0, 1);
  ConvexPolytope<double> cube{MatrixXd(3, 8)};
  const AxisBox<double> box{vec({0.3, 0.2, 0.4}), vec({0.6, 0.5, 0.55})};
  for (int v = 0; v < 8; ++v)
    for (int i = 0; i < 3; ++i) cube.vertices(i, v) = (v >> i & 1) ? box.hi(i) : box.lo(i);
  for (int trial = 0; trial < 300; ++trial) {
    const int k = trial % 3;
    KFlat<double> f{VectorXd::NullaryExpr(3, [&] { return u(rng); }), oracle::random_orthonormal(3, k, rng)};
    CHECK(flat_intersects_polytope(f, cube) == flat_intersects_box(f, box));
  }
}

TEST_CASE("ball and ellipsoid volumes") {
  CHECK(unit_ball_volume(0) == doctest::Approx(1));
  CHECK(unit_ball_volume(1) == doctest::Approx(2));
  CHECK(unit_ball_volume(2) == doctest::Approx(std::numbers::pi));
  CHECK(unit_ball_volume(3) == doctest::Approx(4 * std::numbers::pi / 3));
  CHECK_THROWS_AS(unit_ball_volume(-1), GeometryError);
  Ellipsoid<double> e{vec({0.5, 0.5}), vec({1 / (0.5 * 0.5), 1 / (0.1 * 0.1)}).asDiagonal()};
  CHECK(ellipsoid_volume(e) == doctest::Approx(std::numbers::pi * 0.05));
}

TEST_CASE("ellipsoid volume matches a Monte Carlo estimate") {
  std::mt19937_64 rng(31);
  for (int d = 2; d <= 4; ++d) {
    Ellipsoid<double> e{VectorXd::Constant(d, 0.5), oracle::random_spd(d, 0.1, 0.3, rng)};
    const double mc = mc_volume_in_cube(e, 400000, 7);
    CHECK(mc == doctest::Approx(ellipsoid_volume(e)).epsilon(0.05));
  }
}

TEST_CASE("slice volume examples") {
  const auto ball = Ellipsoid<double>::ball(vec({0, 0}), 1.0);
  CHECK(slice_volume(ball, 0, 0.0) == doctest::Approx(2));
  CHECK(slice_volume(ball, 0, 1.5) == doctest::Approx(0));
  const auto b3 = Ellipsoid<double>::ball(vec({0, 0, 0}), 1.0);
  CHECK(slice_volume(b3, 2, 0.5) == doctest::Approx(0.75 * std::numbers::pi));
  CHECK_THROWS_AS(slice_volume(b3, 3, 0.0), GeometryError);
}

TEST_CASE("slice volume matches numerical integration of the total volume") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const int d = 2 + trial % 3;
    Ellipsoid<double> e{VectorXd::Zero(d), oracle::random_spd(d, 0.2, 1.0, rng)};
    const double h = std::sqrt(e.shape.inverse()(0, 0));
    const int steps = 20000;
    double sum = 0;
    for (int s = 0; s < steps; ++s) sum += slice_volume(e, 0, -h + (s + 0.5) * 2 * h / steps);
    CHECK(sum * 2 * h / steps == doctest::Approx(ellipsoid_volume(e)).epsilon(1e-4));
  }
}

TEST_CASE("slice volume root is midpoint concave in dimension 10") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    Ellipsoid<double> e{VectorXd::NullaryExpr(10, [&] { return u(rng); }), oracle::random_spd(10, 0.1, 1.0, rng)};
    const int axis = trial % 10;
    const double h = std::sqrt(e.shape.inverse()(axis, axis));
    std::uniform_real_distribution<double> a(e.center(axis) - h, e.center(axis) + h);
    for (int s = 0; s < 20; ++s) {
      const double x = a(rng), y = a(rng);
      auto g = [&](double t) { return std::pow(slice_volume(e, axis, t), 1.0 / 9); };
      CHECK(g((x + y) / 2) >= (g(x) + g(y)) / 2 - 1e-7);
    }
  }
}

TEST_CASE("MVEE of the square is the circumscribed disk") {
  MatrixXd p(2, 4);
  p << 0, 1, 0, 1, 0, 0, 1, 1;
  const auto e = mvee(p);
  CHECK((e.center - vec({0.5, 0.5})).norm() < 1e-6);
  CHECK((e.shape - 2 * MatrixXd::Identity(2, 2)).norm() < 1e-5);
}

TEST_CASE("MVEE of a regular simplex is its circumball") {
  MatrixXd p(2, 3);
  for (int j = 0; j < 3; ++j) {
    const double a = 2 * std::numbers::pi * j / 3;
    p(0, j) = std::cos(a);
    p(1, j) = std::sin(a);
  }
  const auto e = mvee(p);
  CHECK(e.center.norm() < 1e-6);
  CHECK((e.shape - MatrixXd::Identity(2, 2)).norm() < 1e-5);
}

TEST_CASE("MVEE of points on a sphere recovers the sphere") {
  std::mt19937_64 rng(43);
  std::normal_distribution<double> n;
  MatrixXd p(3, 60);
  for (int j = 0; j < 60; ++j) p.col(j) = VectorXd::NullaryExpr(3, [&] { return n(rng); }).normalized();
  const auto e = mvee(p);
  CHECK(e.center.norm() < 1e-3);
  CHECK((e.shape - MatrixXd::Identity(3, 3)).norm() < 0.1);
}

TEST_CASE("MVEE contains its points and shrinks by d into their hull") {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> n;
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 2 + trial % 3;
    MatrixXd p(d, 12);
    for (int j = 0; j < 12; ++j) p.col(j) = VectorXd::NullaryExpr(d, [&] { return n(rng); });
    const auto e = mvee(p);
    CHECK_NOTHROW(check_ellipsoid(e));
    for (int j = 0; j < 12; ++j) CHECK(oracle::quad(p.col(j), e.center, e.shape) <= 1 + 1e-9);
    // Centre plus the shrunken ellipsoid's extreme points along random directions lie in the hull.
    const double shrink = 1.0 / (d * (1 + 10 * 1e-7));
    Eigen::LLT<MatrixXd> llt(e.shape);
    const MatrixXd l_inv_t = llt.matrixU().solve(MatrixXd::Identity(d, d));
    for (int s = 0; s < 10; ++s) {
      const VectorXd dir = VectorXd::NullaryExpr(d, [&] { return n(rng); }).normalized();
      CHECK(in_convex_hull(p, VectorXd(e.center + shrink * l_inv_t * dir)));
    }
  }
}

TEST_CASE("MVEE rejects degenerate input") {
  MatrixXd p(2, 3);
  p << 0, 1, 2, 0, 1, 2;
  CHECK_THROWS_AS(mvee(p), GeometryError);
  CHECK_THROWS_AS(mvee(MatrixXd(2, 2)), GeometryError);
}

TEST_CASE("Monte Carlo volume inside the cube") {
  CHECK(mc_volume_in_cube(AxisBox<double>::unit(3), 1000, 1) == 1.0);
  const auto ball = Ellipsoid<double>::ball(vec({0, 0}), 1.0);
  CHECK(std::abs(mc_volume_in_cube(ball, 1000000, 3) - std::numbers::pi / 4) < 0.002);
  CHECK(mc_volume_in_cube(Ellipsoid<double>::ball(vec({3, 3}), 1.0), 1000, 1) == 0.0);
  CHECK(mc_volume_in_cube(ball, 5000, 9) == mc_volume_in_cube(ball, 5000, 9));
  CHECK_THROWS_AS(mc_volume_in_cube(ball, 0, 1), GeometryError);
}

TEST_CASE("check_ellipsoid rejects bad shapes") {
  CHECK_THROWS_AS(check_ellipsoid(Ellipsoid<double>{vec({0, 0}), MatrixXd::Identity(3, 3)}), GeometryError);
  MatrixXd asym(2, 2);
  asym << 1, 0.5, 0, 1;
  CHECK_THROWS_AS(check_ellipsoid(Ellipsoid<double>{vec({0, 0}), asym}), GeometryError);
  CHECK_THROWS_AS(check_ellipsoid(Ellipsoid<double>{vec({0, 0}), -MatrixXd::Identity(2, 2)}), GeometryError);
  MatrixXd nan = MatrixXd::Identity(2, 2);
  nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(check_ellipsoid(Ellipsoid<double>{vec({0, 0}), nan}), GeometryError);
  CHECK_NOTHROW(check_ellipsoid(Ellipsoid<double>::ball(vec({0, 0}), 0.3)));
}
