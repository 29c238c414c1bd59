#include <doctest.h>

#include "flatnet/constructions.hpp"
#include "flatnet/geom_core.hpp"
#include "flatnet/verify.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

using namespace flatnet;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

using PointSet = std::set<std::vector<double>>;

PointSet points_of(const Net& net) {
  PointSet out;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto r = net.record(i);
    out.emplace(r.begin(), r.end());
  }
  return out;
}

// Literal union of the interior vertices of the tilings by
// [0, 2^-(M-j)] x [0, 2^-j], j = 1..M-1.
PointSet ellipse_oracle(double eps) {
  const int M = 3 + static_cast<int>(std::ceil(std::log2(1.0 / eps) - 1e-12));
  PointSet out;
  for (int j = 1; j <= M - 1; ++j)
    for (long a = 1; a < (1L << (M - j)); ++a)
      for (long b = 1; b < (1L << j); ++b)
        out.insert({static_cast<double>(a) / static_cast<double>(1L << (M - j)),
                    static_cast<double>(b) / static_cast<double>(1L << j)});
  return out;
}

// Set-based recursion: every axis, every level i, every j <= M_i, all
// hyperplanes m / 2^j carry the lifted (d-1)-dimensional net at eps / Delta(i+2).
PointSet ellipsoid_oracle(int d, double eps) {
  if (d == 2) return ellipse_oracle(eps);
  const double lg = std::log2(1.0 / eps);
  const int tau = static_cast<int>(std::ceil(lg / d - 1e-12));
  PointSet out;
  for (int i = 0; i <= tau; ++i) {
    const double lg_inv_delta = lg / d - i;
    const int Mi = static_cast<int>(std::ceil(lg_inv_delta - 1e-12));
    const double sub_eps = std::exp2(-(lg - (lg / d - (i + 2))));
    const PointSet sub = ellipsoid_oracle(d - 1, sub_eps);
    for (int axis = 0; axis < d; ++axis)
      for (int j = 0; j <= Mi; ++j)
        for (long m = 0; m <= (1L << j); ++m) {
          const double c = static_cast<double>(m) / static_cast<double>(1L << j);
          for (const auto& p : sub) {
            std::vector<double> q(p.begin(), p.end());
            q.insert(q.begin() + axis, c);
            out.insert(q);
          }
        }
  }
  return out;
}

bool meets_unit_cube(const FlatView& f) {
  return flat_intersects_box(f, AxisBox<double>::unit(f.dim()));
}

}  // namespace

TEST_CASE("schedule examples") {
  const auto s = Schedule::ellipsoid(3, 0x1p-6);
  CHECK(s.tau == 2);
  CHECK(s.delta(0) == doctest::Approx(0.25));
  CHECK(s.M_levels[0] == 2);
  CHECK(s.delta(2) == doctest::Approx(1.0));
  CHECK(Schedule::kflat(3, 0x1p-12).tau == 17);
  CHECK(Schedule::kflat(3, 0x1p-12).eps_levels[1] == doctest::Approx(2 * 0x1p-12 / 12));
  CHECK(Schedule::ellipse2d(0.5).M == 4);
  CHECK(Schedule::ellipse2d(0x1p-6).M == 9);
  CHECK(ceil_snap(3.0000000001) == 3);
  CHECK(ceil_snap(3.01) == 4);
}

TEST_CASE("construction ids round trip") {
  for (auto c : {Construction::GridHyperplane, Construction::RecursiveKFlat, Construction::Ellipse2D,
                 Construction::EllipsoidDD, Construction::WeakNet, Construction::VdC, Construction::HaltonHammersley,
                 Construction::AffineBody})
    CHECK(parse_construction(construction_id(c)) == c);
  CHECK_FALSE(parse_construction("nope").has_value());
}

TEST_CASE("grid net examples") {
  const Net g = grid_hyperplane_net(2, 1.0 / 16);
  CHECK(g.k() == 1);
  CHECK(g.size() == 6);
  std::set<double> xs;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto f = g.flat(i);
    xs.insert(f.base.sum());
  }
  CHECK(xs == std::set<double>{0.25, 0.5, 0.75});
  CHECK(grid_hyperplane_net(2, 1.0).empty());
  CHECK(grid_hyperplane_net(3, 1.0 / 8).size() == 3);
  CHECK_THROWS_AS(grid_hyperplane_net(0, 0.5), ConstructionError);
  CHECK_THROWS_AS(grid_hyperplane_net(2, 0.0), ConstructionError);
}

TEST_CASE("grid net size bound") {
  for (int d = 2; d <= 3; ++d)
    for (int L = 2; L <= 16; ++L) {
      const double eps = std::ldexp(1.0, -L);
      const auto n = grid_hyperplane_net(d, eps).size();
      CHECK(n <= static_cast<std::size_t>(d * std::ceil(std::pow(eps, -1.0 / d) - 1e-9)));
    }
}

TEST_CASE("recursive net reduces to the grid for hyperplanes") {
  const Net a = recursive_kflat_net(2, 1, 0x1p-8);
  const Net b = grid_hyperplane_net(2, 0x1p-8);
  CHECK(a.construction() == Construction::RecursiveKFlat);
  CHECK(std::vector<double>(a.data().begin(), a.data().end()) == std::vector<double>(b.data().begin(), b.data().end()));
  CHECK_FALSE(a.tau.has_value());
}

TEST_CASE("recursive net header and errors") {
  CHECK(recursive_kflat_net(3, 1, 0x1p-12).tau == 17);
  CHECK_THROWS_AS(recursive_kflat_net(3, 3, 0.1), ConstructionError);
  CHECK_THROWS_AS(recursive_kflat_net(3, 0, 0.1), ConstructionError);
  CHECK_THROWS_AS(recursive_kflat_net(3, 1, 1.0), ConstructionError);
  CHECK_THROWS_AS(recursive_kflat_net(3, 1, 0x1p-41), ConstructionError);
  CHECK_THROWS_AS(build_net(Construction::AffineBody, 2, 0, 0.1), ConstructionError);
  CHECK_THROWS_AS(build_net(Construction::GridHyperplane, 3, 1, 0.1), ConstructionError);
  CHECK_THROWS_AS(build_net(Construction::VdC, 3, 0, 0.1), ConstructionError);
  CHECK_THROWS_AS(build_net(Construction::Ellipse2D, 2, 1, 0.1), ConstructionError);
}

TEST_CASE("constructions are deterministic") {
  CHECK(recursive_kflat_net(3, 1, 0x1p-8) == recursive_kflat_net(3, 1, 0x1p-8));
  CHECK(recursive_kflat_net(4, 2, 0x1p-8) == recursive_kflat_net(4, 2, 0x1p-8));
  CHECK(ellipsoid_net_dd(3, 0x1p-6) == ellipsoid_net_dd(3, 0x1p-6));
  CHECK(hh_net(3, 0.25) == hh_net(3, 0.25));
}

TEST_CASE("net sizes grow as eps shrinks") {
  for (auto c : {Construction::GridHyperplane, Construction::RecursiveKFlat, Construction::Ellipse2D,
                 Construction::VdC}) {
    const int d = (c == Construction::RecursiveKFlat) ? 3 : 2;
    const int k = (c == Construction::Ellipse2D || c == Construction::VdC) ? 0 : 1;
    std::size_t prev = 0;
    for (int L = 1; L <= 10; ++L) {
      const auto n = build_net(c, d, k, std::ldexp(1.0, -L) * 0.9).size();
      CHECK(n >= prev);
      prev = n;
    }
  }
  std::size_t prev = 0;
  for (int L = 6; L <= 9; ++L) {
    const auto n = ellipsoid_net_dd(3, std::ldexp(1.0, -L)).size();
    CHECK(n >= prev);
    prev = n;
  }
}

TEST_CASE("every flat meets the unit cube") {
  for (const Net& net : {recursive_kflat_net(3, 1, 0x1p-8), recursive_kflat_net(4, 2, 0x1p-6),
                         recursive_kflat_net(4, 1, 0x1p-4), grid_hyperplane_net(3, 0x1p-9), ellipse_net_2d(0x1p-5),
                         ellipsoid_net_dd(3, 0x1p-6), hh_net(3, 0.25)}) {
    CHECK(net.size() > 0);
    for (std::size_t i = 0; i < net.size(); ++i) {
      CHECK_NOTHROW(check_flat(net.flat(i)));
      CHECK(meets_unit_cube(net.flat(i)));
    }
  }
}

TEST_CASE("recursive net flats are axis parallel lines through the open cube") {
  const Net net = recursive_kflat_net(3, 1, 0x1p-8);
  for (std::size_t i = 0; i < net.size(); ++i) {
    const auto f = net.flat(i);
    int ones = 0;
    for (int a = 0; a < 3; ++a) ones += (std::abs(f.basis(a, 0)) == 1.0);
    CHECK(ones == 1);
    for (int a = 0; a < 3; ++a) {
      if (f.basis(a, 0) != 0) continue;
      CHECK(f.base(a) > 0);
      CHECK(f.base(a) < 1);
    }
  }
}

TEST_CASE("ellipse net equals the union of grid vertices") {
  for (int L = 1; L <= 8; ++L) {
    const double eps = std::ldexp(1.0, -L);
    const Net net = ellipse_net_2d(eps);
    CHECK(points_of(net) == ellipse_oracle(eps));
    CHECK(points_of(net).size() == net.size());
  }
  CHECK(ellipse_net_2d(0.5).size() == 17);
  CHECK(points_of(ellipse_net_2d(0.3)) == points_of(ellipse_net_2d(0.25)));
}

TEST_CASE("ellipse net size formula") {
  for (int L = 1; L <= 12; ++L) {
    const int M = 3 + L;
    const Net net = ellipse_net_2d(std::ldexp(1.0, -L));
    CHECK(net.size() == static_cast<std::size_t>((M - 2) * (1L << (M - 1)) + 1));
    CHECK(net.levels == M);
  }
}

TEST_CASE("ellipsoid net matches the set-based recursion") {
  const Net net = ellipsoid_net_dd(3, 0x1p-6);
  const PointSet expect = ellipsoid_oracle(3, 0x1p-6);
  CHECK(net.size() == expect.size());
  CHECK(points_of(net) == expect);
  CHECK(net.size() == 72261);
  CHECK(net.tau == 2);
  CHECK(points_of(ellipsoid_net_dd(3, 0x1p-7)) == ellipsoid_oracle(3, 0x1p-7));
  CHECK(ellipsoid_net_dd(2, 0x1p-5).construction() == Construction::EllipsoidDD);
  CHECK(points_of(ellipsoid_net_dd(2, 0x1p-5)) == ellipse_oracle(0x1p-5));
}

TEST_CASE("weak net delegates with eps / d^d") {
  const Net a = weak_eps_net(2, 0.4);
  CHECK(a.construction() == Construction::WeakNet);
  CHECK(a.eps() == 0.4);
  CHECK(points_of(a) == points_of(ellipsoid_net_dd(2, 0.1)));
  const Net b = weak_eps_net(3, 27 * 0x1p-10);
  CHECK(points_of(b) == points_of(ellipsoid_net_dd(3, 0x1p-10)));
}

TEST_CASE("box net sizes") {
  CHECK(vdc_net(0.25).size() == 16);
  CHECK(box_net(2, 0.25).size() == 16);
  CHECK(hh_net(3, 0.5).size() == 48);
  CHECK(box_net(3, 0.5).size() == 48);
  CHECK(hh_net(4, 0.5).size() == static_cast<std::size_t>(8 * 30 / 0.5));
  CHECK_THROWS_AS(hh_net(12, 1e-3), ConstructionError);
}

TEST_CASE("affine delta") {
  CHECK(affine_delta(2) == doctest::Approx(std::numbers::pi / 16));
  CHECK(affine_delta(3) == doctest::Approx(4 * std::numbers::pi / 3 / 216));
}

TEST_CASE("affine net of the unit square") {
  ConvexPolytope<double> sq{MatrixXd(2, 4)};
  sq.vertices << 0, 1, 0, 1, 0, 0, 1, 1;
  const double eps = 0.05;
  const Net net = affine_net_for_body(sq, 1, eps);
  CHECK(net.construction() == Construction::AffineBody);
  const Net direct = grid_hyperplane_net(2, eps * affine_delta(2) / std::pow(1 + 1e-6, 2));
  CHECK(net.size() == direct.size());
  const StabIndex idx(net);
  for (std::uint64_t s = 0; s < 300; ++s) {
    CHECK(idx.query(random_heavy_ellipsoid(2, eps, s)).has_value());
    CHECK(idx.query(random_heavy_box(2, eps, s)).has_value());
  }
}

TEST_CASE("affine net of a disk stabs heavy ellipses inside it") {
  ConvexPolytope<double> disk{MatrixXd(2, 64)};
  for (int j = 0; j < 64; ++j) {
    const double a = 2 * std::numbers::pi * j / 64;
    disk.vertices(0, j) = 0.5 + 0.5 * std::cos(a);
    disk.vertices(1, j) = 0.5 + 0.5 * std::sin(a);
  }
  const double eps = 0.1;
  const double body_area = ellipsoid_volume(mvee(disk.vertices));
  for (int k = 0; k <= 1; ++k) {
    const Net net = affine_net_for_body(disk, k, eps);
    const StabIndex idx(net);
    int tried = 0;
    for (std::uint64_t s = 0; tried < 200 && s < 100000; ++s) {
      // Heavy relative to the body: volume >= eps * vol(body), inside the inscribed disk.
      const auto e = random_heavy_ellipsoid(2, eps * body_area, s);
      const double semi_major = 1 / std::sqrt(Eigen::SelfAdjointEigenSolver<MatrixXd>(e.shape).eigenvalues().minCoeff());
      if ((e.center - VectorXd::Constant(2, 0.5)).norm() + semi_major > 0.5 * std::cos(std::numbers::pi / 64)) continue;
      ++tried;
      CHECK(idx.query(e).has_value());
    }
    CHECK(tried == 200);
  }
  ConvexPolytope<double> flat{MatrixXd(2, 3)};
  flat.vertices << 0, 0.5, 1, 0, 0.5, 1;
  CHECK_THROWS(affine_net_for_body(flat, 1, 0.1));
}
