#pragma once

#include "flatnet/net.hpp"
#include "flatnet/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace flatnet {

using Body = std::variant<Ellipsoid<double>, AxisBox<double>, ConvexPolytope<double>>;

enum class BodyClass { Ellipsoid, Box, Polytope };

std::string_view body_class_id(BodyClass c);
std::optional<BodyClass> parse_body_class(std::string_view id);

namespace detail {

// Flats sharing one direction space, projected onto its orthogonal complement.
struct StabGroup {
  MatrixX<double> complement;  // d x m, orthonormal
  std::vector<int> axes;       // complement axes when it is a coordinate subspace
  int m = 0;                   // d - k
  // Projected coordinates, sorted lexicographically. Either owned (m values
  // then the flat index per row) or a view into a sorted point net.
  std::vector<double> owned;
  const double* rows = nullptr;
  std::size_t stride = 0;
  std::size_t count = 0;

  std::size_t id(std::size_t r) const { return owned.empty() ? r : static_cast<std::size_t>(rows[r * stride + m]); }
  double at(std::size_t r, int c) const { return rows[r * stride + c]; }
  bool axis_aligned() const { return !axes.empty(); }
};

}  // namespace detail

/// First intersecting flat in net order (linear scan).
std::optional<std::size_t> stab_check(const Net& net, const Body& body);

/// Stabbing queries against a fixed net. Flats sharing a direction space are
/// projected onto its orthogonal complement and sorted; a query projects the
/// body the same way and sweeps the sorted coordinates. Returns some
/// intersecting flat, not necessarily the first.
class StabIndex {
 public:
  explicit StabIndex(const Net& net);

  std::optional<std::size_t> query(const Body& body) const;
  std::optional<std::size_t> query(const Ellipsoid<double>& e) const;
  std::optional<std::size_t> query(const AxisBox<double>& b) const;
  std::optional<std::size_t> query(const ConvexPolytope<double>& p) const;
  /// Flat meeting the closed ball of radius r around c.
  std::optional<std::size_t> query_ball(const VectorX<double>& c, double r) const;

  const Net& net() const { return *net_; }

 private:
  const Net* net_;
  std::vector<detail::StabGroup> groups_;
};

/// Random ellipsoid inside [0,1]^d with volume in [eps, 2 eps) (capped at the
/// inscribed ball), random rotation and random aspect.
Ellipsoid<double> random_heavy_ellipsoid(int d, double eps, std::uint64_t seed);

/// Random axis-aligned box inside [0,1]^d with volume in [eps, 2 eps) (capped at 1).
AxisBox<double> random_heavy_box(int d, double eps, std::uint64_t seed);

/// Hull of `points` random points from a random ellipsoid, scaled so the hull
/// volume is at least min(eps (1+u), cap), placed inside [0,1]^d. In the plane
/// the hull area is exact; above it the MVEE gives vol(hull) >= vol(E) / d^d.
ConvexPolytope<double> random_heavy_polytope(int d, double eps, std::uint64_t seed, int points = 20);

/// Largest volume each generator can reach inside the unit cube.
double max_heavy_volume(BodyClass c, int d);

Body random_heavy_body(BodyClass c, int d, double eps, std::uint64_t seed);

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial);

struct StabFailure {
  std::uint64_t trial = 0;
  std::uint64_t seed = 0;  // generator seed that reproduces `body`
  double target_volume = 0;
  Body body;
};

struct StabReport {
  std::size_t total = 0;
  std::size_t stabbed = 0;
  std::vector<std::pair<std::uint64_t, std::size_t>> witnesses;  // (trial, flat index)
  std::vector<StabFailure> failures;
};

struct TrialOptions {
  BodyClass body = BodyClass::Ellipsoid;
  std::size_t trials = 1000;
  std::uint64_t seed = 1;
  double eps = 0;  // minimum adversary volume
  /// Worker threads; 0 reads FLATNET_THREADS, else uses the hardware count.
  int threads = 0;
};

/// Even trials draw volumes in [eps, 2 eps), odd trials log-uniformly up to
/// the class maximum. Deterministic for a given seed regardless of threads.
StabReport run_stab_trials(const StabIndex& index, const TrialOptions& opts);

struct ProbeResult {
  bool found = false;
  std::optional<VectorX<double>> center;
  double radius = 0;
  double ball_volume = 0;
};

/// Default per-axis resolution: ceil(4 / r), reduced so resolution^d <= 1e7.
std::int64_t default_probe_resolution(int d, double eps);

/// Looks for a ball of volume eps inside [0,1]^d missed by every flat. The
/// cube centre is tried first, then centres (m + 1/2) / resolution per axis.
/// resolution == 0 uses default_probe_resolution.
ProbeResult adversarial_ball_probe(const StabIndex& index, double eps, std::int64_t resolution = 0);
ProbeResult adversarial_ball_probe(const Net& net, double eps, std::int64_t resolution = 0);

/// Largest axis-aligned box in [0,1]^2 whose open interior holds none of the
/// points (2 x n, one per column).
AxisBox<double> max_empty_rect_2d(const MatrixX<double>& points);

struct ScalingRow {
  double eps = 0;
  std::size_t size = 0;
  std::optional<double> slope_so_far;
  double millis = 0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  double slope = 0;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

ScalingReport scaling_report(Construction c, int d, int k, const std::vector<double>& eps_list);

}  // namespace flatnet
