#include "flatnet/verify.hpp"

#include "flatnet/constructions.hpp"
#include "flatnet/mvee.hpp"
#include "flatnet/predicates.hpp"
#include "flatnet/volume.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>

namespace flatnet {

std::string_view body_class_id(BodyClass c) {
  switch (c) {
    case BodyClass::Ellipsoid: return "ellipsoid";
    case BodyClass::Box: return "box";
    case BodyClass::Polytope: return "polytope";
  }
  return "unknown";
}

std::optional<BodyClass> parse_body_class(std::string_view id) {
  if (id == "ellipsoid") return BodyClass::Ellipsoid;
  if (id == "box") return BodyClass::Box;
  if (id == "polytope") return BodyClass::Polytope;
  return std::nullopt;
}

namespace {

bool intersects(const FlatView& f, const Body& body) {
  return std::visit(
      [&](const auto& b) -> bool {
        using B = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<B, Ellipsoid<double>>)
          return flat_intersects_ellipsoid(f, b);
        else if constexpr (std::is_same_v<B, AxisBox<double>>)
          return flat_intersects_box(f, b);
        else
          return flat_intersects_polytope(f, b);
      },
      body);
}

Eigen::Index body_dim(const Body& body) {
  return std::visit([](const auto& b) { return b.dim(); }, body);
}

// ---- sorted-row sweeps ------------------------------------------------------

using detail::StabGroup;

// First row in [lo, hi) whose coordinate c is >= v (rows sorted on c there).
std::size_t lower_row(const StabGroup& g, int c, std::size_t lo, std::size_t hi, double v) {
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (g.at(mid, c) < v)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

std::size_t upper_row(const StabGroup& g, int c, std::size_t lo, std::size_t hi, double v) {
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (g.at(mid, c) <= v)
      lo = mid + 1;
    else
      hi = mid;
  }
  return lo;
}

// A projected ellipsoid {y : (y-c)^T P (y-c) <= rho} prepared for sweeping:
// fixing y_l = v leaves an ellipsoid in y_{l+1..} with centre shifted by
// -g_l (v - c_l) and budget reduced by s_l (v - c_l)^2.
struct Conditioned {
  int m = 0;
  std::vector<double> inv00;  // (P_l^{-1})_{00}: squared half-width per unit budget
  std::vector<double> s;      // 1 / inv00
  std::vector<VectorX<double>> g;
  std::vector<VectorX<double>> centers;

  Conditioned(const VectorX<double>& c, const MatrixX<double>& p) : m(static_cast<int>(c.size())) {
    inv00.resize(m);
    s.resize(m);
    g.resize(m);
    centers.assign(m, c);
    for (int l = 0; l < m; ++l) {
      const int n = m - l - 1;
      const MatrixX<double> pl = p.bottomRightCorner(m - l, m - l);
      if (n == 0) {
        s[l] = pl(0, 0);
      } else {
        const VectorX<double> b = pl.col(0).tail(n);
        g[l] = pl.bottomRightCorner(n, n).ldlt().solve(b);
        s[l] = pl(0, 0) - b.dot(g[l]);
      }
      inv00[l] = 1.0 / s[l];
    }
  }

};

// Widening that keeps the sweep a superset of the exact predicate.
constexpr double kSweepBudget = 1.0 + 1e-8;

template <typename Confirm>
std::optional<std::size_t> sweep_ellipsoid(const StabGroup& g, Conditioned& q, int l, std::size_t lo, std::size_t hi,
                                           double rho, Confirm& confirm) {
  const double c = q.centers[l](l);
  const double w = std::sqrt(std::max(rho, 0.0) * q.inv00[l]);
  const double slack = 1e-12 * (1.0 + std::abs(c) + w);
  const double top = c + w + slack;
  std::size_t r = lower_row(g, l, lo, hi, c - w - slack);
  while (r < hi && g.at(r, l) <= top) {
    const double v = g.at(r, l);
    const std::size_t e = upper_row(g, l, r, hi, v);
    if (l == q.m - 1) {
      for (std::size_t t = r; t < e; ++t)
        if (confirm(g.id(t))) return g.id(t);
    } else {
      const double delta = v - c;
      const double rest = rho - delta * delta * q.s[l];
      if (rest >= -1e-12) {
        const int n = q.m - l - 1;
        q.centers[l + 1].tail(n) = q.centers[l].tail(n) - q.g[l] * delta;
        if (auto hit = sweep_ellipsoid(g, q, l + 1, r, e, std::max(rest, 0.0), confirm)) return hit;
      }
    }
    r = e;
  }
  return std::nullopt;
}

// Rows within Euclidean distance sqrt(rho) of c; `rho` is the remaining
// squared-radius budget after the coordinates before l.
template <typename Confirm>
std::optional<std::size_t> sweep_ball(const StabGroup& g, const double* c, int l, std::size_t lo, std::size_t hi,
                                      double rho, Confirm& confirm) {
  const double w = std::sqrt(std::max(rho, 0.0));
  const double slack = 1e-12 * (1.0 + std::abs(c[l]) + w);
  const double top = c[l] + w + slack;
  std::size_t r = lower_row(g, l, lo, hi, c[l] - w - slack);
  while (r < hi && g.at(r, l) <= top) {
    const double v = g.at(r, l);
    const std::size_t e = upper_row(g, l, r, hi, v);
    const double rest = rho - (v - c[l]) * (v - c[l]);
    if (l == g.m - 1) {
      for (std::size_t t = r; t < e; ++t)
        if (confirm(g.id(t), rest)) return g.id(t);
    } else if (rest >= -1e-12) {
      if (auto hit = sweep_ball(g, c, l + 1, r, e, std::max(rest, 0.0), confirm)) return hit;
    }
    r = e;
  }
  return std::nullopt;
}

template <typename Confirm>
std::optional<std::size_t> sweep_box(const StabGroup& g, const VectorX<double>& lo_b, const VectorX<double>& hi_b,
                                     int l, std::size_t lo, std::size_t hi, Confirm& confirm) {
  const double slack = kGeomTol;
  std::size_t r = lower_row(g, l, lo, hi, lo_b(l) - slack);
  const double top = hi_b(l) + slack;
  if (l == g.m - 1) {
    for (; r < hi && g.at(r, l) <= top; ++r)
      if (confirm(g.id(r))) return g.id(r);
    return std::nullopt;
  }
  while (r < hi && g.at(r, l) <= top) {
    const std::size_t e = upper_row(g, l, r, hi, g.at(r, l));
    if (auto hit = sweep_box(g, lo_b, hi_b, l + 1, r, e, confirm)) return hit;
    r = e;
  }
  return std::nullopt;
}

template <typename Confirm>
std::optional<std::size_t> scan_group(const StabGroup& g, Confirm& confirm) {
  for (std::size_t r = 0; r < g.count; ++r)
    if (confirm(g.id(r))) return g.id(r);
  return std::nullopt;
}

VectorX<double> project_point(const StabGroup& g, const VectorX<double>& x) {
  if (g.axis_aligned()) {
    VectorX<double> out(g.m);
    for (int i = 0; i < g.m; ++i) out(i) = x(g.axes[i]);
    return out;
  }
  return g.complement.transpose() * x;
}

bool is_sorted_rows(std::span<const double> data, std::size_t stride) {
  for (std::size_t i = stride; i < data.size(); i += stride)
    if (std::lexicographical_compare(data.begin() + i, data.begin() + i + stride, data.begin() + i - stride,
                                     data.begin() + i))
      return false;
  return true;
}

}  // namespace

std::optional<std::size_t> stab_check(const Net& net, const Body& body) {
  if (body_dim(body) != net.dim()) throw GeometryError("stab_check: dimension mismatch");
  for (std::size_t i = 0; i < net.size(); ++i)
    if (intersects(net.flat(i), body)) return i;
  return std::nullopt;
}

// ---- StabIndex ----------------------------------------------------------------

StabIndex::StabIndex(const Net& net) : net_(&net) {
  const int d = net.dim();
  const int k = net.k();
  if (net.empty()) return;

  if (k == 0) {
    StabGroup g;
    g.m = d;
    g.complement = MatrixX<double>::Identity(d, d);
    for (int i = 0; i < d; ++i) g.axes.push_back(i);
    if (is_sorted_rows(net.data(), d)) {
      g.rows = net.data().data();
      g.stride = d;
    } else {
      g.owned.reserve(net.size() * (d + 1));
      for (std::size_t i = 0; i < net.size(); ++i) {
        const auto rec = net.record(i);
        g.owned.insert(g.owned.end(), rec.begin(), rec.end());
        g.owned.push_back(static_cast<double>(i));
      }
      sort_unique_rows(g.owned, d + 1);
      g.stride = d + 1;
    }
    g.count = net.size();
    groups_.push_back(std::move(g));
  } else {
    std::map<std::vector<double>, std::size_t> keys;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::vector<double>> bases;
    std::size_t last = 0;
    for (std::size_t i = 0; i < net.size(); ++i) {
      const auto dirs = net.record(i).subspan(d);
      if (!members.empty() && std::equal(dirs.begin(), dirs.end(), bases[last].begin())) {
        members[last].push_back(i);
        continue;
      }
      std::vector<double> key(dirs.begin(), dirs.end());
      auto [it, inserted] = keys.try_emplace(key, members.size());
      if (inserted) {
        members.emplace_back();
        bases.push_back(std::move(key));
      }
      last = it->second;
      members[last].push_back(i);
    }

    for (std::size_t gi = 0; gi < members.size(); ++gi) {
      StabGroup g;
      g.m = d - k;
      const Eigen::Map<const MatrixX<double>> basis(bases[gi].data(), d, k);
      std::vector<bool> spanned(d, false);
      bool axis = true;
      for (int c = 0; c < k && axis; ++c) {
        int hits = 0;
        for (int i = 0; i < d; ++i) {
          const double v = basis(i, c);
          if (v == 0.0) continue;
          if (std::abs(v) != 1.0 || spanned[i]) axis = false;
          spanned[i] = true;
          ++hits;
        }
        if (hits != 1) axis = false;
      }
      if (axis) {
        g.complement = MatrixX<double>::Zero(d, g.m);
        for (int i = 0; i < d; ++i)
          if (!spanned[i]) {
            g.complement(i, static_cast<Eigen::Index>(g.axes.size())) = 1.0;
            g.axes.push_back(i);
          }
      } else {
        const Eigen::HouseholderQR<MatrixX<double>> qr(basis);
        const MatrixX<double> q = qr.householderQ() * MatrixX<double>::Identity(d, d);
        g.complement = q.rightCols(g.m);
      }

      g.stride = g.m + 1;
      g.owned.reserve(members[gi].size() * g.stride);
      for (std::size_t i : members[gi]) {
        const VectorX<double> p = project_point(g, net.flat(i).base);
        g.owned.insert(g.owned.end(), p.data(), p.data() + g.m);
        g.owned.push_back(static_cast<double>(i));
      }
      std::vector<std::size_t>().swap(members[gi]);
      sort_unique_rows(g.owned, g.stride);
      g.count = g.owned.size() / g.stride;
      groups_.push_back(std::move(g));
    }
  }
  for (auto& g : groups_)
    if (!g.owned.empty()) g.rows = g.owned.data();
}

std::optional<std::size_t> StabIndex::query(const Body& body) const {
  return std::visit([&](const auto& b) { return query(b); }, body);
}

std::optional<std::size_t> StabIndex::query(const Ellipsoid<double>& e) const {
  if (e.dim() != net_->dim()) throw GeometryError("stab query: dimension mismatch");
  if (groups_.empty()) return std::nullopt;
  auto confirm = [&](std::size_t i) { return flat_intersects_ellipsoid(net_->flat(i), e); };
  const int d = net_->dim();
  const MatrixX<double> sigma = e.shape.ldlt().solve(MatrixX<double>::Identity(d, d));
  for (const auto& g : groups_) {
    MatrixX<double> p;
    if (g.m == d)
      p = e.shape;
    else if (g.axis_aligned())
      p = MatrixX<double>(sigma(g.axes, g.axes)).ldlt().solve(MatrixX<double>::Identity(g.m, g.m));
    else
      p = MatrixX<double>(g.complement.transpose() * sigma * g.complement).ldlt().solve(
          MatrixX<double>::Identity(g.m, g.m));
    Conditioned q(project_point(g, e.center), p);
    if (auto hit = sweep_ellipsoid(g, q, 0, 0, g.count, kSweepBudget, confirm)) return hit;
  }
  return std::nullopt;
}

std::optional<std::size_t> StabIndex::query_ball(const VectorX<double>& c, double r) const {
  if (c.size() != net_->dim()) throw GeometryError("stab query: dimension mismatch");
  const double r2 = r * r;
  const double budget = r2 * kSweepBudget;
  for (const auto& g : groups_) {
    const VectorX<double> pc = project_point(g, c);
    // For coordinate subspaces the projected distance is the flat distance,
    // so the remaining budget decides; rotated groups use the exact test.
    auto confirm = [&](std::size_t i, double rest) {
      if (g.axis_aligned()) return budget - rest <= r2 * (1.0 + kGeomTol);
      return flat_intersects_ellipsoid(net_->flat(i), Ellipsoid<double>::ball(c, r));
    };
    if (auto hit = sweep_ball(g, pc.data(), 0, 0, g.count, budget, confirm)) return hit;
  }
  return std::nullopt;
}

std::optional<std::size_t> StabIndex::query(const AxisBox<double>& b) const {
  if (b.dim() != net_->dim()) throw GeometryError("stab query: dimension mismatch");
  auto confirm = [&](std::size_t i) { return flat_intersects_box(net_->flat(i), b); };
  for (const auto& g : groups_) {
    std::optional<std::size_t> hit;
    if (g.axis_aligned())
      hit = sweep_box(g, b.lo(g.axes), b.hi(g.axes), 0, 0, g.count, confirm);
    else
      hit = scan_group(g, confirm);
    if (hit) return hit;
  }
  return std::nullopt;
}

std::optional<std::size_t> StabIndex::query(const ConvexPolytope<double>& poly) const {
  if (poly.dim() != net_->dim()) throw GeometryError("stab query: dimension mismatch");
  auto confirm = [&](std::size_t i) { return flat_intersects_polytope(net_->flat(i), poly); };
  const AxisBox<double> bb = poly.bounding_box();
  for (const auto& g : groups_) {
    std::optional<std::size_t> hit;
    if (g.axis_aligned())
      hit = sweep_box(g, bb.lo(g.axes), bb.hi(g.axes), 0, 0, g.count, confirm);
    else
      hit = scan_group(g, confirm);
    if (hit) return hit;
  }
  return std::nullopt;
}

// ---- adversaries ------------------------------------------------------------

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Uniform weights on the probability simplex.
VectorX<double> simplex_weights(int d, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  VectorX<double> w(d);
  for (int i = 0; i < d; ++i) w(i) = expo(rng);
  return w / w.sum();
}

MatrixX<double> random_rotation(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  MatrixX<double> g(d, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < d; ++i) g(i, j) = normal(rng);
  const Eigen::HouseholderQR<MatrixX<double>> qr(g);
  MatrixX<double> q = qr.householderQ() * MatrixX<double>::Identity(d, d);
  const MatrixX<double> r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

// Semi-axes with product `prod`, random aspect, none longer than sqrt(d)/2.
// `spread_scale` in (0,1] shrinks the aspect range (retries near the ball).
VectorX<double> random_semi_axes(int d, double prod, std::mt19937_64& rng, double spread_scale = 1.0) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double mean = std::min(std::pow(prod, 1.0 / d), 0.5);
  const VectorX<double> w = simplex_weights(d, rng);
  const double spread = d * w.maxCoeff() - 1.0;
  double t = 0;
  if (spread > 0) {
    const double t_max = std::log(std::sqrt(static_cast<double>(d)) / (2.0 * mean)) / spread;
    t = unif(rng) * spread_scale * std::max(t_max, 0.0);
  }
  VectorX<double> a(d);
  for (int i = 0; i < d; ++i) a(i) = mean * std::exp(t * (d * w(i) - 1.0));
  return a;
}

// Covers rounding in the volume recomputation so the contract vol >= eps holds.
constexpr double kVolumeMargin = 1.0 + 4e-12;
constexpr int kMaxAttempts = 1000000;

double convex_hull_area(const MatrixX<double>& pts) {
  std::vector<std::pair<double, double>> p;
  for (Eigen::Index i = 0; i < pts.cols(); ++i) p.emplace_back(pts(0, i), pts(1, i));
  std::sort(p.begin(), p.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  if (p.size() < 3) return 0;
  auto cross = [](const auto& o, const auto& a, const auto& b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<double, double>> hull(2 * p.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p[i]) <= 0) --k;
    hull[k++] = p[i];
  }
  for (std::size_t i = p.size() - 1, lo = k + 1; i > 0; --i) {
    while (k >= lo && cross(hull[k - 2], hull[k - 1], p[i - 1]) <= 0) --k;
    hull[k++] = p[i - 1];
  }
  hull.resize(k - 1);
  double area = 0;
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const auto& a = hull[i];
    const auto& b = hull[(i + 1) % hull.size()];
    area += a.first * b.second - b.first * a.second;
  }
  return 0.5 * std::abs(area);
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial) {
  return splitmix64(seed ^ splitmix64(trial + 0x632BE59BD9B4E019ull));
}

double max_heavy_volume(BodyClass c, int d) {
  switch (c) {
    case BodyClass::Ellipsoid: return unit_ball_volume(d) * std::ldexp(1.0, -d);
    case BodyClass::Box: return 1.0;
    case BodyClass::Polytope:
      return d == 2 ? 0.25 : unit_ball_volume(d) * std::ldexp(1.0, -d) / std::pow(static_cast<double>(d), d);
  }
  return 0;
}

Ellipsoid<double> random_heavy_ellipsoid(int d, double eps, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_heavy_ellipsoid: d must be >= 1");
  const double cap = max_heavy_volume(BodyClass::Ellipsoid, d);
  if (!(eps > 0) || eps > cap * (1 + 1e-12))
    throw std::invalid_argument("random_heavy_ellipsoid: volume must lie in (0, c_d 2^-d]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double volume = std::min(eps * (1.0 + unif(rng)) * kVolumeMargin, cap);
  const double prod = volume / unit_ball_volume(d);

  double spread = 1.0;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt, spread *= 0.99) {
    const VectorX<double> a = random_semi_axes(d, prod, rng, spread);
    const MatrixX<double> rot = random_rotation(d, rng);
    const VectorX<double> half = (rot.array().square().matrix() * a.array().square().matrix()).cwiseSqrt();
    if ((half.array() > 0.5).any()) continue;
    VectorX<double> c(d);
    for (int i = 0; i < d; ++i) c(i) = half(i) + unif(rng) * (1.0 - 2.0 * half(i));
    const MatrixX<double> shape = rot * a.array().square().inverse().matrix().asDiagonal() * rot.transpose();
    return {c, 0.5 * (shape + shape.transpose())};
  }
  throw std::runtime_error("random_heavy_ellipsoid: rejection sampling did not converge");
}

AxisBox<double> random_heavy_box(int d, double eps, std::uint64_t seed) {
  if (d < 1) throw std::invalid_argument("random_heavy_box: d must be >= 1");
  if (!(eps > 0) || eps > 1) throw std::invalid_argument("random_heavy_box: volume must lie in (0, 1]");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double volume = std::min(eps * (1.0 + unif(rng)) * kVolumeMargin, 1.0);
  const VectorX<double> w = simplex_weights(d, rng);
  AxisBox<double> box{VectorX<double>(d), VectorX<double>(d)};
  for (int i = 0; i < d; ++i) {
    const double side = std::pow(volume, w(i));
    box.lo(i) = unif(rng) * (1.0 - side);
    box.hi(i) = std::min(box.lo(i) + side, 1.0);
  }
  return box;
}

ConvexPolytope<double> random_heavy_polytope(int d, double eps, std::uint64_t seed, int points) {
  if (d < 2) throw std::invalid_argument("random_heavy_polytope: d must be >= 2");
  if (points < d + 1) throw std::invalid_argument("random_heavy_polytope: need at least d+1 points");
  const double cap = max_heavy_volume(BodyClass::Polytope, d);
  if (!(eps > 0) || eps > cap * (1 + 1e-12))
    throw std::invalid_argument("random_heavy_polytope: volume out of range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;
  const double volume = std::min(eps * (1.0 + unif(rng)) * kVolumeMargin, cap);

  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    // Points uniform in a random ellipsoid; the size is fixed by `scale` below.
    const VectorX<double> a = random_semi_axes(d, std::pow(0.25, d), rng);
    const MatrixX<double> rot = random_rotation(d, rng);
    MatrixX<double> pts(d, points);
    for (int j = 0; j < points; ++j) {
      VectorX<double> g(d);
      for (int i = 0; i < d; ++i) g(i) = normal(rng);
      const double radius = std::pow(unif(rng), 1.0 / d);
      pts.col(j) = rot * (a.array() * (g / g.norm() * radius).array()).matrix();
    }
    if (affine_rank(pts) < d) continue;

    double scale;
    if (d == 2) {
      scale = std::sqrt(volume / convex_hull_area(pts));
    } else {
      // conv(P) contains E / d for the minimum enclosing ellipsoid E; the
      // iterate's slack in the inner radius is folded into the target.
      const MveeOptions opts;
      const Ellipsoid<double> e = mvee(pts, opts);
      const double want = volume * std::pow(d * (1.0 + 10.0 * opts.tol), d);
      scale = std::pow(want / ellipsoid_volume(e), 1.0 / d);
    }
    pts *= scale;
    const VectorX<double> lo = pts.rowwise().minCoeff();
    const VectorX<double> width = pts.rowwise().maxCoeff() - lo;
    if ((width.array() > 1.0).any()) continue;
    for (int i = 0; i < d; ++i) pts.row(i).array() += unif(rng) * (1.0 - width(i)) - lo(i);
    pts = pts.cwiseMax(0.0).cwiseMin(1.0);
    return {pts};
  }
  throw std::runtime_error("random_heavy_polytope: rejection sampling did not converge");
}

Body random_heavy_body(BodyClass c, int d, double eps, std::uint64_t seed) {
  switch (c) {
    case BodyClass::Ellipsoid: return random_heavy_ellipsoid(d, eps, seed);
    case BodyClass::Box: return random_heavy_box(d, eps, seed);
    case BodyClass::Polytope: return random_heavy_polytope(d, eps, seed);
  }
  throw std::invalid_argument("unknown body class");
}

// ---- trial harness ------------------------------------------------------------

namespace {

int resolve_threads(int requested, std::size_t trials) {
  int n = requested;
  if (n <= 0) {
    if (const char* env = std::getenv("FLATNET_THREADS")) n = std::atoi(env);
  }
  if (n <= 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(n), std::max<std::size_t>(trials, 1)));
}

}  // namespace

StabReport run_stab_trials(const StabIndex& index, const TrialOptions& opts) {
  const int d = index.net().dim();
  const double cap = max_heavy_volume(opts.body, d);
  if (!(opts.eps > 0) || opts.eps > cap) throw std::invalid_argument("run_stab_trials: eps outside generator range");

  struct Outcome {
    std::optional<std::size_t> hit;
    std::uint64_t gen_seed = 0;
    double volume = 0;
    std::optional<Body> body;
  };
  std::vector<Outcome> outcomes(opts.trials);
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (std::size_t t = next++; t < opts.trials; t = next++) {
        std::mt19937_64 rng(trial_seed(opts.seed, t));
        double volume = opts.eps;
        if (t % 2 == 1 && cap > opts.eps) {
          std::uniform_real_distribution<double> unif(std::log(opts.eps), std::log(cap));
          volume = std::min(std::exp(unif(rng)), cap);
        }
        Outcome& o = outcomes[t];
        o.gen_seed = rng();
        o.volume = volume;
        Body body = random_heavy_body(opts.body, d, volume, o.gen_seed);
        o.hit = index.query(body);
        if (!o.hit) o.body = std::move(body);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next = opts.trials;
    }
  };

  const int threads = resolve_threads(opts.threads, opts.trials);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  StabReport report;
  report.total = opts.trials;
  for (std::size_t t = 0; t < opts.trials; ++t) {
    auto& o = outcomes[t];
    if (o.hit) {
      ++report.stabbed;
      report.witnesses.emplace_back(t, *o.hit);
    } else {
      report.failures.push_back({t, o.gen_seed, o.volume, std::move(*o.body)});
    }
  }
  return report;
}

// ---- ball probe -----------------------------------------------------------------

std::int64_t default_probe_resolution(int d, double eps) {
  const double r = std::pow(eps / unit_ball_volume(d), 1.0 / d);
  auto res = static_cast<std::int64_t>(std::ceil(4.0 / r));
  if (std::pow(static_cast<double>(res), d) > 1e7)
    res = static_cast<std::int64_t>(std::floor(std::pow(1e7, 1.0 / d) * (1 + 1e-12)));
  return std::max<std::int64_t>(res, 2);
}

ProbeResult adversarial_ball_probe(const StabIndex& index, double eps, std::int64_t resolution) {
  const int d = index.net().dim();
  if (!(eps > 0)) throw std::invalid_argument("probe: eps must be positive");
  if (resolution == 0) resolution = default_probe_resolution(d, eps);
  if (resolution < 2) throw std::invalid_argument("probe: resolution must be >= 2");

  ProbeResult out;
  out.radius = std::pow(eps / unit_ball_volume(d), 1.0 / d);
  out.ball_volume = unit_ball_volume(d) * std::pow(out.radius, d);
  const double r = out.radius;
  if (r > 0.5) return out;

  VectorX<double> c = VectorX<double>::Constant(d, 0.5);
  auto try_center = [&]() {
    if ((c.array() < r).any() || (c.array() > 1.0 - r).any()) return false;
    if (index.query_ball(c, r)) return false;
    out.found = true;
    out.center = c;
    return true;
  };
  if (try_center()) return out;

  std::vector<std::int64_t> m(d, 0);
  const double step = 1.0 / static_cast<double>(resolution);
  while (true) {
    for (int i = 0; i < d; ++i) c(i) = (static_cast<double>(m[i]) + 0.5) * step;
    if (try_center()) return out;
    int axis = 0;
    while (axis < d && ++m[axis] == resolution) m[axis++] = 0;
    if (axis == d) break;
  }
  return out;
}

ProbeResult adversarial_ball_probe(const Net& net, double eps, std::int64_t resolution) {
  const StabIndex index(net);
  return adversarial_ball_probe(index, eps, resolution);
}

// ---- maximal empty rectangle ------------------------------------------------------

AxisBox<double> max_empty_rect_2d(const MatrixX<double>& points) {
  if (points.rows() != 2 && points.cols() > 0) throw GeometryError("max_empty_rect_2d: points must be 2 x n");
  std::vector<std::pair<double, double>> p;
  for (Eigen::Index i = 0; i < points.cols(); ++i) p.emplace_back(points(0, i), points(1, i));
  std::sort(p.begin(), p.end());

  AxisBox<double> best = AxisBox<double>::unit(2);
  double best_area = -1;
  auto consider = [&](double x0, double x1, double y0, double y1) {
    const double area = (x1 - x0) * (y1 - y0);
    if (area > best_area) {
      best_area = area;
      best.lo << x0, y0;
      best.hi << x1, y1;
    }
  };

  // Full-width strips between consecutive y values.
  std::vector<double> ys{0.0, 1.0};
  for (const auto& q : p) ys.push_back(q.second);
  std::sort(ys.begin(), ys.end());
  for (std::size_t i = 0; i + 1 < ys.size(); ++i) consider(0.0, 1.0, ys[i], ys[i + 1]);

  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    const auto [px, py] = p[i];
    // Left edge through p, sweeping right.
    double top = 1.0, bot = 0.0;
    bool open = true;
    for (std::size_t j = i + 1; j < n && open; ++j) {
      const auto [qx, qy] = p[j];
      if (qx == px) continue;
      consider(px, qx, bot, top);
      if (qy > py)
        top = std::min(top, qy);
      else if (qy < py)
        bot = std::max(bot, qy);
      else
        open = false;
    }
    if (open) consider(px, 1.0, bot, top);

    // Right edge through p, left edge on the boundary.
    top = 1.0, bot = 0.0;
    open = true;
    for (std::size_t j = i; j-- > 0 && open;) {
      const auto [qx, qy] = p[j];
      if (qx == px) continue;
      if (qy > py)
        top = std::min(top, qy);
      else if (qy < py)
        bot = std::max(bot, qy);
      else
        open = false;
    }
    if (open) consider(0.0, px, bot, top);
  }
  return best;
}

// ---- scaling --------------------------------------------------------------------

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more pairs");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingReport scaling_report(Construction c, int d, int k, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw std::invalid_argument("scaling_report: empty eps list");
  for (std::size_t i = 1; i < eps_list.size(); ++i)
    if (!(eps_list[i] < eps_list[i - 1])) throw std::invalid_argument("scaling_report: eps list must decrease");
  ScalingReport report;
  std::vector<double> xs, ys;
  for (double eps : eps_list) {
    const auto start = std::chrono::steady_clock::now();
    const Net net = build_net(c, d, k, eps);
    const auto stop = std::chrono::steady_clock::now();
    ScalingRow row;
    row.eps = eps;
    row.size = net.size();
    row.millis = std::chrono::duration<double, std::milli>(stop - start).count();
    xs.push_back(1.0 / eps);
    ys.push_back(static_cast<double>(std::max<std::size_t>(net.size(), 1)));
    if (xs.size() >= 2) row.slope_so_far = loglog_slope(xs, ys);
    report.rows.push_back(row);
  }
  report.slope = xs.size() >= 2 ? loglog_slope(xs, ys) : 0.0;
  return report;
}

}  // namespace flatnet
