#include "flatnet/constructions.hpp"

#include "flatnet/low_discrepancy.hpp"
#include "flatnet/mvee.hpp"
#include "flatnet/volume.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <string>

namespace flatnet {

namespace {

using Records = std::vector<double>;

void require_eps(double eps, bool allow_ge_one = false) {
  if (!(eps > 0)) throw ConstructionError("eps must be positive");
  if (!allow_ge_one && !(eps < 1)) throw ConstructionError("eps must be < 1");
  if (eps < kMinEps) throw ConstructionError("eps below 2^-40 is not supported (coordinates would lose exactness)");
}

// Grid hyperplanes of [0,1]^d; each record is base (v e_j) followed by the
// d-1 unit vectors of the other axes in increasing order.
Records grid_records(int d, double eps) {
  Records out;
  if (eps >= 1) return out;
  const double step = std::exp2(-std::log2(1.0 / eps) / d);
  const long long cells = ceil_snap(1.0 / step);
  const std::size_t stride = static_cast<std::size_t>(d) * d;
  out.reserve(static_cast<std::size_t>(d) * (cells - 1) * stride);
  std::vector<double> rec(stride);
  for (int axis = 0; axis < d; ++axis) {
    for (long long m = 1; m < cells; ++m) {
      std::fill(rec.begin(), rec.end(), 0.0);
      rec[axis] = static_cast<double>(m) * step;
      int col = 1;
      for (int a = 0; a < d; ++a) {
        if (a == axis) continue;
        rec[col * d + a] = 1.0;
        ++col;
      }
      out.insert(out.end(), rec.begin(), rec.end());
    }
  }
  return out;
}

// Inserts coordinate value `c` at index `axis` into every (k+1)-block of each
// (d-1)-dimensional record; basis blocks get 0 there.
void lift_into(std::span<const double> sub, int d_sub, int k, int axis, double c, Records& out) {
  const std::size_t sub_stride = static_cast<std::size_t>(d_sub) * (k + 1);
  const std::size_t n = sub.size() / sub_stride;
  for (std::size_t r = 0; r < n; ++r) {
    const double* src = sub.data() + r * sub_stride;
    for (int b = 0; b <= k; ++b) {
      const double* blk = src + static_cast<std::size_t>(b) * d_sub;
      out.insert(out.end(), blk, blk + axis);
      out.push_back(b == 0 ? c : 0.0);
      out.insert(out.end(), blk + axis, blk + d_sub);
    }
  }
}

Records kflat_records(int d, int k, double eps) {
  if (eps >= 1) return {};
  if (k == d - 1) return grid_records(d, eps);
  const Schedule s = Schedule::kflat(d, eps);
  Records out;
  for (int i = 1; i <= s.tau; ++i) {
    const double eps_i = s.eps_levels[i];
    if (eps_i >= 1) break;
    const Records sub = kflat_records(d - 1, k, eps_i);
    if (sub.empty()) continue;
    const long long planes = 1LL << (i - 1);
    for (int axis = 0; axis < d; ++axis)
      for (long long m = 0; m < planes; ++m)
        lift_into(sub, d - 1, k, axis, std::ldexp(static_cast<double>(2 * m + 1), -i), out);
  }
  return out;
}

// Points (t / 2^{M-1}, s / 2^{M-p}) where p is the dyadic level of the first
// coordinate: exactly the union of the R_j grid vertices, already in
// lexicographic order and without duplicates.
Records ellipse2d_records(int M) {
  Records out;
  if (M < 2) return out;
  const long long tmax = 1LL << (M - 1);
  std::size_t count = 0;
  for (int s = 2; s <= M; ++s) count += static_cast<std::size_t>(s - 1) << (s - 2);
  out.reserve(2 * count);
  for (long long t = 1; t < tmax; ++t) {
    const int p = (M - 1) - __builtin_ctzll(static_cast<unsigned long long>(t));
    const double x = std::ldexp(static_cast<double>(t), -(M - 1));
    const long long ymax = 1LL << (M - p);
    for (long long y = 1; y < ymax; ++y) {
      out.push_back(x);
      out.push_back(std::ldexp(static_cast<double>(y), -(M - p)));
    }
  }
  return out;
}

// Linear-time union of two lexicographically sorted, duplicate-free row lists.
Records merge_union(const Records& a, const Records& b, std::size_t stride) {
  Records out;
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j >= b.size()) {
      out.insert(out.end(), a.begin() + i, a.begin() + i + stride);
      i += stride;
      continue;
    }
    if (i >= a.size()) {
      out.insert(out.end(), b.begin() + j, b.begin() + j + stride);
      j += stride;
      continue;
    }
    const auto ra = a.begin() + i;
    const auto rb = b.begin() + j;
    if (std::lexicographical_compare(ra, ra + stride, rb, rb + stride)) {
      out.insert(out.end(), ra, ra + stride);
      i += stride;
    } else if (std::lexicographical_compare(rb, rb + stride, ra, ra + stride)) {
      out.insert(out.end(), rb, rb + stride);
      j += stride;
    } else {
      out.insert(out.end(), ra, ra + stride);
      i += stride;
      j += stride;
    }
  }
  return out;
}

// A sorted point list lifted onto the plane x_axis = c. Lifting preserves
// lexicographic order, so the whole net is a k-way merge of these streams.
struct LiftedStream {
  const Records* pts;
  int axis;
  double c;
  std::size_t row = 0;
  std::vector<double> cur;

  bool load(int d) {
    const std::size_t sub = static_cast<std::size_t>(d - 1);
    if ((row + 1) * sub > pts->size()) return false;
    const double* src = pts->data() + row * sub;
    for (int i = 0, j = 0; i < d; ++i) cur[i] = (i == axis) ? c : src[j++];
    return true;
  }
};

Records ellipsoid_records(int d, double eps) {
  if (d == 2) return ellipse2d_records(Schedule::ellipse2d(eps).M);
  const Schedule s = Schedule::ellipsoid(d, eps);
  const double lg_inv_eps = std::log2(1.0 / eps);

  // Sub-net eps for level i: eps / Delta(i+2), taken in log space.
  auto sub_eps = [&](int i) { return std::exp2(-(lg_inv_eps - s.lg_inv_delta(i + 2))); };

  int max_level = -1;
  for (int i = 0; i <= s.tau; ++i) max_level = std::max(max_level, s.M_levels[i]);
  if (max_level < 0) return {};

  std::map<int, Records> sub_nets;  // i -> (d-1)-dim net, sorted
  auto sub_net = [&](int i) -> const Records& {
    auto it = sub_nets.find(i);
    if (it == sub_nets.end()) it = sub_nets.emplace(i, ellipsoid_records(d - 1, sub_eps(i))).first;
    return it->second;
  };

  // Hyperplane x = m / 2^j, j <= M_i, is present for level i; a plane at
  // dyadic level v therefore carries the union over all i with M_i >= v.
  std::vector<Records> unions(max_level + 1);
  for (int v = 0; v <= max_level; ++v) {
    for (int i = 0; i <= s.tau; ++i) {
      if (s.M_levels[i] < v) continue;
      unions[v] = unions[v].empty() ? sub_net(i) : merge_union(unions[v], sub_net(i), d - 1);
    }
  }
  sub_nets.clear();

  std::vector<LiftedStream> streams;
  for (int axis = 0; axis < d; ++axis) {
    for (int v = 0; v <= max_level; ++v) {
      if (unions[v].empty()) continue;
      std::vector<double> positions;
      if (v == 0) {
        positions = {0.0, 1.0};
      } else {
        for (long long m = 1; m < (1LL << v); m += 2) positions.push_back(std::ldexp(static_cast<double>(m), -v));
      }
      for (double c : positions) streams.push_back({&unions[v], axis, c, 0, std::vector<double>(d)});
    }
  }

  // Two passes over the merge: count the distinct points, then write them, so
  // the output is allocated exactly once.
  auto merge = [&](auto&& emit) {
    auto greater = [&](std::size_t a, std::size_t b) {
      return std::lexicographical_compare(streams[b].cur.begin(), streams[b].cur.end(), streams[a].cur.begin(),
                                          streams[a].cur.end());
    };
    std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(greater)> heap(greater);
    for (std::size_t i = 0; i < streams.size(); ++i) {
      streams[i].row = 0;
      if (streams[i].load(d)) heap.push(i);
    }
    std::vector<double> prev;
    while (!heap.empty()) {
      const std::size_t top = heap.top();
      heap.pop();
      auto& st = streams[top];
      if (prev != st.cur) {
        emit(st.cur);
        prev = st.cur;
      }
      ++st.row;
      if (st.load(d)) heap.push(top);
    }
  };

  std::size_t count = 0;
  merge([&](const std::vector<double>&) { ++count; });
  Records out;
  out.reserve(count * d);
  merge([&](const std::vector<double>& p) { out.insert(out.end(), p.begin(), p.end()); });
  return out;
}

}  // namespace

Net grid_hyperplane_net(int d, double eps) {
  if (d < 1) throw ConstructionError("grid: d must be >= 1");
  require_eps(eps, /*allow_ge_one=*/true);
  Net net(d, d - 1, eps, Construction::GridHyperplane);
  net.assign(grid_records(d, eps));
  net.canonicalize();
  return net;
}

Net recursive_kflat_net(int d, int k, double eps) {
  if (d < 2 || k < 1 || k >= d) throw ConstructionError("rk: need 1 <= k < d");
  require_eps(eps);
  Net net(d, k, eps, Construction::RecursiveKFlat);
  if (k == d - 1) {
    net.append(grid_hyperplane_net(d, eps).data());
    return net;
  }
  net.tau = Schedule::kflat(d, eps).tau;
  net.assign(kflat_records(d, k, eps));
  net.canonicalize();
  return net;
}

Net ellipse_net_2d(double eps) {
  require_eps(eps);
  Net net(2, 0, eps, Construction::Ellipse2D);
  net.levels = Schedule::ellipse2d(eps).M;
  net.assign(ellipse2d_records(*net.levels));
  return net;
}

Net ellipsoid_net_dd(int d, double eps) {
  if (d < 2) throw ConstructionError("ell-dd: d must be >= 2");
  require_eps(eps);
  Net net(d, 0, eps, Construction::EllipsoidDD);
  if (d == 2)
    net.levels = Schedule::ellipse2d(eps).M;
  else
    net.tau = Schedule::ellipsoid(d, eps).tau;
  net.assign(ellipsoid_records(d, eps));
  return net;
}

Net weak_eps_net(int d, double eps) {
  if (d < 2) throw ConstructionError("weak: d must be >= 2");
  require_eps(eps);
  const double inner = eps / std::pow(static_cast<double>(d), d);
  Net inner_net = ellipsoid_net_dd(d, inner);
  Net net(d, 0, eps, Construction::WeakNet);
  net.tau = inner_net.tau;
  net.levels = inner_net.levels;
  net.append(inner_net.data());
  return net;
}

Net vdc_net(double eps) {
  require_eps(eps);
  const long long n = ceil_snap(4.0 / eps);
  Net net(2, 0, eps, Construction::VdC);
  const MatrixX<double> pts = van_der_corput(n);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) net.push_back(std::span<const double>(pts.col(i).data(), 2));
  net.canonicalize();
  return net;
}

Net hh_net(int d, double eps) {
  if (d < 2) throw ConstructionError("hh: d must be >= 2");
  require_eps(eps);
  const double scaled = std::ldexp(static_cast<double>(primorial(d - 1)), d - 1) / eps;
  if (scaled > 1e9) throw ConstructionError("hh: point count too large");
  const long long n = ceil_snap(scaled);
  Net net(d, 0, eps, Construction::HaltonHammersley);
  const MatrixX<double> pts = halton_hammersley(n, d);
  for (Eigen::Index i = 0; i < pts.cols(); ++i) net.push_back(std::span<const double>(pts.col(i).data(), d));
  net.canonicalize();
  return net;
}

Net box_net(int d, double eps) { return d == 2 ? vdc_net(eps) : hh_net(d, eps); }

double affine_delta(int d) { return unit_ball_volume(d) / std::pow(2.0 * d, d); }

Net affine_net_for_body(const ConvexPolytope<double>& body, int k, double eps) {
  const int d = static_cast<int>(body.dim());
  if (d < 1 || k < 0 || k >= d) throw ConstructionError("affine: need 0 <= k < d");
  if (k == 0 && d < 2) throw ConstructionError("affine: k = 0 requires d >= 2");
  require_eps(eps);
  MveeOptions opts;
  const Ellipsoid<double> e = mvee(body.vertices, opts);

  // T(x) = 1/2 + L^T (x - c) / 2 with M = L L^T maps E onto the ball of
  // diameter 1 centred in the cube. The approximate MVEE loses a factor of at
  // most (1 + 10 tol) in the inner radius, folded into delta.
  const Eigen::LLT<MatrixX<double>> llt(e.shape);
  const MatrixX<double> lt = llt.matrixU();
  const MatrixX<double> lt_inv = lt.inverse();
  const double delta = affine_delta(d) / std::pow(1.0 + 10.0 * opts.tol, d);
  const double cube_eps = eps * delta;
  if (cube_eps < kMinEps) throw ConstructionError("affine: eps * delta below 2^-40");

  const Net cube = (k == 0) ? weak_eps_net(d, cube_eps) : recursive_kflat_net(d, k, cube_eps);

  Net net(d, k, eps, Construction::AffineBody);
  net.reserve(cube.size());
  const VectorX<double> half = VectorX<double>::Constant(d, 0.5);
  for (std::size_t i = 0; i < cube.size(); ++i) {
    const FlatView f = cube.flat(i);
    KFlat<double> g;
    g.base = e.center + 2.0 * lt_inv * (f.base - half);
    if (k > 0) {
      const MatrixX<double> dirs = lt_inv * f.basis;
      Eigen::HouseholderQR<MatrixX<double>> qr(dirs);
      g.basis = qr.householderQ() * MatrixX<double>::Identity(d, k);
    } else {
      g.basis.resize(d, 0);
    }
    net.add(g);
  }
  net.canonicalize();
  return net;
}

Net build_net(Construction c, int d, int k, double eps) {
  switch (c) {
    case Construction::GridHyperplane:
      if (k != d - 1) throw ConstructionError("grid: k must equal d-1");
      return grid_hyperplane_net(d, eps);
    case Construction::RecursiveKFlat:
      return recursive_kflat_net(d, k, eps);
    case Construction::Ellipse2D:
      if (d != 2 || k != 0) throw ConstructionError("ellipse2d: requires d = 2, k = 0");
      return ellipse_net_2d(eps);
    case Construction::EllipsoidDD:
      if (k != 0) throw ConstructionError("ell-dd: requires k = 0");
      return ellipsoid_net_dd(d, eps);
    case Construction::WeakNet:
      if (k != 0) throw ConstructionError("weak: requires k = 0");
      return weak_eps_net(d, eps);
    case Construction::VdC:
      if (d != 2 || k != 0) throw ConstructionError("vdc: requires d = 2, k = 0");
      return vdc_net(eps);
    case Construction::HaltonHammersley:
      if (k != 0) throw ConstructionError("hh: requires k = 0");
      return hh_net(d, eps);
    case Construction::AffineBody:
      throw ConstructionError("affine: requires a body (use affine_net_for_body)");
  }
  throw ConstructionError("unknown construction");
}

}  // namespace flatnet
