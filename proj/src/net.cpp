#include "flatnet/net.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

namespace flatnet {

namespace {

struct IdEntry {
  Construction c;
  std::string_view id;
};

constexpr IdEntry kIds[] = {
    {Construction::GridHyperplane, "grid"},  {Construction::RecursiveKFlat, "rk"},
    {Construction::Ellipse2D, "ellipse2d"},  {Construction::EllipsoidDD, "ell-dd"},
    {Construction::WeakNet, "weak"},         {Construction::VdC, "vdc"},
    {Construction::HaltonHammersley, "hh"},  {Construction::AffineBody, "affine"},
};

}  // namespace

std::string_view construction_id(Construction c) {
  for (const auto& e : kIds)
    if (e.c == c) return e.id;
  return "unknown";
}

std::optional<Construction> parse_construction(std::string_view id) {
  for (const auto& e : kIds)
    if (e.id == id) return e.c;
  return std::nullopt;
}

Net::Net(int d, int k, double eps, Construction construction)
    : d_(d), k_(k), eps_(eps), construction_(construction) {
  if (d < 1) throw GeometryError("net: dimension must be >= 1");
  if (k < 0 || k >= d) throw GeometryError("net: need 0 <= k < d");
}

FlatView Net::flat(std::size_t i) const {
  const double* p = data_.data() + i * stride();
  return FlatView{Eigen::Map<const VectorX<double>>(p, d_), Eigen::Map<const MatrixX<double>>(p + d_, d_, k_)};
}

std::span<const double> Net::record(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * stride(), stride());
}

void Net::push_back(std::span<const double> record) {
  if (record.size() != stride()) throw GeometryError("net: record has wrong width");
  data_.insert(data_.end(), record.begin(), record.end());
}

void Net::assign(std::vector<double> records) {
  if (records.size() % stride() != 0) throw GeometryError("net: records have wrong width");
  data_ = std::move(records);
}

void Net::append(std::span<const double> records) {
  if (records.size() % stride() != 0) throw GeometryError("net: records have wrong width");
  data_.insert(data_.end(), records.begin(), records.end());
}

void Net::canonicalize() { sort_unique_rows(data_, stride()); }

void sort_unique_rows(std::vector<double>& data, std::size_t stride) {
  if (stride == 0 || data.empty()) return;
  const std::size_t n = data.size() / stride;
  if (n >= (std::size_t{1} << 31)) throw GeometryError("sort_unique_rows: too many rows");
  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), std::uint32_t{0});
  const double* base = data.data();
  auto less = [&](std::uint32_t a, std::uint32_t b) {
    const double* pa = base + std::size_t(a) * stride;
    const double* pb = base + std::size_t(b) * stride;
    return std::lexicographical_compare(pa, pa + stride, pb, pb + stride);
  };
  if (!std::is_sorted(order.begin(), order.end(), less)) std::sort(order.begin(), order.end(), less);

  // Apply the permutation in place by following cycles; visited slots are
  // marked by setting the high bit.
  constexpr std::uint32_t kDone = 0x80000000u;
  std::vector<double> tmp(stride);
  for (std::size_t start = 0; start < n; ++start) {
    if (order[start] & kDone) continue;
    if (order[start] == start) {
      order[start] |= kDone;
      continue;
    }
    std::copy_n(data.begin() + start * stride, stride, tmp.begin());
    std::size_t dst = start;
    while (true) {
      const std::size_t src = order[dst];
      order[dst] |= kDone;
      if (src == start) {
        std::copy_n(tmp.begin(), stride, data.begin() + dst * stride);
        break;
      }
      std::copy_n(data.begin() + src * stride, stride, data.begin() + dst * stride);
      dst = src;
    }
  }

  std::size_t out = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (out > 0 && std::equal(data.begin() + i * stride, data.begin() + (i + 1) * stride,
                              data.begin() + (out - 1) * stride)) {
      continue;
    }
    if (out != i) std::copy_n(data.begin() + i * stride, stride, data.begin() + out * stride);
    ++out;
  }
  data.resize(out * stride);
}

long long ceil_snap(double x) {
  const double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long long>(r);
  return static_cast<long long>(std::ceil(x));
}

double Schedule::lg_inv_delta(int i) const { return std::log2(1.0 / eps) / d - i; }

double Schedule::delta(int i) const { return std::exp2(-lg_inv_delta(i)); }

Schedule Schedule::kflat(int d, double eps) {
  Schedule s;
  s.d = d;
  s.eps = eps;
  const double lg_inv = std::log2(1.0 / eps);
  s.tau = static_cast<int>(ceil_snap(lg_inv / d) + 3 * ceil_snap(std::log2(3.0 * d)) + 1);
  s.eps_levels.assign(s.tau + 1, 0.0);
  for (int i = 1; i <= s.tau; ++i) s.eps_levels[i] = std::ldexp(eps / (4.0 * d), i);
  return s;
}

Schedule Schedule::ellipse2d(double eps) {
  Schedule s;
  s.d = 2;
  s.eps = eps;
  s.M = static_cast<int>(3 + ceil_snap(std::log2(1.0 / eps)));
  return s;
}

Schedule Schedule::ellipsoid(int d, double eps) {
  Schedule s;
  s.d = d;
  s.eps = eps;
  s.tau = static_cast<int>(ceil_snap(std::log2(1.0 / eps) / d));
  s.M_levels.resize(s.tau + 1);
  for (int i = 0; i <= s.tau; ++i) s.M_levels[i] = static_cast<int>(ceil_snap(s.lg_inv_delta(i)));
  return s;
}

}  // namespace flatnet
