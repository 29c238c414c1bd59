#pragma once

#include "flatnet/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace flatnet {

enum class Construction {
  GridHyperplane,
  RecursiveKFlat,
  Ellipse2D,
  EllipsoidDD,
  WeakNet,
  VdC,
  HaltonHammersley,
  AffineBody,
};

/// Short command-line id: grid, rk, ellipse2d, ell-dd, weak, vdc, hh, affine.
std::string_view construction_id(Construction c);
std::optional<Construction> parse_construction(std::string_view id);

/// A set of k-flats in R^d. Flats are stored back to back as records of
/// d*(k+1) doubles: the base point, then the k basis vectors.
class Net {
 public:
  Net(int d, int k, double eps, Construction construction);

  int dim() const { return d_; }
  int k() const { return k_; }
  double eps() const { return eps_; }
  Construction construction() const { return construction_; }

  std::size_t stride() const { return static_cast<std::size_t>(d_) * static_cast<std::size_t>(k_ + 1); }
  std::size_t size() const { return data_.size() / stride(); }
  bool empty() const { return data_.empty(); }

  FlatView flat(std::size_t i) const;
  std::span<const double> record(std::size_t i) const;
  std::span<const double> data() const { return data_; }

  void reserve(std::size_t flats) { data_.reserve(flats * stride()); }
  void push_back(std::span<const double> record);
  template <FlatLike F>
  void add(const F& f) {
    std::vector<double> rec(stride());
    for (int i = 0; i < d_; ++i) rec[i] = f.base(i);
    for (int c = 0; c < k_; ++c)
      for (int i = 0; i < d_; ++i) rec[(c + 1) * d_ + i] = f.basis(i, c);
    push_back(rec);
  }
  /// Replaces the contents with raw records (size must be a multiple of stride()).
  void assign(std::vector<double> records);
  /// Appends raw records (size must be a multiple of stride()).
  void append(std::span<const double> records);
  /// Keeps only the flats whose index satisfies `keep(i)`.
  template <typename Pred>
  Net filtered(Pred keep) const {
    Net out(d_, k_, eps_, construction_);
    out.tau = tau;
    out.levels = levels;
    for (std::size_t i = 0; i < size(); ++i)
      if (keep(i)) out.push_back(record(i));
    return out;
  }

  /// Sorts records lexicographically and removes exact duplicates.
  void canonicalize();

  bool operator==(const Net& other) const = default;

  // Schedule parameters recorded in the net file header when applicable.
  std::optional<int> tau;
  std::optional<int> levels;

 private:
  int d_;
  int k_;
  double eps_;
  Construction construction_;
  std::vector<double> data_;
};

/// Lexicographically sorts fixed-width rows of `data` and drops duplicates.
void sort_unique_rows(std::vector<double>& data, std::size_t stride);

/// ceil(x), snapping values within 1e-9 of an integer to that integer first.
long long ceil_snap(double x);

/// Derived parameters of the recursive constructions.
struct Schedule {
  int d = 0;
  double eps = 0;
  int tau = 0;                     // number of levels
  std::vector<double> eps_levels;  // index i -> eps_i (k-flat construction; index 0 unused)
  int M = 0;                       // 2-D ellipse net grid count
  std::vector<int> M_levels;       // index i -> M_i (ellipsoid construction)

  /// Delta(i) = 2^i eps^{1/d}.
  double delta(int i) const;
  /// lg(1 / Delta(i)), computed in log space.
  double lg_inv_delta(int i) const;

  /// tau = ceil(lg(1/eps)/d) + 3 ceil(lg(3d)) + 1, eps_i = 2^i eps / (4d).
  static Schedule kflat(int d, double eps);
  /// M = 3 + ceil(lg(1/eps)).
  static Schedule ellipse2d(double eps);
  /// tau = ceil(lg(1/eps)/d), M_i = ceil(lg(1/Delta(i))).
  static Schedule ellipsoid(int d, double eps);
};

}  // namespace flatnet
