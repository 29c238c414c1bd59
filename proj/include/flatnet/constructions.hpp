#pragma once

#include "flatnet/net.hpp"
#include "flatnet/types.hpp"

#include <stdexcept>

namespace flatnet {

class ConstructionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Smallest eps the constructions accept (coordinates stay exact dyadics above it).
inline constexpr double kMinEps = 0x1p-40;

/// Interior grid hyperplanes x_j = m * eps^{1/d}, m = 1..ceil(eps^{-1/d}) - 1,
/// for every axis j. (d-1)-flats; empty when eps >= 1.
Net grid_hyperplane_net(int d, double eps);

/// Quadtree construction of a (k, eps)-net, 1 <= k < d. Splitting planes of
/// level i = 1..tau each carry a recursive (k, 2^i eps / 4d)-net of their
/// (d-1)-dimensional face, lifted back into R^d.
Net recursive_kflat_net(int d, int k, double eps);

/// Union of interior vertices of the grids tiling [0,1]^2 by
/// [0, 2^{-(M-j)}] x [0, 2^{-j}], j = 1..M-1, M = 3 + ceil(lg(1/eps)).
Net ellipse_net_2d(double eps);

/// Point net for ellipsoids in [0,1]^d, d >= 2.
Net ellipsoid_net_dd(int d, double eps);

/// Point net for all convex bodies: ellipsoid_net_dd(d, eps / d^d).
Net weak_eps_net(int d, double eps);

/// Van der Corput (d = 2) or Halton-Hammersley (d >= 3) points for axis-aligned boxes.
Net box_net(int d, double eps);
Net vdc_net(double eps);
Net hh_net(int d, double eps);

/// Net for bodies Xi with vol(Xi ∩ C) >= eps vol(C), C = conv(body vertices).
/// The MVEE of C gives an affine map T with B/d ⊆ T(C) ⊆ B ⊆ [0,1]^d; the cube
/// net at eps * c_d / (2d)^d is mapped back through T^{-1}.
/// delta = c_d / (2d)^d.
double affine_delta(int d);
Net affine_net_for_body(const ConvexPolytope<double>& body, int k, double eps);

/// Builds the named construction for the cube (not AffineBody, which needs a body).
Net build_net(Construction c, int d, int k, double eps);

}  // namespace flatnet
