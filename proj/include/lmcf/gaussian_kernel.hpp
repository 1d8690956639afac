#pragma once

// Gaussian-weighted integrals over circle-invariant surfaces given by a profile.
// The orbit of gamma has length 2 pi |gamma|; for a centre x0 off the origin the
// orbit integral of exp(-|x - x0|^2 / 4r^2) is done numerically.

#include <vector>

#include "lmcf/surfaces.hpp"

namespace lmcf::detail {

/// log of the integral of exp(k cos a) over [0, 2 pi).
double log_orbit_integral(double k);

/// Sum of node weights exp(-|x - x0|^2 / 4r^2) dA over the whole surface.
double profile_gaussian_sum(const ProfileCurve& c, const Point4& x0, double r, const QuadOptions& opt, bool parallel);

std::vector<QuadNode> profile_gaussian_nodes(const ProfileCurve& c, const Point4& x0, double r, const QuadOptions& opt,
                                             bool with_angles);

} // namespace lmcf::detail
