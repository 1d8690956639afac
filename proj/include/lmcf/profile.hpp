#pragma once

// Profile curves gamma in C generating circle-invariant Lagrangians
// (gamma(u) cos a, gamma(u) sin a) in C^2.

#include <complex>
#include <optional>
#include <span>
#include <vector>

namespace lmcf {

using cplx = std::complex<double>;

struct ProfileComponent {
    std::vector<cplx> z;
    bool closed = false;
    // An open end flagged as a ray continues radially to infinity beyond its
    // last sample. Gaussian integrals add the tail analytically.
    bool ray_front = false;
    bool ray_back = false;
    // The first sample's Lagrangian angle is lifted next to this value.
    double theta_ref = 0.0;

    std::size_t size() const { return z.size(); }
    std::size_t segments() const { return closed ? z.size() : z.size() - 1; }
    /// Cumulative chord length; for closed curves one extra entry holds the period.
    std::vector<double> arclength() const;
    /// Unit tangents from 5-point finite differences in chord length.
    std::vector<cplx> tangents() const;
    /// Lifted Lagrangian angle arg(gamma * gamma_s) at each sample.
    std::vector<double> angles() const;
};

struct ProfileCurve {
    std::vector<ProfileComponent> components;
    bool injective = false;
    // Which end of component 0 carries the first summand of a connect sum.
    bool first_summand_back = true;
    // Lower bound constant c in min|gamma| >= c * neck_scale (bridges only).
    double bridge_constant = 0.0;

    /// Throws DegeneratePoint on coincident consecutive samples or non-finite data.
    void validate() const;
    std::size_t total_samples() const;
    double min_radius() const;
};

/// Cubic Hermite interpolant of a component in chord-length parameter.
class ProfileSpline {
public:
    explicit ProfileSpline(const ProfileComponent& c);

    double length() const { return s_.back(); }
    bool closed() const { return closed_; }
    const std::vector<double>& knots() const { return s_; }
    cplx eval(double s) const;
    cplx deriv(double s) const;
    cplx second(double s) const;

private:
    std::size_t locate(double& s) const;
    std::vector<double> s_;
    std::vector<cplx> z_, d_;
    bool closed_;
};

/// Finite difference weights (Fornberg). Returns w[m][j] for derivative m <= order
/// at x0 using nodes xs.
std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs, int order);

/// Samples of the ray r e^{i phi}, r in [r0, r1], with spacing about h.
ProfileComponent ray_component(double phi, double r0, double r1, double h, bool ray_back = true);

/// Circle of radius R centered at 0, counterclockwise from angle 0.
ProfileComponent circle_component(double radius, int samples);

} // namespace lmcf
