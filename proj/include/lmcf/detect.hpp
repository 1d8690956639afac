#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/complexgeom.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/gaussian.hpp"
#include "lmcf/surfaces.hpp"

namespace lmcf {

struct DensityCandidate {
    Point4 x0;
    double r0 = 0.0;
    double value = 0.0;
    double t = 0.0;
};

/// Density Theta(L_t, x0, r) over snapshots x centres x scales, keeping values above
/// threshold that are local maxima (plateaus included) along the scale grid.
std::vector<DensityCandidate> density_scan(const FlowTrajectory& traj, const std::vector<Point4>& centers,
                                           const std::vector<double>& scales, double threshold,
                                           const QuadOptions& opt = {});
std::vector<DensityCandidate> density_scan(const ProfileCurve& curve, double t, const std::vector<Point4>& centers,
                                           const std::vector<double>& scales, double threshold,
                                           const QuadOptions& opt = {});

struct PlaneFit {
    PlanePair pair;
    std::array<double, 2> phi{};  // profile arguments in [0, pi) of the first and second summand
    double residual = 0.0;        // max angular deviation of annulus samples from their ray
};

/// Weighted fit of one equivariant plane per branch on the annulus.
PlaneFit fit_plane_pair(const ProfileCurve& curve, const Annulus& annulus = {}, bool swap_branches = false,
                        const QuadOptions& opt = {});

struct GraphicalityRow {
    double tau = 0.0;
    std::optional<double> c;
    std::optional<std::string> error;
};

struct EmbeddednessRow {
    double t = 0.0;
    std::size_t intersections = 0;
};

struct PinchOptions {
    NondegOptions nondeg;
    double graph_tau_lo = 2.0, graph_tau_hi = 6.0, graph_tau_step = 0.5;
    Annulus fit_annulus{1.0, 2.0};
    Annulus graph_annulus{1.0, 3.0};
    GraphicalityOptions graph;
};

struct NeckPinchReport {
    Point4 x0;
    double T0 = 0.0, T0_extrapolated = 0.0;
    double density_at_pinch = 0.0;
    std::optional<PlaneFit> planes;
    std::vector<GraphicalityRow> graphicality;
    NondegResult nondeg;
    Nondegeneracy verdict = Nondegeneracy::DegenerateOrUndetermined;
    std::vector<EmbeddednessRow> embeddedness;
    std::vector<std::string> notes;

    bool embedded() const;
    std::optional<double> max_graphicality() const;
};

/// Throws NoPinch when the trajectory has no pinch event.
NeckPinchReport classify_pinch(const FlowTrajectory& traj, const PinchOptions& opt = {});

/// The loop W1 = t' e^{i s}, W2 = e^{-i s} on the neck W1 W2 = t', in the coordinates of b.
Loop exactness_loop(cplx t_prime, double b, int samples = 64);
/// Line integral of y dx over exactness_loop.
double exactness_integral(cplx t_prime, double b, int order = 8);

struct ExactnessRoot {
    double angle = 0.0;  // t' = e^{i angle}, angle in (-pi, pi]
    cplx t_prime;
    double value = 0.0;  // integral at the root
};

/// Roots of the Liouville integral over t' on the unit circle. Throws NoSignChange.
std::vector<ExactnessRoot> exactness_scan(double b, int samples = 64, double tol = 1e-14);

} // namespace lmcf
