#pragma once

// Circle-invariant Lagrangian mean curvature flow reduced to the profile curve:
//   d gamma / dt = V * i gamma_s,   V = k + Im(conj(gamma) gamma_s) / |gamma|^2 = d theta / ds.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/complexgeom.hpp"
#include "lmcf/profile.hpp"

namespace lmcf {

// FixedRay pins both ends of open components. AsymptoticRay lets ends flagged as
// rays slide with a straight radial continuation; other ends stay pinned.
enum class Boundary { FixedRay, AsymptoticRay };

// RKL2 is a second-order Runge-Kutta-Legendre super-time-stepping scheme whose
// stable step grows with the square of the stage count.
enum class Integrator { RK4, RKL2 };

/// Gaussian density probe: the ledger records Theta(L_t, x0, sqrt(t0 - t)).
struct Probe {
    Point4 x0;
    double t0 = 1.0;
};

struct FlowConfig {
    double h_target = 0.01;
    // Local spacing clamp(grading * |gamma|, h_floor, h_target); grading 0 is uniform.
    double grading = 0.0;
    double h_floor = 1e-7;
    // Fraction of the explicit stability limit (and of h / max|V|) used per step.
    double sigma = 0.3;
    Integrator integrator = Integrator::RKL2;
    int stages = 24;
    double remesh_ratio = 1.3;
    int min_nodes = 16;
    double t_max = 1.0;
    double min_radius_tol = 1e-3;
    double max_curvature_tol = 1e8;
    Boundary boundary = Boundary::FixedRay;
    double snapshot_dt = 0.01;
    // Snapshot spacing is also capped by this fraction of the estimated time to pinch.
    double snapshot_fraction = 0.05;
    std::vector<Probe> probes;
    bool parallel = true;
    // Remeshing can be disabled for static checks.
    bool remesh = true;

    void validate() const;
};

enum class EventKind { Remesh, Pinch, Blowup, TMax };
std::string to_string(EventKind k);

struct FlowEvent {
    EventKind kind = EventKind::Remesh;
    double t = 0.0;
    Point4 x0;
    double T0 = 0.0;
    // Root of a linear fit of min|gamma|^2 against t over the final steps.
    double T0_extrapolated = 0.0;
    std::size_t nodes = 0;
};

struct Snapshot {
    double t = 0.0;
    ProfileCurve curve;
    int mesh_id = 0;
};

struct LedgerRow {
    double t = 0.0;
    int probe = 0;
    double theta = 0.0;
};

struct FlowTrajectory {
    std::vector<Snapshot> snapshots;
    std::vector<FlowEvent> events;
    std::vector<LedgerRow> ledger;
    std::vector<Probe> probes;
    // Oscillation of the lifted angle over open components, one per snapshot.
    std::vector<double> angle_osc;
    std::size_t steps = 0;

    std::optional<FlowEvent> pinch() const;
    double t_end() const { return snapshots.empty() ? 0.0 : snapshots.back().t; }
    /// Largest increase of any probe between consecutive ledger rows (<= 0 when monotone).
    double max_ledger_increase() const;
    double max_osc_increase() const;
};

struct VelocityField {
    // Per component: normal speed V and the velocity vector V * i * gamma_s.
    std::vector<std::vector<double>> speed;
    std::vector<std::vector<cplx>> velocity;
};

/// Normal speed at every sample. Throws OriginContact when an interior sample is
/// closer than min_radius to the origin.
VelocityField velocity(const ProfileCurve& curve, Boundary bc = Boundary::FixedRay, double min_radius = 0.0);
VelocityField velocity_serial(const ProfileCurve& curve, Boundary bc = Boundary::FixedRay,
                              double min_radius = 0.0);

/// Resamples every component to the local spacing of the config.
ProfileCurve remesh(const ProfileCurve& curve, const FlowConfig& config);
bool needs_remesh(const ProfileCurve& curve, const FlowConfig& config);

FlowTrajectory evolve(ProfileCurve curve, const FlowConfig& config);

enum class TauOrigin {
    Absolute,   // t = T0 - e^{-tau}
    Translated  // t = T0 - T0 e^{-tau}, so tau = 0 is t = 0
};

struct RescaledSnapshot {
    double tau = 0.0;
    double t = 0.0;
    ProfileCurve curve;
};

/// Curve of the trajectory at time t, linear in t between stored snapshots.
ProfileCurve interpolate(const FlowTrajectory& traj, double t);

std::vector<RescaledSnapshot> rescale(const FlowTrajectory& traj, const Point4& x0, double T0,
                                      const std::vector<double>& taus, TauOrigin origin = TauOrigin::Translated);

struct ExpanderConfig {
    double h = 0.01;
    double grading = 0.0;
    double extent = 8.0;         // radius at which the curve is cut and continued as rays
    double r_lo = 1e-3, r_hi = 4.0;
    double tol = 1e-12;
};

struct ExpanderResult {
    ProfileCurve curve;
    double r0 = 0.0;                     // distance of the closest point to the origin
    std::array<double, 2> arguments{};   // asymptotic ray arguments
    double shooting_residual = 0.0;
};

/// Self-expander V = <x, nu>/2 with asymptotic arguments {0, angle_gap - pi/2},
/// i.e. the planes of arguments 0 and pi/2 + angle_gap.
ExpanderResult expander_profile(double angle_gap, const ExpanderConfig& config = {});

/// max |V - <gamma, i gamma_s>/2| over interior samples with |gamma| <= radius.
double expander_residual(const ProfileCurve& curve, double radius);

} // namespace lmcf
