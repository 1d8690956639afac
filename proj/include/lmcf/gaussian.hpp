#pragma once

// Gaussian-weighted analysis of (rescaled) snapshots. Weights are e^{-|x|^2/4} dA.

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lmcf/flow.hpp"
#include "lmcf/surfaces.hpp"

namespace lmcf {

/// Scalar samples on quadrature nodes of a snapshot.
struct WeightedScalarField {
    std::vector<QuadNode> nodes;
    std::vector<double> values;

    void validate() const;
    std::size_t size() const { return values.size(); }
};

/// Nodes of the Gaussian e^{-|x|^2/4} (centre 0, scale 1) with values f(node).
WeightedScalarField sample_field(const ProfileCurve& c, const std::function<double(const QuadNode&)>& f,
                                 const QuadOptions& opt = {});
WeightedScalarField sample_field(const ParamSurface& s, const std::function<double(const QuadNode&)>& f,
                                 const QuadOptions& opt = {});
/// Lagrangian angle as a field.
WeightedScalarField angle_field(const ProfileCurve& c, const QuadOptions& opt = {});
WeightedScalarField angle_field(const ParamSurface& s, const QuadOptions& opt = {});

double weighted_mass(const WeightedScalarField& f);
double weighted_mean(const WeightedScalarField& f);
/// sqrt of the integral of f^2 e^{-|x|^2/4}.
double weighted_norm(const WeightedScalarField& f);
/// Norm of f minus its weighted mean.
double centered_norm(const WeightedScalarField& f);

/// (theta - mean) / ||theta - mean||. Throws ConstantField when the norm is below guard.
WeightedScalarField normalized_angle(const WeightedScalarField& theta, double guard = 1e-12);

// Hermite spectrum ---------------------------------------------------------------

/// Polynomial in (x, y) with coefficient c[i][j] of x^i y^j.
struct Polynomial2 {
    std::vector<std::vector<double>> c;

    int degree() const;
    double operator()(double x, double y) const;
    Polynomial2 operator+(const Polynomial2& o) const;
    Polynomial2 operator*(double s) const;
    bool operator==(const Polynomial2& o) const;
};

/// Drift operator -Laplacian + (1/2) x . grad, exact on coefficients.
Polynomial2 drift_operator(const Polynomial2& p);

/// Monic 1-D Hermite polynomial for the weight e^{-x^2/4}: H_{k+1} = x H_k - 2k H_{k-1}.
std::vector<double> hermite_1d(int k);

struct HermiteFunction {
    int k1 = 0, k2 = 0;
    Polynomial2 poly;
    double amplitude = 1.0;

    int degree() const { return k1 + k2; }
    double eigenvalue() const { return 0.5 * (k1 + k2); }
    double operator()(double x, double y) const { return amplitude * poly(x, y); }
};

constexpr int kMaxHermiteDegree = 12;
HermiteFunction hermite(int k1, int k2);
/// Solution of the drift heat equation u_tau = -L u started at h: e^{-(k1+k2) tau / 2} h.
HermiteFunction drift_heat_evolve(const HermiteFunction& h, double tau);
/// Integral over the plane of (H_k1(x) H_k2(y))^2 e^{-|x|^2/4} = 4 pi 2^{k1+k2} k1! k2!.
double hermite_norm2(int k1, int k2);

enum class ThreeAnnulus { HypothesisFailed, ImplicationHolds, ImplicationViolated };
std::string to_string(ThreeAnnulus r);

/// Tests: n1 >= e^{s/2} n0  implies  n2 >= e^{s/2} n1, with relative tolerance 1e-9.
ThreeAnnulus three_annulus_check(const std::array<double, 3>& norms, double s);

// Branches and angle limits --------------------------------------------------------

/// Per-node branch: 0 for the first summand, 1 for the second, split at the neck
/// (global minimum of |gamma|). Throws BranchAmbiguous for closed or several components.
std::vector<int> branch_labels(const ProfileCurve& c, const std::vector<QuadNode>& nodes);

struct LabeledField {
    double tau = 0.0;
    WeightedScalarField theta;
    std::vector<int> branch;
};

LabeledField label_snapshot(const RescaledSnapshot& s, bool swap_branches = false, const QuadOptions& opt = {});

struct Annulus {
    double inner = 1.0, outer = 2.0;
};

struct AngleLimitRow {
    double tau = 0.0;
    std::array<double, 2> means{};
    double residual = 0.0;
    double norm = 0.0;  // ||theta - mean|| before normalization
};

struct AngleLimit {
    std::array<double, 2> means{};
    double residual = 0.0;
    std::vector<AngleLimitRow> rows;
};

AngleLimit angle_limit(const std::vector<LabeledField>& fields, const Annulus& annulus = {});

/// Profile argument of each branch on the annulus: half the argument of the
/// weighted sum of z1^2 + z2^2 (which equals gamma^2 on circle orbits).
std::array<double, 2> branch_directions(const LabeledField& f, const Annulus& annulus = {});

enum class Nondegeneracy { Nondegenerate, Reversed, DegenerateOrUndetermined };
std::string to_string(Nondegeneracy v);

struct NondegOptions {
    double tau_lo = 4.0, tau_hi = 6.0, tau_step = 0.25;
    Annulus annulus;
    double tol = 0.05;
    // Window (relative to tau = 0) for the slow-decay check on the annulus.
    double slow_lo = 0.0, slow_hi = 1.0;
    // Rate parameter for the three-annulus check on consecutive unit steps.
    double three_annulus_s = -1.5;
    bool swap_branches = false;
    bool use_extrapolated_T0 = true;
    QuadOptions quad;
};

struct NondegResult {
    Nondegeneracy verdict = Nondegeneracy::DegenerateOrUndetermined;
    AngleLimit limit;
    double expected = 0.0;  // (8 pi)^{-1/2}
    double slowdecay_s = 0.0;
    double kappa0 = 0.0;    // angle gap between the two ray ends
    std::vector<std::pair<double, ThreeAnnulus>> three_annulus;
    std::optional<std::string> error;  // set when labelling failed
};

/// Rescales about (0, T0), computes branch means on the late window and the slow-decay gap.
NondegResult classify_nondegenerate(const FlowTrajectory& traj, const FlowEvent& pinch, const NondegOptions& opt = {});

} // namespace lmcf
