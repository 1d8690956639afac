#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lmcf/complexgeom.hpp"
#include "lmcf/profile.hpp"

namespace lmcf {

enum class SurfaceKind { Plane, PlanePair, Lawlor, Sheared, EquivariantProfile };
std::string to_string(SurfaceKind k);

struct ChartJet {
    Point4 x;
    Vec4 du, da;            // first derivatives
    Vec4 duu, dua, daa;     // second derivatives
};

/// One chart (u, a) -> C^2 with a periodic in [0, 2 pi).
struct SurfaceComponent {
    SurfaceKind kind = SurfaceKind::Plane;
    std::function<ChartJet(double, double)> jet;
    double u_min = 0.0, u_max = 1.0;
    // Infinite ends: u_range(R) returns a u-interval containing every chart point
    // with |x| <= R. Finite charts return their own domain.
    bool infinite = false;
    std::function<std::array<double, 2>(double)> u_range;
    bool closed_u = false;
    // Reference value for lifting the angle at parameter u.
    std::function<double(double)> angle_hint;
    // Set for equivariant profile components (Gaussian integrals reduce to 1-D).
    std::shared_ptr<const ProfileComponent> profile;

    Point4 operator()(double u, double a) const { return jet(u, a).x; }
};

struct ParamSurface {
    std::vector<SurfaceComponent> components;
};

struct ScenarioBounds {
    double K0 = 1.0, kappa0 = 0.05, epsilon0 = 1.0, R0 = 1.0;
    void validate() const;
};

struct QuadOptions {
    int order = 8;          // Gauss-Legendre points per panel direction
    double tol = 1e-12;     // Gaussian truncation tolerance
    int max_depth = 24;
    int alpha_points = 0;   // 0: integrate alpha analytically on profiles (x0 = 0 only)
};

// Plane components -----------------------------------------------------------
SurfaceComponent plane_component(const LagPlane& plane, Point4 base = {});
ParamSurface plane_surface(const LagPlane& plane, Point4 base = {});
ParamSurface plane_pair_surface(const PlanePair& pair);

/// Special Lagrangian W1 W2 = t' in the coordinates of w_coordinates(., b).
/// Chart (u, phi): W1 = e^u e^{i phi}, W2 = t' e^{-u} e^{-i phi}.
ParamSurface lawlor_neck(cplx t_prime, double b);

/// Lawlor: gamma = eps (t + i)^{p/2} with p = 1 + 2 kappa / pi, an exact Lawlor neck
/// for kappa = 0 whose angle moves monotonically by 2 kappa. Corner: polar bridge
/// between the two rays, controlled by smoothing.
enum class BridgeShape { Lawlor, Corner };

struct BridgeOptions {
    BridgeShape shape = BridgeShape::Lawlor;
    double extent = 5.0;    // radius where the profile is cut and continued as rays
    double h = 0.01;        // target spacing
    double grading = 0.1;   // local spacing clamp(grading |gamma|, h_floor, h)
    double h_floor = 1e-6;
};

/// Widened connect sum profile from the ray of argument pi/2 + kappa to the ray of
/// argument 0, with min |gamma| = neck_scale for the Lawlor bridge. The corner bridge
/// is gamma = t for t >= s, gamma = -t e^{i(pi/2+kappa)} for t <= -s with s = neck_scale,
/// and a polar bridge in between; smoothing is ignored for the Lawlor bridge.
ProfileCurve connect_sum_profile(double kappa, double neck_scale, double smoothing, const BridgeOptions& opts = {});
/// Corner bridge parametrization.
cplx connect_sum_point(double kappa, double neck_scale, double smoothing, double t);
/// Widened Lawlor bridge parametrization, t in R.
cplx lawlor_bridge_point(double kappa, double neck_scale, double t);

ParamSurface profile_surface(const ProfileCurve& curve);

/// Time-kappa flow of H = y1^2/2: (x1, y1, x2, y2) -> (x1 - kappa y1, y1, x2, y2).
Point4 shear_point(const Point4& p, double kappa);
ParamSurface shear_perturb(const ParamSurface& s, double kappa);

/// Graded Lagrangian angle. Throws DegeneratePoint at non-immersed parameters.
double lagrangian_angle(const ParamSurface& s, std::size_t component, double u, double a);

/// Gaussian quadrature node: x, weight exp(-|x - x0|^2 / (4 r^2)) dA, angle, component.
/// Profile nodes with analytic alpha integration sit at alpha = 0 and carry the
/// whole orbit's weight.
struct QuadNode {
    Point4 x;
    double w = 0.0;
    double theta = 0.0;
    int component = 0;
    double u = 0.0;
};

std::vector<QuadNode> gaussian_nodes(const ParamSurface& s, const Point4& x0, double r, const QuadOptions& opt = {},
                                     bool with_angles = false);
std::vector<QuadNode> gaussian_nodes(const ProfileCurve& c, const Point4& x0, double r, const QuadOptions& opt = {},
                                     bool with_angles = false);

double gaussian_area(const ParamSurface& s, const Point4& x0, double r0, const QuadOptions& opt = {});
double gaussian_area(const ProfileCurve& c, const Point4& x0, double r0, const QuadOptions& opt = {});
/// Reference implementations without OpenMP, used by tests and benchmarks.
double gaussian_area_serial(const ProfileCurve& c, const Point4& x0, double r0, const QuadOptions& opt = {});

/// Excess relative to two planes, with the optimal reference angle.
struct ExcessResult {
    double total = 0.0;
    double mass = 0.0;
    double angle_term = 0.0;
    double theta0 = 0.0;
};
ExcessResult excess(const ParamSurface& s, const QuadOptions& opt = {});

struct GraphicalityResult {
    double c = 0.0;
    // Per sampled point on the annulus: plane index (0 or 1), chart component, u, a.
    struct Sample {
        int plane = 0;
        int component = 0;
        double u = 0.0, a = 0.0;
    };
    std::vector<Sample> samples;
};

struct GraphicalityOptions {
    int samples_u = 48;
    int samples_a = 48;
};

/// Smallest c such that s is c-graphical over the plane pair on the annulus
/// r <= |x| <= R, with the norm max(|x|^-1 |v|, |Dv|, |x| |D^2 v|, |x|^2 |D^3 v|).
GraphicalityResult graphicality(const ParamSurface& s, const PlanePair& planes, double r, double R,
                                const GraphicalityOptions& opt = {});

struct SelfIntersection {
    int component_a = 0, component_b = 0;
    double u_a = 0.0, u_b = 0.0;
    bool antipodal = false;
};

/// Pairs with gamma(a) = gamma(b) or gamma(a) = -gamma(b) up to half the local spacing.
std::vector<SelfIntersection> embeddedness_check(const ProfileCurve& c);

} // namespace lmcf
