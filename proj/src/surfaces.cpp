#include "lmcf/surfaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "lmcf/errors.hpp"
#include "lmcf/gaussian_kernel.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/quadrature.hpp"

namespace lmcf {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Point4 embed(cplx g, double a) { return Point4::from_complex(g * std::cos(a), g * std::sin(a)); }
} // namespace

std::string to_string(SurfaceKind k) {
    switch (k) {
    case SurfaceKind::Plane: return "plane";
    case SurfaceKind::PlanePair: return "plane_pair";
    case SurfaceKind::Lawlor: return "lawlor";
    case SurfaceKind::Sheared: return "sheared";
    case SurfaceKind::EquivariantProfile: return "equivariant_profile";
    }
    return "unknown";
}

void ScenarioBounds::validate() const {
    if (!(K0 > 0 && kappa0 > 0 && epsilon0 > 0 && R0 > 0)) throw ConfigInvalid("scenario bounds must be positive");
    if (!(kappa0 < 0.25 * kPi)) throw ConfigInvalid("kappa0 must be below pi/4");
}

// ---------------------------------------------------------------------------
// Constructors

SurfaceComponent plane_component(const LagPlane& plane, Point4 base) {
    SurfaceComponent c;
    c.kind = SurfaceKind::Plane;
    const Vec4 e1 = plane.e1, e2 = plane.e2;
    c.jet = [=](double rho, double a) {
        const double ca = std::cos(a), sa = std::sin(a);
        const Vec4 radial = ca * e1 + sa * e2, angular = -sa * e1 + ca * e2;
        return ChartJet{base + rho * radial, radial, rho * angular, Vec4{}, angular, -rho * radial};
    };
    c.u_min = 0.0;
    c.u_max = INFINITY;
    c.infinite = true;
    const double shift = norm(base);
    c.u_range = [shift](double R) { return std::array<double, 2>{0.0, R + shift}; };
    const double angle = plane.angle;
    c.angle_hint = [angle](double) { return angle; };
    return c;
}

ParamSurface plane_surface(const LagPlane& plane, Point4 base) { return {{plane_component(plane, base)}}; }

ParamSurface plane_pair_surface(const PlanePair& pair) {
    ParamSurface s{{plane_component(pair.planes[0], pair.base), plane_component(pair.planes[1], pair.base)}};
    for (auto& c : s.components) c.kind = SurfaceKind::PlanePair;
    return s;
}

ParamSurface lawlor_neck(cplx t_prime, double b) {
    if (std::abs(t_prime) == 0.0) throw ZeroParameter("lawlor_neck needs t' != 0");
    SurfaceComponent c;
    c.kind = SurfaceKind::Lawlor;
    auto lin = [b](cplx w1, cplx w2) { return from_w_coordinates({w1, w2}, b); };
    c.jet = [=](double u, double phi) {
        const cplx w1 = std::exp(cplx{u, phi});
        const cplx w2 = t_prime * std::exp(cplx{-u, -phi});
        const cplx i{0.0, 1.0};
        return ChartJet{lin(w1, w2), lin(w1, -w2), lin(i * w1, -i * w2),
                        lin(w1, w2), lin(i * w1, i * w2), lin(-w1, -w2)};
    };
    c.infinite = true;
    c.u_min = -INFINITY;
    c.u_max = INFINITY;
    const double k = 2.0 + std::abs(b), m = std::abs(t_prime);
    c.u_range = [k, m](double R) {
        R = std::max(R, 1e-300);
        return std::array<double, 2>{std::log(m / (k * R)), std::log(k * R)};
    };
    const double ref = std::arg(holomorphic_volume(c.jet(0.0, 0.0).du, c.jet(0.0, 0.0).da));
    c.angle_hint = [ref](double) { return ref; };
    return {{c}};
}

// Smooth step from 0 to 1 on [0, 1], flat to all orders at both ends.
static double smoothstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

static double bump(double x) {
    if (std::abs(x) >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - x * x));
}

cplx connect_sum_point(double kappa, double neck_scale, double smoothing, double t) {
    const double beta = 0.5 * kPi + kappa;
    const double ns = neck_scale;
    if (t >= ns) return {t, 0.0};
    if (t <= -ns) return -t * std::polar(1.0, beta);
    const double phi = beta * (1.0 - smoothstep((t + ns) / (2.0 * ns)));
    const double r = std::sqrt(t * t + smoothing * smoothing * ns * ns * bump(t / ns));
    return std::polar(r, phi);
}

cplx lawlor_bridge_point(double kappa, double neck_scale, double t) {
    const double p = 1.0 + 2.0 * kappa / kPi;
    return neck_scale * std::pow(cplx{t, 1.0}, 0.5 * p);
}

ProfileCurve connect_sum_profile(double kappa, double neck_scale, double smoothing, const BridgeOptions& opts) {
    if (!(neck_scale > 0.0)) throw BadBridge("neck_scale must be positive");
    if (!(kappa >= 0.0 && kappa < 0.25 * kPi)) throw BadBridge("kappa must lie in [0, pi/4)");
    if (!(opts.extent > 2.5 * neck_scale)) throw BadBridge("extent must exceed the bridge");
    const double beta = 0.5 * kPi + kappa;
    const bool lawlor = opts.shape == BridgeShape::Lawlor;
    // The Lawlor bridge only approaches its rays; its argument is blended onto them
    // between 0.4 and 0.8 extent so the outer part is exactly straight.
    const double r1 = 0.4 * opts.extent, r2 = 0.8 * opts.extent;
    auto gamma = [&](double t) {
        if (!lawlor) return connect_sum_point(kappa, neck_scale, smoothing, t);
        const cplx z = lawlor_bridge_point(kappa, neck_scale, t);
        const double r = std::abs(z), w = smoothstep((r - r1) / (r2 - r1));
        if (w == 0.0) return z;
        const double a = std::arg(z);
        return std::polar(r, a + w * ((t < 0.0 ? beta : 0.0) - a));
    };
    auto spacing = [&](cplx z) {
        const double g = opts.grading > 0.0 ? opts.grading * std::abs(z) : opts.h;
        return std::clamp(g, opts.h_floor, opts.h);
    };
    // Parameter range reaching |gamma| = extent.
    double t_end = opts.extent;
    if (lawlor) {
        const double m = std::pow(opts.extent / neck_scale, 2.0 / (1.0 + 2.0 * kappa / kPi));
        t_end = std::sqrt(m * m - 1.0);
    }

    // Check the bridge on a fine grid before sampling.
    double min_r = INFINITY;
    const int fine = 20000;
    const double span = lawlor ? std::min(t_end, 50.0) : neck_scale;
    cplx prev = gamma(-span);
    for (int k = 0; k <= fine; ++k) {
        const double t = -span + 2.0 * span * k / fine;
        const cplx z = gamma(t);
        const double arg = std::arg(z);
        if (arg < -1e-12 || arg > beta + 1e-12) throw BadBridge("bridge leaves the sector [0, pi/2 + kappa]");
        min_r = std::min(min_r, std::abs(z));
        if (k > 0) {
            if (!(std::abs(z - prev) > 0.0)) throw BadBridge("bridge parametrization is singular");
            // |gamma| must fall towards t = 0 and rise after it, otherwise the bridge folds back.
            const double dr = std::abs(z) - std::abs(prev);
            if ((t <= 0.0 && dr > 1e-14 * neck_scale) || (t > 0.0 && dr < -1e-14 * neck_scale))
                throw BadBridge("bridge radius is not monotone on either side of the neck; reduce smoothing");
        }
        prev = z;
    }
    const double c = min_r / neck_scale;
    if (!(c > 1e-6)) throw BadBridge("bridge reaches the origin; increase smoothing");

    ProfileComponent comp;
    comp.ray_front = comp.ray_back = true;
    comp.theta_ref = 2.0 * kappa;
    double t = -t_end;
    comp.z.push_back(gamma(t));
    while (t < t_end) {
        const cplx z = gamma(t);
        const double dt_probe = 1e-7 * std::max(1.0, std::abs(t));
        const double speed = std::abs(gamma(t + dt_probe) - gamma(t - dt_probe)) / (2.0 * dt_probe);
        double step = spacing(z) / std::max(speed, 1e-12);
        if (t + step > t_end - 0.25 * step) step = t_end - t;
        t += step;
        comp.z.push_back(gamma(t));
    }
    ProfileCurve curve;
    curve.components.push_back(std::move(comp));
    curve.first_summand_back = true;
    curve.bridge_constant = c;
    curve.validate();
    if (!embeddedness_check(curve).empty()) throw BadBridge("bridge samples are not embedded");
    curve.injective = true;
    return curve;
}

ParamSurface profile_surface(const ProfileCurve& curve) {
    ParamSurface s;
    for (const auto& pc : curve.components) {
        auto shared = std::make_shared<const ProfileComponent>(pc);
        auto spline = std::make_shared<const ProfileSpline>(pc);
        auto node_angles = std::make_shared<const std::vector<double>>(pc.angles());
        const double L = spline->length();
        const cplx z0 = pc.z.front(), zn = pc.z.back();
        const bool front = !pc.closed && pc.ray_front && std::abs(z0) > 0.0;
        const bool back = !pc.closed && pc.ray_back && std::abs(zn) > 0.0;
        const cplx d0 = front ? z0 / std::abs(z0) : cplx{}, dn = back ? zn / std::abs(zn) : cplx{};

        SurfaceComponent c;
        c.kind = SurfaceKind::EquivariantProfile;
        c.profile = shared;
        c.closed_u = pc.closed;
        c.jet = [=](double u, double a) {
            cplx g, g1, g2;
            if (front && u < 0.0) {
                g = z0 - u * d0;
                g1 = -d0;
            } else if (back && u > L) {
                g = zn + (u - L) * dn;
                g1 = dn;
            } else {
                g = spline->eval(u);
                g1 = spline->deriv(u);
                g2 = spline->second(u);
            }
            const double ca = std::cos(a), sa = std::sin(a);
            return ChartJet{embed(g, a), Point4::from_complex(g1 * ca, g1 * sa), Point4::from_complex(-g * sa, g * ca),
                            Point4::from_complex(g2 * ca, g2 * sa), Point4::from_complex(-g1 * sa, g1 * ca),
                            Point4::from_complex(-g * ca, -g * sa)};
        };
        c.u_min = front ? -INFINITY : 0.0;
        c.u_max = back ? INFINITY : L;
        c.infinite = front || back;
        const double r0 = std::abs(z0), rn = std::abs(zn);
        c.u_range = [=](double R) {
            return std::array<double, 2>{front ? -std::max(0.0, R - r0) : 0.0, back ? L + std::max(0.0, R - rn) : L};
        };
        const std::vector<double> knots = spline->knots();
        c.angle_hint = [=](double u) {
            const auto& th = *node_angles;
            if (u <= 0.0) return th.front();
            if (u >= knots[th.size() - 1]) return pc.closed ? th.front() : th.back();
            const auto it = std::upper_bound(knots.begin(), knots.end(), u);
            const std::size_t k = static_cast<std::size_t>(it - knots.begin()) - 1;
            return th[std::min(k, th.size() - 1)];
        };
        s.components.push_back(std::move(c));
    }
    return s;
}

Point4 shear_point(const Point4& p, double kappa) { return {p.x1 - kappa * p.y1, p.y1, p.x2, p.y2}; }

ParamSurface shear_perturb(const ParamSurface& s, double kappa) {
    if (!(std::abs(kappa) < 0.5)) throw OutOfRange("shear parameter must satisfy |kappa| < 0.5");
    ParamSurface out;
    for (const auto& c : s.components) {
        SurfaceComponent d = c;
        d.kind = SurfaceKind::Sheared;
        d.profile.reset();
        auto jet = c.jet;
        d.jet = [jet, kappa](double u, double a) {
            ChartJet j = jet(u, a);
            for (Vec4* v : {&j.x, &j.du, &j.da, &j.duu, &j.dua, &j.daa}) *v = shear_point(*v, kappa);
            return j;
        };
        auto range = c.u_range;
        const double grow = 1.0 + std::abs(kappa);
        if (range) d.u_range = [range, grow](double R) { return range(R * grow); };
        // Lift near the sheared image of the reference frame.
        auto hint = c.angle_hint;
        d.angle_hint = [hint, kappa](double u) { return hint(u) + std::atan(kappa); };
        out.components.push_back(std::move(d));
    }
    return out;
}

double lagrangian_angle(const ParamSurface& s, std::size_t component, double u, double a) {
    const SurfaceComponent& c = s.components.at(component);
    if (c.kind == SurfaceKind::Plane || c.kind == SurfaceKind::PlanePair) return c.angle_hint(u);
    const ChartJet j = c.jet(u, a);
    const double area = gram_area(j.du, j.da);
    if (!(area > 1e-14 * std::max(1.0, norm2(j.x)))) throw DegeneratePoint("chart is not immersed here");
    return lift_angle(std::arg(holomorphic_volume(j.du, j.da)), c.angle_hint(u));
}

// ---------------------------------------------------------------------------
// Gaussian quadrature on charts

namespace {

struct Panel {
    double u0, u1, a0, a1;
    int depth;
};

double cutoff_radius(double r, double tol) { return r * std::sqrt(4.0 * std::log(1.0 / tol)); }

std::vector<Panel> leaf_panels(const SurfaceComponent& c, const Point4& x0, double r, const QuadOptions& opt) {
    const double Rcut = cutoff_radius(r, opt.tol);
    double ulo = c.u_min, uhi = c.u_max;
    if (c.infinite) {
        const auto range = c.u_range(norm(x0) + 1.05 * Rcut);
        ulo = std::max(ulo, range[0]);
        uhi = std::min(uhi, range[1]);
    }
    if (!(uhi > ulo)) return {};
    const int nu0 = 16, na0 = 16;
    std::vector<Panel> stack, leaves;
    for (int i = nu0 - 1; i >= 0; --i)
        for (int k = na0 - 1; k >= 0; --k)
            stack.push_back({ulo + (uhi - ulo) * i / nu0, ulo + (uhi - ulo) * (i + 1) / nu0, kTwoPi * k / na0,
                             kTwoPi * (k + 1) / na0, 0});
    while (!stack.empty()) {
        const Panel p = stack.back();
        stack.pop_back();
        const double um = 0.5 * (p.u0 + p.u1), am = 0.5 * (p.a0 + p.a1);
        const Point4 centre = c(um, am);
        double diam = 0.0;
        for (double u : {p.u0, um, p.u1})
            for (double a : {p.a0, am, p.a1}) diam = std::max(diam, norm(c(u, a) - centre));
        diam *= 1.25;
        if (norm(centre - x0) - diam > Rcut) continue;
        if (diam > 2.0 * r && p.depth < opt.max_depth) {
            const int d = p.depth + 1;
            stack.push_back({p.u0, um, p.a0, am, d});
            stack.push_back({p.u0, um, am, p.a1, d});
            stack.push_back({um, p.u1, p.a0, am, d});
            stack.push_back({um, p.u1, am, p.a1, d});
            continue;
        }
        leaves.push_back(p);
    }
    return leaves;
}

void check_truncation(const SurfaceComponent& c, const Point4& x0, double r, const QuadOptions& opt) {
    if (c.infinite || c.closed_u) return;
    const double Rcut = cutoff_radius(r, opt.tol);
    for (double u : {c.u_min, c.u_max})
        for (int k = 0; k < 64; ++k)
            if (norm(c(u, kTwoPi * k / 64) - x0) < Rcut)
                throw TruncationError("chart boundary lies inside the Gaussian truncation radius");
}

template <class Emit>
void panel_nodes(const SurfaceComponent& c, const Panel& p, const Point4& x0, double r, const quad::Rule& rule,
                 Emit&& emit) {
    const double hu = 0.5 * (p.u1 - p.u0), ha = 0.5 * (p.a1 - p.a0);
    const double inv = 1.0 / (4.0 * r * r);
    for (std::size_t i = 0; i < rule.size(); ++i) {
        const double u = p.u0 + hu * (1.0 + rule.nodes[i]);
        for (std::size_t k = 0; k < rule.size(); ++k) {
            const double a = p.a0 + ha * (1.0 + rule.nodes[k]);
            const ChartJet j = c.jet(u, a);
            const double w = rule.weights[i] * rule.weights[k] * hu * ha * gram_area(j.du, j.da) *
                             std::exp(-norm2(j.x - x0) * inv);
            emit(u, a, j, w);
        }
    }
}

} // namespace

std::vector<QuadNode> gaussian_nodes(const ParamSurface& s, const Point4& x0, double r, const QuadOptions& opt,
                                     bool with_angles) {
    if (!(r > 0.0)) throw OutOfRange("Gaussian scale must be positive");
    std::vector<QuadNode> out;
    const quad::Rule& rule = quad::gauss_legendre(opt.order);
    for (std::size_t ci = 0; ci < s.components.size(); ++ci) {
        const SurfaceComponent& c = s.components[ci];
        if (c.profile && c.kind == SurfaceKind::EquivariantProfile) {
            ProfileCurve single;
            single.components.push_back(*c.profile);
            auto nodes = gaussian_nodes(single, x0, r, opt, with_angles);
            for (auto& n : nodes) {
                n.component = static_cast<int>(ci);
                out.push_back(n);
            }
            continue;
        }
        check_truncation(c, x0, r, opt);
        for (const Panel& p : leaf_panels(c, x0, r, opt)) {
            panel_nodes(c, p, x0, r, rule, [&](double u, double a, const ChartJet& j, double w) {
                QuadNode n{j.x, w, 0.0, static_cast<int>(ci), u};
                if (with_angles) {
                    n.theta = (c.kind == SurfaceKind::Plane || c.kind == SurfaceKind::PlanePair)
                                  ? c.angle_hint(u)
                                  : lift_angle(std::arg(holomorphic_volume(j.du, j.da)), c.angle_hint(u));
                }
                (void)a;
                out.push_back(n);
            });
        }
    }
    return out;
}

double gaussian_area(const ParamSurface& s, const Point4& x0, double r0, const QuadOptions& opt) {
    if (!(r0 > 0.0)) throw OutOfRange("Gaussian scale must be positive");
    const quad::Rule& rule = quad::gauss_legendre(opt.order);
    double total = 0.0;
    for (const auto& c : s.components) {
        if (c.profile && c.kind == SurfaceKind::EquivariantProfile) {
            ProfileCurve single;
            single.components.push_back(*c.profile);
            total += detail::profile_gaussian_sum(single, x0, r0, opt, true);
            continue;
        }
        check_truncation(c, x0, r0, opt);
        const auto leaves = leaf_panels(c, x0, r0, opt);
        total += par::blocked_sum(leaves.size(), [&](std::size_t i) {
            double acc = 0.0;
            panel_nodes(c, leaves[i], x0, r0, rule, [&](double, double, const ChartJet&, double w) { acc += w; });
            return acc;
        });
    }
    return total / (4.0 * kPi * r0 * r0);
}

// ---------------------------------------------------------------------------
// Gaussian quadrature on profile curves

double gaussian_area(const ProfileCurve& c, const Point4& x0, double r0, const QuadOptions& opt) {
    return detail::profile_gaussian_sum(c, x0, r0, opt, true) / (4.0 * kPi * r0 * r0);
}

double gaussian_area_serial(const ProfileCurve& c, const Point4& x0, double r0, const QuadOptions& opt) {
    return detail::profile_gaussian_sum(c, x0, r0, opt, false) / (4.0 * kPi * r0 * r0);
}

std::vector<QuadNode> gaussian_nodes(const ProfileCurve& c, const Point4& x0, double r, const QuadOptions& opt,
                                     bool with_angles) {
    return detail::profile_gaussian_nodes(c, x0, r, opt, with_angles);
}

ExcessResult excess(const ParamSurface& s, const QuadOptions& opt) {
    const auto nodes = gaussian_nodes(s, Point4{}, 1.0, opt, true);
    ExcessResult r;
    double m1 = 0.0;
    for (const auto& n : nodes) {
        r.mass += n.w;
        m1 += n.w * n.theta;
    }
    r.theta0 = m1 / r.mass;
    for (const auto& n : nodes) r.angle_term += n.w * (n.theta - r.theta0) * (n.theta - r.theta0);
    r.total = r.mass - 8.0 * kPi + r.angle_term;
    return r;
}

// ---------------------------------------------------------------------------
// Graphicality over a plane pair

namespace {

struct GraphPoint {
    double p1, p2;      // coordinates in the plane
    double v1, v2;      // normal displacement in the frame (J e1, J e2)
    double radius;
};

// Derivatives of a 2-vector field at pts[centre] from a weighted cubic fit over the stencil.
double graph_norm_at(const std::vector<GraphPoint>& pts, std::size_t centre, const std::vector<std::size_t>& stencil) {
    const GraphPoint& c = pts[centre];
    double scale = 0.0;
    for (std::size_t k : stencil) scale = std::max(scale, std::hypot(pts[k].p1 - c.p1, pts[k].p2 - c.p2));
    scale += 1e-300;
    const auto K = static_cast<Eigen::Index>(stencil.size());
    Eigen::MatrixXd A(K, 10);
    Eigen::MatrixXd B(K, 2);
    for (Eigen::Index r = 0; r < K; ++r) {
        const GraphPoint& q = pts[stencil[static_cast<std::size_t>(r)]];
        const double x = (q.p1 - c.p1) / scale, y = (q.p2 - c.p2) / scale;
        const double w = std::exp(-(x * x + y * y));
        const double row[10] = {1, x, y, x * x, x * y, y * y, x * x * x, x * x * y, x * y * y, y * y * y};
        for (int m = 0; m < 10; ++m) A(r, m) = w * row[m];
        B(r, 0) = w * q.v1;
        B(r, 1) = w * q.v2;
    }
    const Eigen::MatrixXd coef = A.colPivHouseholderQr().solve(B);
    double n0 = 0, n1 = 0, n2 = 0, n3 = 0;
    for (int comp = 0; comp < 2; ++comp) {
        auto a = [&](int m) { return coef(m, comp); };
        n0 += a(0) * a(0);
        const double s1 = 1.0 / scale, s2 = s1 * s1, s3 = s2 * s1;
        n1 += (a(1) * a(1) + a(2) * a(2)) * s2;
        // Hessian entries 2a3, a4, a4, 2a5
        n2 += (4 * a(3) * a(3) + 2 * a(4) * a(4) + 4 * a(5) * a(5)) * s2 * s2;
        // third derivatives: 6a6, 2a7 (x3), 2a8 (x3), 6a9
        n3 += (36 * a(6) * a(6) + 3 * 4 * a(7) * a(7) + 3 * 4 * a(8) * a(8) + 36 * a(9) * a(9)) * s3 * s3;
    }
    const double R = c.radius;
    return std::max({std::sqrt(n0) / R, std::sqrt(n1), R * std::sqrt(n2), R * R * std::sqrt(n3)});
}

// Samples of one parameter run on a (u, alpha) index grid; -1 where the sample was rejected.
struct RunGrid {
    std::vector<std::vector<long>> idx;  // [iu][ia]
};

} // namespace

GraphicalityResult graphicality(const ParamSurface& s, const PlanePair& planes, double r, double R,
                                const GraphicalityOptions& opt) {
    if (!(R > r && r > 0.0)) throw OutOfRange("annulus needs 0 < r < R");
    GraphicalityResult result;
    if (opt.samples_u < 5 || opt.samples_a < 5) throw OutOfRange("graphicality needs at least 5 samples per direction");
    std::array<std::vector<GraphPoint>, 2> pts;
    std::vector<RunGrid> grids;
    std::array<std::array<int, 2>, 2> orientation{};  // [plane][sign]
    for (std::size_t ci = 0; ci < s.components.size(); ++ci) {
        const SurfaceComponent& c = s.components[ci];
        double ulo = c.u_min, uhi = c.u_max;
        if (c.infinite) {
            const auto range = c.u_range(R + norm(planes.base));
            ulo = std::max(ulo, range[0]);
            uhi = std::min(uhi, range[1]);
        }
        // Profile charts can be much longer than the annulus: sample only the
        // parameter runs that come near it.
        std::vector<std::array<double, 2>> runs{{ulo, uhi}};
        if (c.profile && norm(planes.base) == 0.0) {
            const auto& z = c.profile->z;
            const auto arc = c.profile->arclength();
            const double L = arc.back();
            runs.clear();
            if (c.profile->ray_front && !c.profile->closed && std::abs(z.front()) < R)
                runs.push_back({std::abs(z.front()) - R, 0.0});
            std::size_t j = 0;
            while (j < z.size()) {
                auto near = [&](std::size_t k) { return std::abs(z[k]) >= r / 1.5 && std::abs(z[k]) <= 1.5 * R; };
                if (!near(j)) {
                    ++j;
                    continue;
                }
                const std::size_t first = j;
                while (j < z.size() && near(j)) ++j;
                runs.push_back({arc[first > 0 ? first - 1 : 0], arc[std::min(j, z.size() - 1)]});
            }
            if (c.profile->ray_back && !c.profile->closed && std::abs(z.back()) < R)
                runs.push_back({L, L + R - std::abs(z.back())});
        } else if (std::isfinite(ulo) && std::isfinite(uhi)) {
            // Generic chart: scan for the u-runs where some alpha comes near the annulus.
            constexpr int kScanU = 4096, kScanA = 16;
            const double du = (uhi - ulo) / kScanU;
            auto near = [&](int i) {
                for (int k = 0; k < kScanA; ++k) {
                    const double rad = norm(c.jet(ulo + du * i, kTwoPi * k / kScanA).x - planes.base);
                    if (rad >= r / 1.5 && rad <= 1.5 * R) return true;
                }
                return false;
            };
            runs.clear();
            for (int i = 0; i <= kScanU;) {
                if (!near(i)) {
                    ++i;
                    continue;
                }
                const int first = i;
                while (i <= kScanU && near(i)) ++i;
                runs.push_back({ulo + du * std::max(first - 1, 0), ulo + du * std::min(i, kScanU)});
            }
        }
        for (const auto& run : runs) {
            RunGrid grid;
            grid.idx.assign(static_cast<std::size_t>(opt.samples_u), std::vector<long>(static_cast<std::size_t>(opt.samples_a), -1));
            for (int i = 0; i < opt.samples_u; ++i) {
                const double u = run[0] + (run[1] - run[0]) * (i + 0.5) / opt.samples_u;
                for (int k = 0; k < opt.samples_a; ++k) {
                    const double a = kTwoPi * (k + 0.5) / opt.samples_a;
                    const ChartJet j = c.jet(u, a);
                    const Vec4 d = j.x - planes.base;
                    const double rad = norm(d);
                    if (rad < r || rad > R) continue;
                    const double d0 = planes.planes[0].distance(j.x, planes.base);
                    const double d1 = planes.planes[1].distance(j.x, planes.base);
                    const int pi = d1 < d0 ? 1 : 0;
                    const LagPlane& pl = planes.planes[pi];
                    if (std::min(d0, d1) > 0.5 * rad) throw NotGraphical("point is far from both planes");
                    const double det = dot(j.du, pl.e1) * dot(j.da, pl.e2) - dot(j.du, pl.e2) * dot(j.da, pl.e1);
                    const double area = gram_area(j.du, j.da);
                    if (std::abs(det) < 0.1 * area) throw NotGraphical("normal projection folds over");
                    orientation[pi][det > 0 ? 0 : 1] |= 1 << std::min<std::size_t>(ci, 30);
                    const Vec4 n1 = apply_J(pl.e1), n2 = apply_J(pl.e2);
                    grid.idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] =
                        static_cast<long>(pts[static_cast<std::size_t>(pi)].size()) * 2 + pi;
                    pts[static_cast<std::size_t>(pi)].push_back({dot(d, pl.e1), dot(d, pl.e2), dot(d, n1), dot(d, n2), rad});
                    result.samples.push_back({pi, static_cast<int>(ci), u, a});
                }
            }
            grids.push_back(std::move(grid));
        }
    }
    for (int pi = 0; pi < 2; ++pi)
        if (orientation[pi][0] & orientation[pi][1]) throw NotGraphical("projection changes orientation on a branch");

    // Cubic fits on 5 x 5 index stencils, shifted inwards at the annulus edges.
    const int nu = opt.samples_u, na = opt.samples_a;
    double c = 0.0;
    for (const RunGrid& g : grids) {
        auto at = [&](int i, int k) { return g.idx[static_cast<std::size_t>(i)][static_cast<std::size_t>(((k % na) + na) % na)]; };
        for (int i = 0; i < nu; ++i)
            for (int k = 0; k < na; ++k) {
                const long self = at(i, k);
                if (self < 0) continue;
                const int plane = static_cast<int>(self % 2);
                auto same = [&](int ii) { return ii >= 0 && ii < nu && at(ii, k) >= 0 && at(ii, k) % 2 == plane; };
                int lo = i, hi = i;
                while (same(lo - 1)) --lo;
                while (same(hi + 1)) ++hi;
                if (hi - lo < 4) throw NotGraphical("annulus crossing too short to resolve");
                const int start = std::clamp(i - 2, lo, hi - 4);
                std::vector<std::size_t> stencil;
                for (int ii = start; ii < start + 5; ++ii)
                    for (int kk = k - 2; kk <= k + 2; ++kk)
                        if (const long e = at(ii, kk); e >= 0 && e % 2 == plane) stencil.push_back(static_cast<std::size_t>(e / 2));
                c = std::max(c, graph_norm_at(pts[static_cast<std::size_t>(plane)], static_cast<std::size_t>(self / 2), stencil));
            }
    }
    result.c = c;
    return result;
}

// ---------------------------------------------------------------------------
// Embeddedness

namespace {

struct Seg {
    cplx a, b;
    int comp;
    std::size_t idx;
    bool neg;
    double lo, hi;  // x extent
};

double point_segment(cplx p, cplx a, cplx b) {
    const cplx d = b - a;
    const double L2 = std::norm(d);
    double t = L2 > 0 ? ((p - a) * std::conj(d)).real() / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::abs(p - (a + t * d));
}

double cross(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// Distance between segments and the parameter on the first one nearest to the second.
std::pair<double, double> segment_distance(const Seg& s, const Seg& t) {
    const cplx r = s.b - s.a, q = t.b - t.a;
    const double den = cross(r, q);
    if (den != 0.0) {
        const double u = cross(t.a - s.a, q) / den, v = cross(t.a - s.a, r) / den;
        if (u >= 0 && u <= 1 && v >= 0 && v <= 1) return {0.0, u};
    }
    double best = point_segment(s.a, t.a, t.b), at = 0.0;
    if (double d = point_segment(s.b, t.a, t.b); d < best) { best = d; at = 1.0; }
    if (double d = point_segment(t.a, s.a, s.b); d < best) { best = d; at = 0.5; }
    if (double d = point_segment(t.b, s.a, s.b); d < best) { best = d; at = 0.5; }
    return {best, at};
}

} // namespace

std::vector<SelfIntersection> embeddedness_check(const ProfileCurve& curve) {
    std::vector<Seg> segs;
    std::vector<std::vector<double>> arc;
    for (std::size_t ci = 0; ci < curve.components.size(); ++ci) {
        const auto& c = curve.components[ci];
        arc.push_back(c.arclength());
        for (std::size_t j = 0; j < c.segments(); ++j) {
            const cplx a = c.z[j], b = c.z[(j + 1) % c.z.size()];
            for (bool neg : {false, true}) {
                const cplx pa = neg ? -a : a, pb = neg ? -b : b;
                segs.push_back({pa, pb, static_cast<int>(ci), j, neg, std::min(pa.real(), pb.real()),
                                std::max(pa.real(), pb.real())});
            }
        }
    }
    double hmax = 0.0;
    for (const auto& s : segs) hmax = std::max(hmax, std::abs(s.b - s.a));
    std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.lo < y.lo; });

    struct Hit {
        int ca, cb;
        std::size_t ia, ib;
        double ua, ub;
        bool antipodal;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        const Seg& s = segs[i];
        const double hs = std::abs(s.b - s.a);
        for (std::size_t k = i + 1; k < segs.size() && segs[k].lo <= s.hi + 0.5 * hmax; ++k) {
            const Seg& t = segs[k];
            if (s.neg && t.neg) continue;
            const double ht = std::abs(t.b - t.a);
            const double tol = 0.5 * std::min(hs, ht);
            if (t.lo > s.hi + tol) continue;
            const double ylo = std::min(s.a.imag(), s.b.imag()), yhi = std::max(s.a.imag(), s.b.imag());
            const double tylo = std::min(t.a.imag(), t.b.imag()), tyhi = std::max(t.a.imag(), t.b.imag());
            if (tylo > yhi + tol || ylo > tyhi + tol) continue;
            const Seg& p = s.neg ? t : s;  // the positive one
            const Seg& q = s.neg ? s : t;
            const bool antipodal = s.neg != t.neg;
            if (antipodal && p.comp > q.comp) continue;
            if (p.comp == q.comp) {
                const auto& cc = curve.components[static_cast<std::size_t>(p.comp)];
                const std::size_t n = cc.segments();
                std::size_t gap = p.idx > q.idx ? p.idx - q.idx : q.idx - p.idx;
                if (cc.closed) gap = std::min(gap, n - gap);
                if (gap <= 1) continue;
                if (antipodal && p.idx > q.idx) continue;  // same pair seen from the other side
            }
            const auto [dist, at] = segment_distance(p, q);
            if (dist > tol) continue;
            const auto& ap = arc[static_cast<std::size_t>(p.comp)];
            const auto& aq = arc[static_cast<std::size_t>(q.comp)];
            const double ua = ap[p.idx] + at * (ap[p.idx + 1] - ap[p.idx]);
            const double ub = 0.5 * (aq[q.idx] + aq[q.idx + 1]);
            hits.push_back({p.comp, q.comp, p.idx, q.idx, ua, ub, antipodal});
        }
    }
    // Merge hits from neighbouring segments describing the same crossing.
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) {
        return std::tie(x.antipodal, x.ca, x.cb, x.ia, x.ib) < std::tie(y.antipodal, y.ca, y.cb, y.ia, y.ib);
    });
    std::vector<SelfIntersection> out;
    std::vector<Hit> kept;
    for (const Hit& h : hits) {
        bool merged = false;
        for (const Hit& k : kept) {
            if (k.antipodal != h.antipodal || k.ca != h.ca || k.cb != h.cb) continue;
            // Index distance, cyclic on closed components (ca == cb here whenever it is used across).
            auto dist = [&](std::size_t i, std::size_t j, int comp) {
                const auto& cc = curve.components[static_cast<std::size_t>(comp)];
                const std::size_t d = i > j ? i - j : j - i;
                return cc.closed ? std::min(d, cc.segments() - d) : d;
            };
            const auto dia = dist(h.ia, k.ia, h.ca), dib = dist(h.ib, k.ib, h.cb);
            const auto dxa = dist(h.ia, k.ib, h.ca), dxb = dist(h.ib, k.ia, h.ca);
            if ((dia <= 2 && dib <= 2) || (h.ca == h.cb && dxa <= 2 && dxb <= 2)) {
                merged = true;
                break;
            }
        }
        if (merged) continue;
        kept.push_back(h);
        out.push_back({h.ca, h.cb, h.ua, h.ub, h.antipodal});
    }
    return out;
}

} // namespace lmcf
