#include "lmcf/gaussian_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "lmcf/errors.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/quadrature.hpp"

namespace lmcf::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kLaguerreOrder = 48;

struct Item {
    enum Kind { Curve, Ray, Laguerre } kind;
    std::size_t comp;
    double a, b;       // parameter interval (Curve) or radii (Ray); start radius (Laguerre)
    cplx dir;          // ray direction
    double u_origin;   // chart parameter at radius `a` for rays
    double u_sign;     // +1 along back tails, -1 along front tails
};

struct Context {
    const ProfileCurve& curve;
    std::vector<ProfileSpline> splines;
    std::vector<std::vector<double>> angles;
    Point4 x0;
    double r;
    double inv4r2;
    double x0sq;
    const quad::Rule& gl;
    const quad::Rule& lag;
    QuadOptions opt;
};

double orbit_c(const Point4& x0, cplx g) {
    const double A = g.real() * x0.x1 + g.imag() * x0.y1;
    const double B = g.real() * x0.x2 + g.imag() * x0.y2;
    return std::hypot(A, B);
}

// log of |gamma| * integral over alpha of exp(-|gamma e_alpha - x0|^2 / 4r^2)
double log_orbit_weight(const Context& c, cplx g) {
    const double m = std::abs(g);
    if (m == 0.0) return -INFINITY;
    const double C = c.x0sq > 0.0 ? orbit_c(c.x0, g) : 0.0;
    return std::log(m) - (m * m + c.x0sq) * c.inv4r2 + log_orbit_integral(2.0 * C * c.inv4r2);
}

double orbit_distance(const Context& c, cplx g) {
    const double m = std::abs(g);
    const double C = c.x0sq > 0.0 ? orbit_c(c.x0, g) : 0.0;
    return std::sqrt(std::max(0.0, m * m + c.x0sq - 2.0 * C));
}

// Calls emit(gamma, u, log_measure) for each radial node of the item.
template <class Emit>
void item_points(const Context& c, const Item& it, Emit&& emit) {
    if (it.kind == Item::Curve) {
        const ProfileSpline& sp = c.splines[it.comp];
        const double half = 0.5 * (it.b - it.a);
        for (std::size_t q = 0; q < c.gl.size(); ++q) {
            const double s = it.a + half * (1.0 + c.gl.nodes[q]);
            const cplx g = sp.eval(s), g1 = sp.deriv(s);
            emit(g, g1, s, std::log(c.gl.weights[q] * half * std::abs(g1)));
        }
    } else if (it.kind == Item::Ray) {
        const double half = 0.5 * (it.b - it.a);
        for (std::size_t q = 0; q < c.gl.size(); ++q) {
            const double rho = it.a + half * (1.0 + c.gl.nodes[q]);
            emit(rho * it.dir, it.u_sign * it.dir, it.u_origin + it.u_sign * (rho - it.a),
                 std::log(c.gl.weights[q] * half));
        }
    } else {
        const double R = it.a, r2 = c.r * c.r;
        for (std::size_t q = 0; q < c.lag.size(); ++q) {
            const double v = c.lag.nodes[q];
            const double rho = std::sqrt(R * R + 4.0 * r2 * v);
            emit(rho * it.dir, it.u_sign * it.dir, it.u_origin + it.u_sign * (rho - R),
                 std::log(2.0 * r2 * c.lag.weights[q]) + v - std::log(rho));
        }
    }
}

double item_sum(const Context& c, const Item& it) {
    double acc = 0.0;
    item_points(c, it, [&](cplx g, cplx, double, double logm) { acc += std::exp(logm + log_orbit_weight(c, g)); });
    return acc;
}

std::vector<Item> make_items(const Context& c) {
    std::vector<Item> items;
    const double Rcut = c.r * std::sqrt(4.0 * std::log(1.0 / c.opt.tol));
    const double x0n = std::sqrt(c.x0sq);
    for (std::size_t ci = 0; ci < c.curve.components.size(); ++ci) {
        const ProfileComponent& pc = c.curve.components[ci];
        const ProfileSpline& sp = c.splines[ci];
        const auto& knots = sp.knots();
        const std::size_t nseg = pc.segments();
        for (std::size_t k = 0; k < nseg; ++k) {
            const double s0 = knots[k], s1 = knots[k + 1], len = s1 - s0;
            const cplx za = pc.z[k], zb = pc.z[(k + 1) % pc.z.size()];
            const double d = std::min(orbit_distance(c, za), orbit_distance(c, zb)) - 1.1 * len;
            if (d > Rcut) continue;
            const int m = std::max(1, static_cast<int>(std::ceil(len / (2.0 * c.r))));
            for (int p = 0; p < m; ++p)
                items.push_back({Item::Curve, ci, s0 + len * p / m, s0 + len * (p + 1) / m, {}, 0.0, 1.0});
        }
        if (pc.closed) continue;
        auto end_check = [&](cplx z, bool ray) {
            if (ray || std::abs(z) == 0.0) return;
            if (orbit_distance(c, z) < Rcut)
                throw TruncationError("open profile end without a ray tail lies inside the truncation radius");
        };
        end_check(pc.z.front(), pc.ray_front);
        end_check(pc.z.back(), pc.ray_back);
        auto add_tail = [&](cplx z, double u0, double sign) {
            const double R = std::abs(z);
            if (R == 0.0) return;
            const cplx dir = z / R;
            const double R2 = std::max(R, x0n + Rcut);
            if (R2 > R) {
                const int m = std::max(1, static_cast<int>(std::ceil((R2 - R) / (2.0 * c.r))));
                for (int p = 0; p < m; ++p) {
                    const double a = R + (R2 - R) * p / m, b = R + (R2 - R) * (p + 1) / m;
                    // Skip pieces far from the centre's orbit.
                    if (std::min(orbit_distance(c, a * dir), orbit_distance(c, b * dir)) - 1.1 * (b - a) > Rcut)
                        continue;
                    items.push_back({Item::Ray, ci, a, b, dir, u0 + sign * (a - R), sign});
                }
            }
            items.push_back({Item::Laguerre, ci, R2, 0.0, dir, u0 + sign * (R2 - R), sign});
        };
        if (pc.ray_front) add_tail(pc.z.front(), 0.0, -1.0);
        if (pc.ray_back) add_tail(pc.z.back(), sp.length(), 1.0);
    }
    return items;
}

Context make_context(const ProfileCurve& curve, const Point4& x0, double r, const QuadOptions& opt, bool angles) {
    if (!(r > 0.0)) throw OutOfRange("Gaussian scale must be positive");
    Context c{curve, {}, {}, x0, r, 1.0 / (4.0 * r * r), norm2(x0),
              quad::gauss_legendre(opt.order), quad::gauss_laguerre(kLaguerreOrder), opt};
    c.splines.reserve(curve.components.size());
    for (const auto& pc : curve.components) {
        c.splines.emplace_back(pc);
        if (angles) c.angles.push_back(pc.angles());
    }
    return c;
}

} // namespace

double log_orbit_integral(double k) {
    constexpr double log2pi = 1.8378770664093453;
    if (k <= 0.0) return log2pi;
    if (k <= 200.0) {
        constexpr int n = 128;
        double acc = 0.0;
        for (int j = 0; j < n; ++j) acc += std::exp(k * (std::cos(2.0 * kPi * j / n) - 1.0));
        return log2pi + k + std::log(acc / n);
    }
    // I0(k) ~ e^k / sqrt(2 pi k) * sum ((2j-1)!!)^2 / (j! 8^j k^j)
    double term = 1.0, series = 1.0;
    for (int j = 1; j <= 6; ++j) {
        term *= (2.0 * j - 1.0) * (2.0 * j - 1.0) / (8.0 * j * k);
        series += term;
    }
    return log2pi + k - 0.5 * std::log(2.0 * kPi * k) + std::log(series);
}

double profile_gaussian_sum(const ProfileCurve& curve, const Point4& x0, double r, const QuadOptions& opt,
                            bool parallel) {
    const Context c = make_context(curve, x0, r, opt, false);
    const auto items = make_items(c);
    auto term = [&](std::size_t i) { return item_sum(c, items[i]); };
    return parallel ? par::blocked_sum(items.size(), term) : par::blocked_sum_serial(items.size(), term);
}

std::vector<QuadNode> profile_gaussian_nodes(const ProfileCurve& curve, const Point4& x0, double r,
                                             const QuadOptions& opt, bool with_angles) {
    const Context c = make_context(curve, x0, r, opt, with_angles);
    const auto items = make_items(c);
    std::vector<QuadNode> out;
    for (const Item& it : items) {
        const ProfileComponent& pc = curve.components[it.comp];
        const auto* th = with_angles ? &c.angles[it.comp] : nullptr;
        const auto& knots = c.splines[it.comp].knots();
        item_points(c, it, [&](cplx g, cplx g1, double u, double logm) {
            double theta = 0.0;
            if (th) {
                double hint;
                if (u <= 0.0) hint = th->front();
                else if (u >= knots[th->size() - 1]) hint = pc.closed ? th->front() : th->back();
                else {
                    const auto pos = std::upper_bound(knots.begin(), knots.end(), u) - knots.begin() - 1;
                    hint = (*th)[static_cast<std::size_t>(pos)];
                }
                const cplx w = std::abs(g) > 0.0 ? g * g1 : g1 * g1;
                theta = lift_angle(std::arg(w), hint);
            }
            if (opt.alpha_points <= 0) {
                out.push_back({Point4::from_complex(g, 0.0), std::exp(logm + log_orbit_weight(c, g)), theta,
                               static_cast<int>(it.comp), u});
                return;
            }
            const int n = opt.alpha_points;
            const double m = std::abs(g);
            for (int k = 0; k < n; ++k) {
                const double a = 2.0 * kPi * k / n;
                const Point4 x = Point4::from_complex(g * std::cos(a), g * std::sin(a));
                const double w = std::exp(logm - norm2(x - x0) * c.inv4r2) * m * (2.0 * kPi / n);
                out.push_back({x, w, theta, static_cast<int>(it.comp), u});
            }
        });
    }
    return out;
}

} // namespace lmcf::detail
