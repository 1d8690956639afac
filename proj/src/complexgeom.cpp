#include "lmcf/complexgeom.hpp"

#include <numbers>
#include <sstream>

#include <Eigen/Dense>

#include "lmcf/errors.hpp"
#include "lmcf/quadrature.hpp"

namespace lmcf {

double symplectic_pullback(const Vec4& u, const Vec4& v) {
    return (u.x1 * v.y1 - u.y1 * v.x1) + (u.x2 * v.y2 - u.y2 * v.x2);
}

cplx holomorphic_volume(const Vec4& u, const Vec4& v) {
    return u.z1() * v.z2() - u.z2() * v.z1();
}

double gram_area(const Vec4& u, const Vec4& v) {
    const double uu = norm2(u), vv = norm2(v), uv = dot(u, v);
    const double g = uu * vv - uv * uv;
    return g > 0.0 ? std::sqrt(g) : 0.0;
}

double lift_angle(double angle, double reference) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    return angle + two_pi * std::round((reference - angle) / two_pi);
}

WCoords w_coordinates(const Point4& p, double b) {
    const cplx w1{p.y1, p.y2};
    const cplx w2 = cplx{p.x1, -p.x2} - b * w1;
    return {w1, w2};
}

Point4 from_w_coordinates(const WCoords& w, double b) {
    const cplx xbar = w.w2 + b * w.w1;  // x1 - i x2
    return {xbar.real(), w.w1.real(), -xbar.imag(), w.w1.imag()};
}

double LagPlane::frame_angle(const Vec4& e1, const Vec4& e2, double reference) {
    return lift_angle(std::arg(holomorphic_volume(e1, e2)), reference);
}

LagPlane LagPlane::from_frame(Vec4 e1, Vec4 e2, double reference) {
    const double n1 = norm(e1);
    if (!(n1 > 0.0)) throw DegeneratePoint("zero frame vector");
    e1 *= 1.0 / n1;
    e2 -= dot(e2, e1) * e1;
    const double n2 = norm(e2);
    if (!(n2 > 1e-14)) throw DegeneratePoint("frame has rank < 2");
    e2 *= 1.0 / n2;
    return {e1, e2, frame_angle(e1, e2, reference)};
}

LagPlane LagPlane::from_ray(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    return {{c, s, 0.0, 0.0}, {0.0, 0.0, c, s}, 2.0 * phi};
}

double LagPlane::distance(const Point4& p, const Point4& base) const {
    const Vec4 d = p - base;
    return norm(d - project(d));
}

PlanePair PlanePair::make(const LagPlane& a, const LagPlane& b, Point4 base) {
    for (const LagPlane* pl : {&a, &b}) {
        if (std::abs(symplectic_pullback(pl->e1, pl->e2)) > 1e-12)
            throw DegeneratePoint("frame does not span a Lagrangian plane");
    }
    Eigen::Matrix4d m;
    const std::array<const Vec4*, 4> cols{&a.e1, &a.e2, &b.e1, &b.e2};
    for (int j = 0; j < 4; ++j)
        for (int i = 0; i < 4; ++i) m(i, j) = (*cols[j])[i];
    PlanePair out{base, {a, b}, false};
    out.transverse = std::abs(m.determinant()) > 1e-10;
    return out;
}

Loop Loop::parametric(std::function<Point4(double)> position, std::function<Vec4(double)> derivative,
                      double period, int samples) {
    Loop loop;
    loop.period = period;
    loop.samples.reserve(static_cast<std::size_t>(samples) + 1);
    for (int k = 0; k < samples; ++k) loop.samples.push_back(position(period * k / samples));
    loop.samples.push_back(loop.samples.front());
    loop.position = std::move(position);
    loop.derivative = std::move(derivative);
    return loop;
}

Loop Loop::polyline(std::vector<Point4> samples) {
    Loop loop;
    loop.samples = std::move(samples);
    return loop;
}

void Loop::validate() const {
    if (samples.size() < 8) throw NotClosed("loop needs at least 8 samples");
    for (const auto& p : samples)
        if (!p.finite()) throw NotClosed("non-finite loop sample");
    const double scale = std::max(1.0, norm(samples.front()));
    if (norm(samples.front() - samples.back()) > 1e-14 * scale) {
        std::ostringstream msg;
        msg << "first and last samples differ by " << norm(samples.front() - samples.back());
        throw NotClosed(msg.str());
    }
    if (position && norm(position(0.0) - position(period)) > 1e-12 * scale)
        throw NotClosed("parametric loop does not close over its period");
}

namespace {

double form_density(const Point4& p, const Vec4& d, LiouvilleForm form) {
    if (form == LiouvilleForm::YdX) return p.y1 * d.x1 + p.y2 * d.x2;
    return p.x1 * d.y1 - p.y1 * d.x1 + p.x2 * d.y2 - p.y2 * d.x2;
}

} // namespace

double liouville_integral(const Loop& loop, LiouvilleForm form, int order) {
    loop.validate();
    const quad::Rule& rule = quad::gauss_legendre(order);
    const std::size_t n = loop.samples.size() - 1;
    double total = 0.0;
    if (loop.position) {
        const double width = loop.period / static_cast<double>(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double mid = (static_cast<double>(k) + 0.5) * width;
            double seg = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double t = mid + 0.5 * width * rule.nodes[q];
                seg += rule.weights[q] * form_density(loop.position(t), loop.derivative(t), form);
            }
            total += 0.5 * width * seg;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            const Point4& a = loop.samples[k];
            const Vec4 d = loop.samples[k + 1] - a;
            double seg = 0.0;
            for (std::size_t q = 0; q < rule.size(); ++q) {
                const double s = 0.5 * (1.0 + rule.nodes[q]);
                seg += rule.weights[q] * form_density(a + s * d, d, form);
            }
            total += 0.5 * seg;
        }
    }
    return loop.orientation * total;
}

} // namespace lmcf
