#include "lmcf/profile.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmcf/complexgeom.hpp"
#include "lmcf/errors.hpp"

namespace lmcf {

std::vector<std::vector<double>> fd_weights(double x0, std::span<const double> xs, int order) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> c(n, std::vector<double>(order + 1, 0.0));
    double c1 = 1.0, c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, order);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<std::vector<double>> w(order + 1, std::vector<double>(n));
    for (int m = 0; m <= order; ++m)
        for (int j = 0; j < n; ++j) w[m][j] = c[j][m];
    return w;
}

std::vector<double> ProfileComponent::arclength() const {
    std::vector<double> s(z.size() + (closed ? 1 : 0), 0.0);
    for (std::size_t j = 1; j < z.size(); ++j) s[j] = s[j - 1] + std::abs(z[j] - z[j - 1]);
    if (closed) s.back() = s[z.size() - 1] + std::abs(z.front() - z.back());
    return s;
}

namespace {

// d gamma / ds at every node, 5-point stencils in chord length.
std::vector<cplx> node_derivatives(const ProfileComponent& c, const std::vector<double>& s) {
    const std::size_t n = c.z.size();
    std::vector<cplx> d(n);
    if (n < 2) return d;
    const int width = static_cast<int>(std::min<std::size_t>(5, c.closed ? 5 : n));
    const int half = width / 2;
    const double period = c.closed ? s.back() : 0.0;
    std::vector<double> xs(width);
    std::vector<cplx> zs(width);
    for (std::size_t j = 0; j < n; ++j) {
        std::ptrdiff_t first = static_cast<std::ptrdiff_t>(j) - half;
        if (!c.closed) first = std::clamp<std::ptrdiff_t>(first, 0, static_cast<std::ptrdiff_t>(n) - width);
        for (int k = 0; k < width; ++k) {
            std::ptrdiff_t idx = first + k;
            double shift = 0.0;
            if (c.closed) {
                const auto nn = static_cast<std::ptrdiff_t>(n);
                while (idx < 0) { idx += nn; shift -= period; }
                while (idx >= nn) { idx -= nn; shift += period; }
            }
            xs[k] = s[static_cast<std::size_t>(idx)] + shift;
            zs[k] = c.z[static_cast<std::size_t>(idx)];
        }
        const auto w = fd_weights(s[j], xs, 1);
        cplx acc = 0.0;
        for (int k = 0; k < width; ++k) acc += w[1][k] * zs[k];
        d[j] = acc;
    }
    return d;
}

} // namespace

std::vector<cplx> ProfileComponent::tangents() const {
    auto d = node_derivatives(*this, arclength());
    for (auto& t : d) {
        const double a = std::abs(t);
        if (!(a > 0.0)) throw DegeneratePoint("zero tangent");
        t /= a;
    }
    return d;
}

std::vector<double> ProfileComponent::angles() const {
    const auto t = tangents();
    std::vector<double> th(z.size());
    double prev = theta_ref;
    for (std::size_t j = 0; j < z.size(); ++j) {
        const cplx w = std::abs(z[j]) > 0.0 ? z[j] * t[j] : t[j] * t[j];
        const double lifted = lift_angle(std::arg(w), prev);
        if (j > 0 && std::abs(lifted - prev) >= 0.5 * std::numbers::pi) {
            std::ostringstream msg;
            msg << "Lagrangian angle jumps by " << lifted - prev << " at sample " << j;
            throw DegeneratePoint(msg.str());
        }
        th[j] = lifted;
        prev = lifted;
    }
    return th;
}

void ProfileCurve::validate() const {
    for (const auto& c : components) {
        if (c.z.size() < 2) throw DegeneratePoint("profile component needs at least 2 samples");
        for (const auto& z : c.z)
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw DegeneratePoint("non-finite sample");
        for (std::size_t j = 0; j < c.segments(); ++j) {
            const cplx a = c.z[j], b = c.z[(j + 1) % c.z.size()];
            if (!(std::abs(b - a) > 0.0)) throw DegeneratePoint("coincident consecutive samples");
        }
    }
}

std::size_t ProfileCurve::total_samples() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.z.size();
    return n;
}

double ProfileCurve::min_radius() const {
    double r = INFINITY;
    for (const auto& c : components)
        for (const auto& z : c.z) r = std::min(r, std::abs(z));
    return r;
}

ProfileSpline::ProfileSpline(const ProfileComponent& c) : closed_(c.closed) {
    s_ = c.arclength();
    z_ = c.z;
    d_ = node_derivatives(c, s_);
    if (closed_) {
        z_.push_back(z_.front());
        d_.push_back(d_.front());
    }
}

std::size_t ProfileSpline::locate(double& s) const {
    if (closed_) {
        const double period = s_.back();
        s = std::fmod(s, period);
        if (s < 0.0) s += period;
    } else {
        s = std::clamp(s, s_.front(), s_.back());
    }
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    return std::min(k, s_.size() - 2);
}

cplx ProfileSpline::eval(double s) const {
    const std::size_t k = locate(s);
    const double h = s_[k + 1] - s_[k], t = (s - s_[k]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * z_[k] + (t3 - 2 * t2 + t) * h * d_[k] + (-2 * t3 + 3 * t2) * z_[k + 1] +
           (t3 - t2) * h * d_[k + 1];
}

cplx ProfileSpline::deriv(double s) const {
    const std::size_t k = locate(s);
    const double h = s_[k + 1] - s_[k], t = (s - s_[k]) / h;
    const double t2 = t * t;
    return ((6 * t2 - 6 * t) * z_[k] + (-6 * t2 + 6 * t) * z_[k + 1]) / h + (3 * t2 - 4 * t + 1) * d_[k] +
           (3 * t2 - 2 * t) * d_[k + 1];
}

cplx ProfileSpline::second(double s) const {
    const std::size_t k = locate(s);
    const double h = s_[k + 1] - s_[k], t = (s - s_[k]) / h;
    return ((12 * t - 6) * (z_[k] - z_[k + 1])) / (h * h) + ((6 * t - 4) * d_[k] + (6 * t - 2) * d_[k + 1]) / h;
}

ProfileComponent ray_component(double phi, double r0, double r1, double h, bool ray_back) {
    const int n = std::max(2, static_cast<int>(std::ceil((r1 - r0) / h)));
    ProfileComponent c;
    const cplx dir = std::polar(1.0, phi);
    for (int k = 0; k <= n; ++k) c.z.push_back((r0 + (r1 - r0) * k / n) * dir);
    c.ray_back = ray_back;
    c.theta_ref = 2.0 * phi;
    return c;
}

ProfileComponent circle_component(double radius, int samples) {
    ProfileComponent c;
    c.closed = true;
    for (int k = 0; k < samples; ++k) c.z.push_back(std::polar(radius, 2.0 * std::numbers::pi * k / samples));
    c.theta_ref = 0.5 * std::numbers::pi;
    return c;
}

} // namespace lmcf
