#pragma once

// Independent oracles shared by the unit tests and the acceptance runner.

#include <algorithm>
#include <functional>
#include <vector>

#include "lmcf/flow.hpp"
#include "support.hpp"

namespace lmcf::test {

// Mean curvature vector of the chart X(u, a) = (g(u) cos a, g(u) sin a) at a = 0
// from exact derivatives: H = g^{ij} (X_ij)^normal, all in R^4.
inline Vec4 extrinsic_H(cplx g, cplx g1, cplx g2) {
    const Vec4 Xu = Point4::from_complex(g1, 0), Xa = Point4::from_complex(0, g);
    const Vec4 Xuu = Point4::from_complex(g2, 0), Xua = Point4::from_complex(0, g1), Xaa = Point4::from_complex(-g, 0);
    const double E = dot(Xu, Xu), F = dot(Xu, Xa), G = dot(Xa, Xa), det = E * G - F * F;
    const double guu = G / det, gua = -F / det, gaa = E / det;
    auto normal = [&](const Vec4& v) {
        // Project out the tangent plane by solving the 2x2 Gram system.
        const double b1 = dot(v, Xu), b2 = dot(v, Xa);
        const double c1 = guu * b1 + gua * b2, c2 = gua * b1 + gaa * b2;
        return v - c1 * Xu - c2 * Xa;
    };
    return guu * normal(Xuu) + 2 * gua * normal(Xua) + gaa * normal(Xaa);
}

struct TestCurve {
    std::function<cplx(double)> g, g1, g2;
    double lo, hi;
    bool closed;
};

inline std::vector<TestCurve> velocity_test_curves() {
    const cplx i{0, 1};
    return {
        // Off-centre circle.
        {[](double u) { return cplx{2, 0.5} + std::exp(cplx{0, u}); }, [i](double u) { return i * std::exp(cplx{0, u}); },
         [](double u) { return -std::exp(cplx{0, u}); }, 0.0, 2 * kPi, true},
        // Star-shaped closed curve around the origin.
        {[](double u) { return (1.0 + 0.3 * std::cos(3 * u)) * std::exp(cplx{0, u}); },
         [i](double u) { return (-0.9 * std::sin(3 * u) + i * (1.0 + 0.3 * std::cos(3 * u))) * std::exp(cplx{0, u}); },
         [i](double u) {
             const double r = 1.0 + 0.3 * std::cos(3 * u), r1 = -0.9 * std::sin(3 * u), r2 = -2.7 * std::cos(3 * u);
             return (r2 - r + 2.0 * i * r1) * std::exp(cplx{0, u});
         },
         0.0, 2 * kPi, true},
        // Open parabola-like arc.
        {[](double u) { return cplx{u, 1.0 + 0.5 * u * u}; }, [](double u) { return cplx{1.0, u}; },
         [](double) { return cplx{0.0, 1.0}; }, -1.5, 1.5, false},
    };
}

inline double velocity_error(const TestCurve& tc, int n) {
    ProfileComponent comp;
    comp.closed = tc.closed;
    std::vector<double> us;
    const int m = tc.closed ? n : n + 1;
    for (int k = 0; k < m; ++k) {
        // Non-uniform parameter spacing so the check is not tied to uniform meshes.
        const double s = static_cast<double>(k) / n;
        const double u = tc.lo + (tc.hi - tc.lo) * (s + 0.05 * std::sin(2 * kPi * s) / (2 * kPi));
        us.push_back(u);
        comp.z.push_back(tc.g(u));
    }
    ProfileCurve c;
    c.components.push_back(comp);
    const VelocityField v = velocity(c);
    double worst = 0.0;
    for (std::size_t k = 0; k < us.size(); ++k) {
        if (!tc.closed && (k < 3 || k + 3 >= us.size())) continue;
        const Vec4 H = extrinsic_H(tc.g(us[k]), tc.g1(us[k]), tc.g2(us[k]));
        const Vec4 lifted = Point4::from_complex(v.velocity[0][k], 0);
        worst = std::max(worst, norm(lifted - H));
    }
    return worst;
}

inline double max_H(const TestCurve& tc, int n = 1000) {
    double m = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double u = tc.lo + (tc.hi - tc.lo) * k / n;
        m = std::max(m, norm(extrinsic_H(tc.g(u), tc.g1(u), tc.g2(u))));
    }
    return m;
}

// Distance from p to the polyline through z.
inline double polyline_distance(cplx p, const std::vector<cplx>& z) {
    double best = 1e300;
    for (std::size_t k = 0; k + 1 < z.size(); ++k) {
        const cplx d = z[k + 1] - z[k];
        const double t = std::clamp(((p - z[k]) * std::conj(d)).real() / std::norm(d), 0.0, 1.0);
        best = std::min(best, std::abs(p - z[k] - t * d));
    }
    return best;
}

} // namespace lmcf::test
