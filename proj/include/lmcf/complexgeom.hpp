#pragma once

// Standard structures of C^2 = R^4 with real coordinates (x1, y1, x2, y2) and
// complex coordinates z_k = x_k + i y_k:
//   omega  = dx1^dy1 + dx2^dy2            (standard symplectic form)
//   Omega  = dz1^dz2                      (holomorphic volume form)
//   lambda = sum x_i dy_i - y_i dx_i      (Liouville form, d lambda = 2 omega)

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace lmcf {

using cplx = std::complex<double>;

struct Point4 {
    double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;

    static Point4 from_complex(cplx z1, cplx z2) { return {z1.real(), z1.imag(), z2.real(), z2.imag()}; }
    cplx z1() const { return {x1, y1}; }
    cplx z2() const { return {x2, y2}; }

    double operator[](int i) const { return i == 0 ? x1 : i == 1 ? y1 : i == 2 ? x2 : y2; }
    double& operator[](int i) { return i == 0 ? x1 : i == 1 ? y1 : i == 2 ? x2 : y2; }

    Point4& operator+=(const Point4& o) { x1 += o.x1; y1 += o.y1; x2 += o.x2; y2 += o.y2; return *this; }
    Point4& operator-=(const Point4& o) { x1 -= o.x1; y1 -= o.y1; x2 -= o.x2; y2 -= o.y2; return *this; }
    Point4& operator*=(double s) { x1 *= s; y1 *= s; x2 *= s; y2 *= s; return *this; }

    friend Point4 operator+(Point4 a, const Point4& b) { return a += b; }
    friend Point4 operator-(Point4 a, const Point4& b) { return a -= b; }
    friend Point4 operator*(double s, Point4 a) { return a *= s; }
    friend Point4 operator*(Point4 a, double s) { return a *= s; }
    friend bool operator==(const Point4&, const Point4&) = default;

    bool finite() const {
        return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2);
    }
};

/// Tangent vectors share the representation of points.
using Vec4 = Point4;

inline double dot(const Vec4& a, const Vec4& b) { return a.x1 * b.x1 + a.y1 * b.y1 + a.x2 * b.x2 + a.y2 * b.y2; }
inline double norm2(const Vec4& a) { return dot(a, a); }
inline double norm(const Vec4& a) { return std::sqrt(norm2(a)); }

/// Multiplication by i on both complex coordinates.
inline Vec4 apply_J(const Vec4& v) { return {-v.y1, v.x1, -v.y2, v.x2}; }

/// omega(u, v).
double symplectic_pullback(const Vec4& u, const Vec4& v);

/// dz1^dz2(u, v).
cplx holomorphic_volume(const Vec4& u, const Vec4& v);

/// Area of the parallelogram spanned by u and v.
double gram_area(const Vec4& u, const Vec4& v);

/// Representative of `angle` modulo 2 pi closest to `reference`.
double lift_angle(double angle, double reference);

/// Coordinates W1 = y1 + i y2, W2 = (x1 - i x2) - b (y1 + i y2).
struct WCoords {
    cplx w1, w2;
};
WCoords w_coordinates(const Point4& p, double b);
Point4 from_w_coordinates(const WCoords& w, double b);

/// A Lagrangian plane through a base point, with an orthonormal frame and a
/// graded Lagrangian angle.
struct LagPlane {
    Vec4 e1{1, 0, 0, 0};
    Vec4 e2{0, 0, 1, 0};
    double angle = 0.0;

    /// Lagrangian angle of the frame, lifted next to `reference`.
    static double frame_angle(const Vec4& e1, const Vec4& e2, double reference);
    /// Plane spanned by (e1, e2) after Gram-Schmidt; the angle is lifted near `reference`.
    static LagPlane from_frame(Vec4 e1, Vec4 e2, double reference = 0.0);
    /// The plane e^{i phi} * R^2 generated by the profile ray of argument phi (angle 2 phi).
    static LagPlane from_ray(double phi);

    Vec4 project(const Vec4& v) const { return dot(v, e1) * e1 + dot(v, e2) * e2; }
    double distance(const Point4& p, const Point4& base) const;
};

struct PlanePair {
    Point4 base;
    std::array<LagPlane, 2> planes;
    bool transverse = false;

    /// Validates the Lagrangian condition to 1e-12 and computes transversality.
    static PlanePair make(const LagPlane& a, const LagPlane& b, Point4 base = {});
};

/// Closed curve in C^2. Samples run over one period with the first point
/// repeated at the end. When `position` is set the curve is parametric on
/// [0, period] and quadrature uses it; otherwise it is the polyline through the
/// samples.
struct Loop {
    std::vector<Point4> samples;
    int orientation = +1;
    std::function<Point4(double)> position;
    std::function<Vec4(double)> derivative;
    double period = 0.0;

    static Loop parametric(std::function<Point4(double)> position, std::function<Vec4(double)> derivative,
                           double period, int samples = 64);
    static Loop polyline(std::vector<Point4> samples);
    void validate() const;
};

enum class LiouvilleForm { FullLambda, YdX };

/// Loop integral of lambda (FullLambda) or of y1 dx1 + y2 dx2 (YdX), composite
/// Gauss-Legendre of the given order on each sample interval.
double liouville_integral(const Loop& loop, LiouvilleForm form, int order = 8);

} // namespace lmcf
