#pragma once

#include <cmath>
#include <complex>
#include <random>

#include "lmcf/complexgeom.hpp"

namespace lmcf::test {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline std::mt19937_64& rng() {
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline Vec4 random_vec() { return {uniform(-1, 1), uniform(-1, 1), uniform(-1, 1), uniform(-1, 1)}; }

// Apply a 2x2 complex matrix to (z1, z2).
inline Vec4 apply(const std::complex<double> m[2][2], const Vec4& v) {
    const auto a = v.z1(), b = v.z2();
    return Point4::from_complex(m[0][0] * a + m[0][1] * b, m[1][0] * a + m[1][1] * b);
}

// Random element of U(2): e^{i phi} [[a, -conj b], [b, conj a]].
inline void random_unitary(std::complex<double> m[2][2]) {
    std::complex<double> a{uniform(-1, 1), uniform(-1, 1)}, b{uniform(-1, 1), uniform(-1, 1)};
    const double n = std::sqrt(std::norm(a) + std::norm(b));
    a /= n;
    b /= n;
    const auto ph = std::polar(1.0, uniform(-kPi, kPi));
    m[0][0] = ph * a;
    m[0][1] = -ph * std::conj(b);
    m[1][0] = ph * b;
    m[1][1] = ph * std::conj(a);
}

} // namespace lmcf::test
