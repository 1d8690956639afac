#include <doctest.h>

#include "lmcf/complexgeom.hpp"
#include "lmcf/detect.hpp"
#include "lmcf/errors.hpp"
#include "lmcf/quadrature.hpp"
#include "support.hpp"

using namespace lmcf;
using lmcf::test::kPi;

TEST_SUITE("complexgeom") {

TEST_CASE("symplectic form on coordinate frames") {
    CHECK(symplectic_pullback({1, 0, 0, 0}, {0, 1, 0, 0}) == 1.0);
    CHECK(symplectic_pullback({1, 0, 0, 0}, {0, 0, 1, 0}) == 0.0);
    CHECK(symplectic_pullback({1, 0, 0, 0}, {0, 0.3, 0, 0}) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(symplectic_pullback({0, 0, 1, 0}, {0, 0, 0, 1}) == 1.0);
}

TEST_CASE("symplectic form is antisymmetric") {
    for (int k = 0; k < 1000; ++k) {
        const Vec4 u = test::random_vec(), v = test::random_vec();
        CHECK(std::abs(symplectic_pullback(u, v) + symplectic_pullback(v, u)) < 1e-15);
    }
}

TEST_CASE("holomorphic volume of the coordinate planes and the sheared plane") {
    const cplx p1 = holomorphic_volume({1, 0, 0, 0}, {0, 0, 1, 0});
    CHECK(p1 == cplx{1.0, 0.0});
    const cplx p2 = holomorphic_volume({0, 1, 0, 0}, {0, 0, 0, 1});
    CHECK(p2 == cplx{-1.0, 0.0});
    for (double kappa : {0.05, 0.1, 0.3}) {
        const double s = std::sqrt(1 + kappa * kappa);
        const Vec4 u{-kappa / s, 1.0 / s, 0, 0}, v{0, 0, 0, 1};
        // Oracle: the 2x2 complex determinant a1 b2 - a2 b1.
        const cplx det = u.z1() * v.z2() - u.z2() * v.z1();
        const cplx vol = holomorphic_volume(u, v);
        CHECK(std::abs(vol - det) < 1e-15);
        CHECK(lift_angle(std::arg(vol), kPi) == doctest::Approx(kPi + std::atan(kappa)).epsilon(1e-14));
    }
}

TEST_CASE("|Omega| equals the Gram area on random Lagrangian frames") {
    for (int k = 0; k < 1000; ++k) {
        std::complex<double> m[2][2];
        test::random_unitary(m);
        // Real combinations of the unitary image of the real plane stay Lagrangian.
        const Vec4 f1 = test::apply(m, {1, 0, 0, 0}), f2 = test::apply(m, {0, 0, 1, 0});
        const double a = test::uniform(-2, 2), b = test::uniform(-2, 2), c = test::uniform(-2, 2), d = test::uniform(-2, 2);
        const Vec4 u = a * f1 + b * f2, v = c * f1 + d * f2;
        CHECK(std::abs(symplectic_pullback(u, v)) < 1e-12);
        const double gram = std::sqrt(std::max(0.0, norm2(u) * norm2(v) - dot(u, v) * dot(u, v)));
        CHECK(std::abs(std::abs(holomorphic_volume(u, v)) - gram) < 1e-10);
        CHECK(gram_area(u, v) == doctest::Approx(gram).epsilon(1e-10));
    }
}

TEST_CASE("w coordinates") {
    auto w = w_coordinates({1, 0, 0, 0}, 0.0);
    CHECK(w.w1 == cplx{0, 0});
    CHECK(w.w2 == cplx{1, 0});
    w = w_coordinates({0, 1, 0, 0}, 0.0);
    CHECK(w.w1 == cplx{1, 0});
    CHECK(w.w2 == cplx{0, 0});
    w = w_coordinates({0, 1, 0, 0}, 2.0);
    CHECK(w.w1 == cplx{1, 0});
    CHECK(w.w2 == cplx{-2, 0});
}

TEST_CASE("w coordinates round trip") {
    for (int k = 0; k < 1000; ++k) {
        const Point4 p = test::random_vec();
        const double b = test::uniform(-3, 3);
        const Point4 q = from_w_coordinates(w_coordinates(p, b), b);
        CHECK(norm(q - p) < 1e-14);
    }
}

TEST_CASE("lift_angle picks the nearest representative") {
    CHECK(lift_angle(0.1, 2 * kPi) == doctest::Approx(0.1 + 2 * kPi));
    CHECK(lift_angle(-3.0, 3.0) == doctest::Approx(-3.0 + 2 * kPi));
    CHECK(lift_angle(1.0, 1.0) == 1.0);
}

TEST_CASE("plane pair construction") {
    const LagPlane p1 = LagPlane::from_ray(0.0), p2 = LagPlane::from_ray(0.5 * kPi);
    CHECK(p1.angle == doctest::Approx(0.0));
    CHECK(p2.angle == doctest::Approx(kPi));
    const PlanePair pair = PlanePair::make(p1, p2);
    CHECK(pair.transverse);
    CHECK(std::abs(symplectic_pullback(p2.e1, p2.e2)) < 1e-12);
    CHECK_FALSE(PlanePair::make(p1, p1).transverse);
    // A frame that is not Lagrangian is rejected when paired.
    CHECK_THROWS_AS(PlanePair::make(LagPlane::from_frame({1, 0, 0, 0}, {0, 1, 0, 0}), p2), DegeneratePoint);
}

TEST_CASE("Liouville integral over the exactness loops") {
    const double b = 0.7;
    const double plus = liouville_integral(exactness_loop({0, 1}, b), LiouvilleForm::YdX);
    const double minus = liouville_integral(exactness_loop({0, -1}, b), LiouvilleForm::YdX);
    CHECK(std::abs(plus - 2 * kPi) < 1e-10 * 2 * kPi);
    CHECK(std::abs(minus + 2 * kPi) < 1e-10 * 2 * kPi);
}

TEST_CASE("Liouville integral against the closed form and an independent quadrature") {
    for (double bb : {0.0, 0.7, 2.0}) {
        for (double phi : {-2.5, -1.0, 0.3, 1.2, 2.9}) {
            const cplx tp = std::polar(1.0, phi);
            // Independent oracle: invert the coordinates by hand and integrate y dx adaptively.
            auto integrand = [&](double s) {
                const cplx w1 = tp * std::exp(cplx{0, s}), w2 = std::exp(cplx{0, -s});
                const cplx dw1 = cplx{0, 1} * w1, dw2 = cplx{0, -1} * w2;
                const cplx xs = w2 + bb * w1, dxs = dw2 + bb * dw1;  // x1 - i x2
                return w1.real() * dxs.real() + w1.imag() * (-dxs.imag());
            };
            const double oracle = quad::adaptive_simpson(integrand, 0.0, 2 * kPi, 1e-12);
            const double value = liouville_integral(exactness_loop(tp, bb), LiouvilleForm::YdX);
            CHECK(std::abs(oracle - 2 * kPi * std::sin(phi)) < 1e-9);
            CHECK(std::abs(value - 2 * kPi * std::sin(phi)) < 1e-10);
        }
    }
}

TEST_CASE("full lambda is -2 times y dx on closed loops") {
    for (int k = 0; k < 20; ++k) {
        const Vec4 a = test::random_vec(), c = test::random_vec(), d = test::random_vec();
        auto pos = [=](double s) { return std::cos(s) * a + std::sin(s) * c + std::cos(2 * s) * d; };
        auto der = [=](double s) { return -std::sin(s) * a + std::cos(s) * c - 2 * std::sin(2 * s) * d; };
        const Loop loop = Loop::parametric(pos, der, 2 * kPi, 32);
        const double full = liouville_integral(loop, LiouvilleForm::FullLambda);
        const double ydx = liouville_integral(loop, LiouvilleForm::YdX);
        CHECK(std::abs(full + 2 * ydx) < 1e-12);
        // The polyline variant agrees with itself in the same way.
        const Loop poly = Loop::polyline(loop.samples);
        CHECK(std::abs(liouville_integral(poly, LiouvilleForm::FullLambda) + 2 * liouville_integral(poly, LiouvilleForm::YdX)) <
              1e-12);
    }
}

TEST_CASE("loops must close and have enough samples") {
    std::vector<Point4> open;
    for (int k = 0; k < 10; ++k) open.push_back({double(k), 0, 0, 0});
    CHECK_THROWS_AS(liouville_integral(Loop::polyline(open), LiouvilleForm::YdX), NotClosed);
    std::vector<Point4> tiny{{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 0, 0}};
    CHECK_THROWS_AS(liouville_integral(Loop::polyline(tiny), LiouvilleForm::YdX), NotClosed);
}

}
