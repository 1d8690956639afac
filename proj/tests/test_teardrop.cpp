#include <doctest.h>

#include "lmcf/errors.hpp"
#include "lmcf/gaussian.hpp"
#include "lmcf/teardrop.hpp"
#include "support.hpp"

using namespace lmcf;
using lmcf::test::kPi;

namespace {

TwoPlaneField constant_one() { return TwoPlaneField::mode(0, 0, 0) + TwoPlaneField::mode(1, 0, 0); }

TwoPlaneField random_field(int cap = 8) {
    TwoPlaneField f(cap);
    for (int p = 0; p < 2; ++p)
        for (int i = 0; i <= cap; ++i)
            for (int j = 0; i + j <= cap; ++j) f.at(p, i, j) = test::uniform(-1, 1);
    return f;
}

std::vector<double> grid(double lo, double hi, double step) {
    std::vector<double> t;
    for (double x = lo; x <= hi + 1e-12; x += step) t.push_back(x);
    return t;
}

std::vector<TwoPlaneField> series(const std::vector<double>& taus, const std::function<TwoPlaneField(double)>& f) {
    std::vector<TwoPlaneField> out;
    for (double t : taus) out.push_back(f(t));
    return out;
}

} // namespace

TEST_SUITE("teardrop") {

TEST_CASE("Gaussian pairings on the two planes") {
    CHECK(gaussian_inner(constant_one(), constant_one()) == doctest::Approx(8 * kPi).epsilon(1e-14));
    CHECK(gaussian_inner(TwoPlaneField::x_tilde(), TwoPlaneField::y_tilde()) == 0.0);
    CHECK(gaussian_inner(TwoPlaneField::z_tilde(), TwoPlaneField::z_tilde()) == doctest::Approx(16 * kPi).epsilon(1e-14));
    // x~ lives on P2 only, y~ on P1 only, z~ on both.
    const auto x = TwoPlaneField::x_tilde(), y = TwoPlaneField::y_tilde(), z = TwoPlaneField::z_tilde();
    CHECK(x(0, 0.7, 0.2) == 0.0);
    CHECK(x(1, 0.7, 0.2) == doctest::Approx(0.7));
    CHECK(y(0, 0.7, 0.2) == doctest::Approx(0.7));
    CHECK(z(0, 0.7, 0.2) == doctest::Approx(0.2));
    CHECK(z(1, 0.7, 0.2) == doctest::Approx(0.2));
}

TEST_CASE("Gaussian pairing matches quadrature on the planes") {
    // Oracle: product Gauss-Hermite-free check by a tensor trapezoid on a wide box.
    const TwoPlaneField f = random_field(4), g = random_field(4);
    double q = 0.0;
    const int n = 400;
    const double L = 14.0, h = 2 * L / n;
    for (int p = 0; p < 2; ++p)
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                const double a = -L + i * h, z = -L + j * h;
                q += f(p, a, z) * g(p, a, z) * std::exp(-(a * a + z * z) / 4) * h * h;
            }
    CHECK(gaussian_inner(f, g) == doctest::Approx(q).epsilon(1e-9));
}

TEST_CASE("projection onto the complement of V") {
    const auto x = TwoPlaneField::x_tilde(), y = TwoPlaneField::y_tilde(), z = TwoPlaneField::z_tilde();
    CHECK(gaussian_norm(project_out_V(z)) < 1e-12);
    CHECK(gaussian_norm(project_out_V(x + y * 2.0 - z)) < 1e-12);
    const TwoPlaneField tz = project_out_V(TwoPlaneField::theta_z(0.0, kPi));
    for (double zz : {-1.0, 0.5, 2.0}) {
        CHECK(tz(0, 0.3, zz) == doctest::Approx(-0.5 * kPi * zz).epsilon(1e-12));
        CHECK(tz(1, 0.3, zz) == doctest::Approx(0.5 * kPi * zz).epsilon(1e-12));
    }
}

TEST_CASE("projection invariants") {
    const auto x = TwoPlaneField::x_tilde(), y = TwoPlaneField::y_tilde(), z = TwoPlaneField::z_tilde();
    for (int k = 0; k < 20; ++k) {
        const TwoPlaneField f = random_field();
        const TwoPlaneField p = project_out_V(f);
        CHECK(gaussian_norm(project_out_V(p) - p) < 1e-12);
        for (const auto& v : {x, y, z}) CHECK(std::abs(gaussian_inner(p, v)) < 1e-10);
        // Fields orthogonal to V are fixed.
        CHECK(gaussian_norm(project_out_V(p) - p) < 1e-12);
    }
}

TEST_CASE("manufactured drift heat solutions are exact in coefficients") {
    const TwoPlaneField f = random_field(6);
    for (int plane = 0; plane < 2; ++plane) {
        Polynomial2 poly, rhs;
        for (int i = 0; i <= 6; ++i)
            for (int j = 0; i + j <= 6; ++j) {
                const double c = f.at(plane, i, j);
                poly = poly + hermite(i, j).poly * c;
                rhs = rhs + hermite(i, j).poly * (0.5 * (i + j) * c);
            }
        // d/dtau of sum c_ij e^{-(i+j) tau/2} H_i H_j at tau = 0 is -rhs; the operator must give rhs.
        const Polynomial2 lhs = drift_operator(poly);
        for (int a = 0; a <= 6; ++a)
            for (int b = 0; a + b <= 6; ++b) {
                const double l = a < int(lhs.c.size()) && b < int(lhs.c[a].size()) ? lhs.c[a][b] : 0.0;
                const double r = a < int(rhs.c.size()) && b < int(rhs.c[a].size()) ? rhs.c[a][b] : 0.0;
                CHECK(std::abs(l - r) < 1e-9);
            }
    }
}

TEST_CASE("growth rates") {
    const auto taus = grid(0, 6, 0.5);
    std::vector<double> half, mix, constant;
    for (double t : taus) {
        half.push_back(std::exp(-0.5 * t));
        mix.push_back(0.9 * std::exp(-0.5 * t) + 0.1 * std::exp(-t));
        constant.push_back(2.0);
    }
    CHECK(growth_rate(taus, half).rate == doctest::Approx(-0.5).epsilon(1e-13));
    CHECK(growth_rate(taus, half).stderr_ < 1e-12);
    const double r0 = growth_rate(taus, mix).rate;
    CHECK(r0 > -0.6);
    CHECK(r0 < -0.5);
    const auto late = grid(6, 12, 0.5);
    std::vector<double> mix_late;
    for (double t : late) mix_late.push_back(0.9 * std::exp(-0.5 * t) + 0.1 * std::exp(-t));
    const double r1 = growth_rate(late, mix_late).rate;
    CHECK(r1 > r0);
    CHECK(r1 < -0.5);
    CHECK(std::abs(growth_rate(taus, constant).rate) < 1e-14);
    constant[3] = 0.0;
    CHECK_THROWS_AS(growth_rate(taus, constant), NonPositiveNorm);
}

TEST_CASE("teardrop classification of manufactured series") {
    const auto taus = grid(0, 6, 0.5);
    const TwoPlaneField tz = TwoPlaneField::theta_z(0.0, kPi);
    const TwoPlaneField mix = TwoPlaneField::mode(0, 2, 0) + TwoPlaneField::mode(1, 1, 1) * 0.5 - TwoPlaneField::mode(1, 0, 2);
    const double c = 1.5;
    const auto nd = series(taus, [&](double t) { return tz * (c * std::exp(-0.5 * t)) + mix * (1e-3 * std::exp(-t)); });
    const TeardropReport r = classify_teardrop(taus, nd);
    CHECK(r.verdict == TeardropVerdict::Nondegenerate);
    REQUIRE(r.c_estimate);
    CHECK(std::abs(*r.c_estimate - c) < 0.01 * c);
    CHECK(std::abs(*r.rate + 0.5) < 0.01);

    const auto pure_v = series(taus, [&](double t) { return TwoPlaneField::x_tilde() * std::exp(-0.5 * t); });
    CHECK(classify_teardrop(taus, pure_v).verdict == TeardropVerdict::Degenerate);

    const auto fast = series(taus, [&](double t) { return (TwoPlaneField::mode(0, 0, 2) + mix) * std::exp(-t); });
    const TeardropReport f = classify_teardrop(taus, fast);
    CHECK(f.verdict == TeardropVerdict::Degenerate);
    REQUIRE(f.rate);
    CHECK(std::abs(*f.rate + 1.0) < 0.01);
}

TEST_CASE("teardrop verdict is scale invariant") {
    const auto taus = grid(0, 6, 0.5);
    const TwoPlaneField tz = TwoPlaneField::theta_z(0.0, kPi);
    const TwoPlaneField mix = TwoPlaneField::mode(0, 2, 0) - TwoPlaneField::mode(1, 0, 2);
    for (double scale : {1.0, 1e3}) {
        const auto s = series(taus, [&](double t) { return (tz * std::exp(-0.5 * t) + mix * (1e-3 * std::exp(-t))) * scale; });
        const TeardropReport r = classify_teardrop(taus, s);
        CHECK(r.verdict == TeardropVerdict::Nondegenerate);
        CHECK(*r.rate == doctest::Approx(-0.5).epsilon(1e-3));
        // c is reported in the units of the input series.
        CHECK(*r.c_estimate == doctest::Approx(scale).epsilon(1e-2));
    }
    const auto fast = series(taus, [&](double t) { return TwoPlaneField::mode(0, 0, 2) * std::exp(-t); });
    auto big = fast;
    for (auto& f : big) f = f * 1e3;
    CHECK(*classify_teardrop(taus, fast).rate == doctest::Approx(*classify_teardrop(taus, big).rate).epsilon(1e-12));
}

TEST_CASE("teardrop input validation") {
    const auto taus = grid(0, 1, 0.5);
    CHECK_THROWS_AS(classify_teardrop(taus, series(taus, [](double) { return TwoPlaneField::z_tilde(); })), OutOfRange);
    const auto t4 = grid(0, 1.5, 0.5);
    CHECK_THROWS_AS(classify_teardrop(t4, series(t4, [](double) { return TwoPlaneField(); })), NonPositiveNorm);
}

}
