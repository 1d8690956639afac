#include <doctest.h>

#include <algorithm>

#include "lmcf/errors.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/surfaces.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace lmcf;
using lmcf::test::kPi;

namespace {

ProfileCurve circle(double R, double h) {
    ProfileCurve c;
    c.components.push_back(circle_component(R, static_cast<int>(std::ceil(2 * kPi * R / h))));
    return c;
}

double ray_deviation(const ProfileCurve& c, const std::vector<double>& args) {
    double worst = 0.0;
    for (std::size_t k = 0; k < c.components.size(); ++k)
        for (cplx z : c.components[k].z) worst = std::max(worst, std::abs(std::imag(z * std::polar(1.0, -args[k]))));
    return worst;
}

} // namespace

TEST_SUITE("flow") {

TEST_CASE("velocity of planes and circles") {
    ProfileCurve ray;
    ray.components.push_back(ray_component(0.3, 0.5, 4.0, 0.01));
    const VelocityField rv = velocity(ray);
    for (double v : rv.speed[0]) CHECK(std::abs(v) < 1e-9);

    for (double R : {0.5, 1.0, 2.0}) {
        const ProfileCurve c = circle(R, 0.005);
        const VelocityField v = velocity(c);
        for (std::size_t k = 0; k < v.speed[0].size(); ++k) {
            CHECK(v.speed[0][k] == doctest::Approx(2 / R).epsilon(1e-4));
            const cplx inward = -c.components[0].z[k] / R;
            CHECK(std::abs(v.velocity[0][k] - (2 / R) * inward) < 1e-4);
        }
    }
}

TEST_CASE("velocity equals the extrinsic mean curvature to second order") {
    for (const auto& tc : test::velocity_test_curves()) {
        const double e1 = test::velocity_error(tc, 200), e2 = test::velocity_error(tc, 400);
        CHECK(e1 < 1e-2 * test::max_H(tc));
        const double ratio = e1 / e2;
        CHECK(ratio >= 3.0);
        CHECK(ratio <= 5.0);
    }
}

TEST_CASE("serial and parallel velocity agree bitwise") {
    const ProfileCurve c = connect_sum_profile(0.1, 0.1, 0.5);
    const VelocityField a = velocity(c), b = velocity_serial(c);
    CHECK(a.speed == b.speed);
}

TEST_CASE("origin contact stops the velocity") {
    const ProfileCurve c = circle(0.01, 0.0005);
    CHECK_THROWS_AS(velocity(c, Boundary::FixedRay, 0.1), OriginContact);
}

TEST_CASE("circle radius follows sqrt(R0^2 - 4t)") {
    FlowConfig cfg;
    cfg.h_target = 0.01;
    cfg.t_max = 0.1;
    cfg.snapshot_dt = 0.02;
    const FlowTrajectory tr = evolve(circle(1.0, 0.01), cfg);
    CHECK_FALSE(tr.pinch());
    for (const auto& s : tr.snapshots) {
        const double R = std::sqrt(1 - 4 * s.t);
        for (cplx z : s.curve.components[0].z) CHECK(std::abs(std::abs(z) - R) < 1e-4);
    }
    for (std::size_t k = 1; k < tr.snapshots.size(); ++k) CHECK(tr.snapshots[k].t > tr.snapshots[k - 1].t);
}

TEST_CASE("circle pinch time converges at second order") {
    // Stop radius 0.2: the exact stopping time is (1 - 0.04) / 4.
    const double exact = 0.24;
    std::vector<double> err;
    for (double h : {0.04, 0.02, 0.01}) {
        FlowConfig cfg;
        cfg.h_target = h;
        cfg.min_radius_tol = 0.2;
        cfg.t_max = 1.0;
        const auto p = evolve(circle(1.0, h), cfg).pinch();
        REQUIRE(p);
        err.push_back(std::abs(p->T0 - exact));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        CHECK(err[k] / err[k + 1] >= 3.0);
        CHECK(err[k] / err[k + 1] <= 5.0);
    }
}

TEST_CASE("circle pinches at 1/4 with the Gaussian density ledger monotone") {
    FlowConfig cfg;
    cfg.h_target = 0.005;
    cfg.min_radius_tol = 0.01;
    cfg.probes = {{Point4{}, 0.25}, {Point4{}, 0.5}, {Point4{0.5, 0, 0, 0}, 0.3}};
    const FlowTrajectory tr = evolve(circle(1.0, 0.005), cfg);
    const auto p = tr.pinch();
    REQUIRE(p);
    CHECK(std::abs(p->T0 - 0.25) < 1e-3);
    CHECK(std::abs(p->T0_extrapolated - 0.25) < 1e-4);
    CHECK(p->x0 == Point4{});
    CHECK_FALSE(tr.ledger.empty());
    CHECK(tr.max_ledger_increase() <= 1e-6);
}

TEST_CASE("static plane pair does not move") {
    ProfileCurve c;
    for (double phi : {0.0, 0.5 * kPi}) c.components.push_back(ray_component(phi, 0.0, 3.0, 0.02));
    c.components[0].ray_front = false;
    c.components[1].ray_front = false;
    // The rays start at the origin; keep them off it so the flow is defined.
    for (auto& comp : c.components) comp.z.erase(comp.z.begin());
    FlowConfig cfg;
    cfg.h_target = 0.02;
    cfg.t_max = 0.05;
    cfg.min_radius_tol = 1e-3;
    cfg.boundary = Boundary::AsymptoticRay;
    const FlowTrajectory tr = evolve(c, cfg);
    for (const auto& e : tr.events) CHECK((e.kind == EventKind::TMax || e.kind == EventKind::Remesh));
    CHECK(tr.t_end() == doctest::Approx(0.05));
    for (const auto& s : tr.snapshots) CHECK(ray_deviation(s.curve, {0.0, 0.5 * kPi}) < 1e-8);
}

TEST_CASE("connect sum flow keeps the angle oscillation and the ledger monotone") {
    BridgeOptions bo;
    bo.h = 0.04;
    bo.grading = 0.1;
    bo.extent = 4.0;
    const ProfileCurve c = connect_sum_profile(0.1, 0.2, 0.5, bo);
    FlowConfig cfg;
    cfg.h_target = 0.04;
    cfg.grading = 0.1;
    cfg.boundary = Boundary::AsymptoticRay;
    cfg.t_max = 2.0;
    cfg.min_radius_tol = 1e-3;
    cfg.probes = {{Point4{}, 0.6}, {Point4{0.2, 0, 0, 0}, 0.5}};
    const FlowTrajectory tr = evolve(c, cfg);
    REQUIRE(tr.pinch());
    CHECK(tr.pinch()->T0 < 2.0);
    CHECK(tr.max_ledger_increase() <= 1e-6);
    CHECK(tr.max_osc_increase() <= 1e-6);
    CHECK(tr.angle_osc.size() == tr.snapshots.size());
}

TEST_CASE("rescaling a circle trajectory") {
    FlowConfig cfg;
    cfg.h_target = 0.005;
    cfg.min_radius_tol = 0.01;
    cfg.snapshot_fraction = 0.02;
    const FlowTrajectory tr = evolve(circle(1.0, 0.005), cfg);
    // Absolute tau: t = T0 - e^{-tau}, so tau > ln 4 lies inside the trajectory.
    const auto snaps = rescale(tr, Point4{}, 0.25, {2.0, 3.0, 4.0}, TauOrigin::Absolute);
    REQUIRE(snaps.size() == 3);
    for (const auto& s : snaps) {
        CHECK(s.t == doctest::Approx(0.25 - std::exp(-s.tau)));
        for (cplx z : s.curve.components[0].z) CHECK(std::abs(std::abs(z) - 2.0) < 2e-3);
    }
    CHECK_THROWS_AS(rescale(tr, Point4{}, 0.25, {1.0}, TauOrigin::Absolute), OutOfRange);
    CHECK_THROWS_AS(rescale(tr, Point4{}, 0.25, {20.0}, TauOrigin::Absolute), OutOfRange);
    CHECK_THROWS_AS(rescale(tr, Point4{0.1, 0, 0, 0}, 0.25, {1.0}), OutOfRange);
    // Translated origin: tau = 0 is t = 0.
    const auto t0 = rescale(tr, Point4{}, 0.25, {0.0});
    CHECK(t0[0].t == doctest::Approx(0.0));
}

TEST_CASE("rescaling a static plane returns the plane") {
    ProfileCurve c;
    c.components.push_back(ray_component(0.4, 0.5, 3.0, 0.02));
    FlowConfig cfg;
    cfg.h_target = 0.02;
    cfg.t_max = 0.04;
    cfg.boundary = Boundary::AsymptoticRay;
    cfg.snapshot_dt = 0.01;
    const FlowTrajectory tr = evolve(c, cfg);
    for (const auto& s : rescale(tr, Point4{}, 0.05, {0.5, 1.0}, TauOrigin::Translated))
        CHECK(ray_deviation(s.curve, {0.4}) < 1e-8);
}

TEST_CASE("linear time interpolation between snapshots") {
    FlowConfig cfg;
    cfg.h_target = 0.01;
    cfg.t_max = 0.05;
    cfg.snapshot_dt = 0.01;
    cfg.remesh = false;
    const FlowTrajectory tr = evolve(circle(1.0, 0.01), cfg);
    const auto& a = tr.snapshots[1];
    const auto& b = tr.snapshots[2];
    const double t = 0.25 * a.t + 0.75 * b.t;
    const ProfileCurve mid = interpolate(tr, t);
    for (std::size_t k = 0; k < mid.components[0].z.size(); ++k)
        CHECK(std::abs(mid.components[0].z[k] - (0.25 * a.curve.components[0].z[k] + 0.75 * b.curve.components[0].z[k])) <
              1e-14);
}

TEST_CASE("remeshing keeps the curve in place") {
    const ProfileCurve c = circle(1.0, 0.05);
    FlowConfig cfg;
    cfg.h_target = 0.01;
    const ProfileCurve r = remesh(c, cfg);
    CHECK(r.components[0].z.size() > c.components[0].z.size());
    for (cplx z : r.components[0].z) CHECK(std::abs(std::abs(z) - 1.0) < 1e-4);
}

TEST_CASE("expander profile") {
    ExpanderConfig ec;
    ec.h = 0.02;
    const ExpanderResult ex = expander_profile(0.1, ec);
    CHECK(ex.shooting_residual < 1e-8);
    CHECK(std::abs(ex.arguments[0]) < 1e-8);
    CHECK(std::abs(ex.arguments[1] - (0.1 - 0.5 * kPi)) < 1e-8);
    // Second-order discrete residual of V = <x, nu> / 2.
    ExpanderConfig fine = ec;
    fine.h = 0.01;
    const double r1 = expander_residual(ex.curve, 4.0), r2 = expander_residual(expander_profile(0.1, fine).curve, 4.0);
    CHECK(r2 < 1e-3);
    CHECK(r1 / r2 >= 3.0);
    CHECK(r1 / r2 <= 5.0);
    CHECK(ex.curve.injective);
    // A plain connect sum is far from self-expanding.
    CHECK(expander_residual(connect_sum_profile(0.1, 0.5, 0.5), 4.0) > 0.1);
    CHECK_THROWS(expander_profile(2.0, ec));
}

TEST_CASE("flow config validation") {
    FlowConfig cfg;
    cfg.sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
    cfg = {};
    cfg.h_target = -1;
    CHECK_THROWS_AS(cfg.validate(), ConfigInvalid);
}

}
