#include <doctest.h>

#include "lmcf/detect.hpp"
#include "lmcf/errors.hpp"
#include "lmcf/parallel.hpp"
#include "support.hpp"

using namespace lmcf;
using lmcf::test::kPi;

namespace {

FlowTrajectory static_trajectory(const ProfileCurve& c) {
    FlowTrajectory tr;
    tr.snapshots.push_back({0.0, c, 0});
    return tr;
}

ProfileCurve rays(std::initializer_list<double> args) {
    ProfileCurve c;
    for (double phi : args) {
        ProfileComponent comp = ray_component(phi, 0.0, 4.0, 0.01);
        comp.theta_ref = 2 * phi;
        c.components.push_back(comp);
    }
    return c;
}

// Connect sum with a tiny neck: on the unit annulus it is the pair of rays.
ProfileCurve sharp_neck(double kappa) {
    BridgeOptions bo;
    bo.h = 0.01;
    bo.extent = 4.0;
    return connect_sum_profile(kappa, 1e-3, 0.5, bo);
}

FlowTrajectory coarse_neck() {
    BridgeOptions bo;
    bo.h = 0.04;
    bo.grading = 0.1;
    bo.extent = 4.0;
    FlowConfig cfg;
    cfg.h_target = 0.04;
    cfg.grading = 0.1;
    cfg.boundary = Boundary::AsymptoticRay;
    cfg.t_max = 2.0;
    cfg.min_radius_tol = 1e-4;
    cfg.snapshot_fraction = 0.02;
    return evolve(connect_sum_profile(0.1, 0.2, 0.5, bo), cfg);
}

} // namespace

TEST_SUITE("detect") {

TEST_CASE("density scan of static planes") {
    const std::vector<double> scales{0.1, 0.3, 1.0, 3.0};
    CHECK(density_scan(static_trajectory(rays({0.4})), {Point4{}}, scales, 1.5).empty());
    const auto cands = density_scan(static_trajectory(rays({0.0, 0.5 * kPi})), {Point4{}}, scales, 1.9);
    REQUIRE(cands.size() == scales.size());
    for (const auto& c : cands) CHECK(c.value == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("density candidates are stable under quadrature refinement") {
    const ProfileCurve c = connect_sum_profile(0.1, 0.05, 0.5);
    QuadOptions lo, hi;
    hi.order = 2 * lo.order;
    const std::vector<double> scales{0.5, 1.0, 2.0, 4.0};
    const auto a = density_scan(c, 0.0, {Point4{}, Point4{0.5, 0.2, 0, 0}}, scales, 0.5, lo);
    REQUIRE_FALSE(a.empty());
    for (const auto& cand : a) {
        CHECK(cand.value >= 1 - 1e-6);
        CHECK(std::abs(gaussian_area(c, cand.x0, cand.r0, hi) - cand.value) < 1e-6);
    }
}

TEST_CASE("plane pair fit on exact rays") {
    for (double kappa : {0.0, 0.1}) {
        const PlaneFit fit = fit_plane_pair(sharp_neck(kappa));
        CHECK(fit.pair.transverse);
        // The bridge perturbs the rays at order neck_scale^2.
        CHECK(fit.residual < 1e-5);
        // The first summand is the ray of argument 0.
        CHECK(std::abs(fit.phi[0]) < 1e-6);
        CHECK(fit.phi[1] == doctest::Approx(0.5 * kPi + kappa).epsilon(1e-6));
        CHECK(std::abs(std::remainder(fit.pair.planes[0].angle - fit.pair.planes[1].angle + (kPi + 2 * kappa), 2 * kPi)) < 1e-5);
        CHECK(std::abs(symplectic_pullback(fit.pair.planes[0].e1, fit.pair.planes[0].e2)) < 1e-12);
    }
}

TEST_CASE("plane pair fit needs a neck") {
    ProfileCurve c;
    c.components.push_back(circle_component(1.5, 400));
    CHECK_THROWS_AS(fit_plane_pair(c), BranchAmbiguous);
}

TEST_CASE("classify_pinch without a pinch event") {
    CHECK_THROWS_AS(classify_pinch(static_trajectory(rays({0.0, 0.5 * kPi}))), NoPinch);
}

TEST_CASE("classify_pinch on a centred circle") {
    ProfileCurve c;
    c.components.push_back(circle_component(1.0, 629));
    FlowConfig cfg;
    cfg.h_target = 0.01;
    cfg.min_radius_tol = 0.005;
    cfg.snapshot_fraction = 0.02;
    const NeckPinchReport rep = classify_pinch(evolve(c, cfg));
    CHECK(rep.verdict == Nondegeneracy::DegenerateOrUndetermined);
    bool noted = false;
    for (const auto& n : rep.notes) noted = noted || n.find("BranchAmbiguous") != std::string::npos;
    CHECK(noted);
}

TEST_CASE("coarse neck pinch report") {
    const FlowTrajectory tr = coarse_neck();
    REQUIRE(tr.pinch());
    PinchOptions opt;
    opt.nondeg.tau_lo = 3.0;
    opt.nondeg.tau_hi = 4.0;
    opt.graph_tau_lo = 2.0;
    opt.graph_tau_hi = 4.0;
    const NeckPinchReport rep = classify_pinch(tr, opt);
    CHECK(rep.T0 == doctest::Approx(tr.pinch()->T0_extrapolated));
    CHECK(rep.density_at_pinch > 1.9);
    CHECK(rep.density_at_pinch < 2.1);
    CHECK(rep.embedded());
    REQUIRE(rep.planes);
    CHECK(rep.planes->pair.transverse);
    REQUIRE(rep.max_graphicality());
    CHECK(*rep.max_graphicality() < 1.0);
    // The verdict is recomputable from the stored branch means.
    const double e = rep.nondeg.expected;
    const auto m = rep.nondeg.limit.means;
    const bool nd = std::abs(m[0] + e) <= opt.nondeg.tol && std::abs(m[1] - e) <= opt.nondeg.tol;
    CHECK((rep.verdict == Nondegeneracy::Nondegenerate) == nd);

    // Swapping the branch labels reverses the sign pattern.
    PinchOptions swapped = opt;
    swapped.nondeg.swap_branches = true;
    const NeckPinchReport rev = classify_pinch(tr, swapped);
    CHECK(rev.nondeg.limit.means[0] == doctest::Approx(m[1]).epsilon(1e-12));
    if (nd) CHECK(rev.verdict == Nondegeneracy::Reversed);

    // Deterministic across thread counts.
    par::set_threads(1);
    const NeckPinchReport one = classify_pinch(tr, opt);
    par::set_threads(0);
    CHECK(one.nondeg.limit.means == rep.nondeg.limit.means);
    CHECK(one.density_at_pinch == rep.density_at_pinch);
    CHECK(one.verdict == rep.verdict);
}

TEST_CASE("density scan finds the neck pinch at the origin") {
    const FlowTrajectory tr = coarse_neck();
    const double T0 = tr.pinch()->T0_extrapolated;
    const auto& last = tr.snapshots.back();
    const double r = std::sqrt(T0 - last.t);
    const auto cands = density_scan(last.curve, last.t, {Point4{}, Point4{1.0, 0, 0, 0}}, {0.5 * r, r, 2 * r}, 1.9);
    REQUIRE_FALSE(cands.empty());
    for (const auto& c : cands) CHECK(c.x0 == Point4{});
}

TEST_CASE("exactness integral and roots") {
    CHECK(exactness_integral({0, 1}, 0.7) == doctest::Approx(2 * kPi).epsilon(1e-12));
    CHECK(exactness_integral({0, -1}, 0.7) == doctest::Approx(-2 * kPi).epsilon(1e-12));
    for (double b : {0.0, 0.7, 2.0}) {
        const auto roots = exactness_scan(b);
        REQUIRE(roots.size() == 2);
        CHECK(std::abs(roots[0].t_prime - cplx{1, 0}) < 1e-10);
        CHECK(std::abs(roots[1].t_prime - cplx{-1, 0}) < 1e-10);
        for (const auto& r : roots) CHECK(std::abs(r.value) < 1e-10);
    }
}

}
