#include "lmcf/detect.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmcf/errors.hpp"

namespace lmcf {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<DensityCandidate> density_scan(const ProfileCurve& curve, double t, const std::vector<Point4>& centers,
                                           const std::vector<double>& scales, double threshold,
                                           const QuadOptions& opt) {
    for (double r : scales)
        if (!(r > 0.0) || !std::isfinite(r)) throw OutOfRange("scales must be positive and finite");
    std::vector<DensityCandidate> out;
    for (const Point4& x0 : centers) {
        if (!x0.finite()) throw OutOfRange("centres must be finite");
        std::vector<double> v(scales.size());
        for (std::size_t k = 0; k < scales.size(); ++k) v[k] = gaussian_area(curve, x0, scales[k], opt);
        for (std::size_t k = 0; k < scales.size(); ++k) {
            if (!(v[k] > threshold)) continue;
            const double slack = 1e-9;
            const bool left = k == 0 || v[k] >= v[k - 1] - slack;
            const bool right = k + 1 == scales.size() || v[k] >= v[k + 1] - slack;
            if (left && right) out.push_back({x0, scales[k], v[k], t});
        }
    }
    return out;
}

std::vector<DensityCandidate> density_scan(const FlowTrajectory& traj, const std::vector<Point4>& centers,
                                           const std::vector<double>& scales, double threshold,
                                           const QuadOptions& opt) {
    std::vector<DensityCandidate> out;
    for (const auto& s : traj.snapshots) {
        auto part = density_scan(s.curve, s.t, centers, scales, threshold, opt);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

PlaneFit fit_plane_pair(const ProfileCurve& curve, const Annulus& annulus, bool swap_branches, const QuadOptions& opt) {
    LabeledField f;
    f.theta = angle_field(curve, opt);
    f.branch = branch_labels(curve, f.theta.nodes);
    if (swap_branches)
        for (auto& b : f.branch) b = 1 - b;
    PlaneFit fit;
    fit.phi = branch_directions(f, annulus);
    // Profile arguments are defined mod pi; report them in [0, pi).
    for (double& p : fit.phi)
        if (p < 0.0) p += kPi;
    for (std::size_t i = 0; i < f.theta.size(); ++i) {
        const QuadNode& n = f.theta.nodes[i];
        const double r = norm(n.x);
        if (r < annulus.inner || r > annulus.outer) continue;
        const cplx z1 = n.x.z1(), z2 = n.x.z2();
        const cplx g2 = z1 * z1 + z2 * z2;  // gamma^2 on the orbit
        const double dev = 0.5 * std::arg(g2 * std::polar(1.0, -2.0 * fit.phi[static_cast<std::size_t>(f.branch[i])]));
        fit.residual = std::max(fit.residual, std::abs(dev));
    }
    fit.pair = PlanePair::make(LagPlane::from_ray(fit.phi[0]), LagPlane::from_ray(fit.phi[1]));
    return fit;
}

bool NeckPinchReport::embedded() const {
    return std::all_of(embeddedness.begin(), embeddedness.end(), [](const EmbeddednessRow& r) { return r.intersections == 0; });
}

std::optional<double> NeckPinchReport::max_graphicality() const {
    std::optional<double> m;
    for (const auto& g : graphicality)
        if (g.c) m = std::max(m.value_or(0.0), *g.c);
    return m;
}

NeckPinchReport classify_pinch(const FlowTrajectory& traj, const PinchOptions& opt) {
    const auto pinch = traj.pinch();
    if (!pinch) throw NoPinch("trajectory has no pinch event");
    NeckPinchReport rep;
    rep.x0 = pinch->x0;
    rep.T0 = pinch->T0;
    rep.T0_extrapolated = pinch->T0_extrapolated;
    const double T0 = opt.nondeg.use_extrapolated_T0 ? rep.T0_extrapolated : rep.T0;

    const Snapshot& last = traj.snapshots.back();
    if (last.t < T0) rep.density_at_pinch = gaussian_area(last.curve, rep.x0, std::sqrt(T0 - last.t), opt.nondeg.quad);

    for (const auto& s : traj.snapshots)
        if (s.t < T0) rep.embeddedness.push_back({s.t, embeddedness_check(s.curve).size()});

    // Rescaled snapshots on the graphicality window.
    std::vector<double> taus;
    for (double tau = opt.graph_tau_lo; tau <= opt.graph_tau_hi + 1e-9; tau += opt.graph_tau_step)
        if (const double t = T0 - T0 * std::exp(-tau); t >= traj.snapshots.front().t && t <= traj.t_end())
            taus.push_back(tau);
    std::vector<RescaledSnapshot> snaps;
    if (!taus.empty()) snaps = rescale(traj, rep.x0, T0, taus);
    try {
        if (snaps.empty()) throw OutOfRange("graphicality window is not covered by the trajectory");
        rep.planes = fit_plane_pair(snaps.back().curve, opt.fit_annulus, opt.nondeg.swap_branches, opt.nondeg.quad);
        for (const auto& s : snaps) {
            GraphicalityRow row{s.tau, std::nullopt, std::nullopt};
            try {
                const PlaneFit local = fit_plane_pair(s.curve, opt.fit_annulus, opt.nondeg.swap_branches, opt.nondeg.quad);
                row.c = graphicality(profile_surface(s.curve), local.pair, opt.graph_annulus.inner,
                                     opt.graph_annulus.outer, opt.graph)
                            .c;
            } catch (const NotGraphical& e) {
                row.error = e.what();
            }
            rep.graphicality.push_back(row);
        }
    } catch (const BranchAmbiguous& e) {
        rep.notes.push_back(std::string("plane fit: ") + e.what());
    } catch (const OutOfRange& e) {
        rep.notes.push_back(std::string("plane fit: ") + e.what());
    }

    rep.nondeg = classify_nondegenerate(traj, *pinch, opt.nondeg);
    if (rep.nondeg.error) rep.notes.push_back("angle limit: " + *rep.nondeg.error);
    rep.verdict = rep.nondeg.verdict;
    return rep;
}

Loop exactness_loop(cplx t_prime, double b, int samples) {
    auto pos = [=](double s) {
        return from_w_coordinates({t_prime * std::polar(1.0, s), std::polar(1.0, -s)}, b);
    };
    auto der = [=](double s) {
        // from_w_coordinates is real-linear in (w1, w2).
        const Point4 p = from_w_coordinates({cplx{0, 1} * t_prime * std::polar(1.0, s), cplx{0, -1} * std::polar(1.0, -s)}, b);
        return Vec4(p);
    };
    return Loop::parametric(pos, der, 2.0 * kPi, samples);
}

double exactness_integral(cplx t_prime, double b, int order) {
    return liouville_integral(exactness_loop(t_prime, b), LiouvilleForm::YdX, order);
}

std::vector<ExactnessRoot> exactness_scan(double b, int samples, double tol) {
    if (samples < 4) throw OutOfRange("exactness scan needs at least 4 samples");
    auto f = [&](double a) { return exactness_integral(std::polar(1.0, a), b); };
    // Offset grid so that roots do not land on grid points by symmetry.
    const double offset = 0.5 / samples;
    std::vector<double> grid(static_cast<std::size_t>(samples) + 1), val(grid.size());
    for (int k = 0; k <= samples; ++k) {
        grid[static_cast<std::size_t>(k)] = 2.0 * kPi * (k + offset) / samples - kPi;
        val[static_cast<std::size_t>(k)] = k == samples ? val[0] : f(grid[static_cast<std::size_t>(k)]);
    }
    grid.back() = grid.front() + 2.0 * kPi;
    std::vector<ExactnessRoot> roots;
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        double lo = grid[k], hi = grid[k + 1], flo = val[k], fhi = val[k + 1];
        if (flo == 0.0) {
            hi = lo;
        } else if (flo * fhi > 0.0 || fhi == 0.0) {
            continue;
        }
        while (hi - lo > tol) {
            const double m = 0.5 * (lo + hi);
            const double fm = f(m);
            if (fm == 0.0) {
                lo = hi = m;
                break;
            }
            if ((fm < 0.0) == (flo < 0.0)) {
                lo = m;
                flo = fm;
            } else hi = m;
        }
        double a = 0.5 * (lo + hi);
        a = std::remainder(a, 2.0 * kPi);
        // Report the branch cut as +pi.
        if (a <= -kPi + 1e-12) a += 2.0 * kPi;
        roots.push_back({a, std::polar(1.0, a), f(a)});
    }
    if (roots.empty()) throw NoSignChange("Liouville integral has no sign change on the unit circle");
    std::sort(roots.begin(), roots.end(), [](const ExactnessRoot& x, const ExactnessRoot& y) { return x.angle < y.angle; });
    return roots;
}

} // namespace lmcf
