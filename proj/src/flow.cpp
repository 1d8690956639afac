#include "lmcf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>

#include "lmcf/errors.hpp"
#include "lmcf/parallel.hpp"
#include "lmcf/surfaces.hpp"

namespace lmcf {

namespace {
constexpr double kPi = std::numbers::pi;
}

void FlowConfig::validate() const {
    auto fail = [](const std::string& m) { throw ConfigInvalid(m); };
    if (!(sigma > 0.0 && sigma <= 0.5)) fail("sigma must lie in (0, 0.5]");
    if (integrator == Integrator::RKL2 && (stages < 2 || stages > 200)) fail("stages must lie in [2, 200]");
    if (!(h_target > 0.0)) fail("h_target must be positive");
    if (!(grading >= 0.0)) fail("grading must be non-negative");
    if (!(h_floor > 0.0 && h_floor <= h_target)) fail("h_floor must lie in (0, h_target]");
    if (!(remesh_ratio > 1.0)) fail("remesh_ratio must exceed 1");
    if (min_nodes < 5) fail("min_nodes must be at least 5");
    if (!(t_max > 0.0)) fail("t_max must be positive");
    if (!(min_radius_tol > 0.0 && max_curvature_tol > 0.0)) fail("tolerances must be positive");
    if (!(snapshot_dt > 0.0 && snapshot_fraction > 0.0)) fail("snapshot spacing must be positive");
}

std::string to_string(EventKind k) {
    switch (k) {
    case EventKind::Remesh: return "remesh";
    case EventKind::Pinch: return "pinch";
    case EventKind::Blowup: return "blowup";
    case EventKind::TMax: return "t_max";
    }
    return "unknown";
}

std::optional<FlowEvent> FlowTrajectory::pinch() const {
    for (const auto& e : events)
        if (e.kind == EventKind::Pinch) return e;
    return std::nullopt;
}

double FlowTrajectory::max_ledger_increase() const {
    double worst = -INFINITY;
    std::vector<std::optional<double>> last(probes.size());
    for (const auto& row : ledger) {
        auto& prev = last[static_cast<std::size_t>(row.probe)];
        if (prev) worst = std::max(worst, row.theta - *prev);
        prev = row.theta;
    }
    return worst;
}

double FlowTrajectory::max_osc_increase() const {
    double worst = -INFINITY;
    for (std::size_t i = 1; i < angle_osc.size(); ++i) worst = std::max(worst, angle_osc[i] - angle_osc[i - 1]);
    return worst;
}

// ---------------------------------------------------------------------------
// Velocity kernel

namespace {

struct NodeOut {
    double V;
    double k;
    double vx, vy;
};

// Three-point chord-length differences at b with neighbours a and c.
inline NodeOut node_velocity(double ax, double ay, double bx, double by, double cx, double cy) {
    const double hm = std::sqrt((bx - ax) * (bx - ax) + (by - ay) * (by - ay));
    const double hp = std::sqrt((cx - bx) * (cx - bx) + (cy - by) * (cy - by));
    const double den = 1.0 / (hm * hp * (hm + hp));
    const double hm2 = hm * hm, hp2 = hp * hp;
    const double sx = (hm2 * cx - hp2 * ax + (hp2 - hm2) * bx) * den;
    const double sy = (hm2 * cy - hp2 * ay + (hp2 - hm2) * by) * den;
    const double ssx = 2.0 * (hm * cx - (hm + hp) * bx + hp * ax) * den;
    const double ssy = 2.0 * (hm * cy - (hm + hp) * by + hp * ay) * den;
    const double iq = 1.0 / std::sqrt(sx * sx + sy * sy);
    const double k = (sx * ssy - sy * ssx) * iq * iq * iq;
    const double r2 = bx * bx + by * by;
    const double V = k + (bx * sy - by * sx) * iq / r2;
    // nu = i * unit tangent
    return {V, k, -sy * iq * V, sx * iq * V};
}

struct EndRule {
    bool fixed_front, fixed_back;
};

EndRule end_rule(const ProfileComponent& c, Boundary bc) {
    if (c.closed) return {false, false};
    // Only ends continued by rays slide; other open ends stay put.
    const bool asym = bc == Boundary::AsymptoticRay;
    return {!asym || !c.ray_front || std::abs(c.z.front()) == 0.0, !asym || !c.ray_back || std::abs(c.z.back()) == 0.0};
}

inline cplx ghost_outward(cplx end, cplx inner) {
    const double r = std::abs(end);
    return end + std::abs(end - inner) * end / r;
}

template <bool Extras>
void interior_velocity(const double* z, std::size_t lo, std::size_t hi, double* vel, double* speed, double* curv) {
    for (std::size_t j = lo; j < hi; ++j) {
        const double* p = z + 2 * j;
        const NodeOut o = node_velocity(p[-2], p[-1], p[0], p[1], p[2], p[3]);
        vel[2 * j] = o.vx;
        vel[2 * j + 1] = o.vy;
        if constexpr (Extras) {
            speed[j] = o.V;
            curv[j] = o.k;
        }
    }
}

// Velocity of nodes [lo, hi) of one component. `vel` and optional `speed`, `curv` are indexed by node.
void component_velocity(const ProfileComponent& c, Boundary bc, std::size_t lo, std::size_t hi, cplx* vel,
                        double* speed, double* curv) {
    const std::size_t n = c.z.size();
    const cplx* z = c.z.data();
    const EndRule ends = end_rule(c, bc);
    auto end_node = [&](std::size_t j) {
        cplx a, d;
        const bool front = j == 0, back = j == n - 1;
        if ((front && !c.closed && ends.fixed_front) || (back && !c.closed && ends.fixed_back)) {
            vel[j] = 0.0;
            if (speed) speed[j] = 0.0;
            if (curv) curv[j] = 0.0;
            return;
        }
        if (front) a = c.closed ? z[n - 1] : ghost_outward(z[0], z[1]);
        else a = z[j - 1];
        if (back) d = c.closed ? z[0] : ghost_outward(z[n - 1], z[n - 2]);
        else d = z[j + 1];
        const NodeOut o = node_velocity(a.real(), a.imag(), z[j].real(), z[j].imag(), d.real(), d.imag());
        vel[j] = {o.vx, o.vy};
        if (speed) speed[j] = o.V;
        if (curv) curv[j] = o.k;
    };
    if (lo == 0) end_node(0);
    const std::size_t a = std::max<std::size_t>(lo, 1), b = std::min(hi, n - 1);
    const auto* zr = reinterpret_cast<const double*>(z);
    auto* vr = reinterpret_cast<double*>(vel);
    if (a < b) {
        if (speed && curv) interior_velocity<true>(zr, a, b, vr, speed, curv);
        else if (!speed && !curv) interior_velocity<false>(zr, a, b, vr, nullptr, nullptr);
        else {
            std::vector<double> sp(n), cu(n);
            interior_velocity<true>(zr, a, b, vr, sp.data(), cu.data());
            for (std::size_t j = a; j < b; ++j) {
                if (speed) speed[j] = sp[j];
                if (curv) curv[j] = cu[j];
            }
        }
    }
    if (hi == n && n > 1) end_node(n - 1);
}

// Interior samples whose distance to the origin is monitored.
double monitored_min_radius(const ProfileCurve& curve) {
    double m = INFINITY;
    for (const auto& c : curve.components) {
        const std::size_t n = c.z.size();
        for (std::size_t j = 0; j < n; ++j) {
            const double r2 = std::norm(c.z[j]);
            if (!c.closed && (j == 0 || j == n - 1) && r2 == 0.0) continue;
            m = std::min(m, r2);
        }
    }
    return std::sqrt(m);
}

void check_origin(const ProfileCurve& curve, double min_radius) {
    const double m = monitored_min_radius(curve);
    if (m < min_radius || m == 0.0) {
        std::ostringstream msg;
        msg << "min |gamma| = " << m << " below " << min_radius;
        throw OriginContact(msg.str());
    }
}

VelocityField velocity_impl(const ProfileCurve& curve, Boundary bc, double min_radius, bool parallel) {
    check_origin(curve, min_radius);
    VelocityField f;
    for (const auto& c : curve.components) {
        f.speed.emplace_back(c.z.size());
        f.velocity.emplace_back(c.z.size());
        auto& sp = f.speed.back();
        auto& ve = f.velocity.back();
        const std::size_t nb = (c.z.size() + par::kBlock - 1) / par::kBlock;
        auto block = [&](std::size_t b) {
            const std::size_t lo = b * par::kBlock, hi = std::min(c.z.size(), lo + par::kBlock);
            component_velocity(c, bc, lo, hi, ve.data(), sp.data(), nullptr);
        };
        if (parallel) par::for_each_index(nb, block);
        else
            for (std::size_t b = 0; b < nb; ++b) block(b);
    }
    return f;
}

} // namespace

VelocityField velocity(const ProfileCurve& curve, Boundary bc, double min_radius) {
    return velocity_impl(curve, bc, min_radius, true);
}

VelocityField velocity_serial(const ProfileCurve& curve, Boundary bc, double min_radius) {
    return velocity_impl(curve, bc, min_radius, false);
}

// ---------------------------------------------------------------------------
// Remeshing

namespace {

double local_spacing(cplx z, const FlowConfig& cfg) {
    if (cfg.grading <= 0.0) return cfg.h_target;
    return std::clamp(cfg.grading * std::abs(z), cfg.h_floor, cfg.h_target);
}

ProfileComponent remesh_component(const ProfileComponent& c, const FlowConfig& cfg) {
    const ProfileSpline sp(c);
    const auto& knots = sp.knots();
    const int sub = 4;
    std::vector<double> s, m;
    s.reserve(knots.size() * sub);
    for (std::size_t k = 0; k + 1 < knots.size(); ++k)
        for (int q = 0; q < sub; ++q) s.push_back(knots[k] + (knots[k + 1] - knots[k]) * q / sub);
    s.push_back(knots.back());
    m.resize(s.size());
    m[0] = 0.0;
    double prev = 1.0 / local_spacing(sp.eval(s[0]), cfg);
    for (std::size_t i = 1; i < s.size(); ++i) {
        const double cur = 1.0 / local_spacing(sp.eval(s[i]), cfg);
        m[i] = m[i - 1] + 0.5 * (prev + cur) * (s[i] - s[i - 1]);
        prev = cur;
    }
    const int min_seg = c.closed ? cfg.min_nodes : cfg.min_nodes - 1;
    const int nseg = std::max(min_seg, static_cast<int>(std::lround(m.back())));
    ProfileComponent out = c;
    out.z.clear();
    const int count = c.closed ? nseg : nseg + 1;
    std::size_t i = 0;
    for (int k = 0; k < count; ++k) {
        if (!c.closed && k == nseg) {
            out.z.push_back(c.z.back());
            break;
        }
        if (k == 0) {
            out.z.push_back(c.z.front());
            continue;
        }
        const double target = m.back() * k / nseg;
        while (i + 1 < m.size() && m[i + 1] < target) ++i;
        const double f = (target - m[i]) / (m[i + 1] - m[i]);
        out.z.push_back(sp.eval(s[i] + f * (s[i + 1] - s[i])));
    }
    // Keep the angle lift anchored at the (unchanged) first sample.
    return out;
}

} // namespace

bool needs_remesh(const ProfileCurve& curve, const FlowConfig& cfg) {
    for (const auto& c : curve.components) {
        const std::size_t n = c.z.size();
        const int min_seg = c.closed ? cfg.min_nodes : cfg.min_nodes - 1;
        const bool may_coarsen = static_cast<int>(c.segments()) > min_seg;
        const double hi2 = cfg.remesh_ratio * cfg.remesh_ratio, lo2 = 1.0 / hi2;
        for (std::size_t j = 0; j < c.segments(); ++j) {
            const cplx a = c.z[j], b = c.z[(j + 1) % n];
            const double hl = local_spacing(0.5 * (a + b), cfg);
            const double ratio2 = std::norm(b - a) / (hl * hl);
            if (ratio2 > hi2 || (may_coarsen && ratio2 < lo2)) return true;
        }
    }
    return false;
}

ProfileCurve remesh(const ProfileCurve& curve, const FlowConfig& cfg) {
    ProfileCurve out = curve;
    for (auto& c : out.components) {
        const double theta0 = c.angles().front();
        c = remesh_component(c, cfg);
        c.theta_ref = theta0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Time stepping

namespace {

struct StepScratch {
    std::vector<std::vector<cplx>> k1, k2, k3, k4;
    ProfileCurve tmp, tmp2;
};

void eval_velocity(const ProfileCurve& c, Boundary bc, bool parallel, std::vector<std::vector<cplx>>& out,
                   double* max_speed, double* max_curv) {
    out.resize(c.components.size());
    double vmax = 0.0, kmax = 0.0;
    for (std::size_t ci = 0; ci < c.components.size(); ++ci) {
        const auto& comp = c.components[ci];
        out[ci].resize(comp.z.size());
        const std::size_t n = comp.z.size();
        const std::size_t nb = (n + par::kBlock - 1) / par::kBlock;
        std::vector<double> speed, curv;
        if (max_speed) speed.resize(n);
        if (max_curv) curv.resize(n);
        auto block = [&](std::size_t b) {
            const std::size_t lo = b * par::kBlock, hi = std::min(n, lo + par::kBlock);
            component_velocity(comp, bc, lo, hi, out[ci].data(), max_speed ? speed.data() : nullptr,
                               max_curv ? curv.data() : nullptr);
        };
        if (parallel) par::for_each_index(nb, block);
        else
            for (std::size_t b = 0; b < nb; ++b) block(b);
        for (double v : speed) vmax = std::max(vmax, std::abs(v));
        for (double k : curv) kmax = std::max(kmax, std::abs(k));
    }
    if (max_speed) *max_speed = vmax;
    if (max_curv) *max_curv = kmax;
}

void axpy(const ProfileCurve& base, double a, const std::vector<std::vector<cplx>>& k, ProfileCurve& out) {
    for (std::size_t ci = 0; ci < base.components.size(); ++ci) {
        const auto& z = base.components[ci].z;
        auto& o = out.components[ci].z;
        o.resize(z.size());
        const auto& kk = k[ci];
        for (std::size_t j = 0; j < z.size(); ++j) o[j] = z[j] + a * kk[j];
    }
}

double min_spacing(const ProfileCurve& c) {
    double h = INFINITY;
    for (const auto& comp : c.components)
        for (std::size_t j = 0; j < comp.segments(); ++j)
            h = std::min(h, std::norm(comp.z[(j + 1) % comp.z.size()] - comp.z[j]));
    return std::sqrt(h);
}

double angle_oscillation(const ProfileCurve& c) {
    double osc = 0.0;
    for (const auto& comp : c.components) {
        if (comp.closed) continue;
        const auto th = comp.angles();
        const auto [lo, hi] = std::minmax_element(th.begin(), th.end());
        osc = std::max(osc, *hi - *lo);
    }
    return osc;
}

void rk4_step(ProfileCurve& curve, double dt, const FlowConfig& cfg, StepScratch& s) {
    axpy(curve, 0.5 * dt, s.k1, s.tmp);
    eval_velocity(s.tmp, cfg.boundary, cfg.parallel, s.k2, nullptr, nullptr);
    axpy(curve, 0.5 * dt, s.k2, s.tmp);
    eval_velocity(s.tmp, cfg.boundary, cfg.parallel, s.k3, nullptr, nullptr);
    axpy(curve, dt, s.k3, s.tmp);
    eval_velocity(s.tmp, cfg.boundary, cfg.parallel, s.k4, nullptr, nullptr);
    for (std::size_t ci = 0; ci < curve.components.size(); ++ci) {
        auto& z = curve.components[ci].z;
        const auto &a = s.k1[ci], &b = s.k2[ci], &c = s.k3[ci], &d = s.k4[ci];
        for (std::size_t j = 0; j < z.size(); ++j) z[j] += dt / 6.0 * (a[j] + 2.0 * b[j] + 2.0 * c[j] + d[j]);
    }
}

// Runge-Kutta-Legendre, second order. s.k1 holds the velocity at the start.
void rkl2_step(ProfileCurve& curve, double dt, const FlowConfig& cfg, StepScratch& s) {
    const int st = cfg.stages;
    const double w1 = 4.0 / (st * st + st - 2.0);
    auto b = [](int j) { return j < 2 ? 1.0 / 3.0 : (j * j + j - 2.0) / (2.0 * j * (j + 1.0)); };
    ProfileCurve& y1 = s.tmp;  // Y_{j-1}
    ProfileCurve& y2 = s.tmp2; // Y_{j-2}
    y2 = curve;
    axpy(curve, w1 / 3.0 * dt, s.k1, y1);
    for (int j = 2; j <= st; ++j) {
        const double mu = (2.0 * j - 1.0) / j * b(j) / b(j - 1);
        const double nu = -(j - 1.0) / j * b(j) / b(j - 2);
        const double mut = mu * w1;
        const double gt = -(1.0 - b(j - 1)) * mut;
        eval_velocity(y1, cfg.boundary, cfg.parallel, s.k2, nullptr, nullptr);
        for (std::size_t ci = 0; ci < curve.components.size(); ++ci) {
            const auto& z0 = curve.components[ci].z;
            const auto& l0 = s.k1[ci];
            const auto& lj = s.k2[ci];
            auto& a = y1.components[ci].z;
            auto& c = y2.components[ci].z;
            for (std::size_t q = 0; q < z0.size(); ++q) {
                const cplx next = mu * a[q] + nu * c[q] + (1.0 - mu - nu) * z0[q] + mut * dt * lj[q] + gt * dt * l0[q];
                c[q] = a[q];
                a[q] = next;
            }
        }
    }
    for (std::size_t ci = 0; ci < curve.components.size(); ++ci) curve.components[ci].z.swap(y1.components[ci].z);
    y1 = curve;
}

} // namespace

FlowTrajectory evolve(ProfileCurve curve, const FlowConfig& cfg) {
    cfg.validate();
    curve.validate();
    FlowTrajectory traj;
    traj.probes = cfg.probes;
    int mesh_id = 0;
    double t = 0.0;
    if (cfg.remesh && needs_remesh(curve, cfg)) {
        curve = remesh(curve, cfg);
        traj.events.push_back({EventKind::Remesh, t, {}, 0.0, 0.0, curve.total_samples()});
    }

    auto record = [&](double time, const ProfileCurve& c) {
        traj.snapshots.push_back({time, c, mesh_id});
        for (std::size_t p = 0; p < cfg.probes.size(); ++p) {
            const Probe& pr = cfg.probes[p];
            if (time < pr.t0)
                traj.ledger.push_back({time, static_cast<int>(p), gaussian_area(c, pr.x0, std::sqrt(pr.t0 - time))});
        }
        traj.angle_osc.push_back(angle_oscillation(c));
    };
    record(t, curve);
    double last_snapshot = t;

    StepScratch s;
    s.tmp = curve;
    std::deque<std::pair<double, double>> history;  // (t, min|gamma|^2)
    double m_prev = monitored_min_radius(curve);
    history.emplace_back(t, m_prev * m_prev);
    bool prev_recorded = true;
    ProfileCurve prev_curve = curve;
    double prev_t = t;

    while (true) {
        if (t >= cfg.t_max) {
            if (!prev_recorded) record(t, curve);
            traj.events.push_back({EventKind::TMax, t, {}, 0.0, 0.0, curve.total_samples()});
            break;
        }
        double vmax = 0.0, kmax = 0.0;
        eval_velocity(curve, cfg.boundary, cfg.parallel, s.k1, &vmax, &kmax);
        if (kmax > cfg.max_curvature_tol) {
            if (!prev_recorded) record(t, curve);
            traj.events.push_back({EventKind::Blowup, t, {}, 0.0, 0.0, curve.total_samples()});
            break;
        }
        const double h = min_spacing(curve);
        const double diffusive = cfg.integrator == Integrator::RK4
                                     ? 0.696 * h * h
                                     : 0.125 * (cfg.stages * cfg.stages + cfg.stages - 2.0) * h * h;
        double dt = cfg.sigma * std::min(diffusive, vmax > 0.0 ? h / vmax : INFINITY);
        if (t + dt > cfg.t_max) dt = cfg.t_max - t;
        if (!(dt > 1e-15 * std::max(1.0, t))) {
            std::ostringstream msg;
            msg << "time step " << dt << " at t = " << t;
            throw StepCollapse(msg.str());
        }
        prev_curve = curve;
        prev_t = t;
        if (cfg.integrator == Integrator::RK4) rk4_step(curve, dt, cfg, s);
        else rkl2_step(curve, dt, cfg, s);
        t += dt;
        ++traj.steps;
        for (const auto& comp : curve.components)
            for (const auto& z : comp.z)
                if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw StepCollapse("non-finite state");

        const double m = monitored_min_radius(curve);
        history.emplace_back(t, m * m);
        if (history.size() > 4096) history.pop_front();

        if (m < cfg.min_radius_tol) {
            const double m2p = m_prev * m_prev, m2 = m * m, tol2 = cfg.min_radius_tol * cfg.min_radius_tol;
            const double T0 = prev_t + (m2p - tol2) / (m2p - m2) * (t - prev_t);
            // Linear fit of min|gamma|^2 over the final approach.
            double sw = 0, st = 0, sm = 0, stt = 0, stm = 0;
            const double window = 9.0 * tol2;
            std::size_t used = 0;
            for (auto it = history.rbegin(); it != history.rend(); ++it) {
                if (it->second > window && used >= 8) break;
                sw += 1;
                st += it->first;
                sm += it->second;
                stt += it->first * it->first;
                stm += it->first * it->second;
                ++used;
            }
            const double den = sw * stt - st * st;
            double T0x = T0;
            if (used >= 3 && den != 0.0) {
                const double slope = (sw * stm - st * sm) / den, icpt = (sm - slope * st) / sw;
                if (slope < 0.0) T0x = -icpt / slope;
            }
            if (!prev_recorded) record(prev_t, prev_curve);
            traj.events.push_back({EventKind::Pinch, T0, {}, T0, T0x, curve.total_samples()});
            break;
        }
        m_prev = m;

        if (cfg.remesh && needs_remesh(curve, cfg)) {
            curve = remesh(curve, cfg);
            ++mesh_id;
            traj.events.push_back({EventKind::Remesh, t, {}, 0.0, 0.0, curve.total_samples()});
            s.tmp = curve;
        }
        prev_recorded = false;
        double cadence = cfg.snapshot_dt;
        if (history.size() >= 2) {
            const auto& a = history[history.size() - 2];
            const auto& b = history.back();
            const double rate = (b.second - a.second) / (b.first - a.first);
            if (rate < 0.0) cadence = std::min(cadence, cfg.snapshot_fraction * b.second / -rate);
        }
        if (t - last_snapshot >= cadence || t >= cfg.t_max) {
            record(t, curve);
            prev_recorded = true;
            last_snapshot = t;
        }
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Rescaling

namespace {

ProfileComponent resample_like(const ProfileComponent& shape, const ProfileComponent& target) {
    // Evaluate `shape` at the normalized arclength fractions of `target`.
    const ProfileSpline sp(shape);
    const auto s_target = target.arclength();
    const double Lt = s_target.back(), Ls = sp.length();
    ProfileComponent out = target;
    for (std::size_t j = 0; j < target.z.size(); ++j) out.z[j] = sp.eval(s_target[j] / Lt * Ls);
    if (!target.closed) {
        out.z.front() = shape.z.front();
        out.z.back() = shape.z.back();
    }
    return out;
}

} // namespace

ProfileCurve interpolate(const FlowTrajectory& traj, double t) {
    const auto& snaps = traj.snapshots;
    if (snaps.empty()) throw OutOfRange("empty trajectory");
    if (t < snaps.front().t || t > snaps.back().t) {
        std::ostringstream msg;
        msg << "time " << t << " outside [" << snaps.front().t << ", " << snaps.back().t << "]";
        throw OutOfRange(msg.str());
    }
    auto it = std::lower_bound(snaps.begin(), snaps.end(), t, [](const Snapshot& s, double v) { return s.t < v; });
    if (it->t == t) return it->curve;
    const Snapshot& b = *it;
    const Snapshot& a = *(it - 1);
    const double f = (t - a.t) / (b.t - a.t);
    ProfileCurve out = a.curve;
    for (std::size_t ci = 0; ci < out.components.size(); ++ci) {
        const auto& za = a.curve.components[ci];
        const ProfileComponent zb = (a.mesh_id == b.mesh_id && za.z.size() == b.curve.components[ci].z.size())
                                        ? b.curve.components[ci]
                                        : resample_like(b.curve.components[ci], za);
        for (std::size_t j = 0; j < za.z.size(); ++j) out.components[ci].z[j] = (1.0 - f) * za.z[j] + f * zb.z[j];
    }
    return out;
}

std::vector<RescaledSnapshot> rescale(const FlowTrajectory& traj, const Point4& x0, double T0,
                                      const std::vector<double>& taus, TauOrigin origin) {
    if (norm(x0) != 0.0) throw OutOfRange("equivariant trajectories rescale about the origin only");
    if (!(T0 > 0.0)) throw OutOfRange("T0 must be positive");
    std::vector<RescaledSnapshot> out;
    double last = -INFINITY;
    for (double tau : taus) {
        if (!(tau > last)) throw OutOfRange("taus must be increasing");
        last = tau;
        const double remaining = origin == TauOrigin::Absolute ? std::exp(-tau) : T0 * std::exp(-tau);
        const double t = T0 - remaining;
        ProfileCurve c = interpolate(traj, t);
        const double lambda = 1.0 / std::sqrt(remaining);
        for (auto& comp : c.components)
            for (auto& z : comp.z) z *= lambda;
        out.push_back({tau, t, std::move(c)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Self-expanders

namespace {

struct ShotState {
    cplx g;
    double psi;
};

ShotState expander_rhs(const ShotState& s) {
    const cplx e = std::polar(1.0, s.psi);
    const double m2 = std::norm(s.g);
    const double im = (std::conj(s.g) * e).imag();
    return {e, -im * (0.5 + 1.0 / m2)};
}

// Integrates from the closest point until |gamma| reaches `radius`. Calls visit(state, s).
template <class Visit>
ShotState shoot(double r0, double mid, double radius, Visit&& visit) {
    ShotState s{std::polar(r0, mid), mid + 0.5 * kPi};
    double arc = 0.0;
    visit(s, arc);
    for (int it = 0; it < 10000000 && std::abs(s.g) < radius; ++it) {
        const double h = 0.004 * std::min(1.0, std::abs(s.g));
        auto add = [](const ShotState& a, const ShotState& k, double f) {
            return ShotState{a.g + f * k.g, a.psi + f * k.psi};
        };
        const ShotState k1 = expander_rhs(s);
        const ShotState k2 = expander_rhs(add(s, k1, 0.5 * h));
        const ShotState k3 = expander_rhs(add(s, k2, 0.5 * h));
        const ShotState k4 = expander_rhs(add(s, k3, h));
        s.g += h / 6.0 * (k1.g + 2.0 * k2.g + 2.0 * k3.g + k4.g);
        s.psi += h / 6.0 * (k1.psi + 2.0 * k2.psi + 2.0 * k3.psi + k4.psi);
        arc += h;
        visit(s, arc);
    }
    return s;
}

} // namespace

ExpanderResult expander_profile(double angle_gap, const ExpanderConfig& cfg) {
    if (!(angle_gap > 0.0 && angle_gap < 0.5 * kPi)) throw OutOfRange("angle_gap must lie in (0, pi/2)");
    const double lower = angle_gap - 0.5 * kPi;  // argument of the second ray
    const double mid = 0.5 * lower;
    const double far = std::max(cfg.extent, 12.0);
    auto residual = [&](double r0) {
        const ShotState s = shoot(r0, mid, far, [](const ShotState&, double) {});
        return std::arg(s.g);
    };
    double lo = cfg.r_lo, hi = cfg.r_hi;
    double flo = residual(lo), fhi = residual(hi);
    if (!(flo * fhi < 0.0)) {
        std::ostringstream msg;
        msg << "asymptotic argument does not change sign on [" << lo << ", " << hi << "]: " << flo << ", " << fhi;
        throw ShootingFailed(msg.str());
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        const double fm = residual(m);
        if (fm == 0.0) {
            lo = hi = m;
            break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = m;
            flo = fm;
        } else hi = m;
    }
    ExpanderResult res;
    res.r0 = 0.5 * (lo + hi);
    const double end_arg = residual(res.r0);
    res.shooting_residual = std::abs(end_arg);
    res.arguments = {end_arg, 2.0 * mid - end_arg};

    // Sample the forward half at the requested spacing, then mirror.
    // Samples sit at exact arclengths: cubic Hermite dense output between RK4 steps.
    std::vector<cplx> half;
    double next = 0.0, prev_arc = 0.0;
    ShotState prev{};
    auto spacing = [&](cplx g) { return cfg.grading > 0.0 ? std::min(cfg.h, cfg.grading * std::abs(g)) : cfg.h; };
    shoot(res.r0, mid, cfg.extent, [&](const ShotState& s, double arc) {
        if (arc == 0.0) {
            half.push_back(s.g);
            next = spacing(s.g);
        } else {
            const double step = arc - prev_arc;
            const cplx d0 = std::polar(step, prev.psi), d1 = std::polar(step, s.psi);
            while (next <= arc) {
                const double x = (next - prev_arc) / step, x2 = x * x, x3 = x2 * x;
                const cplx g = (2 * x3 - 3 * x2 + 1) * prev.g + (x3 - 2 * x2 + x) * d0 + (-2 * x3 + 3 * x2) * s.g +
                               (x3 - x2) * d1;
                half.push_back(g);
                next += spacing(g);
            }
        }
        prev = s;
        prev_arc = arc;
    });
    // Cut exactly at the extent radius.
    while (half.size() > 2 && std::abs(half.back()) > cfg.extent) half.pop_back();
    const cplx mirror = std::polar(1.0, 2.0 * mid);
    ProfileComponent comp;
    for (std::size_t k = half.size(); k-- > 1;) comp.z.push_back(mirror * std::conj(half[k]));
    for (const cplx& z : half) comp.z.push_back(z);
    comp.ray_front = comp.ray_back = true;
    comp.theta_ref = 2.0 * angle_gap;
    ExpanderResult out = std::move(res);
    out.curve.components.push_back(std::move(comp));
    out.curve.injective = embeddedness_check(out.curve).empty();
    return out;
}

double expander_residual(const ProfileCurve& curve, double radius) {
    double worst = 0.0;
    for (const auto& c : curve.components) {
        const std::size_t n = c.z.size();
        for (std::size_t j = 1; j + 1 < n; ++j) {
            const cplx a = c.z[j - 1], b = c.z[j], d = c.z[j + 1];
            if (std::abs(b) > radius) continue;
            const NodeOut o = node_velocity(a.real(), a.imag(), b.real(), b.imag(), d.real(), d.imag());
            const cplx nu = o.V != 0.0 ? cplx{o.vx, o.vy} / o.V : cplx{};
            const double support = (std::conj(b) * nu).real();
            worst = std::max(worst, std::abs(o.V - 0.5 * support));
        }
    }
    return worst;
}

} // namespace lmcf
