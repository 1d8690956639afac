#include "lmcf/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lmcf/errors.hpp"

namespace lmcf {

namespace {
constexpr double kPi = std::numbers::pi;
}

void WeightedScalarField::validate() const {
    if (nodes.size() != values.size()) throw OutOfRange("field sample count does not match its nodes");
    for (double v : values)
        if (!std::isfinite(v)) throw OutOfRange("field has non-finite values");
}

WeightedScalarField sample_field(const ProfileCurve& c, const std::function<double(const QuadNode&)>& f,
                                 const QuadOptions& opt) {
    WeightedScalarField out;
    out.nodes = gaussian_nodes(c, Point4{}, 1.0, opt, true);
    out.values.reserve(out.nodes.size());
    for (const auto& n : out.nodes) out.values.push_back(f(n));
    out.validate();
    return out;
}

WeightedScalarField sample_field(const ParamSurface& s, const std::function<double(const QuadNode&)>& f,
                                 const QuadOptions& opt) {
    WeightedScalarField out;
    out.nodes = gaussian_nodes(s, Point4{}, 1.0, opt, true);
    out.values.reserve(out.nodes.size());
    for (const auto& n : out.nodes) out.values.push_back(f(n));
    out.validate();
    return out;
}

WeightedScalarField angle_field(const ProfileCurve& c, const QuadOptions& opt) {
    return sample_field(c, [](const QuadNode& n) { return n.theta; }, opt);
}

WeightedScalarField angle_field(const ParamSurface& s, const QuadOptions& opt) {
    return sample_field(s, [](const QuadNode& n) { return n.theta; }, opt);
}

double weighted_mass(const WeightedScalarField& f) {
    double m = 0.0;
    for (const auto& n : f.nodes) m += n.w;
    return m;
}

double weighted_mean(const WeightedScalarField& f) {
    double m = 0.0, s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        m += f.nodes[i].w;
        s += f.nodes[i].w * f.values[i];
    }
    if (!(m > 0.0)) throw OutOfRange("field has no Gaussian mass");
    return s / m;
}

double weighted_norm(const WeightedScalarField& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += f.nodes[i].w * f.values[i] * f.values[i];
    return std::sqrt(s);
}

double centered_norm(const WeightedScalarField& f) {
    const double mean = weighted_mean(f);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double d = f.values[i] - mean;
        s += f.nodes[i].w * d * d;
    }
    return std::sqrt(s);
}

WeightedScalarField normalized_angle(const WeightedScalarField& theta, double guard) {
    theta.validate();
    const double mean = weighted_mean(theta);
    const double n = centered_norm(theta);
    if (!(n > guard)) {
        std::ostringstream msg;
        msg << "angle is constant up to " << n;
        throw ConstantField(msg.str());
    }
    WeightedScalarField out = theta;
    for (auto& v : out.values) v = (v - mean) / n;
    return out;
}

// ---------------------------------------------------------------------------
// Hermite

int Polynomial2::degree() const {
    int d = -1;
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c[i].size(); ++j)
            if (c[i][j] != 0.0) d = std::max(d, static_cast<int>(i + j));
    return d;
}

double Polynomial2::operator()(double x, double y) const {
    double acc = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) {
        double row = 0.0;
        for (std::size_t j = c[i].size(); j-- > 0;) row = row * y + c[i][j];
        acc = acc * x + row;
    }
    return acc;
}

namespace {

Polynomial2 zero_poly(std::size_t nx, std::size_t ny) {
    return Polynomial2{std::vector<std::vector<double>>(nx, std::vector<double>(ny, 0.0))};
}

} // namespace

Polynomial2 Polynomial2::operator+(const Polynomial2& o) const {
    std::size_t nx = std::max(c.size(), o.c.size()), ny = 0;
    for (const auto& r : c) ny = std::max(ny, r.size());
    for (const auto& r : o.c) ny = std::max(ny, r.size());
    Polynomial2 out = zero_poly(nx, ny);
    for (std::size_t i = 0; i < c.size(); ++i)
        for (std::size_t j = 0; j < c[i].size(); ++j) out.c[i][j] += c[i][j];
    for (std::size_t i = 0; i < o.c.size(); ++i)
        for (std::size_t j = 0; j < o.c[i].size(); ++j) out.c[i][j] += o.c[i][j];
    return out;
}

Polynomial2 Polynomial2::operator*(double s) const {
    Polynomial2 out = *this;
    for (auto& r : out.c)
        for (auto& v : r) v *= s;
    return out;
}

bool Polynomial2::operator==(const Polynomial2& o) const {
    const Polynomial2 d = *this + o * -1.0;
    return d.degree() < 0;
}

Polynomial2 drift_operator(const Polynomial2& p) {
    std::size_t ny = 0;
    for (const auto& r : p.c) ny = std::max(ny, r.size());
    Polynomial2 out = zero_poly(p.c.size(), ny);
    for (std::size_t i = 0; i < p.c.size(); ++i)
        for (std::size_t j = 0; j < p.c[i].size(); ++j) {
            const double a = p.c[i][j];
            if (a == 0.0) continue;
            if (i >= 2) out.c[i - 2][j] -= static_cast<double>(i * (i - 1)) * a;
            if (j >= 2) out.c[i][j - 2] -= static_cast<double>(j * (j - 1)) * a;
            out.c[i][j] += 0.5 * static_cast<double>(i + j) * a;
        }
    return out;
}

std::vector<double> hermite_1d(int k) {
    if (k < 0) throw OutOfRange("Hermite degree must be non-negative");
    if (k > kMaxHermiteDegree) throw DegreeTooLarge("Hermite degree above " + std::to_string(kMaxHermiteDegree));
    std::vector<double> prev{1.0}, cur{0.0, 1.0};
    if (k == 0) return prev;
    for (int n = 1; n < k; ++n) {
        std::vector<double> next(static_cast<std::size_t>(n + 2), 0.0);
        for (std::size_t i = 0; i < cur.size(); ++i) next[i + 1] += cur[i];
        for (std::size_t i = 0; i < prev.size(); ++i) next[i] -= 2.0 * n * prev[i];
        prev = std::move(cur);
        cur = std::move(next);
    }
    return cur;
}

HermiteFunction hermite(int k1, int k2) {
    const auto a = hermite_1d(k1), b = hermite_1d(k2);
    HermiteFunction h;
    h.k1 = k1;
    h.k2 = k2;
    h.poly = zero_poly(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) h.poly.c[i][j] = a[i] * b[j];
    return h;
}

HermiteFunction drift_heat_evolve(const HermiteFunction& h, double tau) {
    HermiteFunction out = h;
    out.amplitude *= std::exp(-h.eigenvalue() * tau);
    return out;
}

double hermite_norm2(int k1, int k2) {
    if (k1 < 0 || k2 < 0) throw OutOfRange("Hermite degree must be non-negative");
    return 4.0 * kPi * std::ldexp(1.0, k1 + k2) * std::tgamma(k1 + 1.0) * std::tgamma(k2 + 1.0);
}

std::string to_string(ThreeAnnulus r) {
    switch (r) {
    case ThreeAnnulus::HypothesisFailed: return "hypothesis_failed";
    case ThreeAnnulus::ImplicationHolds: return "implication_holds";
    case ThreeAnnulus::ImplicationViolated: return "implication_violated";
    }
    return "unknown";
}

ThreeAnnulus three_annulus_check(const std::array<double, 3>& n, double s) {
    if (std::abs(s - std::round(s)) < 1e-6) throw IntegerRate("three-annulus rate must not be an integer");
    for (double v : n)
        if (!(v >= 0.0) || !std::isfinite(v)) throw OutOfRange("norms must be finite and non-negative");
    const double f = std::exp(0.5 * s);
    constexpr double rel = 1e-9;
    if (!(n[1] > 0.0) || n[1] < f * n[0] * (1.0 - rel)) return ThreeAnnulus::HypothesisFailed;
    return n[2] >= f * n[1] * (1.0 - rel) ? ThreeAnnulus::ImplicationHolds : ThreeAnnulus::ImplicationViolated;
}

// ---------------------------------------------------------------------------
// Branches

std::vector<int> branch_labels(const ProfileCurve& c, const std::vector<QuadNode>& nodes) {
    if (c.components.size() != 1) throw BranchAmbiguous("branch split needs exactly one profile component");
    const auto& comp = c.components.front();
    if (comp.closed) throw BranchAmbiguous("closed profile has no two-sided neck");
    std::size_t jm = 0;
    for (std::size_t j = 1; j < comp.z.size(); ++j)
        if (std::norm(comp.z[j]) < std::norm(comp.z[jm])) jm = j;
    if (jm == 0 || jm + 1 == comp.z.size()) throw BranchAmbiguous("neck sits at an end of the profile");
    const double u_neck = comp.arclength()[jm];
    std::vector<int> out;
    out.reserve(nodes.size());
    for (const auto& n : nodes) {
        const bool back = n.u > u_neck;
        out.push_back(back == c.first_summand_back ? 0 : 1);
    }
    return out;
}

LabeledField label_snapshot(const RescaledSnapshot& s, bool swap_branches, const QuadOptions& opt) {
    LabeledField f;
    f.tau = s.tau;
    f.theta = angle_field(s.curve, opt);
    f.branch = branch_labels(s.curve, f.theta.nodes);
    if (swap_branches)
        for (auto& b : f.branch) b = 1 - b;
    return f;
}

namespace {

bool in_annulus(const QuadNode& n, const Annulus& a) {
    const double r = norm(n.x);
    return r >= a.inner && r <= a.outer;
}

double angle_mod_pi(double a) { return a - kPi * std::round(a / kPi); }

} // namespace

std::array<double, 2> branch_directions(const LabeledField& f, const Annulus& annulus) {
    std::array<cplx, 2> acc{};
    for (std::size_t i = 0; i < f.theta.size(); ++i) {
        const QuadNode& n = f.theta.nodes[i];
        if (!in_annulus(n, annulus)) continue;
        const cplx z1 = n.x.z1(), z2 = n.x.z2();
        acc[static_cast<std::size_t>(f.branch[i])] += n.w * (z1 * z1 + z2 * z2);
    }
    for (const cplx& a : acc)
        if (std::abs(a) == 0.0) throw BranchAmbiguous("a branch has no mass on the annulus");
    return {0.5 * std::arg(acc[0]), 0.5 * std::arg(acc[1])};
}

AngleLimit angle_limit(const std::vector<LabeledField>& fields, const Annulus& annulus) {
    if (fields.empty()) throw OutOfRange("angle_limit needs at least one field");
    AngleLimit out;
    std::optional<std::array<double, 2>> prev_dir;
    for (const auto& f : fields) {
        if (f.branch.size() != f.theta.size()) throw BranchAmbiguous("labels do not match the field");
        const auto dir = branch_directions(f, annulus);
        if (std::abs(angle_mod_pi(dir[0] - dir[1])) < 0.05) throw BranchAmbiguous("branches share a direction");
        if (prev_dir)
            for (int b = 0; b < 2; ++b)
                if (std::abs(angle_mod_pi(dir[b] - (*prev_dir)[b])) > 0.25)
                    throw BranchAmbiguous("branch labels are inconsistent across the window");
        prev_dir = dir;

        const WeightedScalarField u = normalized_angle(f.theta);
        AngleLimitRow row;
        row.tau = f.tau;
        row.norm = centered_norm(f.theta);
        std::array<double, 2> m{}, w{};
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!in_annulus(u.nodes[i], annulus)) continue;
            const auto b = static_cast<std::size_t>(f.branch[i]);
            m[b] += u.nodes[i].w * u.values[i];
            w[b] += u.nodes[i].w;
        }
        for (int b = 0; b < 2; ++b) row.means[b] = m[b] / w[b];
        for (std::size_t i = 0; i < u.size(); ++i) {
            if (!in_annulus(u.nodes[i], annulus)) continue;
            row.residual = std::max(row.residual, std::abs(u.values[i] - row.means[f.branch[i]]));
        }
        out.rows.push_back(row);
    }
    for (const auto& r : out.rows) {
        out.means[0] += r.means[0] / out.rows.size();
        out.means[1] += r.means[1] / out.rows.size();
        out.residual = std::max(out.residual, r.residual);
    }
    return out;
}

std::string to_string(Nondegeneracy v) {
    switch (v) {
    case Nondegeneracy::Nondegenerate: return "nondegenerate";
    case Nondegeneracy::Reversed: return "reversed";
    case Nondegeneracy::DegenerateOrUndetermined: return "degenerate_or_undetermined";
    }
    return "unknown";
}

namespace {

std::vector<double> tau_grid(double lo, double hi, double step) {
    std::vector<double> out;
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(lo + k * step);
    return out;
}

// Keeps the taus whose physical time lies inside the trajectory.
std::vector<double> available(const FlowTrajectory& traj, double T0, std::vector<double> taus) {
    std::erase_if(taus, [&](double tau) {
        const double t = T0 - T0 * std::exp(-tau);
        return t < traj.snapshots.front().t || t > traj.t_end();
    });
    return taus;
}

} // namespace

NondegResult classify_nondegenerate(const FlowTrajectory& traj, const FlowEvent& pinch, const NondegOptions& opt) {
    NondegResult res;
    res.expected = 1.0 / std::sqrt(8.0 * kPi);
    const double T0 = opt.use_extrapolated_T0 ? pinch.T0_extrapolated : pinch.T0;
    try {
        const auto taus = available(traj, T0, tau_grid(opt.tau_lo, opt.tau_hi, opt.tau_step));
        if (taus.size() < 2) throw OutOfRange("late tau window is not covered by the trajectory");
        const auto snaps = rescale(traj, pinch.x0, T0, taus);
        std::vector<LabeledField> fields;
        for (const auto& s : snaps) fields.push_back(label_snapshot(s, opt.swap_branches, opt.quad));
        res.limit = angle_limit(fields, opt.annulus);

        // Slow-decay gap relative to the ray-end angles of each branch.
        const auto slow = available(traj, T0, tau_grid(opt.slow_lo, opt.slow_hi, opt.tau_step));
        double s_max = 0.0;
        for (const auto& s : rescale(traj, pinch.x0, T0, slow)) {
            const LabeledField f = label_snapshot(s, opt.swap_branches, opt.quad);
            const auto ends = s.curve.components.front().angles();
            // Branch 0 is the back side when first_summand_back holds (and no swap).
            const bool b0_back = s.curve.first_summand_back != opt.swap_branches;
            const std::array<double, 2> ref{b0_back ? ends.back() : ends.front(), b0_back ? ends.front() : ends.back()};
            res.kappa0 = std::abs(ref[1] - ref[0]);
            if (!(res.kappa0 > 1e-12)) throw ConstantField("ray ends carry the same angle");
            for (std::size_t i = 0; i < f.theta.size(); ++i) {
                if (!in_annulus(f.theta.nodes[i], opt.annulus)) continue;
                const double d = std::abs(f.theta.values[i] - ref[static_cast<std::size_t>(f.branch[i])]);
                s_max = std::max(s_max, d / res.kappa0);
            }
        }
        res.slowdecay_s = s_max;

        // Three-annulus test on unit-spaced rescaled times.
        const auto unit = available(traj, T0, tau_grid(0.0, opt.tau_hi, 1.0));
        std::vector<double> norms;
        for (const auto& s : rescale(traj, pinch.x0, T0, unit)) norms.push_back(centered_norm(angle_field(s.curve, opt.quad)));
        for (std::size_t k = 0; k + 2 < norms.size(); ++k)
            res.three_annulus.emplace_back(unit[k], three_annulus_check({norms[k], norms[k + 1], norms[k + 2]},
                                                                        opt.three_annulus_s));
    } catch (const BranchAmbiguous& e) {
        res.error = e.what();
        return res;
    } catch (const ConstantField& e) {
        res.error = e.what();
        return res;
    }
    const auto& m = res.limit.means;
    const double e = res.expected;
    if (std::abs(m[0] + e) <= opt.tol && std::abs(m[1] - e) <= opt.tol) res.verdict = Nondegeneracy::Nondegenerate;
    else if (std::abs(m[0] - e) <= opt.tol && std::abs(m[1] + e) <= opt.tol) res.verdict = Nondegeneracy::Reversed;
    return res;
}

} // namespace lmcf
