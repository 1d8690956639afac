#include "lmcf/teardrop.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "lmcf/errors.hpp"
#include "lmcf/gaussian.hpp"

namespace lmcf {

TwoPlaneField::TwoPlaneField(int degree_cap) : cap(degree_cap) {
    if (cap < 1 || cap > kMaxHermiteDegree) throw DegreeTooLarge("degree cap must lie in [1, 12]");
    for (auto& m : p) m.assign(static_cast<std::size_t>(cap + 1), std::vector<double>(static_cast<std::size_t>(cap + 1), 0.0));
}

double& TwoPlaneField::at(int plane, int i, int j) {
    if (plane < 0 || plane > 1 || i < 0 || j < 0) throw OutOfRange("bad plane or Hermite index");
    if (i + j > cap) throw DegreeTooLarge("mode degree exceeds the cap");
    return p[static_cast<std::size_t>(plane)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
}

double TwoPlaneField::at(int plane, int i, int j) const { return const_cast<TwoPlaneField&>(*this).at(plane, i, j); }

double TwoPlaneField::operator()(int plane, double a, double z) const {
    double acc = 0.0;
    for (int i = 0; i <= cap; ++i) {
        const auto hi = hermite_1d(i);
        double va = 0.0;
        for (std::size_t k = hi.size(); k-- > 0;) va = va * a + hi[k];
        for (int j = 0; i + j <= cap; ++j) {
            const double c = at(plane, i, j);
            if (c == 0.0) continue;
            const auto hj = hermite_1d(j);
            double vz = 0.0;
            for (std::size_t k = hj.size(); k-- > 0;) vz = vz * z + hj[k];
            acc += c * va * vz;
        }
    }
    return acc;
}

namespace {

void same_cap(const TwoPlaneField& a, const TwoPlaneField& b) {
    if (a.cap != b.cap) throw OutOfRange("fields have different degree caps");
}

} // namespace

TwoPlaneField TwoPlaneField::operator+(const TwoPlaneField& o) const {
    same_cap(*this, o);
    TwoPlaneField out = *this;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i <= cap; ++i)
            for (int j = 0; i + j <= cap; ++j) out.at(k, i, j) += o.at(k, i, j);
    return out;
}

TwoPlaneField TwoPlaneField::operator-(const TwoPlaneField& o) const { return *this + o * -1.0; }

TwoPlaneField TwoPlaneField::operator*(double s) const {
    TwoPlaneField out = *this;
    for (auto& m : out.p)
        for (auto& r : m)
            for (auto& v : r) v *= s;
    return out;
}

void TwoPlaneField::validate() const {
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i <= cap; ++i)
            for (int j = 0; j <= cap; ++j) {
                const double v = p[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
                if (!std::isfinite(v)) throw OutOfRange("non-finite coefficient");
                if (i + j > cap && v != 0.0) throw DegreeTooLarge("coefficient above the degree cap");
            }
}

TwoPlaneField TwoPlaneField::x_tilde(int cap) { return mode(1, 1, 0, cap); }
TwoPlaneField TwoPlaneField::y_tilde(int cap) { return mode(0, 1, 0, cap); }
TwoPlaneField TwoPlaneField::z_tilde(int cap) { return mode(0, 0, 1, cap) + mode(1, 0, 1, cap); }

TwoPlaneField TwoPlaneField::theta_z(double theta1, double theta2, int cap) {
    return mode(0, 0, 1, cap) * theta1 + mode(1, 0, 1, cap) * theta2;
}

TwoPlaneField TwoPlaneField::mode(int plane, int i, int j, int cap) {
    TwoPlaneField f(cap);
    f.at(plane, i, j) = 1.0;
    return f;
}

double gaussian_inner(const TwoPlaneField& f, const TwoPlaneField& g) {
    same_cap(f, g);
    double acc = 0.0;
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i <= f.cap; ++i)
            for (int j = 0; i + j <= f.cap; ++j) {
                const double a = f.at(k, i, j), b = g.at(k, i, j);
                if (a != 0.0 && b != 0.0) acc += a * b * hermite_norm2(i, j);
            }
    return acc;
}

double gaussian_norm(const TwoPlaneField& f) { return std::sqrt(gaussian_inner(f, f)); }

TwoPlaneField project_out_V(const TwoPlaneField& f) {
    const std::array<TwoPlaneField, 3> v{TwoPlaneField::x_tilde(f.cap), TwoPlaneField::y_tilde(f.cap),
                                         TwoPlaneField::z_tilde(f.cap)};
    Eigen::Matrix3d G;
    Eigen::Vector3d b;
    for (int a = 0; a < 3; ++a) {
        b(a) = gaussian_inner(f, v[a]);
        for (int c = 0; c < 3; ++c) G(a, c) = gaussian_inner(v[a], v[c]);
    }
    if (!(std::abs(G.determinant()) > 1e-12 * G.norm() * G.norm() * G.norm())) throw SingularGram("Gram matrix of V is singular");
    const Eigen::Vector3d coef = G.ldlt().solve(b);
    TwoPlaneField out = f;
    for (int a = 0; a < 3; ++a) out = out - v[a] * coef(a);
    return out;
}

RateEstimate growth_rate(const std::vector<double>& taus, const std::vector<double>& norms) {
    if (taus.size() != norms.size() || taus.size() < 4) throw OutOfRange("growth_rate needs at least 4 matching points");
    const std::size_t n = taus.size();
    double st = 0, sy = 0;
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(norms[i] > 0.0) || !std::isfinite(norms[i])) throw NonPositiveNorm("norm series must be positive");
        y[i] = std::log(norms[i]);
        st += taus[i];
        sy += y[i];
    }
    const double tm = st / n, ym = sy / n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (taus[i] - tm) * (taus[i] - tm);
        sxy += (taus[i] - tm) * (y[i] - ym);
    }
    if (!(sxx > 0.0)) throw OutOfRange("tau grid is degenerate");
    RateEstimate r;
    r.rate = sxy / sxx;
    double ssr = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (ym + r.rate * (taus[i] - tm));
        ssr += e * e;
    }
    r.stderr_ = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
    return r;
}

std::string to_string(TeardropVerdict v) {
    switch (v) {
    case TeardropVerdict::Nondegenerate: return "nondegenerate";
    case TeardropVerdict::Degenerate: return "degenerate";
    case TeardropVerdict::Undetermined: return "undetermined";
    }
    return "unknown";
}

TeardropReport classify_teardrop(const std::vector<double>& taus, const std::vector<TwoPlaneField>& series,
                                 const TeardropOptions& opt) {
    if (taus.size() != series.size() || taus.size() < 4) throw OutOfRange("teardrop series needs at least 4 points");
    for (std::size_t i = 1; i < taus.size(); ++i)
        if (!(taus[i] > taus[i - 1])) throw OutOfRange("taus must be increasing");
    for (const auto& f : series) f.validate();
    const double n0 = gaussian_norm(series.front());
    if (!(n0 > 0.0)) throw NonPositiveNorm("series vanishes at the first grid point");

    TeardropReport rep;
    std::vector<double> norms;
    std::vector<TwoPlaneField> proj;
    for (const auto& f : series) {
        proj.push_back(project_out_V(f * (1.0 / n0)));
        norms.push_back(gaussian_norm(proj.back()));
    }
    double peak = 0.0;
    for (double v : norms) peak = std::max(peak, v);
    if (peak < 1e-12) {
        rep.verdict = TeardropVerdict::Degenerate;
        return rep;
    }
    const RateEstimate r = growth_rate(taus, norms);
    rep.rate = r.rate;
    rep.rate_stderr = r.stderr_;

    const TwoPlaneField dir = project_out_V(TwoPlaneField::theta_z(opt.theta1, opt.theta2, series.front().cap));
    const double dn = gaussian_norm(dir);
    if (!(dn > 0.0)) throw SingularGram("theta z~ lies in V; choose distinct plane angles");
    rep.correlation = gaussian_inner(proj.back(), dir) / (norms.back() * dn);

    if (r.rate < -0.5 - opt.tol) rep.verdict = TeardropVerdict::Degenerate;
    else if (std::abs(r.rate + 0.5) <= opt.tol && std::abs(rep.correlation) > 1.0 - opt.tol) {
        rep.verdict = TeardropVerdict::Nondegenerate;
        rep.c_estimate = gaussian_inner(project_out_V(series.back()), dir) / (dn * dn) * std::exp(0.5 * taus.back());
    } else rep.verdict = TeardropVerdict::Undetermined;
    return rep;
}

} // namespace lmcf
