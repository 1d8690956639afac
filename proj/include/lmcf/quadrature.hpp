#pragma once

#include <cstddef>
#include <vector>

namespace lmcf::quad {

/// Nodes and weights of a one-dimensional quadrature rule.
struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
    std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [-1, 1]. Rules are computed once and cached.
const Rule& gauss_legendre(int order);

/// Gauss-Laguerre rule for the weight e^{-x} on [0, inf).
const Rule& gauss_laguerre(int order);

/// Composite Gauss-Legendre integral of f over [a, b] with `panels` equal panels.
template <class F>
double integrate(F&& f, double a, double b, int panels, int order) {
    const Rule& rule = gauss_legendre(order);
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        double panel = 0.0;
        for (std::size_t k = 0; k < rule.size(); ++k)
            panel += rule.weights[k] * f(mid + 0.5 * width * rule.nodes[k]);
        total += 0.5 * width * panel;
    }
    return total;
}

/// Adaptive Simpson with absolute tolerance. Independent of the Gauss rules,
/// so tests use it as an oracle.
template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int max_depth = 48) {
    struct Impl {
        F& f;
        double run(double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth) {
            const double m = 0.5 * (a + b);
            const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
            const double flm = f(lm), frm = f(rm);
            const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            const double delta = left + right - whole;
            if (depth <= 0 || (delta < 15.0 * tol && delta > -15.0 * tol))
                return left + right + delta / 15.0;
            return run(a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
                   run(m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
        }
    } impl{f};
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return impl.run(a, b, fa, fm, fb, whole, tol, max_depth);
}

} // namespace lmcf::quad
