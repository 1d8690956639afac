#pragma once

// Two planes meeting in a line: P1 = {x = w = 0} (coordinates y, z) and
// P2 = {y = w = 0} (coordinates x, z). Fields are Hermite expansions per plane,
// so Gaussian pairings are exact sums of coefficient products.

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace lmcf {

struct TwoPlaneField {
    int cap = 8;
    // p[k][i][j]: coefficient of H_i(first coordinate) H_j(z) on plane k.
    std::array<std::vector<std::vector<double>>, 2> p;

    explicit TwoPlaneField(int degree_cap = 8);
    double& at(int plane, int i, int j);
    double at(int plane, int i, int j) const;
    /// Value on plane k at (a, z), a = y on P1 and x on P2.
    double operator()(int plane, double a, double z) const;

    TwoPlaneField operator+(const TwoPlaneField& o) const;
    TwoPlaneField operator-(const TwoPlaneField& o) const;
    TwoPlaneField operator*(double s) const;

    void validate() const;

    // Rescaled coordinate functions and the angle-weighted height.
    static TwoPlaneField x_tilde(int cap = 8);
    static TwoPlaneField y_tilde(int cap = 8);
    static TwoPlaneField z_tilde(int cap = 8);
    static TwoPlaneField theta_z(double theta1, double theta2, int cap = 8);
    /// Hermite mode H_i H_j on one plane.
    static TwoPlaneField mode(int plane, int i, int j, int cap = 8);
};

double gaussian_inner(const TwoPlaneField& f, const TwoPlaneField& g);
double gaussian_norm(const TwoPlaneField& f);

/// Removes the Gaussian-orthogonal projection onto span{x~, y~, z~}.
TwoPlaneField project_out_V(const TwoPlaneField& f);

struct RateEstimate {
    double rate = 0.0;
    double stderr_ = 0.0;
};

/// Least-squares slope of log(norm) against tau.
RateEstimate growth_rate(const std::vector<double>& taus, const std::vector<double>& norms);

enum class TeardropVerdict { Nondegenerate, Degenerate, Undetermined };
std::string to_string(TeardropVerdict v);

struct TeardropOptions {
    double tol = 0.01;
    double theta1 = 0.0, theta2 = 3.141592653589793;
};

struct TeardropReport {
    TeardropVerdict verdict = TeardropVerdict::Undetermined;
    std::optional<double> rate, rate_stderr;
    double correlation = 0.0;
    std::optional<double> c_estimate;
};

/// Classifies a series W(tau). The series is normalized by its norm at the first grid point.
TeardropReport classify_teardrop(const std::vector<double>& taus, const std::vector<TwoPlaneField>& series,
                                 const TeardropOptions& opt = {});

} // namespace lmcf
