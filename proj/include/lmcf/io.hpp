#pragma once

// Scenario configuration (versioned JSON) and trajectory/report artifacts.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmcf/detect.hpp"
#include "lmcf/flow.hpp"
#include "lmcf/teardrop.hpp"

namespace lmcf {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int kSchemaVersion = 1;

enum class InitialKind { Circle, ConnectSum, Expander };

struct InitialSpec {
    InitialKind kind = InitialKind::ConnectSum;
    // circle
    double radius = 1.0;
    int samples = 0;  // 0: from flow.h_target
    // connect sum
    double kappa = 0.1, neck_scale = 0.05, smoothing = 0.5;
    BridgeOptions bridge;
    ScenarioBounds bounds;
    // expander
    double angle_gap = 0.1;
    ExpanderConfig expander;
};

struct DensitySpec {
    std::vector<Point4> centers{Point4{}};
    std::vector<double> scales;
    double threshold = 1.95;
};

enum class TeardropSeries { ThetaZ, PureV, Fast };

struct TeardropSpec {
    TeardropSeries series = TeardropSeries::ThetaZ;
    double c = 1.0;
    double noise = 1e-3;  // amplitude of the e^{-tau} Hermite mixture
    std::vector<double> taus;
    int cap = 8;
    TeardropOptions options;
};

struct ExactnessSpec {
    double b = 0.0;
    int samples = 64;
    double tol = 1e-14;
};

struct Scenario {
    std::string name = "scenario";
    std::uint64_t seed = 0;
    InitialSpec initial;
    FlowConfig flow;
    PinchOptions analysis;
    std::optional<std::string> trajectory;  // analyze/density input; simulate when absent
    DensitySpec density;
    TeardropSpec teardrop;
    ExactnessSpec exactness;

    void validate() const;
};

/// Throws ConfigInvalid on schema violations, unknown fields or invalid values.
Scenario parse_scenario(const json& j);
Scenario load_scenario(const fs::path& path);
/// Canonical form: every field, fixed order.
json to_json(const Scenario& s);
std::uint64_t fnv1a64(const std::string& bytes);
/// Hash of the canonical dump.
std::string config_hash(const Scenario& s);

/// Sets the Gauss-Legendre order of every quadrature the scenario uses.
void set_quadrature_order(Scenario& s, int order);

ProfileCurve initial_curve(const Scenario& s);

// Number formatting ------------------------------------------------------------

/// %.17g, lossless for doubles.
std::string fmt(double v);

// Trajectories ---------------------------------------------------------------------

/// Layout: snapshots/NNNNNN.csv, snapshots/index.csv, events.csv, ledger.csv, probes.csv.
void write_trajectory(const fs::path& dir, const FlowTrajectory& traj);
FlowTrajectory read_trajectory(const fs::path& dir);

std::string snapshot_csv(const ProfileCurve& c);
ProfileCurve parse_snapshot_csv(const std::string& text);

// Reports ------------------------------------------------------------------------

json to_json(const NeckPinchReport& r, const PinchOptions& opt);
json to_json(const TeardropReport& r);
std::string candidates_csv(const std::vector<DensityCandidate>& c);
/// Chart samples of every component, u uniform over the part inside |x| <= radius
/// (infinite charts), alpha uniform in [0, 2 pi). Columns component,u,alpha,x1,y1,x2,y2,theta.
std::string surface_csv(const ParamSurface& s, int samples_u, int samples_a, double radius);
std::string roots_csv(const std::vector<ExactnessRoot>& r);

/// Canonical JSON text (two-space indent, trailing newline).
std::string dump(const json& j);

std::string read_file(const fs::path& p);
/// Writes atomically via a temporary file. Throws IoError.
void write_file(const fs::path& p, const std::string& text);

} // namespace lmcf
