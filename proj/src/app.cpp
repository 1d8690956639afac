#include "lmcf/app.hpp"

#include <Eigen/Core>
#include <chrono>
#include <cmath>
#include <ctime>
#include <random>
#include <sstream>

#include "lmcf/errors.hpp"
#include "lmcf/parallel.hpp"

namespace lmcf {

std::string to_string(Command c) {
    switch (c) {
    case Command::Simulate: return "simulate";
    case Command::Analyze: return "analyze";
    case Command::Density: return "density";
    case Command::Teardrop: return "teardrop";
    case Command::Exactness: return "exactness";
    }
    return "unknown";
}

namespace {

void say(const RunOptions& opt, const std::string& msg) {
    if (opt.verbose && opt.log) opt.log(msg);
}

fs::path resolve(const fs::path& base, const std::string& p) {
    const fs::path q(p);
    return q.is_absolute() ? q : base / q;
}

json event_json(const FlowEvent& e) {
    return {{"kind", to_string(e.kind)},
            {"t", e.t},
            {"x0", json::array({e.x0.x1, e.x0.y1, e.x0.x2, e.x0.y2})},
            {"T0", e.T0},
            {"T0_extrapolated", e.T0_extrapolated},
            {"nodes", e.nodes}};
}

json trajectory_summary(const FlowTrajectory& traj) {
    json j = {{"steps", traj.steps}, {"snapshots", traj.snapshots.size()}, {"t_end", traj.t_end()}};
    const auto p = traj.pinch();
    j["pinch"] = p ? event_json(*p) : json(nullptr);
    j["max_ledger_increase"] = traj.ledger.empty() ? json(nullptr) : json(traj.max_ledger_increase());
    j["max_osc_increase"] = traj.angle_osc.size() < 2 ? json(nullptr) : json(traj.max_osc_increase());
    return j;
}

FlowTrajectory obtain_trajectory(const Scenario& s, const RunOptions& opt) {
    if (s.trajectory) {
        const fs::path dir = resolve(opt.config.parent_path(), *s.trajectory);
        say(opt, "reading trajectory " + dir.string());
        return read_trajectory(dir);
    }
    say(opt, "simulating " + s.name);
    return evolve(initial_curve(s), s.flow);
}

std::string timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json versions() {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION;
    std::ostringstream js;
    js << NLOHMANN_JSON_VERSION_MAJOR << "." << NLOHMANN_JSON_VERSION_MINOR << "." << NLOHMANN_JSON_VERSION_PATCH;
    json v = {{"lmcf", kVersion}, {"compiler", __VERSION__}, {"eigen", eigen.str()}, {"nlohmann_json", js.str()}};
#ifdef _OPENMP
    v["openmp"] = _OPENMP;
#else
    v["openmp"] = nullptr;
#endif
    return v;
}

Scenario load(const RunOptions& opt) {
    Scenario s = load_scenario(opt.config);
    if (opt.quadrature_order) set_quadrature_order(s, *opt.quadrature_order);
    return s;
}

} // namespace

std::vector<double> teardrop_taus(const TeardropSpec& spec) {
    if (!spec.taus.empty()) return spec.taus;
    std::vector<double> t;
    for (int k = 0; k <= 12; ++k) t.push_back(0.5 * k);
    return t;
}

std::vector<TwoPlaneField> teardrop_series(const TeardropSpec& spec, const std::vector<double>& taus, std::uint64_t seed) {
    const int cap = spec.cap;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    // Fixed mixture of degree-2 modes (rate -1) and a rate -1/2 component inside V.
    TwoPlaneField mix(cap), vpart(cap);
    for (int plane = 0; plane < 2; ++plane)
        for (int i = 0; i <= 2; ++i) mix.at(plane, i, 2 - i) = unit(rng);
    vpart = TwoPlaneField::x_tilde(cap) * unit(rng) + TwoPlaneField::y_tilde(cap) * unit(rng) +
            TwoPlaneField::z_tilde(cap) * unit(rng);
    const TwoPlaneField tz = TwoPlaneField::theta_z(spec.options.theta1, spec.options.theta2, cap);
    std::vector<TwoPlaneField> out;
    for (double tau : taus) {
        const double half = std::exp(-0.5 * tau), full = std::exp(-tau);
        switch (spec.series) {
        case TeardropSeries::ThetaZ: out.push_back(tz * (spec.c * half) + vpart * half + mix * (spec.noise * full)); break;
        case TeardropSeries::PureV: out.push_back(TwoPlaneField::x_tilde(cap) * half); break;
        case TeardropSeries::Fast: out.push_back(TwoPlaneField::mode(0, 0, 2, cap) * full + mix * full); break;
        }
    }
    return out;
}

json run_command(Command cmd, const RunOptions& opt) {
    const auto start = std::chrono::steady_clock::now();
    if (opt.threads < 0) throw ConfigInvalid("--threads must be non-negative");
    par::set_threads(opt.threads);
    const Scenario s = load(opt);
    say(opt, "loaded " + opt.config.string() + " (" + s.name + ")");
    json results;

    switch (cmd) {
    case Command::Simulate: {
        const FlowTrajectory traj = evolve(initial_curve(s), s.flow);
        say(opt, "evolved " + std::to_string(traj.steps) + " steps");
        write_trajectory(opt.out, traj);
        results = trajectory_summary(traj);
        break;
    }
    case Command::Analyze: {
        const FlowTrajectory traj = obtain_trajectory(s, opt);
        const NeckPinchReport rep = classify_pinch(traj, s.analysis);
        say(opt, "verdict " + to_string(rep.verdict));
        write_file(opt.out / "report.json", dump(to_json(rep, s.analysis)));
        results = {{"verdict", to_string(rep.verdict)}, {"trajectory", trajectory_summary(traj)}};
        break;
    }
    case Command::Density: {
        if (s.density.scales.empty()) throw ConfigInvalid("density.scales must not be empty");
        const FlowTrajectory traj = obtain_trajectory(s, opt);
        const auto cands = density_scan(traj, s.density.centers, s.density.scales, s.density.threshold, s.analysis.nondeg.quad);
        say(opt, std::to_string(cands.size()) + " candidates");
        write_file(opt.out / "candidates.csv", candidates_csv(cands));
        results = {{"candidates", cands.size()}};
        break;
    }
    case Command::Teardrop: {
        const auto taus = teardrop_taus(s.teardrop);
        if (taus.size() < 4) throw ConfigInvalid("teardrop.taus needs at least 4 points");
        const TeardropReport rep = classify_teardrop(taus, teardrop_series(s.teardrop, taus, s.seed), s.teardrop.options);
        write_file(opt.out / "report.json", dump(to_json(rep)));
        results = {{"verdict", to_string(rep.verdict)}};
        break;
    }
    case Command::Exactness: {
        const auto roots = exactness_scan(s.exactness.b, s.exactness.samples, s.exactness.tol);
        write_file(opt.out / "roots.csv", roots_csv(roots));
        results = {{"roots", roots.size()}};
        break;
    }
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json meta = {{"schema_version", kSchemaVersion},
                 {"command", to_string(cmd)},
                 {"name", s.name},
                 {"config_hash", config_hash(s)},
                 {"seed", s.seed},
                 {"versions", versions()},
                 {"threads", par::threads()},
                 {"quadrature_order", s.analysis.nondeg.quad.order},
                 {"started_at", timestamp()},
                 {"wall_time_s", wall},
                 {"config", to_json(s)},
                 {"results", results}};
    write_file(opt.out / "meta.json", dump(meta));
    return meta;
}

namespace {

Command parse_command(const std::string& name) {
    for (Command c : {Command::Simulate, Command::Analyze, Command::Density, Command::Teardrop, Command::Exactness})
        if (to_string(c) == name) return c;
    throw ConfigInvalid("unknown golden command '" + name + "'");
}

std::string first_difference(const std::string& expected, const std::string& actual) {
    std::istringstream a(expected), b(actual);
    std::string la, lb;
    for (int line = 1;; ++line) {
        const bool ga = static_cast<bool>(std::getline(a, la));
        const bool gb = static_cast<bool>(std::getline(b, lb));
        if (!ga && !gb) return "trailing bytes differ";
        if (!ga || !gb || la != lb)
            return "line " + std::to_string(line) + ": expected '" + (ga ? la : "<eof>") + "', got '" + (gb ? lb : "<eof>") + "'";
    }
}

} // namespace

json run_goldens(GoldenMode mode, const RunOptions& opt) {
    const std::string text = read_file(opt.config);
    json manifest;
    try {
        manifest = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigInvalid(opt.config.string() + ": " + e.what());
    }
    if (!manifest.is_object() || manifest.value("schema_version", 0) != kSchemaVersion || !manifest.contains("cases") ||
        !manifest["cases"].is_array())
        throw ConfigInvalid("golden manifest needs schema_version 1 and a cases array");
    for (const auto& [k, v] : manifest.items())
        if (k != "schema_version" && k != "cases") throw ConfigInvalid("unknown field " + k);
    const fs::path base = opt.config.parent_path();
    json summary = json::array();
    std::vector<std::string> failures;
    for (const auto& c : manifest["cases"]) {
        for (const char* key : {"name", "command", "config", "artifact"})
            if (!c.contains(key) || !c[key].is_string()) throw ConfigInvalid(std::string("golden case needs string field ") + key);
        if (c.size() != 4) throw ConfigInvalid("golden case has unknown fields");
        const std::string name = c["name"], artifact = c["artifact"];
        RunOptions sub = opt;
        sub.config = resolve(base, c["config"].get<std::string>());
        sub.out = opt.out / name;
        say(opt, "golden " + name);
        const json meta = run_command(parse_command(c["command"]), sub);
        const std::string produced = read_file(sub.out / artifact);
        const fs::path golden = base / name / artifact;
        if (mode == GoldenMode::Update) {
            write_file(golden, produced);
            write_file(base / name / "PROVENANCE.txt",
                       "command: " + c["command"].get<std::string>() + "\nconfig: " + c["config"].get<std::string>() +
                           "\nconfig_hash: " + meta["config_hash"].get<std::string>() + "\nlmcf: " + kVersion + "\n");
            summary.push_back({{"name", name}, {"status", "updated"}});
            continue;
        }
        std::string expected;
        try {
            expected = read_file(golden);
        } catch (const IoError&) {
            failures.push_back(name + ": golden file " + golden.string() + " is missing");
            summary.push_back({{"name", name}, {"status", "missing"}});
            continue;
        }
        if (expected == produced) {
            summary.push_back({{"name", name}, {"status", "pass"}});
        } else {
            failures.push_back(name + "/" + artifact + ": " + first_difference(expected, produced));
            summary.push_back({{"name", name}, {"status", "mismatch"}});
        }
    }
    if (!failures.empty()) {
        std::string msg = std::to_string(failures.size()) + " golden case(s) differ";
        for (const auto& f : failures) msg += "\n  " + f;
        throw Mismatch(msg);
    }
    return summary;
}

int exit_code(const std::exception& e) {
    if (const auto* err = dynamic_cast<const Error*>(&e)) {
        switch (err->category()) {
        case ErrorCategory::Config: return 2;
        case ErrorCategory::Numerical: return 3;
        case ErrorCategory::Io: return 4;
        }
    }
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return 4;
    if (dynamic_cast<const nlohmann::json::exception*>(&e)) return 2;
    return 3;
}

} // namespace lmcf
