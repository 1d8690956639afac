#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "lmcf/io.hpp"

using namespace lmcf;

namespace {

const fs::path kCli = LMCF_CLI;
const fs::path kScenarios = LMCF_SCENARIO_DIR;
const fs::path kTmp = fs::path(LMCF_TEST_TMP) / "cli";

struct Result {
    int code = -1;
    std::string out, err;
};

Result run(const std::string& args) {
    fs::create_directories(kTmp);
    const fs::path o = kTmp / "stdout.txt", e = kTmp / "stderr.txt";
    const std::string cmd = kCli.string() + " " + args + " >" + o.string() + " 2>" + e.string();
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(o);
    r.err = read_file(e);
    return r;
}

fs::path fresh(const std::string& name) {
    const fs::path p = kTmp / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

fs::path write_config(const std::string& name, const json& j) {
    const fs::path p = kTmp / name;
    fs::create_directories(kTmp);
    write_file(p, dump(j));
    return p;
}

json scenario_json(const char* name) { return json::parse(read_file(kScenarios / name)); }

std::string arg(const fs::path& p) { return "'" + p.string() + "'"; }

// Copies the golden tree into a scratch directory with the manifest paths made absolute.
fs::path copy_goldens(const std::string& name) {
    const fs::path dst = fresh(name);
    fs::copy(LMCF_GOLDEN_DIR, dst, fs::copy_options::recursive);
    json m = json::parse(read_file(dst / "manifest.json"));
    for (auto& c : m["cases"]) {
        fs::path cfg = c["config"].get<std::string>();
        if (cfg.is_relative()) c["config"] = (fs::path(LMCF_GOLDEN_DIR) / cfg).lexically_normal().string();
    }
    write_file(dst / "manifest.json", dump(m));
    return dst;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with 2") {
    CHECK(run("--help").code == 0);
    CHECK(run("").code == 2);
    CHECK(run("simulate").code == 2);
    CHECK(run("frobnicate --config x").code == 2);
    CHECK(run("exactness --config /nonexistent.json --out " + arg(kTmp / "x")).code == 2);
    CHECK(run("exactness --config " + arg(kScenarios / "exactness.json") + " --out " + arg(kTmp / "x") +
              " --quadrature-order 0")
              .code == 2);
    CHECK(run("--version").out.find("1.0.0") != std::string::npos);
}

TEST_CASE("config errors exit with 2") {
    json j = scenario_json("exactness.json");
    j["exactness"]["bee"] = 1;
    const Result r = run("exactness --config " + arg(write_config("unknown.json", j)) + " --out " + arg(fresh("unk")));
    CHECK(r.code == 2);
    CHECK(r.err.find("bee") != std::string::npos);
    write_file(kTmp / "broken.json", "{ not json");
    CHECK(run("exactness --config " + arg(kTmp / "broken.json") + " --out " + arg(fresh("broken"))).code == 2);
}

TEST_CASE("io errors exit with 4") {
    const fs::path blocker = fresh("blocker") / "file";
    write_file(blocker, "x");
    CHECK(run("exactness --config " + arg(kScenarios / "exactness.json") + " --out " + arg(blocker / "sub")).code == 4);
    json j = scenario_json("neck.json");
    j["trajectory"] = "no/such/trajectory";
    CHECK(run("analyze --config " + arg(write_config("missing_traj.json", j)) + " --out " + arg(fresh("mt"))).code == 4);
}

TEST_CASE("numerical errors exit with 3") {
    json j = scenario_json("circle.json");
    j["flow"]["h_target"] = 0.02;
    j["flow"]["t_max"] = 0.01;
    const Result r = run("analyze --config " + arg(write_config("nopinch.json", j)) + " --out " + arg(fresh("nopinch")));
    CHECK(r.code == 3);
    CHECK(r.err.find("NoPinch") != std::string::npos);
}

TEST_CASE("exactness writes the roots 1 and -1") {
    const fs::path out = fresh("exactness");
    REQUIRE(run("exactness --config " + arg(kScenarios / "exactness.json") + " --out " + arg(out)).code == 0);
    std::istringstream in(read_file(out / "roots.csv"));
    std::string line;
    std::getline(in, line);
    std::vector<std::pair<double, double>> roots;
    while (std::getline(in, line)) {
        double a, re, im;
        CHECK(std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &re, &im) == 3);
        roots.emplace_back(re, im);
    }
    REQUIRE(roots.size() == 2);
    CHECK(std::abs(roots[0].first - 1) < 1e-10);
    CHECK(std::abs(roots[1].first + 1) < 1e-10);
    const json meta = json::parse(read_file(out / "meta.json"));
    CHECK(meta["command"] == "exactness");
    CHECK(meta["config"]["exactness"]["b"] == 0.7);
}

TEST_CASE("simulate on the circle scenario pinches at 1/4") {
    const fs::path out = fresh("circle");
    REQUIRE(run("simulate --config " + arg(kScenarios / "circle.json") + " --out " + arg(out)).code == 0);
    const json meta = json::parse(read_file(out / "meta.json"));
    const json& pinch = meta["results"]["pinch"];
    REQUIRE(pinch.is_object());
    CHECK(std::abs(pinch["T0"].get<double>() - 0.25) < 1e-3);
    CHECK(pinch["kind"] == "pinch");
    for (const char* f : {"events.csv", "ledger.csv", "probes.csv", "snapshots/index.csv", "snapshots/000000.csv"})
        CHECK(fs::exists(out / f));
}

TEST_CASE("neck scenario: deterministic simulation and nondegenerate analysis") {
    const fs::path a = fresh("neck_t4"), b = fresh("neck_t1");
    REQUIRE(run("simulate --threads 4 --config " + arg(kScenarios / "neck.json") + " --out " + arg(a)).code == 0);
    REQUIRE(run("simulate --threads 1 --config " + arg(kScenarios / "neck.json") + " --out " + arg(b)).code == 0);
    for (const char* f : {"events.csv", "ledger.csv", "snapshots/index.csv"}) CHECK(read_file(a / f) == read_file(b / f));

    json j = scenario_json("neck.json");
    j["trajectory"] = a.string();
    const fs::path cfg = write_config("neck_from_traj.json", j);
    const fs::path r1 = fresh("neck_an1"), r3 = fresh("neck_an3");
    REQUIRE(run("analyze --threads 1 --config " + arg(cfg) + " --out " + arg(r1)).code == 0);
    REQUIRE(run("analyze --threads 3 --config " + arg(cfg) + " --out " + arg(r3)).code == 0);
    const std::string rep = read_file(r1 / "report.json");
    CHECK(rep == read_file(r3 / "report.json"));
    const json report = json::parse(rep);
    CHECK(report["verdict"] == "nondegenerate");
    CHECK(dump(report) == rep);

    json d = j;
    d["density"] = {{"centers", json::array({json::array({0, 0, 0, 0}), json::array({0.5, 0, 0, 0})})},
                    {"scales", json::array({0.01, 0.02, 0.05})},
                    {"threshold", 1.9}};
    const fs::path dens = fresh("neck_density");
    REQUIRE(run("density --config " + arg(write_config("neck_density.json", d)) + " --out " + arg(dens)).code == 0);
    const std::string cands = read_file(dens / "candidates.csv");
    CHECK(cands.rfind("t,x1,y1,x2,y2,r0,value\n", 0) == 0);
    CHECK(std::count(cands.begin(), cands.end(), '\n') > 1);
}

TEST_CASE("teardrop classifier run") {
    const fs::path out = fresh("teardrop");
    REQUIRE(run("teardrop --config " + arg(kScenarios / "teardrop.json") + " --out " + arg(out)).code == 0);
    const json rep = json::parse(read_file(out / "report.json"));
    CHECK(rep["verdict"] == "nondegenerate");
    for (const char* k : {"rate", "rate_stderr", "correlation", "c_estimate", "verdict"}) CHECK(rep.contains(k));
}

TEST_CASE("goldens: check, mismatch and update") {
    const fs::path g = copy_goldens("goldens_copy");
    const std::string manifest = arg(g / "manifest.json");
    const std::string out = " --out " + arg(kTmp / "goldens_out");
    CHECK(run("goldens check --config " + manifest + out).code == 0);

    // Perturb one golden artifact: the check must report a mismatch.
    const fs::path roots = g / "exactness_b07" / "roots.csv";
    std::string text = read_file(roots);
    text[text.size() - 2] = text[text.size() - 2] == '1' ? '2' : '1';
    write_file(roots, text);
    const Result bad = run("goldens check --config " + manifest + out);
    CHECK(bad.code == 3);
    CHECK(bad.err.find("Mismatch") != std::string::npos);
    CHECK(bad.err.find("exactness_b07") != std::string::npos);

    CHECK(run("goldens update --config " + manifest + out).code == 0);
    CHECK(fs::exists(g / "exactness_b07" / "PROVENANCE.txt"));
    CHECK(run("goldens check --config " + manifest + out).code == 0);

    // A perturbed tolerance in a case config changes the artifact as well.
    json loose = scenario_json("exactness.json");
    loose["exactness"]["tol"] = 1e-4;
    json m = json::parse(read_file(g / "manifest.json"));
    for (auto& c : m["cases"])
        if (c["name"] == "exactness_b07") c["config"] = write_config("exactness_loose.json", loose).string();
    write_file(g / "manifest.json", dump(m));
    CHECK(run("goldens check --config " + manifest + out).code == 3);
}

}
