#include <CLI11.hpp>
#include <iostream>

#include "lmcf/app.hpp"
#include "lmcf/errors.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Equivariant Lagrangian mean curvature flow: simulation and singularity analysis"};
    app.set_version_flag("--version", lmcf::kVersion);
    app.require_subcommand(1);

    lmcf::RunOptions opt;
    std::string config, out;
    int quad = 0;
    auto common = [&](CLI::App* sub, bool needs_out) {
        sub->add_option("--config", config, "Scenario JSON (goldens: manifest JSON)")->required()->check(CLI::ExistingFile);
        auto* o = sub->add_option("--out", out, "Output directory");
        if (needs_out) o->required();
        sub->add_option("--threads", opt.threads, "OpenMP threads (0: default)")->check(CLI::NonNegativeNumber);
        sub->add_option("--quadrature-order", quad, "Gauss-Legendre points per panel")->check(CLI::Range(1, 64));
        sub->add_flag("--verbose", opt.verbose, "Progress on stderr");
    };

    std::vector<std::pair<CLI::App*, lmcf::Command>> commands;
    const std::pair<const char*, lmcf::Command> table[] = {
        {"simulate", lmcf::Command::Simulate},   {"analyze", lmcf::Command::Analyze},
        {"density", lmcf::Command::Density},     {"teardrop", lmcf::Command::Teardrop},
        {"exactness", lmcf::Command::Exactness},
    };
    const char* help[] = {"Evolve the initial profile and write the trajectory",
                          "Classify the pinch of a trajectory (report.json)",
                          "Scan Gaussian densities for singular candidates (candidates.csv)",
                          "Classify a manufactured teardrop series (report.json)",
                          "Find exact Lagrangian neck parameters (roots.csv)"};
    for (std::size_t i = 0; i < std::size(table); ++i) {
        CLI::App* sub = app.add_subcommand(table[i].first, help[i]);
        common(sub, true);
        commands.emplace_back(sub, table[i].second);
    }
    CLI::App* goldens = app.add_subcommand("goldens", "Check or update golden artifacts");
    std::string mode;
    goldens->add_option("mode", mode, "check | update")->required()->check(CLI::IsMember({"check", "update"}));
    common(goldens, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    opt.config = config;
    opt.out = out;
    if (quad > 0) opt.quadrature_order = quad;
    opt.log = [](const std::string& m) { std::cerr << "[lmcf] " << m << "\n"; };

    try {
        if (goldens->parsed()) {
            if (out.empty()) opt.out = lmcf::fs::temp_directory_path() / "lmcf-goldens";
            const auto summary = lmcf::run_goldens(mode == "check" ? lmcf::GoldenMode::Check : lmcf::GoldenMode::Update, opt);
            std::cout << summary.dump(2) << "\n";
            return 0;
        }
        for (const auto& [sub, cmd] : commands)
            if (sub->parsed()) {
                const auto meta = lmcf::run_command(cmd, opt);
                std::cout << meta["results"].dump(2) << "\n";
                return 0;
            }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return lmcf::exit_code(e);
    }
    return 2;
}
