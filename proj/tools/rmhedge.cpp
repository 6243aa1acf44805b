#include "rmhedge/scenario.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <iostream>

using namespace rmhedge;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::string outDir;
    std::optional<std::size_t> paths;
    std::string grid;
    bool skipPide = false;
    bool mcOnly = false;
};

ScenarioConfig load(const std::string& path, const Overrides& o) {
    ScenarioConfig cfg = scenario_from_json(load_config_file(path));
    if (o.seed) cfg.seed = *o.seed;
    if (o.paths) cfg.paths = *o.paths;
    if (!o.outDir.empty()) {
        cfg.outDir = o.outDir;
    } else if (const char* env = std::getenv("RMHEDGE_OUT_DIR")) {
        cfg.outDir = env;
    }
    if (!o.grid.empty()) {
        // NxM overrides node counts axis by axis
        std::vector<int> n;
        std::stringstream ss(o.grid);
        std::string tok;
        while (std::getline(ss, tok, 'x')) n.push_back(std::stoi(tok));
        if (!cfg.grid || n.size() != cfg.grid->axes.size())
            throw ConfigError("--grid needs one node count per configured grid axis");
        for (std::size_t a = 0; a < n.size(); ++a) {
            const Axis& ax = cfg.grid->axes[a];
            cfg.grid->axes[a] = Axis(ax.lo, ax.hi, n[a], ax.log);
        }
    }
    cfg.skipPide = cfg.skipPide || o.skipPide;
    cfg.mcOnly = cfg.mcOnly || o.mcOnly;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"risk-minimizing hedging under regime-switching jump diffusions"};
    app.require_subcommand(1);
    Overrides o;
    std::string config;

    auto* run = app.add_subcommand("run", "run a scenario pipeline");
    run->add_option("config", config, "scenario file (.toml or .json)")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", o.seed, "override numerics.seed");
    run->add_option("--out-dir", o.outDir, "output directory (default: outputs.dir or $RMHEDGE_OUT_DIR)");
    run->add_option("--paths", o.paths, "override numerics.paths");
    run->add_option("--grid", o.grid, "override grid node counts, e.g. 400 or 200x60");
    run->add_flag("--skip-pide", o.skipPide, "skip the PIDE and hedge-field stages");
    run->add_flag("--mc-only", o.mcOnly, "only run Monte Carlo valuation at the probes");

    auto* presets = app.add_subcommand("presets", "preset catalogue");
    presets->require_subcommand(1);
    auto* list = presets->add_subcommand("list", "list presets");

    auto* validate = app.add_subcommand("validate", "check a scenario file and its model");
    validate->add_option("config", config, "scenario file")->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& p : preset_list()) std::cout << p.name << "  " << p.summary << "\n";
            return 0;
        }
        if (validate->parsed()) {
            ScenarioConfig cfg = load(config, o);
            Preset pr = preset_model(cfg.preset, cfg.modelParams);
            DividendSpec div = dividend_family(cfg.family, cfg.dividendParams, pr.model);
            SamplePlan plan;
            for (double t : cfg.probeTimes)
                for (const auto& z : cfg.probeStates)
                    for (int c = 0; c < pr.model.K(); ++c) plan.probes.push_back({t, z, c});
            auto rep = validate_model(pr.model, plan);
            validate_dividend(pr.model, div, plan, rep);
            for (const auto& c : rep.checks)
                std::cout << (c.passed ? "ok   " : "FAIL ") << c.name << (c.detail.empty() ? "" : "  " + c.detail)
                          << (c.witness.empty() ? "" : "  at " + c.witness) << "\n";
            return rep.ok() ? 0 : 1;
        }
        ScenarioConfig cfg = load(config, o);
        ArtifactManifest man = run_scenario(cfg);
        int code = 0;
        std::cout << emit_report(man, &code);
        return code;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
