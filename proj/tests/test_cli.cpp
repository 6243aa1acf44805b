#include "rmhedge/scenario.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace rmhedge;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run cli(const std::string& args) {
    Run r;
    std::string cmd = std::string(RMHEDGE_CLI) + " " + args + " 2>&1";
    FILE* f = popen(cmd.c_str(), "r");
    if (!f) return r;
    char buf[4096];
    std::size_t n;
    while ((n = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, n);
    int st = pclose(f);
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    return r;
}

fs::path scratch(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("rmhedge_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json small_config(const fs::path& out) {
    return json{{"name", "cli_small"},
                {"model", {{"family", "merton_jump"}, {"params", {{"jump_mean", -0.1}, {"jump_sd", 0.15}, {"jump_intensity", 1.0}}}}},
                {"dividend", {{"family", "call"}, {"params", {{"strike", 100.0}}}}},
                {"numerics",
                 {{"seed", 11},
                  {"y0", {100.0}},
                  {"c0", 1},
                  {"paths", 400},
                  {"steps", 50},
                  {"pide_dt", 0.01},
                  {"grid", {{{"lo", 5.0}, {"hi", 2000.0}, {"nodes", 201}, {"log", true}}}},
                  {"probes", {{"times", {0.0}}, {"states", {{100.0}}}, {"paths", 400}, {"steps", 20}}}}},
                {"outputs", {{"dir", out.string()}}}};
}

fs::path write_config(const fs::path& dir, const json& j) {
    fs::path p = dir / "scenario.json";
    std::ofstream(p) << j.dump(2);
    return p;
}

}  // namespace

TEST(Cli, PresetsList) {
    auto r = cli("presets list");
    EXPECT_EQ(r.code, 0);
    for (const auto& p : preset_list()) EXPECT_NE(r.out.find(p.name), std::string::npos) << p.name;
}

TEST(Cli, MissingSubcommandFails) {
    EXPECT_NE(cli("").code, 0);
    EXPECT_NE(cli("run /nonexistent/file.toml").code, 0);
}

TEST(Cli, MissingSeedIsAConfigError) {
    auto dir = scratch("noseed");
    json j = small_config(dir / "out");
    j["numerics"].erase("seed");
    EXPECT_THROW(scenario_from_json(j), ConfigError);
    auto r = cli("run " + write_config(dir, j).string());
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.out.find("seed"), std::string::npos);
}

TEST(Cli, ValidateShippedConfigs) {
    for (const char* f : {"black_scholes.toml", "merton.toml", "regime_switching.toml", "stochvol.toml", "semi_markov.json"}) {
        auto r = cli(std::string("validate ") + RMHEDGE_CONFIG_DIR + "/" + f);
        EXPECT_EQ(r.code, 0) << f << "\n" << r.out;
    }
}

TEST(Cli, RunWritesManifestAndIsReproducible) {
    auto dir = scratch("run");
    auto cfg = write_config(dir, small_config(dir / "a"));
    auto a = cli("run " + cfg.string());
    ASSERT_EQ(a.code, 0) << a.out;
    auto b = cli("run " + cfg.string() + " --out-dir " + (dir / "b").string());
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_EQ(a.out, b.out);
    ASSERT_TRUE(fs::exists(dir / "a" / "manifest.json"));
    EXPECT_EQ(slurp(dir / "a" / "manifest.json"), slurp(dir / "b" / "manifest.json"));
    json man = json::parse(slurp(dir / "a" / "manifest.json"));
    ASSERT_FALSE(man["artifacts"].empty());
    for (const auto& art : man["artifacts"]) {
        const std::string file = art["file"];
        EXPECT_EQ(slurp(dir / "a" / file), slurp(dir / "b" / file)) << file;
    }
    EXPECT_NE(a.out.find("price"), std::string::npos);
}

TEST(Cli, SeedOverrideChangesMonteCarlo) {
    auto dir = scratch("seed");
    auto cfg = write_config(dir, small_config(dir / "a"));
    auto a = cli("run " + cfg.string() + " --mc-only");
    auto b = cli("run " + cfg.string() + " --mc-only --seed 12 --out-dir " + (dir / "b").string());
    ASSERT_EQ(a.code, 0) << a.out;
    ASSERT_EQ(b.code, 0) << b.out;
    EXPECT_NE(a.out, b.out);
}

TEST(Cli, GridOverrideNeedsMatchingAxes) {
    auto dir = scratch("grid");
    auto cfg = write_config(dir, small_config(dir / "a"));
    EXPECT_EQ(cli("run " + cfg.string() + " --grid 101x11").code, 2);
    EXPECT_EQ(cli("run " + cfg.string() + " --grid 101 --skip-pide").code, 0);
}

TEST(Report, ExitCodeFollowsChecks) {
    ArtifactManifest man;
    int code = -1;
    EXPECT_EQ(emit_report(man, &code), "");
    EXPECT_EQ(code, 0);
    man.scenario = "x";
    man.checks.push_back({"ok", true, 1.0, 2.0, ""});
    emit_report(man, &code);
    EXPECT_EQ(code, 0);
    man.checks.push_back({"bad", false, 3.0, 2.0, ""});
    auto text = emit_report(man, &code);
    EXPECT_EQ(code, 1);
    EXPECT_NE(text.find("[FAIL] bad"), std::string::npos);
}
