#pragma once

#include "rmhedge/config.hpp"
#include "rmhedge/errors.hpp"
#include "rmhedge/fk_mc.hpp"
#include "rmhedge/gkw.hpp"
#include "rmhedge/io.hpp"
#include "rmhedge/pide.hpp"
#include "rmhedge/presets.hpp"
#include "rmhedge/risk.hpp"
#include "rmhedge/simulate.hpp"
#include "rmhedge/validate.hpp"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace rmhedge {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

struct Tolerances {
    double priceRel = 0.005;   ///< PIDE vs reference price
    double mcSE = 3.0;         ///< probe flag threshold in SEs
    int maxFlags = 1;          ///< probes allowed to flag
    double rank = 1e-12;       ///< pseudo-inverse truncation (reported)
    double meanCostSE = 3.0;   ///< |E[C_T - C_0]| within this many SEs
    std::optional<double> covariationSE;  ///< orthogonality check, off unless set
    std::optional<double> maxRisk;        ///< R0 (integral form) ceiling
    std::optional<double> minRiskSE;      ///< R0 must exceed this many SEs
    double martingaleSE = 3.0;
};

struct GridSpec {
    std::vector<Axis> axes;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::string preset;
    nlohmann::json modelParams = nlohmann::json::object();
    std::string family;
    nlohmann::json dividendParams = nlohmann::json::object();

    std::uint64_t seed = 0;
    std::size_t paths = 10000;
    int steps = 1000;
    double pideDt = 1e-3;
    int storeEvery = 1;
    std::optional<GridSpec> grid;
    int workers = 1;
    Vec y0;
    int c0 = 0;
    std::optional<double> referencePrice;

    std::vector<double> probeTimes{0.0};
    std::vector<Vec> probeStates;
    std::vector<int> probeRegimes;
    std::size_t probePaths = 20000;
    int probeSteps = 200;

    Tolerances tol;

    std::string outDir = "out";
    std::set<std::string> artifacts;
    std::size_t dumpPaths = 20;

    bool skipPide = false;
    bool mcOnly = false;

    bool wants(const std::string& a) const { return artifacts.empty() || artifacts.count(a) > 0; }
};

namespace detail {

inline const nlohmann::json& section(const nlohmann::json& j, const std::string& key) {
    static const nlohmann::json empty = nlohmann::json::object();
    if (!j.contains(key)) return empty;
    if (!j.at(key).is_object()) throw ConfigError("[" + key + "] must be a table");
    return j.at(key);
}

inline double positive(const nlohmann::json& s, const std::string& sec, const std::string& key, double def) {
    if (!s.contains(key)) return def;
    if (!s.at(key).is_number()) throw ConfigError(sec + "." + key + " must be a number");
    double v = s.at(key).get<double>();
    if (!(v > 0.0)) throw ConfigError(sec + "." + key + " must be > 0");
    return v;
}

inline Vec state_of(const nlohmann::json& v, const std::string& key) {
    if (v.is_number()) return vec({v.get<double>()});
    if (!v.is_array()) throw ConfigError(key + " must be a number or an array");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (!v[k].is_number()) throw ConfigError(key + " must hold numbers");
        out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    return out;
}

}  // namespace detail

/// Validate and lower a parsed config; throws ConfigError before any stage runs.
inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    using detail::positive;
    using detail::section;
    ScenarioConfig cfg;
    if (!j.is_object()) throw ConfigError("config root must be a table");
    cfg.name = j.value("name", std::string("scenario"));

    const auto& model = section(j, "model");
    const char* pkey = model.contains("family") ? "family" : "preset";
    if (!model.contains(pkey) || !model.at(pkey).is_string()) throw ConfigError("model.family is required");
    cfg.preset = model.at(pkey).get<std::string>();
    bool known = false;
    for (const auto& p : preset_list()) known = known || p.name == cfg.preset;
    if (!known) throw ConfigError("model.family: unknown preset '" + cfg.preset + "'");
    if (model.contains("params")) cfg.modelParams = model.at("params");

    const auto& div = section(j, "dividend");
    if (!div.contains("family") || !div.at("family").is_string()) throw ConfigError("dividend.family is required");
    cfg.family = div.at("family").get<std::string>();
    if (div.contains("params")) cfg.dividendParams = div.at("params");

    const auto& num = section(j, "numerics");
    if (!num.contains("seed")) throw ConfigError("numerics.seed is required (runs must be reproducible)");
    if (!num.at("seed").is_number_integer() || num.at("seed").get<long long>() < 0)
        throw ConfigError("numerics.seed must be a non-negative integer");
    cfg.seed = num.at("seed").get<std::uint64_t>();
    cfg.paths = static_cast<std::size_t>(positive(num, "numerics", "paths", 10000));
    cfg.steps = static_cast<int>(positive(num, "numerics", "steps", 1000));
    cfg.pideDt = positive(num, "numerics", "pide_dt", 1e-3);
    cfg.storeEvery = static_cast<int>(positive(num, "numerics", "store_every", 1));
    cfg.workers = static_cast<int>(positive(num, "numerics", "workers", 1));
    if (!num.contains("y0")) throw ConfigError("numerics.y0 is required");
    cfg.y0 = detail::state_of(num.at("y0"), "numerics.y0");
    cfg.c0 = static_cast<int>(positive(num, "numerics", "c0", 1)) - 1;
    if (num.contains("reference_price")) cfg.referencePrice = positive(num, "numerics", "reference_price", 1.0);
    if (num.contains("grid")) {
        const auto& g = num.at("grid");
        if (!g.is_array() || g.empty()) throw ConfigError("numerics.grid must be an array of axis tables");
        GridSpec gs;
        for (const auto& a : g) {
            if (!a.is_object()) throw ConfigError("numerics.grid entries must be tables");
            if (!a.is_object() || !a.contains("lo") || !a.contains("hi") || !a.at("lo").is_number() ||
                !a.at("hi").is_number())
                throw ConfigError("numerics.grid: each axis needs numeric lo and hi");
            gs.axes.emplace_back(a.at("lo").get<double>(), a.at("hi").get<double>(), a.value("nodes", 101),
                                 a.value("log", false));
        }
        cfg.grid = gs;
    }
    if (num.contains("probes")) {
        const auto& p = num.at("probes");
        if (p.contains("times")) cfg.probeTimes = p.at("times").get<std::vector<double>>();
        if (p.contains("states"))
            for (const auto& s : p.at("states")) cfg.probeStates.push_back(detail::state_of(s, "numerics.probes.states"));
        if (p.contains("regimes"))
            for (int r : p.at("regimes").get<std::vector<int>>()) cfg.probeRegimes.push_back(r - 1);
        cfg.probePaths = static_cast<std::size_t>(positive(p, "numerics.probes", "paths", 20000));
        cfg.probeSteps = static_cast<int>(positive(p, "numerics.probes", "steps", 200));
    }
    if (cfg.probeStates.empty()) cfg.probeStates.push_back(cfg.y0);
    if (cfg.probeRegimes.empty()) cfg.probeRegimes.push_back(cfg.c0);

    const auto& tol = section(num, "tolerances");
    cfg.tol.priceRel = positive(tol, "numerics.tolerances", "price_rel", 0.005);
    cfg.tol.mcSE = positive(tol, "numerics.tolerances", "mc_se", 3.0);
    cfg.tol.maxFlags = tol.value("max_flags", 1);
    cfg.tol.rank = positive(tol, "numerics.tolerances", "rank", 1e-12);
    cfg.tol.meanCostSE = positive(tol, "numerics.tolerances", "mean_cost_se", 3.0);
    cfg.tol.martingaleSE = positive(tol, "numerics.tolerances", "martingale_se", 3.0);
    if (tol.contains("covariation_se")) cfg.tol.covariationSE = positive(tol, "numerics.tolerances", "covariation_se", 3.0);
    if (tol.contains("max_risk")) cfg.tol.maxRisk = positive(tol, "numerics.tolerances", "max_risk", 1.0);
    if (tol.contains("min_risk_se")) cfg.tol.minRiskSE = positive(tol, "numerics.tolerances", "min_risk_se", 3.0);

    const auto& out = section(j, "outputs");
    cfg.outDir = out.value("dir", std::string("out"));
    if (out.contains("artifacts"))
        for (const auto& a : out.at("artifacts")) cfg.artifacts.insert(a.get<std::string>());
    cfg.dumpPaths = static_cast<std::size_t>(out.value("dump_paths", 20));

    const auto& st = section(j, "stages");
    cfg.skipPide = st.value("skip_pide", false);
    cfg.mcOnly = st.value("mc_only", false);
    return cfg;
}

struct ManifestEntry {
    std::string file;
    std::string sha256;
    std::string stage;
};

struct StageRecord {
    std::string name;
    std::string status;  ///< ok, skipped, failed
    std::string note;
};

struct CheckRecord {
    std::string name;
    bool passed = true;
    double value = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct ArtifactManifest {
    std::string scenario;
    std::string outDir;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> artifacts;
    std::vector<StageRecord> stages;
    std::vector<CheckRecord> checks;
    nlohmann::json summary = nlohmann::json::object();

    bool failed() const {
        return std::any_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return !c.passed; });
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["scenario"] = scenario;
        j["seed"] = seed;
        j["artifacts"] = nlohmann::json::array();
        for (const auto& a : artifacts) j["artifacts"].push_back({{"file", a.file}, {"sha256", a.sha256}, {"stage", a.stage}});
        j["stages"] = nlohmann::json::array();
        for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"note", s.note}});
        j["checks"] = nlohmann::json::array();
        for (const auto& c : checks)
            j["checks"].push_back({{"name", c.name},
                                   {"passed", c.passed},
                                   {"value", c.value},
                                   {"tolerance", c.tolerance},
                                   {"detail", c.detail}});
        j["summary"] = summary;
        return j;
    }
};

namespace detail {

class Writer {
public:
    Writer(ArtifactManifest& m, std::string dir) : m_(m), dir_(std::move(dir)) {}
    void put(const std::string& file, const std::string& text, const std::string& stage) {
        write_text((std::filesystem::path(dir_) / file).string(), text);
        m_.artifacts.push_back({file, sha256_hex(text), stage});
    }

private:
    ArtifactManifest& m_;
    std::string dir_;
};

inline nlohmann::json validation_json(const ValidationReport& rep) {
    nlohmann::json j;
    j["ok"] = rep.ok();
    j["linear_growth_constant"] = rep.lgConstant;
    j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks)
        j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}, {"witness", c.witness}});
    return j;
}

}  // namespace detail

/// validate -> solve_pide -> hedge_field -> simulate -> risk -> fk-mc probes.
/// Every stage failure is recorded; later stages that depend on it are skipped.
inline ArtifactManifest run_scenario(const ScenarioConfig& cfg) {
    ArtifactManifest man;
    man.scenario = cfg.name;
    man.seed = cfg.seed;
    man.outDir = cfg.outDir;
    std::filesystem::create_directories(cfg.outDir);
    detail::Writer out(man, cfg.outDir);
    auto& sum = man.summary;

    Preset preset;
    DividendSpec div;
    try {
        preset = preset_model(cfg.preset, cfg.modelParams);
        div = dividend_family(cfg.family, cfg.dividendParams, preset.model);
    } catch (const Error& e) {
        man.stages.push_back({"build", "failed", e.what()});
        man.checks.push_back({"build", false, 0, 0, e.what()});
        return man;
    }
    const MarketModelSpec& m = preset.model;
    if (cfg.y0.size() != m.dim()) {
        man.stages.push_back({"build", "failed", "numerics.y0 has the wrong dimension"});
        man.checks.push_back({"build", false, 0, 0, "numerics.y0 has the wrong dimension"});
        return man;
    }
    man.stages.push_back({"build", "ok", m.name});

    // Validation at the probe states and the initial state.
    SamplePlan plan;
    {
        std::vector<Vec> states = cfg.probeStates;
        states.push_back(cfg.y0);
        for (double t : cfg.probeTimes)
            for (const auto& z : states)
                for (int c = 0; c < m.K(); ++c) plan.probes.push_back({t, z, c});
    }
    bool valid = false;
    try {
        auto rep = validate_model(m, plan);
        validate_dividend(m, div, plan, rep);
        valid = rep.ok();
        if (cfg.wants("validation")) out.put("validation.json", detail::validation_json(rep).dump(2) + "\n", "validate");
        man.stages.push_back({"validate", valid ? "ok" : "failed", ""});
        man.checks.push_back({"validation", valid, rep.ok() ? 1.0 : 0.0, 1.0, ""});
        auto att = attainability_check(m, plan);
        sum["attainability"] = {{"verdict", to_string(att.verdict)}, {"reason", att.reason}, {"required_rank", att.required}};
        if (cfg.wants("attainability")) {
            nlohmann::json a = sum["attainability"];
            a["table"] = nlohmann::json::array();
            for (const auto& r : att.table) a["table"].push_back({{"probe", r.probe}, {"regime", r.regime + 1}, {"rank", r.rank}});
            out.put("attainability.json", a.dump(2) + "\n", "validate");
        }
    } catch (const Error& e) {
        man.stages.push_back({"validate", "failed", e.what()});
        man.checks.push_back({"validation", false, 0, 1, e.what()});
    }
    if (!valid) return man;

    // PIDE and hedge field.
    std::optional<ValueField> field;
    std::optional<HedgeField> hedge;
    const bool pideable = m.dim() <= 2;
    if (cfg.mcOnly || cfg.skipPide || !pideable) {
        std::string why = cfg.mcOnly ? "--mc-only" : cfg.skipPide ? "--skip-pide" : "state dimension > 2";
        man.stages.push_back({"solve_pide", "skipped", why});
        man.stages.push_back({"hedge_field", "skipped", why});
    } else if (!cfg.grid || static_cast<int>(cfg.grid->axes.size()) != m.dim()) {
        man.stages.push_back({"solve_pide", "failed", "numerics.grid needs one axis per state coordinate"});
        man.checks.push_back({"solve_pide", false, 0, 0, "numerics.grid needs one axis per state coordinate"});
    } else {
        try {
            PideOptions po;
            po.storeEvery = cfg.storeEvery;
            field = solve_pide(m, div, SpatialGrid(cfg.grid->axes), cfg.pideDt, po);
            man.stages.push_back({"solve_pide", "ok", ""});
            const double v0 = field->value(0.0, cfg.y0, cfg.c0);
            sum["price"] = v0;
            sum["pide_warnings"] = field->warnings;
            sum["pide_escapes"] = field->escapes;
            if (cfg.wants("value_field")) out.put("value_field.csv", field->to_csv(), "solve_pide");
            if (cfg.referencePrice) {
                double rel = std::abs(v0 - *cfg.referencePrice) / std::abs(*cfg.referencePrice);
                man.checks.push_back({"price_vs_reference", rel <= cfg.tol.priceRel, rel, cfg.tol.priceRel,
                                      "pide " + fmt_num(v0) + " vs " + fmt_num(*cfg.referencePrice)});
            }
        } catch (const Error& e) {
            man.stages.push_back({"solve_pide", "failed", e.what()});
            man.checks.push_back({"solve_pide", false, 0, 0, e.what()});
        }
        if (field) {
            try {
                hedge = hedge_field(m, div, *field);
                hedge->queryPolicy = EscapePolicy::LinearContinuation;
                man.stages.push_back({"hedge_field", "ok", ""});
                if (cfg.wants("hedge_field")) out.put("hedge_field.csv", hedge->to_csv(), "hedge_field");
                if (m.K() > 1 && cfg.wants("credit_hedge")) {
                    std::vector<Probe> pr;
                    for (double t : cfg.probeTimes)
                        for (const auto& z : cfg.probeStates)
                            for (int c = 0; c < m.K(); ++c) pr.push_back({t, z, c});
                    ValueField vf = *field;
                    vf.queryPolicy = EscapePolicy::LinearContinuation;
                    auto rows = credit_delta_hedge(m, div, vf, pr, EscapePolicy::LinearContinuation);
                    std::ostringstream os;
                    os << "t";
                    for (int a = 0; a < m.dim(); ++a) os << ",y" << (a + 1);
                    os << ",c";
                    for (int k = 0; k < m.d; ++k) os << ",phi" << (k + 1);
                    os << ",residual\n";
                    for (const auto& r : rows) {
                        os << fmt_num(r.t);
                        for (int a = 0; a < m.dim(); ++a) os << "," << fmt_num(r.z(a));
                        os << "," << (r.regime + 1);
                        for (int k = 0; k < m.d; ++k) os << "," << fmt_num(r.phi(k));
                        os << "," << fmt_num(r.residual) << "\n";
                    }
                    out.put("credit_hedge.csv", os.str(), "hedge_field");
                }
            } catch (const Error& e) {
                man.stages.push_back({"hedge_field", "failed", e.what()});
                man.checks.push_back({"hedge_field", false, 0, 0, e.what()});
            }
        }
    }

    // Paths, martingale diagnostics and pathwise risk.
    if (cfg.mcOnly) {
        man.stages.push_back({"simulate_paths", "skipped", "--mc-only"});
    } else {
        try {
            SimOptions so;
            so.workers = cfg.workers;
            PathSimulator sim(m, cfg.y0, cfg.c0, TimeGrid(0.0, div.maturity, cfg.steps), cfg.seed, so);
            if (cfg.wants("paths")) {
                PathEnsemble ens = simulate_paths(m, cfg.y0, cfg.c0, sim.grid(), std::min(cfg.dumpPaths, cfg.paths),
                                                  cfg.seed, so);
                out.put("paths.csv", paths_csv(ens), "simulate_paths");
                if (m.K() > 1) out.put("transitions.csv", transitions_csv(ens), "simulate_paths");
            }
            auto diag = martingale_diagnostic(sim, cfg.paths, cfg.tol.martingaleSE);
            nlohmann::json dj = nlohmann::json::array();
            for (const auto& f : diag.items) {
                dj.push_back({{"quantity", f.quantity}, {"mean", f.est.mean}, {"se", f.est.se}, {"flag", f.flagged}});
                man.checks.push_back({"martingale " + f.quantity, !f.flagged,
                                      f.est.se > 0 ? std::abs(f.est.mean) / f.est.se : 0.0, cfg.tol.martingaleSE, ""});
            }
            if (cfg.wants("martingale")) out.put("martingale.json", dj.dump(2) + "\n", "simulate_paths");
            auto warns = sim.warnings();
            sum["simulation_warnings"] = warns;
            man.stages.push_back({"simulate_paths", "ok", ""});

            if (hedge) {
                FieldHedge fh{&*field, &*hedge};
                auto rep = residual_risk(m, div, fh, sim, cfg.paths);
                auto rj = rep.to_json();
                if (cfg.wants("risk_report")) out.put("risk_report.json", rj.dump(2) + "\n", "risk");
                sum["R0"] = {{"integral", rj["R0_integral"]}, {"direct", rj["R0_direct"]}, {"sources", rj["R0_sources"]}};
                const auto& mc = rep.meanCost;
                double z = mc.se > 0 ? std::abs(mc.mean) / mc.se : (mc.mean == 0.0 ? 0.0 : 1e300);
                man.checks.push_back({"mean_self_financing", z <= cfg.tol.meanCostSE, z, cfg.tol.meanCostSE,
                                      "E[C_T - C_0] = " + fmt_num(mc.mean) + " +- " + fmt_num(mc.se)});
                if (cfg.tol.covariationSE)
                    for (std::size_t a = 0; a < rep.cov.size(); ++a) {
                        double zc = rep.cov[a].se > 0 ? std::abs(rep.cov[a].mean) / rep.cov[a].se : 0.0;
                        man.checks.push_back({"orthogonality S*_" + std::to_string(a + 1), zc <= *cfg.tol.covariationSE,
                                              zc, *cfg.tol.covariationSE, ""});
                    }
                if (cfg.tol.maxRisk)
                    man.checks.push_back({"residual_risk_ceiling", rep.integral.mean <= *cfg.tol.maxRisk,
                                          rep.integral.mean, *cfg.tol.maxRisk, ""});
                if (cfg.tol.minRiskSE) {
                    double zr = rep.integral.se > 0 ? rep.integral.mean / rep.integral.se : 0.0;
                    man.checks.push_back({"residual_risk_positive", zr > *cfg.tol.minRiskSE, zr, *cfg.tol.minRiskSE, ""});
                }
                man.stages.push_back({"risk", "ok", ""});
            } else {
                man.stages.push_back({"risk", "skipped", "no hedge field"});
            }
        } catch (const Error& e) {
            man.stages.push_back({"simulate_paths", "failed", e.what()});
            man.checks.push_back({"simulate_paths", false, 0, 0, e.what()});
        }
    }

    // Feynman-Kac probes.
    try {
        std::vector<ProbeRow> rows;
        std::uint64_t probeSeed = splitmix64(cfg.seed ^ 0x5A17ULL);
        std::size_t idx = 0;
        MCOptions mo;
        mo.workers = cfg.workers;
        for (double t : cfg.probeTimes)
            for (const auto& z : cfg.probeStates)
                for (int c : cfg.probeRegimes) {
                    if (t >= div.maturity) continue;
                    mo.steps = std::max(1, static_cast<int>(std::lround(cfg.probeSteps * (div.maturity - t) / div.maturity)));
                    ProbeRow r;
                    r.t = t;
                    r.y = z;
                    r.c = c;
                    r.est = mc_value(m, div, t, z, c, cfg.probePaths, splitmix64(probeSeed + idx++), mo);
                    r.reference = field ? field->value(t, z, c, EscapePolicy::LinearContinuation) : r.est.mean;
                    rows.push_back(r);
                }
        auto rep = mc_confidence_report(rows, cfg.tol.mcSE);
        if (cfg.wants("probe_report")) out.put("probe_report.json", rep.to_json().dump(2) + "\n", "fk_mc");
        sum["probes"] = rep.to_json();
        if (field)
            man.checks.push_back({"fk_probe_flags", static_cast<int>(rep.flags()) <= cfg.tol.maxFlags,
                                  static_cast<double>(rep.flags()), static_cast<double>(cfg.tol.maxFlags), ""});
        man.stages.push_back({"fk_mc", "ok", ""});
    } catch (const Error& e) {
        man.stages.push_back({"fk_mc", "failed", e.what()});
        man.checks.push_back({"fk_mc", false, 0, 0, e.what()});
    }

    out.put("manifest.json", man.to_json().dump(2) + "\n", "manifest");
    return man;
}

/// One-screen text summary of a manifest; exit status 1 iff a check failed.
inline std::string emit_report(const ArtifactManifest& man, int* exitCode = nullptr) {
    std::ostringstream os;
    if (exitCode) *exitCode = man.failed() ? 1 : 0;
    if (man.artifacts.empty() && man.stages.empty() && man.checks.empty()) return "";
    os << "scenario " << man.scenario << " (seed " << man.seed << ")\n";
    for (const auto& s : man.stages) os << "  stage " << s.name << ": " << s.status << (s.note.empty() ? "" : " (" + s.note + ")") << "\n";
    const auto& sm = man.summary;
    if (sm.contains("price")) os << "  price v(0, y0, c0) = " << fmt_num(sm["price"].get<double>()) << "\n";
    if (sm.contains("R0")) {
        os << "  R0 integral = " << fmt_num(sm["R0"]["integral"]["mean"].get<double>()) << " +- "
           << fmt_num(sm["R0"]["integral"]["se"].get<double>()) << "\n";
        os << "  R0 direct   = " << fmt_num(sm["R0"]["direct"]["mean"].get<double>()) << " +- "
           << fmt_num(sm["R0"]["direct"]["se"].get<double>()) << "\n";
    }
    if (sm.contains("attainability")) os << "  attainability: " << sm["attainability"]["verdict"].get<std::string>() << "\n";
    if (sm.contains("probes"))
        for (const auto& p : sm["probes"])
            os << "  probe t=" << p["t"] << " y=" << p["y"].dump() << " c=" << p["c"] << ": mc " << fmt_num(p["estimate"].get<double>())
               << " +- " << fmt_num(p["SE"].get<double>()) << " ref " << fmt_num(p["reference"].get<double>())
               << (p["flag"].get<bool>() ? " FLAG" : "") << "\n";
    for (const auto& c : man.checks)
        os << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name << " value=" << fmt_num(c.value)
           << " tol=" << fmt_num(c.tolerance) << (c.detail.empty() ? "" : " " + c.detail) << "\n";
    return os.str();
}

}  // namespace rmhedge
