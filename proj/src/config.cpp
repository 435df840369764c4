#include "shotlab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>
#include <string>

#include "shotlab/io.hpp"
#include "shotlab/parallel.hpp"
#include "shotlab/verify.hpp"
#include "shotlab/version.hpp"

namespace shotlab {

namespace {

using nlohmann::json;

void expect_keys(const json& obj, const std::string& ctx,
                 std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) throw config_error(ctx + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* a) { return key == a; }) == allowed.end())
            throw config_error(ctx + ": unknown key \"" + key + "\"");
    }
}

const json& require(const json& obj, const std::string& ctx, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw config_error(ctx + ": missing key \"" + key + "\"");
    return *it;
}

// Numeric fields accept JSON numbers or decimal strings; strings keep the
// manifest free of binary-float ambiguity.
double get_num(const json& v, const std::string& ctx) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        std::size_t pos = 0;
        double x = 0.0;
        try {
            x = std::stod(s, &pos);
        } catch (const std::exception&) {
            throw config_error(ctx + ": cannot parse \"" + s + "\" as a number");
        }
        if (pos != s.size()) throw config_error(ctx + ": trailing characters in \"" + s + "\"");
        return x;
    }
    throw config_error(ctx + ": expected a number or a decimal string");
}

std::uint64_t get_u64(const json& v, const std::string& ctx) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        const auto x = v.get<std::int64_t>();
        if (x < 0) throw config_error(ctx + ": expected a nonnegative integer");
        return static_cast<std::uint64_t>(x);
    }
    if (v.is_string()) return std::stoull(v.get<std::string>());
    throw config_error(ctx + ": expected a nonnegative integer");
}

std::size_t get_count(const json& v, const std::string& ctx) {
    return static_cast<std::size_t>(get_u64(v, ctx));
}

std::vector<double> get_num_array(const json& v, const std::string& ctx) {
    if (!v.is_array()) throw config_error(ctx + ": expected an array");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& el : v) out.push_back(get_num(el, ctx));
    return out;
}

Distribution parse_distribution(const json& v, const std::string& ctx) {
    expect_keys(v, ctx, {"law", "rate", "value", "beta", "sd", "mu", "sigma", "magnitude"});
    const std::string law = require(v, ctx, "law").get<std::string>();
    if (law == "exponential") return Distribution::exponential(get_num(require(v, ctx, "rate"), ctx));
    if (law == "deterministic")
        return Distribution::deterministic(get_num(require(v, ctx, "value"), ctx));
    if (law == "pareto") return Distribution::pareto_type(get_num(require(v, ctx, "beta"), ctx));
    if (law == "normal") return Distribution::normal(get_num(require(v, ctx, "sd"), ctx));
    if (law == "lognormal")
        return Distribution::lognormal(get_num(require(v, ctx, "mu"), ctx),
                                       get_num(require(v, ctx, "sigma"), ctx));
    if (law == "two_point")
        return Distribution::two_point(get_num(require(v, ctx, "magnitude"), ctx));
    throw config_error(ctx + ": unknown law \"" + law + "\"");
}

ArrivalSpec parse_arrival(const json& v, const std::string& ctx) {
    expect_keys(v, ctx,
                {"kind", "interarrival", "perturbation", "c0", "rho0", "generation",
                 "population_cap"});
    const std::string kind = require(v, ctx, "kind").get<std::string>();
    if (kind == "renewal")
        return ArrivalSpec::renewal(parse_distribution(require(v, ctx, "interarrival"), ctx));
    if (kind == "perturbed_walk")
        return ArrivalSpec::perturbed_walk(
            parse_distribution(require(v, ctx, "interarrival"), ctx),
            parse_distribution(require(v, ctx, "perturbation"), ctx));
    if (kind == "poisson_nh")
        return ArrivalSpec::poisson_nh(get_num(require(v, ctx, "c0"), ctx),
                                       get_num(require(v, ctx, "rho0"), ctx));
    if (kind == "brw_generation") {
        std::size_t cap = 50'000'000;
        if (v.contains("population_cap")) cap = get_count(v["population_cap"], ctx);
        return ArrivalSpec::brw_generation(
            static_cast<int>(get_u64(require(v, ctx, "generation"), ctx)),
            parse_distribution(require(v, ctx, "interarrival"), ctx), cap);
    }
    throw config_error(ctx + ": unknown arrival kind \"" + kind + "\"");
}

ResponseSpec parse_response(const json& v, const std::string& ctx) {
    expect_keys(v, ctx, {"kind", "beta", "innovation", "c0", "rho0"});
    const std::string kind = require(v, ctx, "kind").get<std::string>();
    if (kind == "survival_indicator")
        return ResponseSpec::survival_indicator(get_num(require(v, ctx, "beta"), ctx));
    if (kind == "scaled_variable") {
        Distribution innovation = Distribution::normal(1.0);
        if (v.contains("innovation")) innovation = parse_distribution(v["innovation"], ctx);
        return ResponseSpec::scaled_variable(get_num(require(v, ctx, "beta"), ctx), innovation);
    }
    if (kind == "time_changed_bm")
        return ResponseSpec::time_changed_bm(get_num(require(v, ctx, "beta"), ctx));
    if (kind == "centered_poisson")
        return ResponseSpec::centered_poisson(get_num(require(v, ctx, "c0"), ctx),
                                              get_num(require(v, ctx, "rho0"), ctx));
    if (kind == "ou_modulated")
        return ResponseSpec::ou_modulated(get_num(require(v, ctx, "beta"), ctx));
    throw config_error(ctx + ": unknown response kind \"" + kind + "\"");
}

Scenario parse_scenario(const json& v) {
    const std::string ctx = "scenario";
    expect_keys(v, ctx, {"arrival", "response", "c", "rho", "grid", "t", "replicates"});
    Scenario s;
    s.arrival = parse_arrival(require(v, ctx, "arrival"), "scenario.arrival");
    s.response = parse_response(require(v, ctx, "response"), "scenario.response");
    s.grid = get_num_array(require(v, ctx, "grid"), "scenario.grid");
    s.t = get_num(require(v, ctx, "t"), "scenario.t");
    s.replicates = get_count(require(v, ctx, "replicates"), "scenario.replicates");
    const Normalization derived = derived_normalization(s.arrival);
    s.c = v.contains("c") ? get_num(v["c"], "scenario.c") : derived.c;
    s.rho = v.contains("rho") ? get_num(v["rho"], "scenario.rho") : derived.rho;
    s.validate();
    return s;
}

struct CheckContext {
    const ExperimentConfig& config;
    const Eigen::MatrixXd& ensemble;
    const LimitCovariance& limit;
    const EmpiricalCov& emp;
};

ArrivalSpec check_arrival(const json& chk, const CheckContext& cc, const std::string& ctx) {
    if (chk.contains("arrival")) return parse_arrival(chk["arrival"], ctx + ".arrival");
    return cc.config.scenario.arrival;
}

ResponseSpec check_response(const json& chk, const CheckContext& cc, const std::string& ctx) {
    if (chk.contains("response")) return parse_response(chk["response"], ctx + ".response");
    return cc.config.scenario.response;
}

Normalization check_normalization(const json& chk, const ArrivalSpec& arrival,
                                  const CheckContext& cc, const std::string& ctx) {
    Normalization n{cc.config.scenario.c, cc.config.scenario.rho};
    if (chk.contains("arrival")) n = derived_normalization(arrival);
    if (chk.contains("c")) n.c = get_num(chk["c"], ctx + ".c");
    if (chk.contains("rho")) n.rho = get_num(chk["rho"], ctx + ".rho");
    return n;
}

CheckReport run_cov_match(const CheckContext& cc) {
    double max_z = 0.0;
    for (Eigen::Index i = 0; i < cc.emp.cov.rows(); ++i)
        for (Eigen::Index j = 0; j < cc.emp.cov.cols(); ++j)
            max_z = std::max(max_z, std::fabs((cc.emp.cov(i, j) - cc.limit.matrix(i, j)) /
                                              cc.emp.se(i, j)));
    CheckReport rep;
    rep.name = "cov_match";
    rep.scales = {cc.config.scenario.t};
    rep.statistic = {max_z};
    rep.threshold_description =
        "max entrywise |empirical - limit| / SE <= " + format_double(cc.config.z_threshold);
    rep.pass = max_z <= cc.config.z_threshold;
    return rep;
}

CheckReport run_quad_closed_form(const json& chk, const CheckContext& cc, const std::string& ctx) {
    std::vector<double> betas{-0.5, 0.0, 1.0, 2.0};
    std::vector<double> rhos{0.5, 1.0, 2.0, 3.0};
    if (chk.contains("betas")) betas = get_num_array(chk["betas"], ctx + ".betas");
    if (chk.contains("rhos")) rhos = get_num_array(chk["rhos"], ctx + ".rhos");
    const std::vector<double> pts{0.5, 1.0, 2.0, 4.0};

    CheckReport rep;
    rep.name = "quad_closed_form";
    rep.scales = betas;
    const double tol = cc.config.quad_tol;
    bool pass = true;
    for (double beta : betas) {
        CovarianceModel model;
        model.beta = beta;
        model.fictitious = false;
        model.C = [beta](double u, double w) { return std::pow(std::min(u, w), beta); };
        double worst = 0.0;
        for (double rho : rhos) {
            if (!(beta > -std::min(rho, 1.0))) continue;
            for (double s : pts)
                for (double t : pts) {
                    const PiResult r = limit_cov_Pi(model, rho, s, t, tol);
                    const double closed =
                        rho * beta_fn(beta + 1.0, rho) * std::pow(std::min(s, t), beta + rho);
                    worst = std::max(worst, std::fabs(r.value - closed));
                }
        }
        rep.statistic.push_back(worst);
        if (worst > 10.0 * tol) pass = false;
    }
    // Beta-function identities, relative error within 1e-12.
    pass = pass && std::fabs(beta_fn(1.0, 1.0) - 1.0) <= 1e-12 &&
           std::fabs(beta_fn(0.5, 0.5) - 3.14159265358979323846) / 3.14159265358979323846 <=
               1e-12 &&
           std::fabs(beta_fn(0.5, 1.0) - 2.0) / 2.0 <= 1e-12;
    rep.threshold_description = "max |quadrature - closed form| <= 10*tol = " +
                                format_double(10.0 * tol) +
                                "; B(1,1), B(1/2,1/2), B(1/2,1) exact to 1e-12 relative";
    rep.pass = pass;
    return rep;
}

CheckReport run_variance_match(const json& chk, const CheckContext& cc, std::uint64_t check_tag,
                               const std::string& ctx) {
    const std::size_t u_index = chk.contains("u_index")
                                    ? get_count(chk["u_index"], ctx + ".u_index")
                                    : 0;
    if (u_index >= cc.config.scenario.grid.size())
        throw config_error(ctx + ": u_index out of range");
    std::vector<double> scales = get_num_array(require(chk, ctx, "scales"), ctx + ".scales");
    const std::size_t replicates = chk.contains("replicates")
                                       ? get_count(chk["replicates"], ctx + ".replicates")
                                       : cc.config.scenario.replicates;

    const double target =
        cc.limit.matrix(static_cast<Eigen::Index>(u_index), static_cast<Eigen::Index>(u_index));
    CheckReport rep;
    rep.name = "variance_match";
    rep.scales = scales;
    double final_se = 0.0;
    for (std::size_t si = 0; si < scales.size(); ++si) {
        Scenario sc = cc.config.scenario;
        sc.t = scales[si];
        sc.replicates = replicates;
        const Eigen::MatrixXd ens =
            mc_ensemble(sc, fold_seed(cc.config.seed, check_tag * 1000 + si), cc.config.threads);
        const EmpiricalCov emp = empirical_cov(ens);
        const auto k = static_cast<Eigen::Index>(u_index);
        rep.statistic.push_back(std::fabs(emp.cov(k, k) - target));
        final_se = emp.se(k, k);
    }
    rep.threshold_description =
        "final |empirical variance - limit| <= " + format_double(cc.config.z_threshold) +
        "*SE and discrepancy nonincreasing across scales; limit = " + format_double(target);
    bool monotone = true;
    for (std::size_t i = 1; i < rep.statistic.size(); ++i)
        if (rep.statistic[i] > rep.statistic[i - 1]) monotone = false;
    rep.pass = monotone && rep.statistic.back() <= cc.config.z_threshold * final_se;
    return rep;
}

CheckReport run_lln_ratio(const json& chk, const CheckContext& cc, std::uint64_t check_tag,
                          const std::string& ctx) {
    const ArrivalSpec arrival = check_arrival(chk, cc, ctx);
    const Normalization norm = check_normalization(chk, arrival, cc, ctx);
    std::vector<double> scales = get_num_array(require(chk, ctx, "scales"), ctx + ".scales");
    std::vector<double> tolerances =
        get_num_array(require(chk, ctx, "tolerances"), ctx + ".tolerances");
    if (tolerances.size() != scales.size())
        throw config_error(ctx + ": tolerances must match scales");
    const std::size_t replicates = get_count(require(chk, ctx, "replicates"), ctx + ".replicates");

    const Seed seed = fold_seed(cc.config.seed, check_tag);
    std::vector<double> vals(scales.size() * replicates);
    parallel_for(vals.size(), cc.config.threads, [&](std::size_t slot) {
        const std::size_t si = slot / replicates;
        const std::size_t r = slot % replicates;
        Stream stream = derive(seed, {si, r});
        const double t = scales[si];
        const ArrivalRealization real = generate_arrivals(arrival, t, stream);
        vals[slot] = static_cast<double>(real.count(t)) / std::pow(t, norm.rho);
    });

    CheckReport rep;
    rep.name = "lln_ratio";
    rep.scales = scales;
    bool pass = true;
    std::ostringstream desc;
    desc << "per-scale |mean N(t)/t^rho - " << format_double(norm.c) << "| <= tolerance {";
    for (std::size_t si = 0; si < scales.size(); ++si) {
        double acc = 0.0;
        for (std::size_t r = 0; r < replicates; ++r) acc += vals[si * replicates + r];
        const double stat = acc / static_cast<double>(replicates);
        rep.statistic.push_back(stat);
        if (std::fabs(stat - norm.c) > tolerances[si]) pass = false;
        desc << (si ? "," : "") << format_double(tolerances[si]);
    }
    desc << "}";
    rep.threshold_description = desc.str();
    rep.pass = pass;
    return rep;
}

} // namespace

ExperimentConfig parse_config(const json& doc) {
    expect_keys(doc, "config",
                {"seed", "out", "threads", "quad_tol", "z_threshold", "ks_alpha", "scenario",
                 "checks"});
    ExperimentConfig cfg;
    cfg.echo = doc;
    cfg.seed = Seed{get_u64(require(doc, "config", "seed"), "config.seed")};
    if (doc.contains("out")) cfg.out_dir = doc["out"].get<std::string>();
    if (doc.contains("threads"))
        cfg.threads = static_cast<unsigned>(get_u64(doc["threads"], "config.threads"));
    if (cfg.threads == 0) throw config_error("config.threads must be >= 1");
    if (doc.contains("quad_tol")) cfg.quad_tol = get_num(doc["quad_tol"], "config.quad_tol");
    if (doc.contains("z_threshold"))
        cfg.z_threshold = get_num(doc["z_threshold"], "config.z_threshold");
    if (doc.contains("ks_alpha")) cfg.ks_alpha = get_num(doc["ks_alpha"], "config.ks_alpha");
    if (!(cfg.quad_tol > 0.0) || !(cfg.z_threshold > 0.0) ||
        !(cfg.ks_alpha > 0.0 && cfg.ks_alpha < 1.0))
        throw config_error("config: tolerance overrides out of range");
    cfg.scenario = parse_scenario(require(doc, "config", "scenario"));

    if (doc.contains("checks")) {
        if (!doc["checks"].is_array()) throw config_error("config.checks: expected an array");
        static const std::set<std::string> known{
            "cov_match",   "ks_normal",        "weak_law", "increments", "lindeberg",
            "limit_ratio", "quad_closed_form", "variance_match", "lln_ratio"};
        for (const auto& chk : doc["checks"]) {
            if (!chk.is_object() || !chk.contains("type"))
                throw config_error("config.checks: each entry must be an object with a \"type\"");
            const std::string type = chk["type"].get<std::string>();
            if (!known.count(type))
                throw config_error("config.checks: unknown check type \"" + type + "\"");
            cfg.checks.push_back(chk);
        }
    }
    return cfg;
}

std::vector<std::string> preset_names() {
    return {"renewal-scaledvar", "limit-closedform", "heavytail-survival", "fictitious-ou",
            "poisson-brw2",      "hypothesis-checks", "perturbed-lln"};
}

nlohmann::json preset_config(const std::string& name) {
    if (name == "renewal-scaledvar")
        return json::parse(R"({
            "seed": 1,
            "scenario": {
                "arrival": {"kind": "renewal", "interarrival": {"law": "exponential", "rate": 1}},
                "response": {"kind": "scaled_variable", "beta": 0, "innovation": {"law": "normal", "sd": 1}},
                "c": 1, "rho": 1, "grid": [0.5, 1, 2], "t": 400, "replicates": 20000
            },
            "checks": [
                {"type": "cov_match"},
                {"type": "ks_normal", "direction": [1, 0, 0]},
                {"type": "ks_normal", "direction": [1, 1, 1]}
            ]
        })");
    if (name == "limit-closedform")
        return json::parse(R"({
            "seed": 2,
            "scenario": {
                "arrival": {"kind": "renewal", "interarrival": {"law": "exponential", "rate": 1}},
                "response": {"kind": "time_changed_bm", "beta": 1},
                "grid": [1, 2], "t": 50, "replicates": 400
            },
            "checks": [
                {"type": "quad_closed_form", "betas": [-0.5, 0, 1, 2], "rhos": [0.5, 1, 2, 3]}
            ]
        })");
    if (name == "heavytail-survival")
        return json::parse(R"({
            "seed": 3,
            "scenario": {
                "arrival": {"kind": "perturbed_walk",
                            "interarrival": {"law": "exponential", "rate": 1},
                            "perturbation": {"law": "pareto", "beta": -0.5}},
                "response": {"kind": "survival_indicator", "beta": -0.5},
                "c": 1, "rho": 1, "grid": [1, 2], "t": 800, "replicates": 20000
            },
            "checks": [
                {"type": "variance_match", "u_index": 0, "scales": [200, 800]}
            ]
        })");
    if (name == "fictitious-ou")
        return json::parse(R"({
            "seed": 4,
            "scenario": {
                "arrival": {"kind": "renewal", "interarrival": {"law": "exponential", "rate": 1}},
                "response": {"kind": "ou_modulated", "beta": -0.5},
                "c": 1, "rho": 1, "grid": [1, 2], "t": 800, "replicates": 5000
            },
            "checks": [{"type": "cov_match"}]
        })");
    if (name == "poisson-brw2")
        return json::parse(R"({
            "seed": 5,
            "scenario": {
                "arrival": {"kind": "poisson_nh", "c0": 1, "rho0": 1},
                "response": {"kind": "centered_poisson", "c0": 1, "rho0": 1},
                "c": 1, "rho": 1, "grid": [0.5, 1, 2], "t": 400, "replicates": 20000
            },
            "checks": [{"type": "cov_match"}]
        })");
    if (name == "hypothesis-checks")
        return json::parse(R"({
            "seed": 6,
            "scenario": {
                "arrival": {"kind": "renewal", "interarrival": {"law": "exponential", "rate": 1}},
                "response": {"kind": "scaled_variable", "beta": 0},
                "c": 1, "rho": 1, "grid": [1], "t": 50, "replicates": 400
            },
            "checks": [
                {"type": "weak_law", "T": 1, "scales": [100, 400, 1600], "replicates": 400},
                {"type": "weak_law",
                 "arrival": {"kind": "perturbed_walk",
                             "interarrival": {"law": "exponential", "rate": 1},
                             "perturbation": {"law": "pareto", "beta": -0.5}},
                 "T": 1, "scales": [100, 400, 1600], "replicates": 400},
                {"type": "weak_law",
                 "arrival": {"kind": "poisson_nh", "c0": 1, "rho0": 2},
                 "T": 1, "scales": [20, 40, 80], "replicates": 400},
                {"type": "weak_law",
                 "arrival": {"kind": "brw_generation", "generation": 2,
                             "interarrival": {"law": "deterministic", "value": 1}},
                 "T": 1, "scales": [20, 40, 80], "replicates": 4},
                {"type": "increments", "scales": [10, 40, 160], "replicates": 2000},
                {"type": "increments",
                 "arrival": {"kind": "perturbed_walk",
                             "interarrival": {"law": "exponential", "rate": 1},
                             "perturbation": {"law": "pareto", "beta": -0.5}},
                 "scales": [10, 40, 160], "replicates": 2000},
                {"type": "increments",
                 "arrival": {"kind": "poisson_nh", "c0": 1, "rho0": 2},
                 "scales": [10, 20, 40], "replicates": 2000},
                {"type": "increments",
                 "arrival": {"kind": "brw_generation", "generation": 2,
                             "interarrival": {"law": "deterministic", "value": 1}},
                 "scales": [10, 20, 40], "replicates": 4},
                {"type": "lindeberg",
                 "response": {"kind": "survival_indicator", "beta": -0.5},
                 "y": 1, "scales": [16, 64, 256], "replicates": 200000},
                {"type": "lindeberg",
                 "response": {"kind": "scaled_variable", "beta": 0},
                 "y": 1, "scales": [16, 64, 256], "replicates": 200000},
                {"type": "lindeberg",
                 "response": {"kind": "ou_modulated", "beta": -0.5},
                 "y": 1, "scales": [16, 64, 256], "replicates": 200000},
                {"type": "limit_ratio",
                 "response": {"kind": "survival_indicator", "beta": -0.5},
                 "w": 1, "a": 0.5, "b": 2, "scales": [100, 1000, 10000]},
                {"type": "limit_ratio",
                 "response": {"kind": "scaled_variable", "beta": 1},
                 "w": 1, "a": 0.5, "b": 2, "scales": [100, 1000, 10000]},
                {"type": "limit_ratio",
                 "response": {"kind": "time_changed_bm", "beta": 1},
                 "w": 1, "a": 0.5, "b": 2, "scales": [10, 100, 1000]},
                {"type": "limit_ratio",
                 "response": {"kind": "centered_poisson", "c0": 1, "rho0": 2},
                 "w": 1, "a": 0.5, "b": 2, "scales": [10, 100, 1000]},
                {"type": "limit_ratio",
                 "response": {"kind": "ou_modulated", "beta": -0.5},
                 "w": 1, "a": 0.5, "b": 2, "scales": [4, 8, 16]}
            ]
        })");
    if (name == "perturbed-lln")
        return json::parse(R"({
            "seed": 7,
            "scenario": {
                "arrival": {"kind": "perturbed_walk",
                            "interarrival": {"law": "exponential", "rate": 1},
                            "perturbation": {"law": "lognormal", "mu": 0, "sigma": 1}},
                "response": {"kind": "scaled_variable", "beta": 0},
                "c": 1, "rho": 1, "grid": [1], "t": 100, "replicates": 400
            },
            "checks": [
                {"type": "lln_ratio", "scales": [100, 1000, 10000],
                 "tolerances": [0.15, 0.05, 0.02], "replicates": 400}
            ]
        })");
    throw config_error("unknown preset \"" + name + "\"; available: renewal-scaledvar, "
                       "limit-closedform, heavytail-survival, fictitious-ou, poisson-brw2, "
                       "hypothesis-checks, perturbed-lln");
}

RunResult run_experiment(const ExperimentConfig& config) {
    config.scenario.validate();
    const Eigen::MatrixXd ensemble = mc_ensemble(config.scenario, config.seed, config.threads);
    const CovarianceModel model = covariance_model(config.scenario.response);
    const LimitCovariance limit =
        limit_cov_matrix(model, config.scenario.rho, config.scenario.grid, config.quad_tol);
    const EmpiricalCov emp = empirical_cov(ensemble);

    const CheckContext cc{config, ensemble, limit, emp};
    std::vector<CheckReport> reports;
    std::vector<std::pair<NormalityReport, bool>> normality;
    bool all_pass = true;

    for (std::size_t idx = 0; idx < config.checks.size(); ++idx) {
        const json& chk = config.checks[idx];
        const std::string type = chk["type"].get<std::string>();
        const std::string ctx = "checks[" + std::to_string(idx) + "]";
        const std::uint64_t tag = 9000 + idx;
        if (type == "cov_match") {
            expect_keys(chk, ctx, {"type"});
            reports.push_back(run_cov_match(cc));
        } else if (type == "ks_normal") {
            expect_keys(chk, ctx, {"type", "direction"});
            const std::vector<double> dir =
                get_num_array(require(chk, ctx, "direction"), ctx + ".direction");
            Eigen::VectorXd direction =
                Eigen::Map<const Eigen::VectorXd>(dir.data(), static_cast<Eigen::Index>(dir.size()));
            NormalityReport rep = ks_normal_test(ensemble, limit, direction);
            const bool pass = rep.p_value > config.ks_alpha;
            normality.emplace_back(std::move(rep), pass);
            all_pass = all_pass && pass;
            continue;
        } else if (type == "weak_law") {
            expect_keys(chk, ctx, {"type", "arrival", "c", "rho", "T", "scales", "replicates"});
            const ArrivalSpec arrival = check_arrival(chk, cc, ctx);
            const Normalization norm = check_normalization(chk, arrival, cc, ctx);
            reports.push_back(check_weak_law(
                arrival, norm.c, norm.rho, get_num(require(chk, ctx, "T"), ctx + ".T"),
                get_num_array(require(chk, ctx, "scales"), ctx + ".scales"),
                get_count(require(chk, ctx, "replicates"), ctx + ".replicates"),
                fold_seed(config.seed, tag), config.threads));
        } else if (type == "increments") {
            expect_keys(chk, ctx, {"type", "arrival", "rho", "scales", "replicates"});
            const ArrivalSpec arrival = check_arrival(chk, cc, ctx);
            const Normalization norm = check_normalization(chk, arrival, cc, ctx);
            reports.push_back(check_increments(
                arrival, norm.rho, get_num_array(require(chk, ctx, "scales"), ctx + ".scales"),
                get_count(require(chk, ctx, "replicates"), ctx + ".replicates"),
                fold_seed(config.seed, tag), config.threads));
        } else if (type == "lindeberg") {
            expect_keys(chk, ctx, {"type", "response", "rho", "y", "scales", "replicates"});
            const ResponseSpec response = check_response(chk, cc, ctx);
            const double rho =
                chk.contains("rho") ? get_num(chk["rho"], ctx + ".rho") : config.scenario.rho;
            reports.push_back(check_lindeberg(
                response, rho, get_num(require(chk, ctx, "y"), ctx + ".y"),
                get_num_array(require(chk, ctx, "scales"), ctx + ".scales"),
                get_count(require(chk, ctx, "replicates"), ctx + ".replicates"),
                fold_seed(config.seed, tag), config.threads));
        } else if (type == "limit_ratio") {
            expect_keys(chk, ctx, {"type", "response", "w", "a", "b", "scales"});
            reports.push_back(check_limit_ratio(
                check_response(chk, cc, ctx), get_num(require(chk, ctx, "w"), ctx + ".w"),
                get_num(require(chk, ctx, "a"), ctx + ".a"),
                get_num(require(chk, ctx, "b"), ctx + ".b"),
                get_num_array(require(chk, ctx, "scales"), ctx + ".scales")));
        } else if (type == "quad_closed_form") {
            expect_keys(chk, ctx, {"type", "betas", "rhos"});
            reports.push_back(run_quad_closed_form(chk, cc, ctx));
        } else if (type == "variance_match") {
            expect_keys(chk, ctx, {"type", "u_index", "scales", "replicates"});
            reports.push_back(run_variance_match(chk, cc, tag, ctx));
        } else if (type == "lln_ratio") {
            expect_keys(chk, ctx,
                        {"type", "arrival", "c", "rho", "scales", "tolerances", "replicates"});
            reports.push_back(run_lln_ratio(chk, cc, tag, ctx));
        }
        all_pass = all_pass && reports.back().pass;
    }

    // All computation is done; emit files single-threaded.
    std::filesystem::create_directories(config.out_dir);
    RunResult result;
    auto open = [&](const char* name) {
        const std::filesystem::path p = config.out_dir / name;
        std::ofstream os(p, std::ios::binary);
        if (!os) throw resource_error("cannot open " + p.string() + " for writing");
        result.files.push_back(p);
        return os;
    };

    {
        auto os = open("ensemble.csv");
        dump_ensemble_csv(ensemble, config.scenario.grid, os);
    }
    {
        auto os = open("limit_covariance.csv");
        dump_csv(limit, os);
    }
    {
        auto os = open("comparison.csv");
        os << "i,j,empirical,limit,se,z_score\n";
        for (Eigen::Index i = 0; i < emp.cov.rows(); ++i)
            for (Eigen::Index j = 0; j < emp.cov.cols(); ++j)
                os << i << "," << j << "," << format_double(emp.cov(i, j)) << ","
                   << format_double(limit.matrix(i, j)) << "," << format_double(emp.se(i, j))
                   << ","
                   << format_double((emp.cov(i, j) - limit.matrix(i, j)) / emp.se(i, j)) << "\n";
    }
    {
        json checks_doc;
        checks_doc["checks"] = json::array();
        for (const auto& rep : reports)
            checks_doc["checks"].push_back({{"name", rep.name},
                                            {"scales", rep.scales},
                                            {"statistic", rep.statistic},
                                            {"threshold_description", rep.threshold_description},
                                            {"pass", rep.pass}});
        checks_doc["normality"] = json::array();
        for (const auto& [rep, pass] : normality)
            checks_doc["normality"].push_back({{"direction", rep.direction},
                                               {"ks_statistic", rep.ks_statistic},
                                               {"p_value", rep.p_value},
                                               {"sample_size", rep.sample_size},
                                               {"pass", pass}});
        auto os = open("checks.json");
        os << checks_doc.dump(2) << "\n";
    }
    {
        json manifest;
        manifest["artifact_version"] = kVersion;
        manifest["compiler"] = __VERSION__;
        manifest["preset"] = config.preset_name.empty() ? json(nullptr) : json(config.preset_name);
        manifest["seed"] = config.seed.master;
        manifest["config"] = config.echo;
        auto os = open("manifest.json");
        os << manifest.dump(2) << "\n";
    }

    result.exit_code = all_pass ? 0 : 1;
    return result;
}

} // namespace shotlab
