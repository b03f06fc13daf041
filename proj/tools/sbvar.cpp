// Command-line runner: ground-state scans, quenches, ramp benchmarks, CRAB
// optimization, gap scans, finite-size scaling, OTOC proxies, and ion drive
// tables, with reproducible manifests.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <sbvar/adiabatic.hpp>
#include <sbvar/crab.hpp>
#include <sbvar/diagnostics.hpp>
#include <sbvar/fock.hpp>
#include <sbvar/io.hpp>
#include <sbvar/tdvp.hpp>

using namespace sbvar;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char* kVersion = "sbvar 1.0.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// configuration schema

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> s = {
        {"model",
         {"delta", "omega_c", "n_modes", "profile", "alpha", "g_bar", "tanh_sign",
          "eps", "g"}},
        {"ansatz", {"n_polarons", "seed", "init", "perturbation"}},
        {"tdvp",
         {"abs_tol", "rel_tol", "pinv_rcut", "max_time", "stop_grad_norm",
          "leakage_every", "max_restart_attempts", "dt_out", "initial_dt"}},
        {"control",
         {"t_f", "t_f_grid", "n_harmonics", "budget", "protocol", "gamma",
          "simplex_scale", "ftol"}},
        {"output", {"stride"}},
        {"groundstate", {"alpha_grid", "scale_grid"}},
        {"quench", {"initial", "initial_scale", "observables"}},
        {"gap", {"lo", "hi", "points", "cutoff", "epsilon"}},
        {"scaling", {"n_modes_list", "cutoff", "points", "epsilon", "query"}},
        {"otoc", {"mode"}},
        {"ion", {"eta"}},
    };
    return s;
}

void validate_schema(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config root must be a JSON object");
    for (const auto& [section, body] : cfg.items()) {
        const auto it = schema().find(section);
        if (it == schema().end())
            throw ConfigError("unknown config section '" + section + "'");
        if (!body.is_object())
            throw ConfigError("config section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            (void)value;
            if (!it->second.count(key))
                throw ConfigError("unknown config key '" + section + "." + key + "'");
        }
    }
}

// --set model.alpha=4.0 style overrides; values parse as JSON when possible
void apply_override(json& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    const std::string path = kv.substr(0, eq);
    const std::string raw = kv.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::parse_error&) {
        value = raw; // bare strings stay strings
    }
    json* node = &cfg;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string part = path.substr(pos, dot - pos);
        if (part.empty()) throw ConfigError("--set: empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[part] = value;
            return;
        }
        node = &(*node)[part];
        pos = dot + 1;
    }
}

template <typename T>
T get_or(const json& cfg, const std::string& section, const std::string& key,
         const T& fallback) {
    if (!cfg.contains(section) || !cfg[section].contains(key)) return fallback;
    try {
        return cfg[section][key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
    }
}

bool has_key(const json& cfg, const std::string& section, const std::string& key) {
    return cfg.contains(section) && cfg[section].contains(key);
}

// ---------------------------------------------------------------------------
// resolved run inputs

SpinBosonParams build_model(const json& cfg) {
    SpinBosonParams p;
    p.delta = get_or(cfg, "model", "delta", 1.0);
    p.omega_c = get_or(cfg, "model", "omega_c", 1.0);
    const std::string profile = get_or<std::string>(cfg, "model", "profile", "ohmic");
    const int n = get_or(cfg, "model", "n_modes", 1);
    if (profile == "ohmic") {
        if (!has_key(cfg, "model", "alpha"))
            throw ConfigError("model.profile=ohmic requires model.alpha");
        p = ohmic_discretization(cfg["model"]["alpha"].get<double>(), p.omega_c, n,
                                 p.delta);
    } else if (profile == "tanh") {
        if (!has_key(cfg, "model", "g_bar"))
            throw ConfigError("model.profile=tanh requires model.g_bar");
        p.eps.resize(n);
        for (int k = 0; k < n; ++k) p.eps[k] = p.omega_c * (k + 1) / n;
        p.g = tanh_profiles(cfg["model"]["g_bar"].get<double>(), n,
                            get_or(cfg, "model", "tanh_sign", 1));
    } else if (profile == "explicit") {
        if (!has_key(cfg, "model", "eps") || !has_key(cfg, "model", "g"))
            throw ConfigError("model.profile=explicit requires model.eps and model.g");
        const auto ev = cfg["model"]["eps"].get<std::vector<double>>();
        const auto gv = cfg["model"]["g"].get<std::vector<double>>();
        p.eps = Eigen::Map<const Eigen::VectorXd>(ev.data(), ev.size());
        p.g = Eigen::Map<const Eigen::VectorXd>(gv.data(), gv.size());
    } else {
        throw ConfigError("model.profile must be ohmic, tanh, or explicit");
    }
    try {
        p.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid model: ") + e.what());
    }
    return p;
}

TdvpConfig build_tdvp(const json& cfg) {
    TdvpConfig t;
    t.abs_tol = get_or(cfg, "tdvp", "abs_tol", t.abs_tol);
    t.rel_tol = get_or(cfg, "tdvp", "rel_tol", t.rel_tol);
    t.pinv_rcut = get_or(cfg, "tdvp", "pinv_rcut", t.pinv_rcut);
    t.max_time = get_or(cfg, "tdvp", "max_time", t.max_time);
    t.stop_grad_norm = get_or(cfg, "tdvp", "stop_grad_norm", t.stop_grad_norm);
    t.leakage_every = get_or(cfg, "tdvp", "leakage_every", t.leakage_every);
    t.max_restart_attempts =
        get_or(cfg, "tdvp", "max_restart_attempts", t.max_restart_attempts);
    t.dt_out = get_or(cfg, "tdvp", "dt_out", t.dt_out);
    t.initial_dt = get_or(cfg, "tdvp", "initial_dt", t.initial_dt);
    try {
        t.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid tdvp section: ") + e.what());
    }
    return t;
}

struct RunContext {
    json cfg;
    std::uint64_t seed;
    fs::path out;
    std::string command;
    std::vector<std::string> emitted;

    int n_polarons() const { return get_or(cfg, "ansatz", "n_polarons", 1); }
    double perturbation() const { return get_or(cfg, "ansatz", "perturbation", 0.01); }
    SpinInit init() const {
        return spin_init_from_name(get_or<std::string>(cfg, "ansatz", "init", "minus"));
    }

    fs::path file(const std::string& name) {
        emitted.push_back(name);
        return out / name;
    }
};

// ---------------------------------------------------------------------------
// manifests

std::uint64_t fnv1a_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

json manifest_base(const RunContext& ctx, const json& extra) {
    json m;
    m["command"] = ctx.command;
    m["version"] = kVersion;
    m["seed"] = ctx.seed;
    m["config"] = ctx.cfg;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    return m;
}

void write_manifest(const RunContext& ctx, const json& m) {
    write_json(m, ctx.out / "manifest.json");
}

void finalize_manifest(const RunContext& ctx, json m) {
    json sums = json::object();
    for (const auto& name : ctx.emitted) {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(ctx.out / name)));
        sums[name] = buf;
    }
    m["checksums"] = sums;
    write_manifest(ctx, m);
}

GroundStateResult ground_at(const RunContext& ctx, const SpinBosonParams& p,
                            double coupling_scale, const std::string& label) {
    TdvpConfig cfg = build_tdvp(ctx.cfg);
    cfg.mode = TdvpMode::imaginary;
    if (cfg.stop_grad_norm <= 0.0) cfg.stop_grad_norm = 1e-8;
    if (cfg.max_restart_attempts <= 0) cfg.max_restart_attempts = 3;
    if (!has_key(ctx.cfg, "tdvp", "max_time")) cfg.max_time = 400.0;
    return imaginary_groundstate(p, ctx.n_polarons(), cfg,
                                 substream_seed(ctx.seed, label), coupling_scale,
                                 ctx.init());
}

VariationalState seed_product(int np, int n_modes, SpinInit init,
                              std::uint64_t seed, double pert) {
    // plus/minus product states get the parity-exact mirrored seeding
    if (init == SpinInit::plus || init == SpinInit::minus)
        return seed_symmetric(np, n_modes, init, seed, pert);
    return seed_random(np, n_modes, init, seed, pert);
}

std::function<VariationalState(int)> restart_reseed(const RunContext& ctx,
                                                    int n_modes) {
    const int np = ctx.n_polarons();
    const SpinInit init = ctx.init();
    const double pert = ctx.perturbation();
    const std::uint64_t base = substream_seed(ctx.seed, "restart");
    return [=](int attempt) {
        return seed_product(np, n_modes, init, base + attempt, pert);
    };
}

void write_trace(RunContext& ctx, const EvolutionTrace& trace,
                 const std::string& name) {
    const int stride = std::max(1, get_or(ctx.cfg, "output", "stride", 1));
    EvolutionTrace thin;
    if (stride == 1) {
        write_trace_csv(trace, ctx.file(name));
        return;
    }
    for (std::size_t i = 0; i < trace.times.size(); i += stride) {
        thin.times.push_back(trace.times[i]);
        thin.energy.push_back(trace.energy[i]);
        thin.norm2.push_back(trace.norm2[i]);
        thin.leakage.push_back(trace.leakage[i]);
        for (const auto& [k, v] : trace.observables) thin.observables[k].push_back(v[i]);
    }
    write_trace_csv(thin, ctx.file(name));
}

// ---------------------------------------------------------------------------
// commands

int cmd_groundstate(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    std::vector<double> alphas;
    std::vector<double> scales;
    if (has_key(ctx.cfg, "groundstate", "alpha_grid"))
        alphas = ctx.cfg["groundstate"]["alpha_grid"].get<std::vector<double>>();
    else
        scales = get_or(ctx.cfg, "groundstate", "scale_grid", std::vector<double>{1.0});
    const bool by_alpha = !alphas.empty();
    const std::size_t n_pts = by_alpha ? alphas.size() : scales.size();

    CsvWriter csv(ctx.file("groundstate.csv"));
    csv.header({by_alpha ? "alpha" : "coupling_scale", "energy", "var_h", "sigma_x",
                "parity", "converged", "final_grad_norm"});
    for (std::size_t i = 0; i < n_pts; ++i) {
        json cfg_i = ctx.cfg;
        if (by_alpha) cfg_i["model"]["alpha"] = alphas[i];
        const SpinBosonParams p = build_model(cfg_i);
        const double scale = by_alpha ? 1.0 : scales[i];
        const auto r = ground_at(ctx, p, scale, "gs:" + std::to_string(i));
        csv.row({by_alpha ? alphas[i] : scales[i], r.energy, r.var_h,
                 expect(r.state, Observable::sigma_x(), p, scale).real(),
                 expect(r.state, Observable::parity(), p, scale).real(),
                 r.converged ? 1.0 : 0.0, r.final_grad_norm});
        char name[48];
        std::snprintf(name, sizeof(name), "checkpoint_%03zu.json", i);
        write_json(r.state.to_json(), ctx.file(name));
    }
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_quench(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const SpinBosonParams p = build_model(ctx.cfg);
    const std::string initial =
        get_or<std::string>(ctx.cfg, "quench", "initial", "product");
    VariationalState start;
    std::function<VariationalState(int)> reseed;
    if (initial == "product") {
        start = seed_product(ctx.n_polarons(), p.n_modes(), ctx.init(),
                             substream_seed(ctx.seed, "seeding"),
                             ctx.perturbation());
        reseed = restart_reseed(ctx, p.n_modes());
    } else if (initial == "ground") {
        const double s0 = get_or(ctx.cfg, "quench", "initial_scale", 0.0);
        start = ground_at(ctx, p, s0, "target").state;
        // restarting from a fresh random seed would change the prepared state
    } else {
        throw ConfigError("quench.initial must be 'product' or 'ground'");
    }

    std::vector<Observable> obs;
    const auto names = get_or(ctx.cfg, "quench", "observables",
                              std::vector<std::string>{"sigma_x", "sigma_z", "parity"});
    for (const auto& name : names) obs.push_back(Observable::from_name(name));

    TdvpConfig cfg = build_tdvp(ctx.cfg);
    cfg.mode = TdvpMode::real;
    const auto trace = evolve(start, p, nullptr, cfg, obs, 1.0, reseed);
    write_trace(ctx, trace, "trace.csv");

    json summary;
    summary["initial_energy"] = trace.energy.front();
    summary["final_energy"] = trace.energy.back();
    summary["restarts_used"] = trace.restarts_used;
    summary["fidelity_bound_final"] = fidelity_bound(trace).back();
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

CrabProblem build_problem(RunContext& ctx, const SpinBosonParams& p) {
    CrabProblem prob;
    prob.params = p;
    prob.n_polarons = ctx.n_polarons();
    prob.initial_spin = ctx.init();
    prob.t_f = get_or(ctx.cfg, "control", "t_f", 10.0);
    prob.n_harmonics = get_or(ctx.cfg, "control", "n_harmonics", 4);
    prob.seed = substream_seed(ctx.seed, "seeding");
    prob.tdvp_cfg = build_tdvp(ctx.cfg);
    prob.tdvp_cfg.max_time = prob.t_f;
    return prob;
}

int cmd_ramp(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const SpinBosonParams p = build_model(ctx.cfg);
    auto grid = get_or(ctx.cfg, "control", "t_f_grid", std::vector<double>{});
    if (grid.empty()) grid.push_back(get_or(ctx.cfg, "control", "t_f", 10.0));
    const std::string kind = get_or<std::string>(ctx.cfg, "control", "protocol", "linear");

    CrabProblem prob = build_problem(ctx, p);
    prob.target = ground_at(ctx, p, 1.0, "target").state;
    CsvWriter csv(ctx.file("protocols.csv"));
    csv.header({"t_f", "infidelity", "leakage_integral"});
    for (const double t_f : grid) {
        RampProtocol proto = RampProtocol::linear(t_f);
        if (kind == "local_adiabatic") {
            const double gamma = get_or(ctx.cfg, "control", "gamma", 10.0);
            const int cutoff = get_or(ctx.cfg, "gap", "cutoff", 40);
            const FockSpace space(p.n_modes(), cutoff);
            const auto scan = gap_scan(p, space, 0.0, 1.0,
                                       get_or(ctx.cfg, "gap", "points", 101));
            auto gap_fn = [&scan](double s) {
                int lo = 0, hi = static_cast<int>(scan.couplings.size()) - 1;
                while (hi - lo > 1)
                    (scan.couplings[(lo + hi) / 2] <= s ? lo : hi) = (lo + hi) / 2;
                const double w = (s - scan.couplings[lo]) /
                                 (scan.couplings[hi] - scan.couplings[lo]);
                return (1.0 - w) * scan.gap[lo] + w * scan.gap[hi];
            };
            proto = local_adiabatic_table(gap_fn, 1.0, gamma);
        } else if (kind != "linear") {
            throw ConfigError("control.protocol must be linear or local_adiabatic");
        }
        prob.t_f = proto.t_f();
        prob.tdvp_cfg.max_time = prob.t_f;
        const auto rows = benchmark_protocols(prob, {{kind, proto}});
        csv.row({rows[0].t_f, rows[0].infidelity, rows[0].leakage_integral});
    }
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_crab(RunContext& ctx) {
    const SpinBosonParams p = build_model(ctx.cfg);
    CrabProblem prob = build_problem(ctx, p);
    prob.seed = substream_seed(ctx.seed, "crab_bits");
    prob.freeze_random_bits();
    prob.seed = substream_seed(ctx.seed, "seeding");

    json m = manifest_base(ctx, {{"r", prob.r}});
    write_manifest(ctx, m);
    prob.target = ground_at(ctx, p, 1.0, "target").state;

    const int budget = get_or(ctx.cfg, "control", "budget", 200);
    const double simplex = get_or(ctx.cfg, "control", "simplex_scale", 0.1);
    const double ftol = get_or(ctx.cfg, "control", "ftol", 1e-10);

    Eigen::VectorXd best = Eigen::VectorXd::Zero(2 * prob.n_harmonics);
    json summary;
    if (budget > 0) {
        const auto opt = optimize_ramp(prob, budget, simplex, ftol);
        best = opt.best_coeffs;
        CsvWriter hist(ctx.file("history.csv"));
        hist.header({"evaluation", "infidelity"});
        for (std::size_t i = 0; i < opt.history.size(); ++i)
            hist.row({static_cast<double>(i), opt.history[i].second});
        summary["best_infidelity"] = opt.best_infidelity;
        summary["evaluations"] = opt.evaluations;
        summary["aborted_evaluations"] = opt.aborted_evals;
    }
    summary["coefficients"] = std::vector<double>(best.data(), best.data() + best.size());
    summary["r"] = prob.r;

    std::vector<std::pair<std::string, RampProtocol>> protos = {
        {"linear", RampProtocol::linear(prob.t_f)}};
    if (budget > 0) protos.emplace_back("crab", prob.make_protocol(best));
    const auto rows = benchmark_protocols(prob, protos);
    CsvWriter csv(ctx.file("protocols.csv"));
    csv.header({"t_f", "infidelity", "leakage_integral"});
    for (const auto& row : rows)
        if (budget > 0 ? row.protocol == "crab" : true)
            csv.row({row.t_f, row.infidelity, row.leakage_integral});
    for (const auto& row : rows)
        summary[row.protocol + "_infidelity"] = row.infidelity;
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_gap(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const SpinBosonParams p = build_model(ctx.cfg);
    const int cutoff = get_or(ctx.cfg, "gap", "cutoff", 60);
    const int points = get_or(ctx.cfg, "gap", "points", 101);
    const double lo = get_or(ctx.cfg, "gap", "lo", 0.0);
    const double hi = get_or(ctx.cfg, "gap", "hi", 1.0);
    const FockSpace space(p.n_modes(), cutoff);

    const auto scan = gap_scan(p, space, lo, hi, points);
    CsvWriter csv(ctx.file("gap.csv"));
    csv.header({"coupling_scale", "gap", "matrix_element"});
    for (int i = 0; i < scan.couplings.size(); ++i)
        csv.row({scan.couplings[i], scan.gap[i], scan.matrix_element[i]});

    auto cg = critical_gap(scan, lo, hi);
    // one local 10x subdivision around the argmin
    const double step = (hi - lo) / (points - 1);
    const double rlo = std::max(lo, cg.coupling - step);
    const double rhi = std::min(hi, cg.coupling + step);
    const auto fine = gap_scan(p, space, rlo, rhi, 21);
    const auto cg_fine = critical_gap(fine, rlo, rhi);

    const double epsilon = get_or(ctx.cfg, "gap", "epsilon", 1.0);
    const auto bound = adiabatic_tf_bound(scan, epsilon);

    json summary;
    summary["critical_gap"] = cg_fine.gap;
    summary["critical_coupling"] = cg_fine.coupling;
    summary["critical_coupling_coarse"] = cg.coupling;
    summary["t_f_bound"] = bound.t_f;
    summary["t_f_bound_at_coupling"] = bound.at_coupling;
    if (has_key(ctx.cfg, "control", "t_f"))
        summary["gamma_linear"] = adiabaticity_gamma(
            scan, RampProtocol::linear(ctx.cfg["control"]["t_f"].get<double>()));
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_scaling(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const auto ns = get_or(ctx.cfg, "scaling", "n_modes_list",
                           std::vector<int>{1, 2, 3, 4});
    const int cutoff = get_or(ctx.cfg, "scaling", "cutoff", 8);
    const int points = get_or(ctx.cfg, "scaling", "points", 101);
    const double epsilon = get_or(ctx.cfg, "scaling", "epsilon", 1.0);

    Eigen::VectorXd inv_n(ns.size()), dc(ns.size()), nvec(ns.size()), tf(ns.size());
    CsvWriter csv(ctx.file("scaling.csv"));
    csv.header({"n_modes", "inv_n", "critical_gap", "critical_coupling", "t_f_bound"});
    for (std::size_t i = 0; i < ns.size(); ++i) {
        json cfg_i = ctx.cfg;
        cfg_i["model"]["n_modes"] = ns[i];
        const SpinBosonParams p = build_model(cfg_i);
        const FockSpace space(ns[i], cutoff);
        const auto scan = gap_scan(p, space, 0.0, 1.0, points);
        const auto cg = critical_gap(scan, 0.0, 1.0);
        const auto bound = adiabatic_tf_bound(scan, epsilon);
        inv_n[i] = 1.0 / ns[i];
        nvec[i] = ns[i];
        dc[i] = cg.gap;
        tf[i] = bound.t_f;
        csv.row({static_cast<double>(ns[i]), inv_n[i], cg.gap, cg.coupling, bound.t_f});
    }

    json summary;
    if (ns.size() >= 2) {
        const double q = get_or(ctx.cfg, "scaling", "query", 0.0);
        const auto dfit = linear_fit_extrapolate(inv_n, dc, q);
        summary["gap_fit"] = {{"slope", dfit.fit.slope},
                              {"intercept", dfit.fit.intercept},
                              {"residual_rms", dfit.fit.residual_rms},
                              {"predicted", dfit.predicted},
                              {"query_inv_n", q}};
        const double nq = get_or(ctx.cfg, "scaling", "query", 10.0);
        const auto tfit = linear_fit_extrapolate(nvec, tf, nq);
        summary["t_f_fit"] = {{"slope", tfit.fit.slope},
                              {"intercept", tfit.fit.intercept},
                              {"residual_rms", tfit.fit.residual_rms},
                              {"predicted", tfit.predicted},
                              {"query_n", nq}};
    }
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_otoc(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const SpinBosonParams p = build_model(ctx.cfg);
    const int mode = get_or(ctx.cfg, "otoc", "mode", p.n_modes() / 2);
    if (mode < 0 || mode >= p.n_modes())
        throw ConfigError("otoc.mode out of range");

    const auto vs0 = seed_product(ctx.n_polarons(), p.n_modes(), ctx.init(),
                                  substream_seed(ctx.seed, "seeding"),
                                  ctx.perturbation());
    std::vector<Observable> obs = {Observable::sigma_z()};
    for (int k = 0; k < p.n_modes(); ++k) {
        obs.push_back(Observable::x_k(k));
        obs.push_back(Observable::x2_k(k));
        obs.push_back(Observable::n_k(k));
    }
    TdvpConfig cfg = build_tdvp(ctx.cfg);
    cfg.mode = TdvpMode::real;
    const auto trace =
        evolve(vs0, p, nullptr, cfg, obs, 1.0, restart_reseed(ctx, p.n_modes()));
    write_trace(ctx, trace, "trace.csv");

    const auto rep = otoc_variance(trace, mode);
    CsvWriter csv(ctx.file("otoc.csv"));
    csv.header({"t", "var_x"});
    for (std::size_t i = 0; i < rep.times.size(); ++i)
        csv.row({rep.times[i], rep.var_x[i]});

    json summary;
    summary["mode"] = mode;
    if (rep.t_star) {
        summary["t_star"] = *rep.t_star;
        summary["occupations_at_t_star"] = rep.occupations_at_t_star;
    } else {
        summary["t_star"] = nullptr;
    }
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

int cmd_ion_map(RunContext& ctx) {
    const json m = manifest_base(ctx, {});
    write_manifest(ctx, m);

    const SpinBosonParams p = build_model(ctx.cfg);
    if (!has_key(ctx.cfg, "ion", "eta"))
        throw ConfigError("ion-map requires ion.eta");
    const auto etav = ctx.cfg["ion"]["eta"].get<std::vector<double>>();
    if (static_cast<int>(etav.size()) != p.n_modes())
        throw ConfigError("ion.eta length must equal model.n_modes");
    const Eigen::VectorXd eta = Eigen::Map<const Eigen::VectorXd>(etav.data(), etav.size());

    IonDriveParams drive;
    try {
        drive = ion_map(p, eta);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    CsvWriter csv(ctx.file("drive.csv"));
    csv.header({"mode", "eps", "g", "eta", "delta_blue", "delta_red", "omega_rabi"});
    for (int k = 0; k < p.n_modes(); ++k)
        csv.row({static_cast<double>(k), p.eps[k], p.g[k], eta[k], drive.delta_blue[k],
                 drive.delta_red[k], drive.omega_rabi[k]});

    json summary;
    summary["delta_drive"] = drive.delta_drive;
    summary["rwa_warning"] = drive.rwa_warning;
    write_json(summary, ctx.file("summary.json"));
    finalize_manifest(ctx, m);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Variational multipolaron dynamics for spin-boson models"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::int64_t seed_flag = -1;
    std::vector<std::string> overrides;

    const std::vector<std::pair<std::string, int (*)(RunContext&)>> commands = {
        {"groundstate", cmd_groundstate}, {"quench", cmd_quench},
        {"ramp", cmd_ramp},               {"crab", cmd_crab},
        {"gap", cmd_gap},                 {"scaling", cmd_scaling},
        {"otoc", cmd_otoc},               {"ion-map", cmd_ion_map},
    };
    for (const auto& [name, fn] : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config or manifest")->required();
        sub->add_option("--seed", seed_flag, "RNG seed (overrides config)");
        sub->add_option("--out", out_dir, "output directory");
        sub->add_option("--set", overrides, "config override KEY=VALUE");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunContext ctx;
    ctx.command = app.get_subcommands().front()->get_name();
    ctx.out = out_dir;

    try {
        json loaded = read_json(config_path);
        std::int64_t seed = 1;
        if (loaded.contains("command") && loaded.contains("config")) {
            // replaying a manifest: reuse its resolved config and seed
            seed = loaded["seed"].get<std::int64_t>();
            loaded = loaded["config"];
        }
        for (const auto& kv : overrides) apply_override(loaded, kv);
        validate_schema(loaded);
        ctx.cfg = loaded;
        if (has_key(loaded, "ansatz", "seed"))
            seed = loaded["ansatz"]["seed"].get<std::int64_t>();
        if (seed_flag >= 0) seed = seed_flag;
        ctx.seed = static_cast<std::uint64_t>(seed);
        ctx.cfg["ansatz"]["seed"] = seed; // resolved seed travels with the config
        fs::create_directories(ctx.out);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        for (const auto& [name, fn] : commands)
            if (name == ctx.command) return fn(ctx);
        std::cerr << "unknown command\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
