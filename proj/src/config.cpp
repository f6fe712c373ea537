#include "lfk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "lfk/errors.hpp"

namespace lfk {

using nlohmann::json;

uint64_t fnv1a64(const std::string& bytes) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError(msg); }

void expect_keys(const json& j, const std::string& where,
                 const std::set<std::string>& allowed) {
    if (!j.is_object()) bad(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!allowed.count(it.key()))
            bad(where + ": unknown key \"" + it.key() + "\"");
    }
}

double num(const json& j, const std::string& where) {
    if (!j.is_number()) bad(where + ": expected a number");
    return j.get<double>();
}

double num_or(const json& j, const char* key, double dflt,
              const std::string& where) {
    if (!j.contains(key)) return dflt;
    return num(j.at(key), where + "." + key);
}

JumpMeasure parse_jumps(const json& j) {
    expect_keys(j, "model.jumps",
                {"kind", "alpha", "mass", "atoms", "eps", "cutoff", "quad_nodes"});
    if (!j.contains("kind")) bad("model.jumps: missing \"kind\"");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "none") {
        return NoJumps{};
    } else if (kind == "two_point") {
        TwoPointJumps tp;
        tp.alpha = num_or(j, "alpha", 1.0, "model.jumps");
        tp.mass = num_or(j, "mass", 1.0, "model.jumps");
        return tp;
    } else if (kind == "atoms") {
        if (!j.contains("atoms") || !j.at("atoms").is_array())
            bad("model.jumps: \"atoms\" must be an array of [size, weight] pairs");
        AtomicJumps am;
        for (const auto& pair : j.at("atoms")) {
            if (!pair.is_array() || pair.size() != 2)
                bad("model.jumps.atoms: each entry must be [size, weight]");
            am.atoms.push_back({num(pair[0], "model.jumps.atoms"),
                                num(pair[1], "model.jumps.atoms")});
        }
        return am;
    } else if (kind == "gamma") {
        GammaJumps g;
        g.eps = num_or(j, "eps", g.eps, "model.jumps");
        g.cutoff = num_or(j, "cutoff", g.cutoff, "model.jumps");
        g.quad_nodes = static_cast<int>(num_or(j, "quad_nodes",
                                               g.quad_nodes, "model.jumps"));
        return g;
    }
    bad("model.jumps.kind: unknown kind \"" + kind + "\"");
}

LevyModel parse_model(const json& j) {
    expect_keys(j, "model", {"drift", "sigma2", "hbar", "jumps"});
    LevyModel m;
    m.drift = num_or(j, "drift", 0.0, "model");
    m.sigma2 = num_or(j, "sigma2", 0.0, "model");
    if (j.contains("hbar")) m.hbar = num(j.at("hbar"), "model.hbar");
    if (j.contains("jumps")) m.jumps = parse_jumps(j.at("jumps"));
    return m;
}

RateFunction parse_rate(const json& j) {
    expect_keys(j, "problem.rate", {"family", "coeff", "coeffs"});
    if (!j.contains("family")) bad("problem.rate: missing \"family\"");
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "quadratic") {
        return QuadraticRate{num_or(j, "coeff", 0.5, "problem.rate")};
    } else if (fam == "quadratic_minus_linear") {
        return QuadraticMinusLinearRate{};
    } else if (fam == "polynomial") {
        if (!j.contains("coeffs") || !j.at("coeffs").is_array())
            bad("problem.rate: polynomial needs a \"coeffs\" array");
        Poly p;
        for (const auto& c : j.at("coeffs"))
            p.c.push_back(num(c, "problem.rate.coeffs"));
        return PolynomialRate{p};
    } else if (fam == "half_power") {
        return HalfPowerRate{};
    }
    bad("problem.rate.family: unknown family \"" + fam + "\"");
}

BoundaryData parse_data(const json& j) {
    expect_keys(j, "problem.data", {"family", "coeff", "normalized", "power", "decay"});
    if (!j.contains("family")) bad("problem.data: missing \"family\"");
    const std::string fam = j.at("family").get<std::string>();
    if (fam == "scaled_gaussian") {
        ScaledGaussianData d;
        d.coeff = num_or(j, "coeff", 0.5, "problem.data");
        if (j.contains("normalized")) {
            if (!j.at("normalized").is_boolean())
                bad("problem.data.normalized: expected a bool");
            d.normalized = j.at("normalized").get<bool>();
        }
        return d;
    } else if (fam == "constant_exp") {
        return ConstantExpData{};
    } else if (fam == "one") {
        return OneData{};
    } else if (fam == "schwartz") {
        SchwartzData d;
        d.power = static_cast<int>(num_or(j, "power", 0.0, "problem.data"));
        d.a = num_or(j, "decay", 1.0, "problem.data");
        return d;
    }
    bad("problem.data.family: unknown family \"" + fam + "\"");
}

ProblemSpec parse_problem(const json& j) {
    expect_keys(j, "problem", {"rate", "data", "horizon", "direction"});
    ProblemSpec spec;
    if (j.contains("rate")) spec.rate = parse_rate(j.at("rate"));
    if (j.contains("data")) spec.data = parse_data(j.at("data"));
    spec.horizon = num_or(j, "horizon", 1.0, "problem");
    if (j.contains("direction")) {
        const std::string d = j.at("direction").get<std::string>();
        if (d == "forward_from_initial")
            spec.direction = TimeDirection::ForwardFromInitial;
        else if (d == "backward_from_terminal")
            spec.direction = TimeDirection::BackwardFromTerminal;
        else
            bad("problem.direction: expected forward_from_initial or "
                "backward_from_terminal");
    }
    return spec;
}

void parse_method(const json& j, RunConfig& cfg) {
    if (!j.contains("name")) bad("method: missing \"name\"");
    cfg.method_name = j.at("name").get<std::string>();
    if (cfg.method_name == "fk") {
        expect_keys(j, "method", {"name", "eval_points", "eval_time"});
        if (j.contains("eval_points")) {
            for (const auto& p : j.at("eval_points"))
                cfg.fk.eval_points.push_back(num(p, "method.eval_points"));
        }
        if (j.contains("eval_time"))
            cfg.fk.eval_time = num(j.at("eval_time"), "method.eval_time");
        if (cfg.fk.eval_points.empty())
            bad("method: fk needs a nonempty \"eval_points\" array");
    } else if (cfg.method_name == "pide") {
        expect_keys(j, "method", {"name"});
    } else if (cfg.method_name == "variational") {
        expect_keys(j, "method",
                    {"name", "mode", "location", "interval", "kappa", "t_start"});
        const std::string mode =
            j.contains("mode") ? j.at("mode").get<std::string>() : "config";
        if (mode == "config")
            cfg.variational.mode = VariationalMode::Config;
        else if (mode == "momentum")
            cfg.variational.mode = VariationalMode::Momentum;
        else if (mode == "jump")
            cfg.variational.mode = VariationalMode::Jump;
        else
            bad("method.mode: expected config, momentum or jump");
        cfg.variational.location = num_or(j, "location", 0.0, "method");
        cfg.variational.interval = num_or(j, "interval", 1.0, "method");
        cfg.variational.kappa = num_or(j, "kappa", 0.5, "method");
        cfg.variational.t_start = num_or(j, "t_start", 0.0, "method");
    } else if (cfg.method_name == "asymptotics") {
        expect_keys(j, "method",
                    {"name", "mode", "times", "backward", "hbars", "eval_point",
                     "eval_time", "source", "location", "interval", "kappa", "dp"});
        const std::string mode =
            j.contains("mode") ? j.at("mode").get<std::string>() : "sweep";
        if (mode == "prefactor")
            cfg.asymptotics.mode = AsymptoticsMode::Prefactor;
        else if (mode == "drift_config")
            cfg.asymptotics.mode = AsymptoticsMode::DriftConfig;
        else if (mode == "drift_momentum")
            cfg.asymptotics.mode = AsymptoticsMode::DriftMomentum;
        else if (mode == "sweep")
            cfg.asymptotics.mode = AsymptoticsMode::Sweep;
        else
            bad("method.mode: expected prefactor, drift_config, drift_momentum "
                "or sweep");
        if (j.contains("times"))
            for (const auto& t : j.at("times"))
                cfg.asymptotics.times.push_back(num(t, "method.times"));
        if (j.contains("backward")) {
            if (!j.at("backward").is_boolean())
                bad("method.backward: expected a bool");
            cfg.asymptotics.backward = j.at("backward").get<bool>();
        }
        if (j.contains("hbars"))
            for (const auto& h : j.at("hbars"))
                cfg.asymptotics.hbars.push_back(num(h, "method.hbars"));
        cfg.asymptotics.eval_point = num_or(j, "eval_point", 0.0, "method");
        cfg.asymptotics.eval_time = num_or(j, "eval_time", 0.0, "method");
        if (j.contains("source")) {
            const std::string src = j.at("source").get<std::string>();
            if (src == "mc")
                cfg.asymptotics.mc_source = true;
            else if (src == "pide")
                cfg.asymptotics.mc_source = false;
            else
                bad("method.source: expected pide or mc");
        }
        cfg.asymptotics.location = num_or(j, "location", 0.0, "method");
        cfg.asymptotics.interval = num_or(j, "interval", 0.5, "method");
        cfg.asymptotics.kappa = num_or(j, "kappa", 0.5, "method");
        cfg.asymptotics.dp = num_or(j, "dp", 0.0, "method");
    } else {
        bad("method.name: unknown method \"" + cfg.method_name + "\"");
    }
}

void parse_numerics(const json& j, RunConfig& cfg) {
    expect_keys(j, "numerics", {"n_paths", "dt", "grid"});
    cfg.mc.n_paths =
        static_cast<std::size_t>(num_or(j, "n_paths",
                                        static_cast<double>(cfg.mc.n_paths),
                                        "numerics"));
    cfg.mc.dt = num_or(j, "dt", cfg.mc.dt, "numerics");
    if (j.contains("grid")) {
        const json& g = j.at("grid");
        expect_keys(g, "numerics.grid",
                    {"half_width", "points", "dt", "max_slices"});
        cfg.pide.grid.L =
            num_or(g, "half_width", cfg.pide.grid.L, "numerics.grid");
        cfg.pide.grid.n = static_cast<std::size_t>(
            num_or(g, "points", static_cast<double>(cfg.pide.grid.n),
                   "numerics.grid"));
        cfg.pide.grid.dt = num_or(g, "dt", cfg.pide.grid.dt, "numerics.grid");
        cfg.pide.grid.max_slices = static_cast<std::size_t>(
            num_or(g, "max_slices", static_cast<double>(cfg.pide.grid.max_slices),
                   "numerics.grid"));
    }
}

json jumps_to_json(const JumpMeasure& jm) {
    json j;
    if (std::holds_alternative<NoJumps>(jm)) {
        j["kind"] = "none";
    } else if (const auto* tp = std::get_if<TwoPointJumps>(&jm)) {
        j["kind"] = "two_point";
        j["alpha"] = tp->alpha;
        j["mass"] = tp->mass;
    } else if (const auto* am = std::get_if<AtomicJumps>(&jm)) {
        j["kind"] = "atoms";
        json arr = json::array();
        for (const auto& a : am->atoms)
            arr.push_back(json::array({a.first, a.second}));
        j["atoms"] = arr;
    } else if (const auto* g = std::get_if<GammaJumps>(&jm)) {
        j["kind"] = "gamma";
        j["eps"] = g->eps;
        j["cutoff"] = g->cutoff;
        j["quad_nodes"] = g->quad_nodes;
    }
    return j;
}

json model_to_json(const LevyModel& m) {
    json j;
    j["drift"] = m.drift;
    j["sigma2"] = m.sigma2;
    if (m.hbar) j["hbar"] = *m.hbar;
    j["jumps"] = jumps_to_json(m.jumps);
    return j;
}

json rate_to_json(const RateFunction& r) {
    json j;
    if (const auto* q = std::get_if<QuadraticRate>(&r)) {
        j["family"] = "quadratic";
        j["coeff"] = q->coeff;
    } else if (std::holds_alternative<QuadraticMinusLinearRate>(r)) {
        j["family"] = "quadratic_minus_linear";
    } else if (const auto* p = std::get_if<PolynomialRate>(&r)) {
        j["family"] = "polynomial";
        j["coeffs"] = p->poly.c;
    } else {
        j["family"] = "half_power";
    }
    return j;
}

json data_to_json(const BoundaryData& d) {
    json j;
    if (const auto* g = std::get_if<ScaledGaussianData>(&d)) {
        j["family"] = "scaled_gaussian";
        j["coeff"] = g->coeff;
        j["normalized"] = g->normalized;
    } else if (std::holds_alternative<ConstantExpData>(d)) {
        j["family"] = "constant_exp";
    } else if (std::holds_alternative<OneData>(d)) {
        j["family"] = "one";
    } else if (const auto* s = std::get_if<SchwartzData>(&d)) {
        j["family"] = "schwartz";
        j["power"] = s->power;
        j["decay"] = s->a;
    }
    return j;
}

const char* format_name(OutputFormat f) {
    switch (f) {
        case OutputFormat::Csv: return "csv";
        case OutputFormat::Json: return "json";
        default: return "bin";
    }
}

json config_to_json(const RunConfig& cfg) {
    json j;
    j["seed"] = cfg.seed;
    j["model"] = model_to_json(cfg.problem.model);
    json p;
    p["rate"] = rate_to_json(cfg.problem.rate);
    p["data"] = data_to_json(cfg.problem.data);
    p["horizon"] = cfg.problem.horizon;
    p["direction"] = cfg.problem.direction == TimeDirection::ForwardFromInitial
                         ? "forward_from_initial"
                         : "backward_from_terminal";
    j["problem"] = p;

    json m;
    m["name"] = cfg.method_name;
    if (cfg.method_name == "fk") {
        m["eval_points"] = cfg.fk.eval_points;
        if (cfg.fk.eval_time) m["eval_time"] = *cfg.fk.eval_time;
    } else if (cfg.method_name == "variational") {
        switch (cfg.variational.mode) {
            case VariationalMode::Config: m["mode"] = "config"; break;
            case VariationalMode::Momentum: m["mode"] = "momentum"; break;
            case VariationalMode::Jump: m["mode"] = "jump"; break;
        }
        m["location"] = cfg.variational.location;
        m["interval"] = cfg.variational.interval;
        m["kappa"] = cfg.variational.kappa;
        m["t_start"] = cfg.variational.t_start;
    } else if (cfg.method_name == "asymptotics") {
        switch (cfg.asymptotics.mode) {
            case AsymptoticsMode::Prefactor: m["mode"] = "prefactor"; break;
            case AsymptoticsMode::DriftConfig: m["mode"] = "drift_config"; break;
            case AsymptoticsMode::DriftMomentum:
                m["mode"] = "drift_momentum";
                break;
            case AsymptoticsMode::Sweep: m["mode"] = "sweep"; break;
        }
        if (!cfg.asymptotics.times.empty()) m["times"] = cfg.asymptotics.times;
        m["backward"] = cfg.asymptotics.backward;
        if (!cfg.asymptotics.hbars.empty()) m["hbars"] = cfg.asymptotics.hbars;
        m["eval_point"] = cfg.asymptotics.eval_point;
        m["eval_time"] = cfg.asymptotics.eval_time;
        m["source"] = cfg.asymptotics.mc_source ? "mc" : "pide";
        m["location"] = cfg.asymptotics.location;
        m["interval"] = cfg.asymptotics.interval;
        m["kappa"] = cfg.asymptotics.kappa;
        m["dp"] = cfg.asymptotics.dp;
    }
    j["method"] = m;

    json n;
    n["n_paths"] = cfg.mc.n_paths;
    n["dt"] = cfg.mc.dt;
    if (cfg.method_name == "pide" || (cfg.method_name == "asymptotics" &&
                                      !cfg.asymptotics.mc_source)) {
        json g;
        g["half_width"] = cfg.pide.grid.L;
        g["points"] = cfg.pide.grid.n;
        g["dt"] = cfg.pide.grid.dt;
        g["max_slices"] = cfg.pide.grid.max_slices;
        n["grid"] = g;
    }
    j["numerics"] = n;

    json o;
    o["format"] = format_name(cfg.format);
    if (!cfg.out_path.empty()) o["path"] = cfg.out_path;
    j["output"] = o;
    return j;
}

} // namespace

std::string RunConfig::canonical_json() const {
    return config_to_json(*this).dump();
}

uint64_t RunConfig::config_hash() const { return fnv1a64(canonical_json()); }

uint64_t RunConfig::model_hash() const {
    return fnv1a64(model_to_json(problem.model).dump());
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    expect_keys(j, "config",
                {"seed", "model", "problem", "method", "numerics", "output"});
    RunConfig cfg;
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_integer() &&
            !j.at("seed").is_number_unsigned())
            bad("seed: expected an integer");
        cfg.seed = j.at("seed").get<uint64_t>();
    }
    if (j.contains("problem")) cfg.problem = parse_problem(j.at("problem"));
    if (j.contains("model"))
        cfg.problem.model = parse_model(j.at("model"));
    if (!j.contains("method")) bad("config: missing \"method\"");
    parse_method(j.at("method"), cfg);
    if (j.contains("numerics")) parse_numerics(j.at("numerics"), cfg);
    if (j.contains("output")) {
        const json& o = j.at("output");
        expect_keys(o, "output", {"format", "path"});
        if (o.contains("format")) {
            const std::string f = o.at("format").get<std::string>();
            if (f == "csv")
                cfg.format = OutputFormat::Csv;
            else if (f == "json")
                cfg.format = OutputFormat::Json;
            else if (f == "bin")
                cfg.format = OutputFormat::Bin;
            else
                bad("output.format: expected csv, json or bin");
        }
        if (o.contains("path")) cfg.out_path = o.at("path").get<std::string>();
    }
    cfg.mc.seed = cfg.seed;
    validate_problem(cfg.problem);
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace lfk
