#include "contagion/config.hpp"

#include "contagion/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace contagion {

namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    require(obj.is_object(), where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.contains(key)) {
            throw ValidationError("unknown key '" + key + "' in " + where);
        }
    }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + " has the wrong type");
    }
}

double need_number(const json& obj, const char* key, const std::string& where) {
    require(obj.contains(key), where + "." + key + " is required");
    require(obj.at(key).is_number(), where + "." + key + " must be a number");
    return obj.at(key).get<double>();
}

std::uint64_t parse_seed(const std::string& text) {
    try {
        require(!text.empty() && text.front() != '-' && text.front() != '+', "bad seed");
        std::size_t used = 0;
        const unsigned long long v = std::stoull(text, &used, 0);
        require(used == text.size(), "bad seed");
        return v;
    } catch (const std::exception&) {
        throw ValidationError(std::string(kSeedEnv) + " must be a non-negative integer, got '" + text + "'");
    }
}

}  // namespace

InitialDistribution parse_initial(const json& spec) {
    require(spec.is_object() && spec.contains("kind") && spec.at("kind").is_string(),
            "initial.kind is required");
    const std::string kind = spec.at("kind").get<std::string>();
    const std::string where = "initial";
    if (kind == "uniform") {
        check_keys(spec, {"kind", "a", "b", "gap"}, where);
        return InitialDistribution::uniform(need_number(spec, "a", where), need_number(spec, "b", where),
                                            need_number(spec, "gap", where));
    }
    if (kind == "triangular") {
        check_keys(spec, {"kind", "a", "mode", "b", "gap"}, where);
        return InitialDistribution::triangular(need_number(spec, "a", where), need_number(spec, "mode", where),
                                               need_number(spec, "b", where), need_number(spec, "gap", where));
    }
    if (kind == "tabulated") {
        check_keys(spec, {"kind", "grid", "values", "gap", "normalize"}, where);
        require(spec.contains("grid") && spec.contains("values"), "initial.grid and initial.values are required");
        auto grid = get_or<std::vector<double>>(spec, "grid", {}, where);
        auto values = get_or<std::vector<double>>(spec, "values", {}, where);
        const double gap = need_number(spec, "gap", where);
        if (get_or<bool>(spec, "normalize", false, where)) {
            return InitialDistribution::tabulated_normalized(std::move(grid), std::move(values), gap);
        }
        return InitialDistribution::tabulated(std::move(grid), std::move(values), gap);
    }
    if (kind == "mollified_uniform") {
        check_keys(spec, {"kind", "a", "b", "width"}, where);
        return mollified_uniform(need_number(spec, "a", where), need_number(spec, "b", where),
                                 need_number(spec, "width", where));
    }
    throw ValidationError("unknown initial.kind '" + kind + "'");
}

FixedPointOptions RunConfig::fixed_point_options() const {
    FixedPointOptions o;
    o.space = space();
    o.dt = pde.dt;
    o.window_length = fixedpoint.window_length;
    o.M0 = fixedpoint.M0;
    o.tol = fixedpoint.tol;
    o.max_iter = fixedpoint.max_iter;
    o.explosion_threshold = fixedpoint.explosion_threshold;
    return o;
}

RunConfig parse_config(const json& doc_in, bool apply_env_seed) {
    json doc = doc_in;
    check_keys(doc, {"model", "initial", "simulation", "pde", "fixedpoint", "analysis", "compare", "output_dir"},
               "config");
    RunConfig cfg;

    require(doc.contains("model"), "config.model is required");
    const json& m = doc.at("model");
    check_keys(m, {"alpha", "sigma", "exposure_c", "horizon"}, "model");
    cfg.model.alpha = get_or<double>(m, "alpha", 0.0, "model");
    cfg.model.sigma = get_or<double>(m, "sigma", 1.0, "model");
    cfg.model.exposure_c = get_or<double>(m, "exposure_c", 0.0, "model");
    cfg.model.horizon = need_number(m, "horizon", "model");
    cfg.model.validate();

    require(doc.contains("initial"), "config.initial is required");
    cfg.initial_spec = doc.at("initial");
    cfg.initial = parse_initial(cfg.initial_spec);

    if (doc.contains("simulation")) {
        const json& s = doc.at("simulation");
        check_keys(s, {"n_banks", "dt", "seed", "bridge_correction", "snapshot_cascades", "workers", "record_paths"},
                   "simulation");
        cfg.simulation.n_banks = get_or<std::size_t>(s, "n_banks", cfg.simulation.n_banks, "simulation");
        cfg.simulation.dt = get_or<double>(s, "dt", cfg.simulation.dt, "simulation");
        cfg.simulation.seed = get_or<std::uint64_t>(s, "seed", cfg.simulation.seed, "simulation");
        auto& o = cfg.simulation.options;
        o.bridge_correction = get_or<bool>(s, "bridge_correction", o.bridge_correction, "simulation");
        o.snapshot_cascades = get_or<bool>(s, "snapshot_cascades", o.snapshot_cascades, "simulation");
        o.record_paths = get_or<bool>(s, "record_paths", o.record_paths, "simulation");
        o.workers = get_or<unsigned>(s, "workers", o.workers, "simulation");
    }
    require(cfg.simulation.n_banks >= 1, "simulation.n_banks must be >= 1");
    require(cfg.simulation.dt > 0.0, "simulation.dt must be > 0");
    require(cfg.simulation.options.workers >= 1, "simulation.workers must be >= 1");
    if (apply_env_seed) {
        if (const char* env = std::getenv(kSeedEnv); env != nullptr && *env != '\0') {
            cfg.simulation.seed = parse_seed(env);
            doc["simulation"]["seed"] = cfg.simulation.seed;
        }
    }

    if (doc.contains("pde")) {
        const json& p = doc.at("pde");
        check_keys(p, {"h", "y_max", "dt"}, "pde");
        cfg.pde.h = get_or<double>(p, "h", cfg.pde.h, "pde");
        cfg.pde.y_max = get_or<double>(p, "y_max", cfg.pde.y_max, "pde");
        cfg.pde.dt = get_or<double>(p, "dt", cfg.pde.dt, "pde");
    }
    cfg.space().validate();
    require(cfg.pde.dt > 0.0, "pde.dt must be > 0");

    if (doc.contains("fixedpoint")) {
        const json& f = doc.at("fixedpoint");
        check_keys(f, {"window_length", "M0", "tol", "max_iter", "explosion_threshold"}, "fixedpoint");
        auto& c = cfg.fixedpoint;
        c.window_length = get_or<double>(f, "window_length", c.window_length, "fixedpoint");
        c.M0 = get_or<double>(f, "M0", c.M0, "fixedpoint");
        c.tol = get_or<double>(f, "tol", c.tol, "fixedpoint");
        c.max_iter = get_or<std::size_t>(f, "max_iter", c.max_iter, "fixedpoint");
        c.explosion_threshold = get_or<double>(f, "explosion_threshold", c.explosion_threshold, "fixedpoint");
    }
    require(cfg.fixedpoint.window_length > 0.0, "fixedpoint.window_length must be > 0");
    require(cfg.fixedpoint.tol > 0.0, "fixedpoint.tol must be > 0");
    require(cfg.fixedpoint.max_iter >= 1, "fixedpoint.max_iter must be >= 1");
    require(cfg.fixedpoint.explosion_threshold > 0.0, "fixedpoint.explosion_threshold must be > 0");

    if (doc.contains("analysis")) {
        const json& a = doc.at("analysis");
        check_keys(a, {"eta_ladder", "epsilon", "holder_window"}, "analysis");
        auto& c = cfg.analysis;
        c.eta_ladder = get_or<std::vector<double>>(a, "eta_ladder", c.eta_ladder, "analysis");
        c.epsilon = get_or<double>(a, "epsilon", c.epsilon, "analysis");
        if (a.contains("holder_window")) {
            const auto w = get_or<std::vector<double>>(a, "holder_window", {}, "analysis");
            require(w.size() == 2 && w[0] < w[1], "analysis.holder_window must be [t0, t1] with t0 < t1");
            c.holder_t0 = w[0];
            c.holder_t1 = w[1];
        } else {
            c.holder_t1 = cfg.model.horizon;
        }
    } else {
        cfg.analysis.holder_t1 = cfg.model.horizon;
    }
    require(!cfg.analysis.eta_ladder.empty(), "analysis.eta_ladder must not be empty");
    for (double e : cfg.analysis.eta_ladder) {
        require(e > 0.0, "analysis.eta_ladder entries must be > 0");
    }
    require(cfg.analysis.epsilon > 0.0, "analysis.epsilon must be > 0");

    if (doc.contains("compare")) {
        const json& c = doc.at("compare");
        check_keys(c, {"n_ladder", "n_seeds", "mc_paths"}, "compare");
        cfg.compare.n_ladder = get_or<std::vector<std::size_t>>(c, "n_ladder", cfg.compare.n_ladder, "compare");
        cfg.compare.n_seeds = get_or<std::size_t>(c, "n_seeds", cfg.compare.n_seeds, "compare");
        cfg.compare.mc_paths = get_or<std::size_t>(c, "mc_paths", cfg.compare.mc_paths, "compare");
    }
    require(!cfg.compare.n_ladder.empty() && cfg.compare.n_seeds >= 1 && cfg.compare.mc_paths >= 1,
            "compare needs a non-empty n_ladder, n_seeds >= 1 and mc_paths >= 1");
    for (std::size_t n : cfg.compare.n_ladder) {
        require(n >= 1, "compare.n_ladder entries must be >= 1");
    }

    if (doc.contains("output_dir")) {
        require(doc.at("output_dir").is_string(), "output_dir must be a string");
        cfg.output_dir = doc.at("output_dir").get<std::string>();
    }
    cfg.source = std::move(doc);
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path, bool apply_env_seed) {
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open config file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config is not valid JSON: " + std::string(e.what()));
    }
    return parse_config(doc, apply_env_seed);
}

}  // namespace contagion
