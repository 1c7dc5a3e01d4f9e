#include "sill/config.hpp"

#include <cmath>
#include <random>
#include <set>

#include <json.hpp>

#include "sill/simulation.hpp"
#include "sill/text_io.hpp"

namespace sill {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path, msg);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         const std::set<std::string>& allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            fail(path + "." + it.key(), "unknown key");
        }
    }
}

const json& require(const json& obj, const std::string& path, const std::string& key) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(path + "." + key, "missing required key");
    return *it;
}

double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& path) {
    if (!v.is_number_integer()) fail(path, "expected an integer");
    return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
        fail(path, "expected a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

Eigen::VectorXd as_vector(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) fail(path, "expected a non-empty array of numbers");
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(i)] =
            as_number(v[i], path + "[" + std::to_string(i) + "]");
    }
    return out;
}

double canonical_u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

int line_of_byte(const std::string& text, std::size_t byte) {
    int line = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') ++line;
    }
    return line;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("line " + std::to_string(line_of_byte(text, e.byte)),
             std::string("JSON parse error: ") + e.what());
    }
    if (!doc.is_object()) fail("$", "config root must be an object");

    reject_unknown_keys(doc, "$", {"system", "domain", "dictionary", "regression",
                                   "simulation", "analysis", "output"});

    ExperimentConfig cfg;
    cfg.config_hash = fnv1a_hex(text);

    { // system
        const json& sys = require(doc, "$", "system");
        if (!sys.is_object()) fail("$.system", "expected an object");
        reject_unknown_keys(sys, "$.system", {"name", "params"});
        cfg.system.name = as_string(require(sys, "$.system", "name"), "$.system.name");
        if (cfg.system.name != "vdp" && cfg.system.name != "toggle") {
            fail("$.system.name", "unknown system '" + cfg.system.name +
                                      "' (expected \"vdp\" or \"toggle\")");
        }
        if (sys.contains("params")) {
            const json& p = sys["params"];
            if (!p.is_object()) fail("$.system.params", "expected an object");
            for (auto it = p.begin(); it != p.end(); ++it) {
                cfg.system.params[it.key()] =
                    as_number(it.value(), "$.system.params." + it.key());
            }
        }
    }

    { // domain
        const json& dom = require(doc, "$", "domain");
        if (!dom.is_object()) fail("$.domain", "expected an object");
        reject_unknown_keys(dom, "$.domain", {"lo", "hi"});
        cfg.domain.lo = as_vector(require(dom, "$.domain", "lo"), "$.domain.lo");
        cfg.domain.hi = as_vector(require(dom, "$.domain", "hi"), "$.domain.hi");
        if (cfg.domain.lo.size() != cfg.domain.hi.size()) {
            fail("$.domain", "lo and hi must have the same length");
        }
        for (int i = 0; i < cfg.domain.lo.size(); ++i) {
            if (!(cfg.domain.lo[i] < cfg.domain.hi[i])) {
                fail("$.domain", "lo must be strictly below hi componentwise");
            }
        }
    }

    { // dictionary
        const json& d = require(doc, "$", "dictionary");
        if (!d.is_object()) fail("$.dictionary", "expected an object");
        reject_unknown_keys(d, "$.dictionary", {"spacing", "alpha"});
        cfg.dictionary.spacing =
            as_vector(require(d, "$.dictionary", "spacing"), "$.dictionary.spacing");
        if (cfg.dictionary.spacing.size() != cfg.domain.lo.size()) {
            fail("$.dictionary.spacing", "length must match the domain dimension");
        }
        for (int i = 0; i < cfg.dictionary.spacing.size(); ++i) {
            if (!(cfg.dictionary.spacing[i] > 0.0)) {
                fail("$.dictionary.spacing", "entries must be > 0");
            }
        }
        cfg.dictionary.alpha =
            as_number(require(d, "$.dictionary", "alpha"), "$.dictionary.alpha");
        if (!(cfg.dictionary.alpha > 0.0)) fail("$.dictionary.alpha", "must be > 0");
    }

    { // regression
        const json& r = require(doc, "$", "regression");
        if (!r.is_object()) fail("$.regression", "expected an object");
        reject_unknown_keys(r, "$.regression", {"per_dim", "mode", "seed", "ridge"});
        if (r.contains("per_dim")) {
            cfg.regression.per_dim = as_int(r["per_dim"], "$.regression.per_dim");
            if (cfg.regression.per_dim < 0) fail("$.regression.per_dim", "must be >= 0");
        }
        if (r.contains("mode")) {
            const std::string mode = as_string(r["mode"], "$.regression.mode");
            if (mode == "lattice") {
                cfg.regression.mode = GridMode::lattice;
            } else if (mode == "random") {
                cfg.regression.mode = GridMode::random;
            } else {
                fail("$.regression.mode", "expected \"lattice\" or \"random\"");
            }
        }
        if (r.contains("seed")) {
            cfg.regression.seed = as_seed(r["seed"], "$.regression.seed");
        }
        if (r.contains("ridge")) {
            cfg.regression.ridge = as_number(r["ridge"], "$.regression.ridge");
            if (cfg.regression.ridge < 0.0) fail("$.regression.ridge", "must be >= 0");
        }
    }

    { // simulation
        const json& s = require(doc, "$", "simulation");
        if (!s.is_object()) fail("$.simulation", "expected an object");
        reject_unknown_keys(s, "$.simulation", {"dt", "horizon", "initial_conditions"});
        cfg.simulation.dt = as_number(require(s, "$.simulation", "dt"), "$.simulation.dt");
        if (!(cfg.simulation.dt > 0.0)) fail("$.simulation.dt", "must be > 0");
        cfg.simulation.horizon =
            as_number(require(s, "$.simulation", "horizon"), "$.simulation.horizon");
        if (!(cfg.simulation.horizon >= cfg.simulation.dt)) {
            fail("$.simulation.horizon", "must be >= dt");
        }
        const json& ic = require(s, "$.simulation", "initial_conditions");
        if (ic.is_array()) {
            if (ic.empty()) fail("$.simulation.initial_conditions", "must not be empty");
            for (std::size_t i = 0; i < ic.size(); ++i) {
                const std::string p =
                    "$.simulation.initial_conditions[" + std::to_string(i) + "]";
                Eigen::VectorXd x0 = as_vector(ic[i], p);
                if (x0.size() != cfg.domain.lo.size()) {
                    fail(p, "length must match the domain dimension");
                }
                cfg.simulation.initial_conditions.push_back(std::move(x0));
            }
        } else if (ic.is_object()) {
            reject_unknown_keys(ic, "$.simulation.initial_conditions", {"ensemble"});
            const json& ens =
                require(ic, "$.simulation.initial_conditions", "ensemble");
            if (!ens.is_object()) {
                fail("$.simulation.initial_conditions.ensemble", "expected an object");
            }
            reject_unknown_keys(ens, "$.simulation.initial_conditions.ensemble",
                                {"count", "seed"});
            EnsembleSpec spec;
            spec.count = as_int(require(ens, "$.simulation.initial_conditions.ensemble",
                                        "count"),
                                "$.simulation.initial_conditions.ensemble.count");
            if (spec.count < 1) {
                fail("$.simulation.initial_conditions.ensemble.count", "must be >= 1");
            }
            spec.seed = as_seed(require(ens, "$.simulation.initial_conditions.ensemble",
                                        "seed"),
                                "$.simulation.initial_conditions.ensemble.seed");
            cfg.simulation.ensemble = spec;
        } else {
            fail("$.simulation.initial_conditions",
                 "expected an array of states or an ensemble object");
        }
    }

    if (doc.contains("analysis")) {
        const json& a = doc["analysis"];
        if (!a.is_object()) fail("$.analysis", "expected an object");
        reject_unknown_keys(a, "$.analysis",
                            {"alphas", "sup_search_density", "sample_count",
                             "min_offset_fraction", "seed"});
        if (a.contains("alphas")) {
            const json& al = a["alphas"];
            if (!al.is_array() || al.empty()) {
                fail("$.analysis.alphas", "expected a non-empty array");
            }
            for (std::size_t i = 0; i < al.size(); ++i) {
                const std::string p = "$.analysis.alphas[" + std::to_string(i) + "]";
                const double v = as_number(al[i], p);
                if (!(v > 0.0)) fail(p, "must be > 0");
                if (!cfg.analysis.alphas.empty() && v <= cfg.analysis.alphas.back()) {
                    fail(p, "alphas must be strictly increasing");
                }
                cfg.analysis.alphas.push_back(v);
            }
        }
        if (a.contains("sup_search_density")) {
            cfg.analysis.sup_search_density =
                as_int(a["sup_search_density"], "$.analysis.sup_search_density");
            if (cfg.analysis.sup_search_density < 16) {
                fail("$.analysis.sup_search_density", "must be >= 16");
            }
        }
        if (a.contains("sample_count")) {
            cfg.analysis.sample_count = as_int(a["sample_count"], "$.analysis.sample_count");
            if (cfg.analysis.sample_count < 1) fail("$.analysis.sample_count", "must be >= 1");
        }
        if (a.contains("min_offset_fraction")) {
            cfg.analysis.min_offset_fraction =
                as_number(a["min_offset_fraction"], "$.analysis.min_offset_fraction");
            if (!(cfg.analysis.min_offset_fraction > 0.0) ||
                !(cfg.analysis.min_offset_fraction < 0.5)) {
                fail("$.analysis.min_offset_fraction", "must be in (0, 0.5)");
            }
        }
        if (a.contains("seed")) {
            cfg.analysis.seed = as_seed(a["seed"], "$.analysis.seed");
        }
    }

    { // output
        const json& o = require(doc, "$", "output");
        if (!o.is_object()) fail("$.output", "expected an object");
        reject_unknown_keys(o, "$.output", {"directory"});
        cfg.output.directory =
            as_string(require(o, "$.output", "directory"), "$.output.directory");
        if (cfg.output.directory.empty()) fail("$.output.directory", "must not be empty");
    }

    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    return parse_config_text(read_file(path));
}

namespace {

double param_or(const std::map<std::string, double>& params, const std::string& key,
                double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

} // namespace

VectorField make_system(const SystemConfig& system) {
    for (const auto& [key, value] : system.params) {
        (void)value;
        static const std::set<std::string> vdp_keys{"a1"};
        static const std::set<std::string> toggle_keys{"a1", "a2", "n1", "n2", "delta"};
        const auto& allowed = system.name == "vdp" ? vdp_keys : toggle_keys;
        if (!allowed.count(key)) {
            throw ConfigError("$.system.params." + key,
                              "unknown parameter for system '" + system.name + "'");
        }
    }
    if (system.name == "vdp") {
        return benchmark_vdp(param_or(system.params, "a1", -0.2));
    }
    return benchmark_toggle(param_or(system.params, "a1", 2.0),
                            param_or(system.params, "a2", 2.0),
                            param_or(system.params, "n1", 3.0),
                            param_or(system.params, "n2", 3.0),
                            param_or(system.params, "delta", 1.0));
}

SILLDictionary make_dictionary(const ExperimentConfig& config) {
    return build_lattice(config.domain.lo, config.domain.hi, config.dictionary.spacing,
                         Steepness(config.dictionary.alpha));
}

SampleGrid make_grid(const ExperimentConfig& config, const SILLDictionary& dict) {
    int per_dim = config.regression.per_dim;
    if (per_dim == 0) per_dim = default_grid_per_dim(dict);
    return make_sample_grid(dict, per_dim, config.regression.mode, config.regression.seed);
}

std::vector<Eigen::VectorXd> initial_conditions(const ExperimentConfig& config) {
    if (!config.simulation.ensemble) {
        return config.simulation.initial_conditions;
    }
    const EnsembleSpec& spec = *config.simulation.ensemble;
    std::mt19937_64 eng(spec.seed);
    const int n = static_cast<int>(config.domain.lo.size());
    std::vector<Eigen::VectorXd> out;
    out.reserve(spec.count);
    for (int s = 0; s < spec.count; ++s) {
        Eigen::VectorXd x0(n);
        for (int i = 0; i < n; ++i) {
            x0[i] = config.domain.lo[i] +
                    (config.domain.hi[i] - config.domain.lo[i]) * canonical_u01(eng);
        }
        out.push_back(std::move(x0));
    }
    return out;
}

} // namespace sill
