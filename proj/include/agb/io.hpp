#pragma once

// JSON readers/writers for spectra, plans, coefficient lists and experiment
// configs; CSV writers for result records and greedy traces. Malformed input
// raises ConfigError.

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "agb/basis.hpp"
#include "agb/errors.hpp"
#include "agb/experiments.hpp"
#include "agb/greedy.hpp"
#include "agb/norms.hpp"
#include "agb/walsh.hpp"

namespace agb::io {

using Json = nlohmann::json;

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path + "'");
}

inline Json parse_json(const std::string& text, const std::string& what) {
    try {
        return Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

inline Json load_json(const std::string& path) { return parse_json(read_text(path), path); }

// %.17g round-trips every double.
inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace detail {

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(where + ": bad '" + key + "': " + e.what());
    }
}

template <class T>
T get_or(const Json& j, const char* key, T fallback, const std::string& where) {
    return j.contains(key) ? get<T>(j, key, where) : fallback;
}

inline void only_keys(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* allowed : keys) known = known || k == allowed;
        if (!known) throw ConfigError(where + ": unknown key '" + k + "'");
    }
}

} // namespace detail

// ---- spectra ----

inline WalshSpectrum spectrum_from_json(const Json& j) {
    detail::only_keys(j, {"terms"}, "spectrum");
    const Json& terms = j.contains("terms") ? j.at("terms") : Json::array();
    if (!terms.is_array()) throw ConfigError("spectrum: 'terms' must be an array");
    std::vector<WalshTerm> out;
    for (const auto& t : terms) {
        detail::only_keys(t, {"n", "c"}, "spectrum term");
        Frequency n;
        try {
            n = Frequency::from_hex(detail::get<std::string>(t, "n", "spectrum term"));
        } catch (const DomainError& e) {
            throw ConfigError(std::string("spectrum term: ") + e.what());
        }
        out.push_back({n, detail::get<double>(t, "c", "spectrum term")});
    }
    return WalshSpectrum(std::move(out));
}

inline Json spectrum_to_json(const WalshSpectrum& f) {
    Json terms = Json::array();
    for (const auto& t : f.terms()) terms.push_back({{"n", t.frequency.to_hex()}, {"c", t.coefficient}});
    return {{"terms", terms}};
}

// ---- plans ----

inline GrowthSchedule schedule_from_json(const Json& j) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (name == "desk") return GrowthSchedule::desk();
        if (name == "paper") return GrowthSchedule::paper();
        throw ConfigError("unknown plan preset '" + name + "'");
    }
    detail::only_keys(j, {"g", "preset", "horizon"}, "plan");
    if (j.contains("g") == j.contains("preset")) throw ConfigError("plan: give exactly one of 'g' or 'preset'");
    if (j.contains("g")) {
        if (j.contains("horizon")) throw ConfigError("plan: 'horizon' only applies to presets");
        return GrowthSchedule{detail::get<std::vector<std::size_t>>(j, "g", "plan")};
    }
    const auto name = detail::get<std::string>(j, "preset", "plan");
    if (name == "desk") {
        if (j.contains("horizon")) throw ConfigError("plan: the desk preset has a fixed horizon");
        return GrowthSchedule::desk();
    }
    if (name == "paper") {
        const auto k = detail::get_or<std::size_t>(j, "horizon", 2, "plan");
        if (k == 0 || k > 18) throw ConfigError("plan: paper horizon must be in 1..18");
        return GrowthSchedule::paper(k);
    }
    throw ConfigError("unknown plan preset '" + name + "'");
}

inline BlockPlan plan_from_json(const Json& j) {
    try {
        return validate_schedule(schedule_from_json(j));
    } catch (const DomainError& e) {
        throw ConfigError(std::string("plan: ") + e.what());
    }
}

/// A preset name ("desk", "paper") or a path to a plan JSON file.
inline BlockPlan load_plan(const std::string& ref) {
    if (ref == "desk" || ref == "paper") return plan_from_json(Json(ref));
    return plan_from_json(load_json(ref));
}

// ---- coefficients ----

inline CoefficientList coefficients_from_json(const Json& j) {
    detail::only_keys(j, {"coeffs"}, "coefficients");
    const Json& list = j.contains("coeffs") ? j.at("coeffs") : Json::array();
    if (!list.is_array()) throw ConfigError("coefficients: 'coeffs' must be an array");
    CoefficientList out;
    for (const auto& x : list) {
        detail::only_keys(x, {"m", "c"}, "coefficient");
        const auto m = detail::get<std::int64_t>(x, "m", "coefficient");
        if (m < 1) throw ConfigError("coefficient: 'm' must be >= 1");
        out.push_back({std::uint64_t(m), detail::get<double>(x, "c", "coefficient")});
    }
    try {
        validate_coefficients(out);
    } catch (const DomainError& e) {
        throw ConfigError(std::string("coefficients: ") + e.what());
    }
    return out;
}

inline Json coefficients_to_json(std::span<const Coefficient> c) {
    Json list = Json::array();
    for (const auto& x : c) list.push_back({{"m", x.index}, {"c", x.value}});
    return {{"coeffs", list}};
}

// ---- norm estimates ----

inline Json estimate_to_json(const NormEstimate& e) {
    Json j{{"p", e.p}, {"value", e.value}, {"exact", e.exact()}};
    if (e.ci_low) j["ci_low"] = *e.ci_low;
    if (e.ci_high) j["ci_high"] = *e.ci_high;
    if (e.samples) j["samples"] = *e.samples;
    if (e.seed) j["seed"] = *e.seed;
    return j;
}

inline NormEngine parse_engine(const std::string& s) {
    if (s == "auto") return NormEngine::automatic;
    if (s == "dense") return NormEngine::dense;
    if (s == "even") return NormEngine::even;
    if (s == "mc") return NormEngine::monte_carlo;
    throw ConfigError("unknown norm engine '" + s + "' (auto, dense, even, mc)");
}

// ---- experiment configs ----

inline GeneratorSpec generator_from_json(const Json& j) {
    const std::string w = "corpus generator";
    detail::only_keys(j, {"kind", "count", "alpha", "terms", "block", "fraction", "depth", "delta", "cells"}, w);
    GeneratorSpec g;
    g.kind = detail::get<std::string>(j, "kind", w);
    g.count = detail::get_or<std::size_t>(j, "count", g.count, w);
    g.alpha = detail::get_or<double>(j, "alpha", g.alpha, w);
    g.terms = detail::get_or<std::size_t>(j, "terms", g.terms, w);
    g.block = detail::get_or<std::size_t>(j, "block", g.block, w);
    g.fraction = detail::get_or<double>(j, "fraction", g.fraction, w);
    g.depth = detail::get_or<std::size_t>(j, "depth", g.depth, w);
    g.delta = detail::get_or<double>(j, "delta", g.delta, w);
    g.cells = detail::get_or<std::uint64_t>(j, "cells", g.cells, w);
    return g;
}

inline std::vector<std::uint64_t> sizes_from_json(const Json& j) {
    if (j.is_array()) {
        try {
            return j.get<std::vector<std::uint64_t>>();
        } catch (const Json::exception& e) {
            throw ConfigError(std::string("config: bad 'sizes': ") + e.what());
        }
    }
    detail::only_keys(j, {"from", "to", "step"}, "sizes");
    const auto from = detail::get<std::uint64_t>(j, "from", "sizes");
    const auto to = detail::get<std::uint64_t>(j, "to", "sizes");
    const auto step = detail::get_or<std::uint64_t>(j, "step", 1, "sizes");
    if (step == 0 || from > to) throw ConfigError("sizes: need from <= to and step >= 1");
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = from; s <= to; s += step) out.push_back(s);
    return out;
}

inline ExperimentConfig config_from_json(const Json& j) {
    const std::string w = "config";
    detail::only_keys(j, {"plan", "p", "sizes", "trials", "seed", "threads", "engine", "samples", "corpus",
                          "max_length", "random_candidates", "exhaustive_limit", "thresholds", "description"},
                      w);
    ExperimentConfig cfg;
    if (j.contains("plan")) cfg.plan = schedule_from_json(j.at("plan"));
    if (j.contains("p")) {
        const Json& p = j.at("p");
        cfg.ps = p.is_array() ? detail::get<std::vector<double>>(j, "p", w) : std::vector<double>{detail::get<double>(j, "p", w)};
    }
    if (j.contains("sizes")) cfg.sizes = sizes_from_json(j.at("sizes"));
    cfg.trials = detail::get_or<std::size_t>(j, "trials", cfg.trials, w);
    cfg.seed = detail::get_or<std::uint64_t>(j, "seed", cfg.seed, w);
    cfg.threads = detail::get_or<unsigned>(j, "threads", cfg.threads, w);
    cfg.engine = parse_engine(detail::get_or<std::string>(j, "engine", "auto", w));
    cfg.samples = detail::get_or<std::size_t>(j, "samples", cfg.samples, w);
    cfg.max_length = detail::get_or<std::size_t>(j, "max_length", cfg.max_length, w);
    cfg.random_candidates = detail::get_or<std::size_t>(j, "random_candidates", cfg.random_candidates, w);
    cfg.exhaustive_limit = detail::get_or<std::uint64_t>(j, "exhaustive_limit", cfg.exhaustive_limit, w);
    cfg.thresholds = detail::get_or<std::map<std::string, double>>(j, "thresholds", {}, w);
    if (j.contains("corpus")) {
        const Json& c = j.at("corpus");
        detail::only_keys(c, {"generators"}, "corpus");
        const Json& gens = c.contains("generators") ? c.at("generators") : Json::array();
        if (!gens.is_array()) throw ConfigError("corpus: 'generators' must be an array");
        for (const auto& g : gens) cfg.corpus.generators.push_back(generator_from_json(g));
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) { return config_from_json(load_json(path)); }

// ---- CSV ----

inline std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

inline void write_results_csv(std::ostream& out, std::span<const ResultRecord> rows) {
    out << "experiment,plan,p,size_or_m,trial,value,ci_low,ci_high,exact,seed\n";
    for (const auto& r : rows) {
        out << csv_field(r.experiment) << ',' << csv_field(r.plan) << ',' << format_double(r.p) << ','
            << r.size_or_m << ',' << r.trial << ',' << format_double(r.value) << ','
            << (r.ci_low ? format_double(*r.ci_low) : "") << ',' << (r.ci_high ? format_double(*r.ci_high) : "")
            << ',' << (r.exact ? "true" : "false") << ',' << r.seed << '\n';
    }
}

inline void write_trace_csv(std::ostream& out, const ApproximantTrace& trace, std::span<const double> ps) {
    out << "m,selected,coefficient,residual_l2";
    for (double p : ps) {
        const auto tag = format_double(p);
        out << ",residual_p" << tag << ",approximant_p" << tag << ",exact_p" << tag;
    }
    out << '\n';
    for (const auto& s : trace.steps) {
        out << s.m << ',' << s.selected << ',' << format_double(s.coefficient) << ',' << format_double(s.residual_l2);
        for (std::size_t q = 0; q < ps.size(); ++q) {
            const bool exact = s.residual_norms[q].exact() && s.approximant_norms[q].exact();
            out << ',' << format_double(s.residual_norms[q].value) << ','
                << format_double(s.approximant_norms[q].value) << ',' << (exact ? "true" : "false");
        }
        out << '\n';
    }
}

} // namespace agb::io
