#pragma once

#include "splicebs/coverage_lab.hpp"
#include "splicebs/error.hpp"
#include "splicebs/fan.hpp"
#include "splicebs/models.hpp"
#include "splicebs/noise.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

namespace splicebs {

using json = nlohmann::json;

namespace detail {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorKind::config, std::string("bad value for '") + key + "'");
    }
}

}  // namespace detail

/**
 * Model configs:
 *   {"kind":"ar","p":1,"intercept":false}
 *   {"kind":"setar","d":1,"p_low":1,"p_high":1,"threshold":0.0 | "estimate"}
 */
inline ModelSpec model_spec_from_json(const json& j) {
    if (!j.is_object() || !j.contains("kind")) fail(ErrorKind::config, "model config needs a 'kind'");
    const auto kind = detail::get_or<std::string>(j, "kind", "");
    ModelSpec spec;
    if (kind == "ar") {
        spec = ModelSpec::ar(detail::get_or<int>(j, "p", 1), detail::get_or<bool>(j, "intercept", false));
    } else if (kind == "setar") {
        std::optional<double> threshold;
        if (j.contains("threshold")) {
            const auto& t = j.at("threshold");
            if (t.is_number()) threshold = t.get<double>();
            else if (!(t.is_string() && t.get<std::string>() == "estimate"))
                fail(ErrorKind::config, "threshold must be a number or \"estimate\"");
        }
        spec = ModelSpec::setar(detail::get_or<int>(j, "d", 1), detail::get_or<int>(j, "p_low", 1),
                                detail::get_or<int>(j, "p_high", 1), threshold,
                                detail::get_or<bool>(j, "intercept", false));
    } else {
        fail(ErrorKind::config, "unknown model kind '" + kind + "'");
    }
    spec.validate();
    return spec;
}

inline json to_json(const ModelSpec& spec) {
    if (spec.kind == ModelKind::ar) return {{"kind", "ar"}, {"p", spec.p}, {"intercept", spec.intercept}};
    json j = {{"kind", "setar"}, {"d", spec.delay}, {"p_low", spec.p_low}, {"p_high", spec.p_high},
              {"intercept", spec.intercept}};
    j["threshold"] = spec.threshold ? json(*spec.threshold) : json("estimate");
    return j;
}

/**
 * Concrete model with coefficients, for simulation:
 *   {"kind":"ar","coefficients":[-0.8],"intercept_value":0}
 *   {"kind":"setar","d":1,"threshold":0,"lower":[0.7],"upper":[0.3]}
 */
inline FittedModel true_model_from_json(const json& j) {
    const auto kind = detail::get_or<std::string>(j, "kind", "");
    if (kind == "ar") {
        if (!j.contains("coefficients")) fail(ErrorKind::config, "ar model needs 'coefficients'");
        return make_ar_model(detail::get_or<std::vector<double>>(j, "coefficients", {}),
                             detail::get_or<double>(j, "intercept_value", 0.0));
    }
    if (kind == "setar") {
        if (!j.contains("lower") || !j.contains("upper") || !j.contains("threshold"))
            fail(ErrorKind::config, "setar model needs 'lower', 'upper' and a numeric 'threshold'");
        return make_setar_model(detail::get_or<std::vector<double>>(j, "lower", {}),
                                detail::get_or<std::vector<double>>(j, "upper", {}),
                                detail::get_or<double>(j, "threshold", 0.0),
                                detail::get_or<int>(j, "d", 1));
    }
    fail(ErrorKind::config, "unknown model kind '" + kind + "'");
}

inline json to_json(const FittedModel& m) {
    json j;
    j["spec"] = to_json(m.spec);
    json regimes = json::array();
    const char* names[] = {"lower", "upper"};
    for (std::size_t i = 0; i < m.regimes.size(); ++i) {
        const auto& r = m.regimes[i];
        json jr = {{"coefficients", r.coefficients}, {"count", r.count}};
        if (m.spec.intercept) jr["intercept"] = r.intercept;
        if (m.spec.kind == ModelKind::setar) jr["regime"] = names[i];
        regimes.push_back(jr);
    }
    j["regimes"] = regimes;
    if (m.spec.kind == ModelKind::setar) j["threshold"] = m.threshold;
    j["sse"] = m.sse;
    return j;
}

inline NoiseSpec noise_from_json(const json& j) {
    NoiseSpec s;
    if (j.is_string()) {
        s.kind = parse_noise_kind(j.get<std::string>());
    } else if (j.is_object()) {
        s.kind = parse_noise_kind(detail::get_or<std::string>(j, "kind", "normal"));
        s.scale = detail::get_or<double>(j, "scale", 1.0);
    } else {
        fail(ErrorKind::config, "noise must be a name or an object");
    }
    if (!(s.scale > 0.0)) fail(ErrorKind::config, "noise scale must be positive");
    return s;
}

inline json to_json(const NoiseSpec& s) {
    if (s.scale == 1.0) return noise_name(s.kind);
    return {{"kind", noise_name(s.kind)}, {"scale", s.scale}};
}

inline json to_json(const PredictionInterval& iv) {
    return {{"k", iv.horizon}, {"L", iv.lower}, {"U", iv.upper}, {"length", iv.length()}};
}

/// Scenario plus study settings as stored in preset files.
struct CoveragePreset {
    std::string name;
    Scenario scenario;
    Method method = Method::sb;
    CoverageConfig config;
};

inline CoveragePreset preset_from_json(const json& j, std::string name = {}) {
    CoveragePreset p;
    p.name = std::move(name);
    p.scenario.model = parse_model_id(detail::get_or<std::string>(j, "model", "ar1"));
    p.scenario.noise = j.contains("noise") ? noise_from_json(j.at("noise")) : NoiseSpec{};
    p.scenario.n = detail::get_or<std::size_t>(j, "n", 100);
    p.scenario.seed = detail::get_or<std::uint64_t>(j, "seed", 1);
    p.method = parse_method(detail::get_or<std::string>(j, "method", "sb"));
    p.config.replicates = detail::get_or<int>(j, "B", 999);
    p.config.horizon = detail::get_or<int>(j, "K", 5);
    p.config.futures = detail::get_or<int>(j, "R", 100);
    p.config.reps = detail::get_or<int>(j, "reps", 100);
    p.config.level = detail::get_or<double>(j, "beta", 0.9);
    if (j.contains("fit")) p.config.fit_spec = model_spec_from_json(j.at("fit"));
    return p;
}

inline json to_json(const CoveragePreset& p) {
    json j = {{"model", model_name(p.scenario.model)},
              {"noise", to_json(p.scenario.noise)},
              {"n", p.scenario.n},
              {"seed", p.scenario.seed},
              {"method", method_name(p.method)},
              {"B", p.config.replicates},
              {"K", p.config.horizon},
              {"R", p.config.futures},
              {"reps", p.config.reps},
              {"beta", p.config.level}};
    j["fit"] = to_json(p.config.fit_spec ? *p.config.fit_spec : default_fit_spec(p.scenario.model));
    return j;
}

inline json to_json(const CoverageReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        rows.push_back({{"k", row.k},
                        {"mean_coverage", row.coverage.mean},
                        {"se_coverage", row.coverage.se.value_or(0.0)},
                        {"pct_se_coverage", CoverageRow::cv_pct(row.coverage)},
                        {"mean_length", row.length.mean},
                        {"se_length", row.length.se.value_or(0.0)},
                        {"pct_se_length", CoverageRow::cv_pct(row.length)}});
    }
    return {{"model", model_name(r.scenario.model)},
            {"noise", to_json(r.scenario.noise)},
            {"n", r.scenario.n},
            {"seed", r.scenario.seed},
            {"method", method_name(r.method)},
            {"B", r.config.replicates},
            {"K", r.config.horizon},
            {"R", r.config.futures},
            {"reps", r.config.reps},
            {"beta", r.config.level},
            {"failed_attempts", r.failed_attempts},
            {"mean_rejection_rate", r.mean_rejection_rate},
            {"max_rejection_rate", r.max_rejection_rate},
            {"rows", rows}};
}

inline std::string coverage_csv_header() {
    return "panel,model,noise,n,method,k,mean_coverage,se_coverage,pct_se_coverage,mean_length,"
           "se_length,pct_se_length,reps,B\n";
}

inline std::string coverage_csv_rows(const std::string& panel, const CoverageReport& r) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& row : r.rows) {
        os << panel << ',' << model_name(r.scenario.model) << ',' << noise_name(r.scenario.noise.kind)
           << ',' << r.scenario.n << ',' << method_name(r.method) << ',' << row.k << ','
           << row.coverage.mean << ',' << row.coverage.se.value_or(0.0) << ','
           << CoverageRow::cv_pct(row.coverage) << ',' << row.length.mean << ','
           << row.length.se.value_or(0.0) << ',' << CoverageRow::cv_pct(row.length) << ','
           << r.config.reps << ',' << r.config.replicates << '\n';
    }
    return os.str();
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::config, "cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        fail(ErrorKind::config, "'" + path + "': " + e.what());
    }
}

/// Inline JSON text, or a path to a JSON file.
inline json parse_json_arg(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\n");
    if (first != std::string::npos && text[first] == '{') {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            fail(ErrorKind::config, std::string("bad JSON: ") + e.what());
        }
    }
    return read_json_file(text);
}

/// FNV-1a 64 of the canonical text of a config.
inline std::string config_hash(const json& config) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace splicebs
