#pragma once

#include "splicebs/backcast_bootstrap.hpp"
#include "splicebs/ck_oracle.hpp"
#include "splicebs/coverage_lab.hpp"
#include "splicebs/csv.hpp"
#include "splicebs/error.hpp"
#include "splicebs/json_io.hpp"
#include "splicebs/models.hpp"
#include "splicebs/splice_bootstrap.hpp"
#include "splicebs/version.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace splicebs::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_data = 3;
inline constexpr int exit_numerical = 4;

inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return exit_config;
        case ErrorKind::data: return exit_data;
        case ErrorKind::numerical: return exit_numerical;
    }
    return exit_numerical;
}

/// Parsed command line. Unset optionals fall back to per-command defaults.
struct RunConfig {
    std::string command;
    std::optional<std::string> input;
    std::optional<std::string> output;
    std::optional<std::string> model;
    std::optional<std::string> method;
    std::optional<std::string> preset;
    std::optional<std::string> noise;
    std::optional<std::string> format;
    std::optional<int> replicates;
    std::optional<int> horizon;
    std::optional<double> beta;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::optional<std::size_t> n;
    unsigned threads = 1;
    bool grid = false;
    std::string presets_dir = "presets";
};

/// Text for stdout (or the --output file) plus any extra files to write.
struct CommandOutput {
    std::string text;
    std::vector<std::pair<std::string, std::string>> files;
    int status = exit_ok;
    std::string error;
};

namespace detail {

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::data, "cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

inline TimeSeries load_series(const RunConfig& cfg) {
    if (!cfg.input) fail(ErrorKind::config, "--input is required");
    std::istringstream in(read_text(*cfg.input));
    return read_series_csv(in);
}

inline std::string input_hash(const RunConfig& cfg) {
    return cfg.input ? config_hash(json(read_text(*cfg.input))) : std::string("none");
}

inline json model_json(const RunConfig& cfg) {
    return cfg.model ? parse_json_arg(*cfg.model) : json{{"kind", "ar"}, {"p", 1}, {"intercept", false}};
}

inline json stamp(json body, const json& canonical, std::uint64_t seed) {
    body["version"] = version;
    body["seed"] = seed;
    body["config_hash"] = config_hash(canonical);
    return body;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct SimulationPreset {
    TrueModelId model;
    NoiseKind noise;
};

inline SimulationPreset simulation_preset(const std::string& name) {
    const auto dash = name.find('-');
    if (dash == std::string::npos) fail(ErrorKind::config, "unknown preset '" + name + "'");
    const auto model = name.substr(0, dash);
    const auto noise = name.substr(dash + 1);
    if (model != "ar1" && model != "setar") fail(ErrorKind::config, "unknown preset '" + name + "'");
    if (noise != "normal" && noise != "exp" && noise != "mixture")
        fail(ErrorKind::config, "unknown preset '" + name + "'");
    return {model == "ar1" ? TrueModelId::ar1 : TrueModelId::setar211, parse_noise_kind(noise)};
}

}  // namespace detail

/**
 * `simulate`: a series from a named preset (ar1|setar)-(normal|exp|mixture)
 * or from an explicit model with coefficients, after a 1000-step burn-in
 * from the zero state.
 */
inline CommandOutput cmd_simulate(const RunConfig& cfg) {
    const std::uint64_t seed = cfg.seed.value_or(1);
    const std::size_t n = cfg.n.value_or(100);
    if (n < 1) fail(ErrorKind::config, "--n must be positive");
    FittedModel truth;
    NoiseSpec noise;
    json canonical = {{"command", "simulate"}, {"n", n}, {"seed", seed}, {"burn_in", 1000}};
    if (cfg.preset) {
        const auto p = detail::simulation_preset(*cfg.preset);
        truth = truth_for(p.model);
        noise.kind = p.noise;
        canonical["preset"] = *cfg.preset;
    } else if (cfg.model) {
        const auto mj = parse_json_arg(*cfg.model);
        truth = true_model_from_json(mj);
        canonical["model"] = mj;
        if (cfg.noise) noise = noise_from_json(json(*cfg.noise));
        else if (mj.contains("noise")) noise = noise_from_json(mj.at("noise"));
        canonical["noise"] = to_json(noise);
    } else {
        fail(ErrorKind::config, "simulate needs --preset or --model");
    }
    RandomStream rng(seed, 0);
    const std::vector<double> zero(static_cast<std::size_t>(truth.max_lag()), 0.0);
    const auto series = simulate(truth, noise, n, 1000, zero, rng);

    CommandOutput out;
    if (cfg.format.value_or("csv") == "json") {
        json body = {{"command", "simulate"}, {"n", n}, {"values", series.values()}};
        out.text = detail::dump(detail::stamp(body, canonical, seed));
    } else {
        out.text = write_series_csv(series, {std::string("splicebs ") + version + " simulate",
                                             "seed=" + std::to_string(seed) +
                                                 " config_hash=" + config_hash(canonical)});
    }
    return out;
}

/// `fit`: coefficients, threshold, regime counts and residual summary.
inline CommandOutput cmd_fit(const RunConfig& cfg) {
    const auto series = detail::load_series(cfg);
    const auto mj = detail::model_json(cfg);
    const auto spec = model_spec_from_json(mj);
    const auto model = fit_model(series, spec);
    const std::uint64_t seed = cfg.seed.value_or(1);
    const json canonical = {{"command", "fit"}, {"model", to_json(spec)}, {"input", detail::input_hash(cfg)}};

    const auto s = summarize(model.residuals);
    json body = {{"command", "fit"}, {"n", series.size()}, {"model", to_json(model)}};
    body["residuals"] = {{"count", s.count}, {"mean", s.mean}, {"sd", s.sd ? json(*s.sd) : json(nullptr)}};
    return {detail::dump(detail::stamp(body, canonical, seed)), {}, exit_ok, {}};
}

/// `interval`: per-horizon prediction intervals by sb, backcast or ck.
inline CommandOutput cmd_interval(const RunConfig& cfg) {
    const auto series = detail::load_series(cfg);
    const auto mj = detail::model_json(cfg);
    const auto spec = model_spec_from_json(mj);
    const std::string method = cfg.method.value_or("sb");
    const int B = cfg.replicates.value_or(100);
    const int K = cfg.horizon.value_or(5);
    const double beta = cfg.beta.value_or(0.9);
    const std::uint64_t seed = cfg.seed.value_or(1);
    if (method != "sb" && method != "backcast" && method != "ck")
        fail(ErrorKind::config, "unknown method '" + method + "'");
    if (method == "backcast" && spec.kind != ModelKind::ar)
        fail(ErrorKind::config, "backcast applies to AR models only");
    if (series.size() <= 2 * static_cast<std::size_t>(spec.order()))
        fail(ErrorKind::data, "series too short: need n > 2p");

    json canonical = {{"command", "interval"}, {"method", method}, {"model", to_json(spec)},
                      {"K", K}, {"beta", beta}, {"seed", seed}, {"input", detail::input_hash(cfg)}};
    json body = {{"command", "interval"}, {"method", method}, {"beta", beta}};
    std::vector<PredictionInterval> intervals;
    FittedModel model;
    double rejection_rate = 0.0;

    if (method == "ck") {
        model = fit_model(series, spec);
        if (model.max_lag() != 1) fail(ErrorKind::config, "ck needs a lag-1 model");
        NoiseSpec noise;
        bool scale_given = false;
        if (mj.contains("noise")) {
            noise = noise_from_json(mj.at("noise"));
            scale_given = mj.at("noise").is_object() && mj.at("noise").contains("scale");
        }
        if (!scale_given) {
            // scale the unit law to the fitted residual spread
            NoiseSpec unit = noise;
            unit.scale = 1.0;
            noise.scale = sample_sd(model.residuals) / noise_sd(unit);
        }
        const double y_n = series.values().back();
        const auto grids = ck_densities(model, noise, y_n, K, default_grid(model, noise, y_n, K));
        for (const auto& g : grids) intervals.push_back(ck_interval(g, beta));
        canonical["noise"] = to_json(noise);
        body["noise"] = to_json(noise);
        body["B"] = nullptr;
    } else {
        canonical["B"] = B;
        SpliceConfig sc;
        sc.replicates = B;
        sc.horizon = K;
        sc.level = beta;
        sc.threads = cfg.threads;
        const RandomStream rng(seed, 0);
        const auto fan = method == "sb" ? sb_predictive(series, spec, sc, rng)
                                        : ts_predictive(series, spec, sc, rng);
        intervals = fan.intervals;
        model = fan.model;
        rejection_rate = fan.rejection_rate();
        body["B"] = B;
    }

    const auto last_p = series.tail(static_cast<std::size_t>(model.max_lag()));
    const auto point = plugin_forecast(model, last_p, K);
    body["model"] = to_json(model);
    body["last_p"] = last_p;
    body["rejection_rate"] = rejection_rate;
    json horizons = json::array();
    for (std::size_t i = 0; i < intervals.size(); ++i) {
        json h = to_json(intervals[i]);
        h["point_forecast"] = point[i];
        horizons.push_back(h);
    }
    body["horizons"] = horizons;
    body = detail::stamp(body, canonical, seed);

    CommandOutput out;
    if (cfg.format.value_or("json") == "csv") {
        std::ostringstream os;
        os << "# splicebs " << version << " interval method=" << method << " seed=" << seed
           << " config_hash=" << body["config_hash"].get<std::string>() << '\n';
        os << "k,point_forecast,L,U,length\n";
        for (std::size_t i = 0; i < intervals.size(); ++i)
            os << intervals[i].horizon << ',' << format_double(point[i]) << ','
               << format_double(intervals[i].lower) << ',' << format_double(intervals[i].upper)
               << ',' << format_double(intervals[i].length()) << '\n';
        out.text = os.str();
    } else {
        out.text = detail::dump(body);
    }
    return out;
}

/// Names of the 18 replication presets: 2 models x 3 noises x 3 sizes.
inline std::vector<std::string> grid_preset_names() {
    std::vector<std::string> names;
    for (const char* noise : {"normal", "exp", "mixture"})
        for (int n : {25, 50, 100}) names.push_back(std::string("ar1_") + noise + "_" + std::to_string(n));
    for (const char* noise : {"normal", "exp", "mixture"})
        for (int n : {100, 250, 500}) names.push_back(std::string("setar_") + noise + "_" + std::to_string(n));
    return names;
}

inline CoveragePreset load_preset(const std::string& dir, const std::string& name) {
    const auto path = std::filesystem::path(dir) / (name + ".json");
    if (!std::filesystem::exists(path)) fail(ErrorKind::config, "unknown preset '" + name + "'");
    return preset_from_json(read_json_file(path.string()), name);
}

/**
 * `coverage`: runs one preset (or the full grid) and emits JSON, CSV and
 * table panels. A failing panel is recorded and the rest still run.
 */
inline CommandOutput cmd_coverage(const RunConfig& cfg) {
    std::vector<std::string> names;
    if (cfg.grid) names = grid_preset_names();
    else if (cfg.preset) names.push_back(*cfg.preset);
    else fail(ErrorKind::config, "coverage needs --preset or --grid");

    std::vector<CoveragePreset> presets;
    for (const auto& name : names) {
        auto p = load_preset(cfg.presets_dir, name);
        if (cfg.replicates) p.config.replicates = *cfg.replicates;
        if (cfg.reps) p.config.reps = *cfg.reps;
        if (cfg.horizon) p.config.horizon = *cfg.horizon;
        if (cfg.beta) p.config.level = *cfg.beta;
        if (cfg.seed) p.scenario.seed = *cfg.seed;
        if (cfg.method) p.method = parse_method(*cfg.method);
        p.config.threads = cfg.threads;
        presets.push_back(std::move(p));
    }

    json canonical = {{"command", "coverage"}, {"presets", json::array()}};
    for (const auto& p : presets) canonical["presets"].push_back(to_json(p));

    json panels = json::array();
    std::vector<CoverageReport> reports;
    std::string csv = coverage_csv_header();
    CommandOutput out;
    for (const auto& p : presets) {
        try {
            auto report = run_scenario(p.scenario, p.method, p.config);
            json panel = to_json(report);
            panel["panel"] = p.name;
            panels.push_back(panel);
            csv += coverage_csv_rows(p.name, report);
            reports.push_back(std::move(report));
        } catch (const Error& e) {
            panels.push_back({{"panel", p.name}, {"error", e.what()}});
            if (out.status == exit_ok) {
                out.status = exit_code_for(e.kind());
                out.error = p.name + ": " + e.what();
            }
        }
    }
    const std::uint64_t seed = presets.empty() ? 0 : presets.front().scenario.seed;
    const json body = detail::stamp({{"command", "coverage"}, {"panels", panels}}, canonical, seed);
    const std::string stamp_line = std::string("# splicebs ") + version + " coverage config_hash=" +
                                   body["config_hash"].get<std::string>() + '\n';
    const std::string json_text = detail::dump(body);
    const std::string csv_text = stamp_line + csv;

    if (cfg.output) {
        out.files.emplace_back(*cfg.output + ".json", json_text);
        out.files.emplace_back(*cfg.output + ".csv", csv_text);
    }
    const auto format = cfg.format.value_or("json");
    if (format == "csv") out.text = csv_text;
    else if (format == "table") out.text = stamp_line + emit_table(reports);
    else out.text = json_text;
    return out;
}

/// Dispatches on cfg.command, converting library errors into exit codes.
inline CommandOutput run(const RunConfig& cfg) {
    try {
        if (cfg.format && *cfg.format != "json" && *cfg.format != "csv" && *cfg.format != "table")
            fail(ErrorKind::config, "unknown format '" + *cfg.format + "'");
        if (cfg.command == "simulate") return cmd_simulate(cfg);
        if (cfg.command == "fit") return cmd_fit(cfg);
        if (cfg.command == "interval") return cmd_interval(cfg);
        if (cfg.command == "coverage") return cmd_coverage(cfg);
        fail(ErrorKind::config, "unknown command '" + cfg.command + "'");
    } catch (const Error& e) {
        CommandOutput out;
        out.status = exit_code_for(e.kind());
        out.error = e.what();
        return out;
    }
}

}  // namespace splicebs::cli
