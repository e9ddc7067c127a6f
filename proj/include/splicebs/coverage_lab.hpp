#pragma once

#include "splicebs/backcast_bootstrap.hpp"
#include "splicebs/error.hpp"
#include "splicebs/fan.hpp"
#include "splicebs/models.hpp"
#include "splicebs/noise.hpp"
#include "splicebs/parallel.hpp"
#include "splicebs/random.hpp"
#include "splicebs/series.hpp"
#include "splicebs/splice_bootstrap.hpp"

#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace splicebs {

enum class TrueModelId { ar1, setar211 };

/// y_t = -0.8 y_{t-1} + e_t
inline FittedModel ar1_truth() { return make_ar_model({-0.8}); }

/// y_t = 0.7 y_{t-1} + e_t if y_{t-1} <= 0, 0.3 y_{t-1} + e_t otherwise
inline FittedModel setar211_truth() { return make_setar_model({0.7}, {0.3}, 0.0, 1); }

inline FittedModel truth_for(TrueModelId id) {
    return id == TrueModelId::ar1 ? ar1_truth() : setar211_truth();
}

inline std::string model_name(TrueModelId id) { return id == TrueModelId::ar1 ? "ar1" : "setar211"; }

inline TrueModelId parse_model_id(const std::string& name) {
    if (name == "ar1") return TrueModelId::ar1;
    if (name == "setar211" || name == "setar") return TrueModelId::setar211;
    fail(ErrorKind::config, "unknown model id '" + name + "'");
}

/// Structure fitted to each realization: the exact form of the true model.
inline ModelSpec default_fit_spec(TrueModelId id) {
    return id == TrueModelId::ar1 ? ModelSpec::ar(1) : ModelSpec::setar(1, 1, 1, std::nullopt);
}

enum class Method {
    sb,        ///< splice bootstrap
    backcast,  ///< backward-representation bootstrap (AR only)
    rigged,    ///< true model and true noise, no fitting
};

inline std::string method_name(Method m) {
    switch (m) {
        case Method::sb: return "sb";
        case Method::backcast: return "backcast";
        case Method::rigged: return "rigged";
    }
    return "sb";
}

inline Method parse_method(const std::string& name) {
    if (name == "sb") return Method::sb;
    if (name == "backcast") return Method::backcast;
    if (name == "rigged") return Method::rigged;
    fail(ErrorKind::config, "unknown coverage method '" + name + "'");
}

struct Scenario {
    TrueModelId model = TrueModelId::ar1;
    NoiseSpec noise;
    std::size_t n = 100;
    std::uint64_t seed = 1;
};

struct CoverageConfig {
    int replicates = 999;  ///< B per interval
    int horizon = 5;
    int futures = 100;  ///< R true futures per replication
    int reps = 100;
    double level = 0.9;
    std::size_t burn_in = 1000;
    std::optional<ModelSpec> fit_spec;  ///< defaults to the true model's form
    SpliceNorm norm = SpliceNorm::sum_abs;
    bool random_start = true;
    int retries = 5;  ///< fresh-seed attempts per failing replication
    unsigned threads = 1;
};

/// R x K matrix of independent true futures from a fixed tail.
inline std::vector<std::vector<double>> true_future_draws(const FittedModel& truth,
                                                          const NoiseSpec& noise,
                                                          std::span<const double> last_p,
                                                          int horizon, int count, RandomStream& rng) {
    std::vector<std::vector<double>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int r = 0; r < count; ++r) out.push_back(forecast_path(truth, last_p, horizon, noise, rng));
    return out;
}

/// Outcome of one simulate / interval / score cycle.
struct Replication {
    std::vector<PredictionInterval> intervals;
    std::vector<double> coverage;  ///< fraction of the R futures inside, per k
    double rejection_rate = 0.0;
    int attempts = 1;
};

struct CoverageRow {
    int k = 1;
    Summary coverage;
    Summary length;

    /// 100 * sd / mean: the percentage-scale spread reported beside the means.
    static double cv_pct(const Summary& s) {
        return s.sd && s.mean != 0.0 ? 100.0 * *s.sd / s.mean : 0.0;
    }
};

struct CoverageReport {
    Scenario scenario;
    Method method = Method::sb;
    CoverageConfig config;
    std::vector<CoverageRow> rows;
    std::vector<Replication> replications;
    std::size_t failed_attempts = 0;
    double mean_rejection_rate = 0.0;
    double max_rejection_rate = 0.0;
};

namespace detail {

inline ForecastFan rigged_fan(const FittedModel& truth, const NoiseSpec& noise,
                              const TimeSeries& series, const CoverageConfig& cfg,
                              const RandomStream& rng) {
    const auto last_p = series.tail(static_cast<std::size_t>(truth.max_lag()));
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(cfg.replicates));
    for (int j = 0; j < cfg.replicates; ++j) {
        auto stream = rng.child(static_cast<std::uint64_t>(j));
        rows.push_back(forecast_path(truth, last_p, cfg.horizon, noise, stream));
    }
    return assemble_fan(std::move(rows), cfg.horizon, last_p, truth, cfg.level, 0);
}

inline Replication run_replication(const Scenario& sc, Method method, const CoverageConfig& cfg,
                                   const RandomStream& rng) {
    const auto truth = truth_for(sc.model);
    const auto lag = static_cast<std::size_t>(truth.max_lag());
    const std::vector<double> zero(lag, 0.0);

    auto series_stream = rng.child(0);
    const auto series = simulate(truth, sc.noise, sc.n, cfg.burn_in, zero, series_stream);
    auto future_stream = rng.child(1);
    const auto last_p = series.tail(lag);
    const auto futures =
        true_future_draws(truth, sc.noise, last_p, cfg.horizon, cfg.futures, future_stream);

    SpliceConfig sb;
    sb.replicates = cfg.replicates;
    sb.burn_in = cfg.burn_in;
    sb.horizon = cfg.horizon;
    sb.level = cfg.level;
    sb.norm = cfg.norm;
    sb.random_start = cfg.random_start;
    const ModelSpec spec = cfg.fit_spec ? *cfg.fit_spec : default_fit_spec(sc.model);
    const auto method_stream = rng.child(2);

    ForecastFan fan;
    switch (method) {
        case Method::sb: fan = sb_predictive(series, spec, sb, method_stream); break;
        case Method::backcast: fan = ts_predictive(series, spec, sb, method_stream); break;
        case Method::rigged: fan = rigged_fan(truth, sc.noise, series, cfg, method_stream); break;
    }

    Replication rep;
    rep.intervals = fan.intervals;
    rep.rejection_rate = fan.rejection_rate();
    for (int k = 1; k <= cfg.horizon; ++k) {
        const auto& iv = fan.intervals[static_cast<std::size_t>(k - 1)];
        int inside = 0;
        for (const auto& path : futures) {
            const double y = path[static_cast<std::size_t>(k - 1)];
            if (iv.lower <= y && y <= iv.upper) ++inside;
        }
        rep.coverage.push_back(static_cast<double>(inside) / static_cast<double>(cfg.futures));
    }
    return rep;
}

}  // namespace detail

/**
 * Conditional coverage study for one scenario.
 *
 * Each replication simulates a length-n realization of the true model
 * (burn-in from the zero state), draws R true futures conditional on its own
 * tail, builds the method's interval fan from the realization and records
 * the fraction of futures inside each interval. A replication whose method
 * fails is retried on a fresh stream up to cfg.retries times.
 */
inline CoverageReport run_scenario(const Scenario& sc, Method method, const CoverageConfig& cfg) {
    if (method == Method::backcast && sc.model != TrueModelId::ar1)
        fail(ErrorKind::config, "backcast applies to AR models only");
    if (cfg.reps < 1 || cfg.futures < 1 || cfg.horizon < 1 || cfg.replicates < 1)
        fail(ErrorKind::config, "coverage counts must be positive");

    const RandomStream master(sc.seed, 0);
    const auto reps = static_cast<std::size_t>(cfg.reps);
    std::vector<Replication> out(reps);
    std::vector<std::size_t> failures(reps, 0);
    parallel_for(reps, cfg.threads, [&](std::size_t i) {
        const auto base = master.child(i);
        for (int attempt = 0;; ++attempt) {
            try {
                out[i] = detail::run_replication(sc, method, cfg,
                                                 base.child(static_cast<std::uint64_t>(attempt)));
                out[i].attempts = attempt + 1;
                return;
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::config || attempt >= cfg.retries) throw;
                ++failures[i];
            }
        }
    });

    CoverageReport report;
    report.scenario = sc;
    report.method = method;
    report.config = cfg;
    for (auto f : failures) report.failed_attempts += f;
    for (int k = 1; k <= cfg.horizon; ++k) {
        std::vector<double> cov, len;
        for (const auto& r : out) {
            cov.push_back(r.coverage[static_cast<std::size_t>(k - 1)]);
            len.push_back(r.intervals[static_cast<std::size_t>(k - 1)].length());
        }
        report.rows.push_back({k, summarize(cov), summarize(len)});
    }
    double sum = 0.0;
    for (const auto& r : out) {
        sum += r.rejection_rate;
        report.max_rejection_rate = std::max(report.max_rejection_rate, r.rejection_rate);
    }
    report.mean_rejection_rate = sum / static_cast<double>(reps);
    report.replications = std::move(out);
    return report;
}

inline std::string panel_title(const CoverageReport& r) {
    std::ostringstream os;
    os << (r.scenario.model == TrueModelId::ar1 ? "AR(1)" : "SETAR(2,1,1)") << " "
       << noise_name(r.scenario.noise.kind) << " noise, n=" << r.scenario.n << ", method "
       << method_name(r.method) << ", reps=" << r.config.reps << ", B=" << r.config.replicates;
    return os.str();
}

/**
 * Plain-text panels: k, mean coverage (%), %SE of coverage, mean length,
 * %SE of length. The %SE columns are 100 * sd / mean across replications.
 */
inline std::string emit_table(const std::vector<CoverageReport>& reports) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-6s %12s %10s %12s %10s\n", "k", "Mean beta*", "%SE(b*)",
                  "Mean Len", "%SE(Len)");
    os << line;
    for (const auto& r : reports) {
        os << panel_title(r) << '\n';
        for (const auto& row : r.rows) {
            std::snprintf(line, sizeof line, "%-6d %12.1f %10.0f %12.1f %10.0f\n", row.k,
                          100.0 * row.coverage.mean, CoverageRow::cv_pct(row.coverage),
                          row.length.mean, CoverageRow::cv_pct(row.length));
            os << line;
        }
    }
    return os.str();
}

}  // namespace splicebs
