#pragma once

#include "splicebs/error.hpp"
#include "splicebs/fan.hpp"
#include "splicebs/models.hpp"
#include "splicebs/noise.hpp"
#include "splicebs/parallel.hpp"
#include "splicebs/random.hpp"
#include "splicebs/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace splicebs {

/// Aggregate used to score a candidate splice position.
enum class SpliceNorm { sum_abs, max_abs };

struct SpliceConfig {
    int replicates = 100;          ///< B accepted replicates
    std::size_t burn_in = 1000;    ///< m
    std::optional<std::size_t> long_length;  ///< l; defaults to n + max(1000, 4n)
    int horizon = 5;
    double level = 0.9;
    int rejections_per_replicate = 50;  ///< total budget is this times B
    SpliceNorm norm = SpliceNorm::sum_abs;
    bool random_start = true;  ///< start from a random data window instead of the first one
    unsigned threads = 1;

    std::size_t long_length_for(std::size_t n) const {
        return long_length ? *long_length : n + std::max<std::size_t>(1000, 4 * n);
    }
};

struct SplicePoint {
    std::size_t index = 0;  ///< 0-based position of the first matched value
    double discrepancy = 0.0;
};

/**
 * Position r minimizing the mismatch between sim[r..r+p) and last_p.
 *
 * Admissible r have at least `min_history` values before them and room for
 * all p matched values. Ties go to the smallest r.
 */
inline SplicePoint find_splice_point(std::span<const double> sim, std::span<const double> last_p,
                                     std::size_t min_history,
                                     SpliceNorm norm = SpliceNorm::sum_abs) {
    const std::size_t p = last_p.size();
    if (p == 0 || sim.size() < p || min_history > sim.size() - p)
        fail(ErrorKind::data, "series too short for splice search");
    SplicePoint best{0, std::numeric_limits<double>::infinity()};
    for (std::size_t r = min_history; r + p <= sim.size(); ++r) {
        double score = 0.0;
        for (std::size_t j = 0; j < p && score < best.discrepancy; ++j) {
            const double dev = std::abs(last_p[j] - sim[r + j]);
            score = norm == SpliceNorm::sum_abs ? score + dev : std::max(score, dev);
        }
        if (score < best.discrepancy) best = {r, score};
    }
    return best;
}

/// The n-p simulated values preceding position r followed by last_p.
inline TimeSeries make_replicate(std::span<const double> sim, std::size_t r,
                                 std::span<const double> last_p, std::size_t n) {
    const std::size_t p = last_p.size();
    if (p > n) fail(ErrorKind::data, "conditioning tail longer than the series");
    const std::size_t history = n - p;
    if (r < history || r > sim.size()) fail(ErrorKind::data, "insufficient history before splice point");
    std::vector<double> rep(sim.begin() + static_cast<std::ptrdiff_t>(r - history),
                            sim.begin() + static_cast<std::ptrdiff_t>(r));
    rep.insert(rep.end(), last_p.begin(), last_p.end());
    return TimeSeries(std::move(rep));
}

/// One accepted splice replicate and its forecast row.
struct SpliceResult {
    TimeSeries replicate;
    SplicePoint splice;
    FittedModel refit;
    std::vector<double> forecast;
    std::size_t rejections = 0;
};

/**
 * Builds one accepted replicate: simulate a long path from the fitted model
 * with the original residual pool, splice the data tail at the best match,
 * refit, and forecast from the data tail with the refit's own residual pool.
 * Refits that fail or change form are discarded and redrawn from the same
 * stream.
 */
inline SpliceResult splice_replicate(const TimeSeries& series, const FittedModel& model,
                                     const ResidualPool& pool, const SpliceConfig& cfg,
                                     RandomStream& rng) {
    const std::size_t n = series.size();
    const auto lag = static_cast<std::size_t>(model.max_lag());
    const auto last_p = series.tail(lag);
    const std::size_t m = cfg.burn_in;
    const std::size_t l = cfg.long_length_for(n);
    if (l < n) fail(ErrorKind::config, "long simulation must be longer than the series");
    const auto budget = static_cast<std::size_t>(cfg.rejections_per_replicate) *
                        static_cast<std::size_t>(std::max(cfg.replicates, 1));

    SpliceResult out;
    for (;;) {
        const std::size_t start = cfg.random_start ? rng.index(n - lag + 1) : 0;
        const auto init = series.span().subspan(start, lag);
        const auto path = simulate_path(model, pool, m + l, init, rng);
        const std::span<const double> post(path.data() + m, l);
        const auto splice = find_splice_point(post, last_p, n - lag, cfg.norm);
        auto replicate = make_replicate(post, splice.index, last_p, n);

        std::optional<FittedModel> refit;
        try {
            refit = fit_model(replicate, model.spec);
        } catch (const Error&) {
        }
        if (refit && validate_refit(model, *refit)) {
            const auto refit_pool = residual_pool(*refit);
            out.forecast = forecast_path(*refit, last_p, cfg.horizon, refit_pool, rng);
            out.replicate = std::move(replicate);
            out.splice = splice;
            out.refit = std::move(*refit);
            return out;
        }
        if (++out.rejections > budget)
            fail(ErrorKind::numerical, "model form unstable under resampling (rejection rate 1.0)");
    }
}

namespace detail {

inline void check_rejection_budget(std::size_t rejections, std::size_t accepted, int per_replicate) {
    if (rejections > static_cast<std::size_t>(per_replicate) * accepted) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.3f",
                      static_cast<double>(rejections) / static_cast<double>(rejections + accepted));
        fail(ErrorKind::numerical,
             std::string("model form unstable under resampling (rejection rate ") + buf + ")");
    }
}

}  // namespace detail

/// Splice bootstrap fan around an already fitted model.
inline ForecastFan sb_predictive(const TimeSeries& series, const FittedModel& model,
                                 const SpliceConfig& cfg, const RandomStream& rng) {
    if (cfg.replicates < 1) fail(ErrorKind::config, "replicate count must be positive");
    if (cfg.horizon < 1) fail(ErrorKind::config, "horizon must be at least 1");
    if (!(cfg.level > 0.0 && cfg.level < 1.0)) fail(ErrorKind::config, "level must lie in (0,1)");
    const auto pool = residual_pool(model);
    const auto B = static_cast<std::size_t>(cfg.replicates);

    std::vector<std::vector<double>> rows(B);
    std::vector<std::size_t> rejected(B, 0);
    parallel_for(B, cfg.threads, [&](std::size_t j) {
        auto stream = rng.child(j);
        auto result = splice_replicate(series, model, pool, cfg, stream);
        rows[j] = std::move(result.forecast);
        rejected[j] = result.rejections;
    });
    std::size_t rejections = 0;
    for (auto r : rejected) rejections += r;
    detail::check_rejection_budget(rejections, B, cfg.rejections_per_replicate);
    return assemble_fan(std::move(rows), cfg.horizon,
                        series.tail(static_cast<std::size_t>(model.max_lag())), model, cfg.level,
                        rejections);
}

/// Fits `spec` to the series, then runs the splice bootstrap.
inline ForecastFan sb_predictive(const TimeSeries& series, const ModelSpec& spec,
                                 const SpliceConfig& cfg, const RandomStream& rng) {
    return sb_predictive(series, fit_model(series, spec), cfg, rng);
}

}  // namespace splicebs
