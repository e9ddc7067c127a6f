#pragma once

#include "splicebs/error.hpp"
#include "splicebs/fan.hpp"
#include "splicebs/models.hpp"
#include "splicebs/noise.hpp"
#include "splicebs/parallel.hpp"
#include "splicebs/random.hpp"
#include "splicebs/series.hpp"
#include "splicebs/splice_bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace splicebs {

/// y_t = intercept + sum_j phi_b[j] y_{t+1+j} + e_t, fitted by OLS.
struct BackwardModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<double> residuals;
    ResidualPool pool;
};

inline TimeSeries reversed(const TimeSeries& series) {
    std::vector<double> v(series.values().rbegin(), series.values().rend());
    return TimeSeries(std::move(v));
}

/// Backward AR(p): the forward fit of the time-reversed series.
inline BackwardModel fit_backward_ar(const TimeSeries& series, int p, bool intercept = false) {
    auto fit = fit_ar(reversed(series), p, intercept);
    BackwardModel b;
    b.intercept = fit.regimes[0].intercept;
    b.coefficients = fit.regimes[0].coefficients;
    // reversed fit lists residuals from t = n-p down to 1; store them in time order
    b.residuals.assign(fit.residuals.rbegin(), fit.residuals.rend());
    b.pool = make_residual_pool(b.residuals, series.size(), static_cast<std::size_t>(p));
    return b;
}

/// Length-n replicate generated backward from the fixed tail.
inline TimeSeries backcast_replicate(const BackwardModel& backward, std::span<const double> last_p,
                                     std::size_t n, RandomStream& rng) {
    const std::size_t p = last_p.size();
    std::vector<double> y(n);
    std::copy(last_p.begin(), last_p.end(), y.end() - static_cast<std::ptrdiff_t>(p));
    for (std::size_t t = n - p; t-- > 0;) {
        double v = backward.intercept + draw(backward.pool, rng);
        for (std::size_t j = 0; j < backward.coefficients.size(); ++j)
            v += backward.coefficients[j] * y[t + 1 + j];
        if (!std::isfinite(v) || std::abs(v) > divergence_bound)
            fail(ErrorKind::numerical, "simulation diverged at index " + std::to_string(t));
        y[t] = v;
    }
    return TimeSeries(std::move(y));
}

/**
 * Backward-representation bootstrap for AR(p): replicates are generated
 * backward from the data tail, a forward AR(p) is refitted on each, and
 * forecasts use the refitted coefficients with the original forward pool.
 * Uses cfg.replicates, horizon, level, rejections_per_replicate and threads.
 */
inline ForecastFan ts_predictive(const TimeSeries& series, const ModelSpec& spec,
                                 const SpliceConfig& cfg, const RandomStream& rng) {
    if (spec.kind != ModelKind::ar) fail(ErrorKind::config, "backcast applies to AR models only");
    if (cfg.replicates < 1) fail(ErrorKind::config, "replicate count must be positive");
    if (cfg.horizon < 1) fail(ErrorKind::config, "horizon must be at least 1");
    const auto forward = fit_ar(series, spec.p, spec.intercept);
    const auto forward_pool = residual_pool(forward);
    const auto backward = fit_backward_ar(series, spec.p, spec.intercept);
    const auto p = static_cast<std::size_t>(spec.p);
    const auto last_p = series.tail(p);
    const auto B = static_cast<std::size_t>(cfg.replicates);
    const std::size_t budget = static_cast<std::size_t>(cfg.rejections_per_replicate) * B;

    std::vector<std::vector<double>> rows(B);
    std::vector<std::size_t> rejected(B, 0);
    parallel_for(B, cfg.threads, [&](std::size_t j) {
        auto stream = rng.child(j);
        for (;;) {
            const auto rep = backcast_replicate(backward, last_p, series.size(), stream);
            std::optional<FittedModel> refit;
            try {
                refit = fit_ar(rep, spec.p, spec.intercept);
            } catch (const Error&) {
            }
            if (refit) {
                rows[j] = forecast_path(*refit, last_p, cfg.horizon, forward_pool, stream);
                return;
            }
            if (++rejected[j] > budget)
                fail(ErrorKind::numerical, "model form unstable under resampling (rejection rate 1.0)");
        }
    });
    std::size_t rejections = 0;
    for (auto r : rejected) rejections += r;
    detail::check_rejection_budget(rejections, B, cfg.rejections_per_replicate);
    return assemble_fan(std::move(rows), cfg.horizon, last_p, forward, cfg.level, rejections);
}

}  // namespace splicebs
