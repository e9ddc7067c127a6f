#pragma once

#include "splicebs/models.hpp"
#include "splicebs/series.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace splicebs {

/// B x K matrix of bootstrap future values conditional on the series tail.
struct ForecastFan {
    std::size_t replicates = 0;
    int horizon = 0;
    std::vector<double> draws;  ///< row-major, one row per accepted replicate
    std::vector<double> last_p;
    std::vector<PredictionInterval> intervals;
    FittedModel model;  ///< model fitted to the observed series
    std::size_t rejections = 0;

    std::span<const double> row(std::size_t i) const {
        return {draws.data() + i * static_cast<std::size_t>(horizon), static_cast<std::size_t>(horizon)};
    }

    /// Draws for horizon k (1-based).
    std::vector<double> column(int k) const {
        std::vector<double> col;
        col.reserve(replicates);
        for (std::size_t i = 0; i < replicates; ++i)
            col.push_back(draws[i * static_cast<std::size_t>(horizon) + static_cast<std::size_t>(k - 1)]);
        return col;
    }

    double rejection_rate() const {
        const double attempts = static_cast<double>(replicates + rejections);
        return attempts > 0 ? static_cast<double>(rejections) / attempts : 0.0;
    }
};

/// Per-horizon equal-tail percentile intervals of the fan's columns.
inline std::vector<PredictionInterval> fan_intervals(const ForecastFan& fan, double beta) {
    std::vector<PredictionInterval> out;
    for (int k = 1; k <= fan.horizon; ++k) out.push_back(percentile_interval(fan.column(k), beta, k));
    return out;
}

/// Builds a fan from per-replicate forecast rows and attaches its intervals.
inline ForecastFan assemble_fan(std::vector<std::vector<double>> rows, int horizon,
                                std::vector<double> last_p, FittedModel model, double beta,
                                std::size_t rejections) {
    ForecastFan fan;
    fan.replicates = rows.size();
    fan.horizon = horizon;
    fan.draws.reserve(rows.size() * static_cast<std::size_t>(horizon));
    for (const auto& r : rows) fan.draws.insert(fan.draws.end(), r.begin(), r.end());
    fan.last_p = std::move(last_p);
    fan.model = std::move(model);
    fan.rejections = rejections;
    fan.intervals = fan_intervals(fan, beta);
    return fan;
}

}  // namespace splicebs
