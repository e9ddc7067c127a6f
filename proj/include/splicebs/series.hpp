#pragma once

#include "splicebs/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace splicebs {

/**
 * An ordered, finite, non-empty sequence of observations.
 *
 * Storage is 0-based: values()[0] is y_1 and values().back() is y_n.
 */
class TimeSeries {
public:
    TimeSeries() = default;

    explicit TimeSeries(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) fail(ErrorKind::data, "empty series");
        for (std::size_t i = 0; i < values_.size(); ++i) {
            if (!std::isfinite(values_[i]))
                fail(ErrorKind::data, "non-finite value at index " + std::to_string(i));
        }
    }

    std::size_t size() const noexcept { return values_.size(); }
    double operator[](std::size_t i) const { return values_[i]; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::span<const double> span() const noexcept { return values_; }

    /// The final `p` observations in time order (y_{n-p+1}, ..., y_n).
    std::vector<double> tail(std::size_t p) const {
        if (p > values_.size()) fail(ErrorKind::data, "tail longer than series");
        return {values_.end() - static_cast<std::ptrdiff_t>(p), values_.end()};
    }

private:
    std::vector<double> values_;
};

/// Equal-tail interval for the value k steps ahead.
struct PredictionInterval {
    int horizon = 1;
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.9;

    double length() const noexcept { return upper - lower; }
};

namespace detail {

inline void require_finite_sample(std::span<const double> values) {
    if (values.empty()) fail(ErrorKind::data, "empty sample");
    for (double v : values)
        if (!std::isfinite(v)) fail(ErrorKind::data, "non-finite value");
}

/// Interpolated quantile of an already sorted sample.
inline double sorted_quantile(std::span<const double> sorted, double q) {
    const double h = static_cast<double>(sorted.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/**
 * Linear-interpolation order-statistic quantile.
 *
 * With sorted x_(1..B) and h = (B-1)q + 1 the result is
 * x_(floor h) + (h - floor h)(x_(ceil h) - x_(floor h)). q = 0 gives the
 * minimum and q = 1 the maximum.
 */
inline double empirical_quantile(std::span<const double> values, double q) {
    detail::require_finite_sample(values);
    if (!(q >= 0.0 && q <= 1.0)) fail(ErrorKind::config, "quantile level outside [0,1]");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return detail::sorted_quantile(sorted, q);
}

/// Equal-tail percentile interval (q((1-beta)/2), q((1+beta)/2)) of a sample.
inline PredictionInterval percentile_interval(std::span<const double> values, double beta,
                                              int horizon) {
    detail::require_finite_sample(values);
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::config, "level must lie in (0,1)");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double alpha = 1.0 - beta;
    return {horizon, detail::sorted_quantile(sorted, alpha / 2.0),
            detail::sorted_quantile(sorted, 1.0 - alpha / 2.0), beta};
}

struct Summary {
    double mean = 0.0;
    std::optional<double> sd;  ///< empty when fewer than two values
    std::optional<double> se;
    std::size_t count = 0;
};

/// Mean, sample standard deviation (n-1 divisor) and standard error.
inline Summary summarize(std::span<const double> values) {
    detail::require_finite_sample(values);
    Summary s;
    s.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    s.mean = sum / static_cast<double>(values.size());
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        const double sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        s.sd = sd;
        s.se = sd / std::sqrt(static_cast<double>(values.size()));
    }
    return s;
}

/// Standard deviation that throws "insufficient sample" when undefined.
inline double sample_sd(std::span<const double> values) {
    const auto s = summarize(values);
    if (!s.sd) fail(ErrorKind::data, "insufficient sample");
    return *s.sd;
}

}  // namespace splicebs
