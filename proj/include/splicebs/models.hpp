#pragma once

#include "splicebs/error.hpp"
#include "splicebs/noise.hpp"
#include "splicebs/random.hpp"
#include "splicebs/series.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace splicebs {

enum class ModelKind { ar, setar };

/**
 * Structure of an AR(p) or two-regime SETAR(2, p_low, p_high) model.
 *
 * For SETAR the regime at time t is "lower" when y_{t-delay} <= threshold and
 * "upper" otherwise. An empty threshold means it is estimated by grid search.
 */
struct ModelSpec {
    ModelKind kind = ModelKind::ar;
    int p = 1;
    int delay = 1;
    int p_low = 1;
    int p_high = 1;
    std::optional<double> threshold;
    bool intercept = false;

    static ModelSpec ar(int order, bool with_intercept = false) {
        ModelSpec s;
        s.kind = ModelKind::ar;
        s.p = order;
        s.intercept = with_intercept;
        return s;
    }

    static ModelSpec setar(int delay, int p_low, int p_high, std::optional<double> threshold,
                           bool with_intercept = false) {
        ModelSpec s;
        s.kind = ModelKind::setar;
        s.delay = delay;
        s.p_low = p_low;
        s.p_high = p_high;
        s.p = std::max(p_low, p_high);
        s.threshold = threshold;
        s.intercept = with_intercept;
        return s;
    }

    /// Number of past values the conditional mean reads.
    int max_lag() const { return kind == ModelKind::ar ? p : std::max({p_low, p_high, delay}); }

    /// Lag order used for the variance correction and regime-size rule.
    int order() const { return kind == ModelKind::ar ? p : std::max(p_low, p_high); }

    void validate() const {
        if (kind == ModelKind::ar) {
            if (p < 1) fail(ErrorKind::config, "lag order must be at least 1");
            return;
        }
        if (p_low < 1 || p_high < 1) fail(ErrorKind::config, "regime orders must be at least 1");
        if (delay < 1 || delay > std::max(p_low, p_high))
            fail(ErrorKind::config, "delay must lie in [1, max(p_low, p_high)]");
        if (threshold && !std::isfinite(*threshold))
            fail(ErrorKind::config, "threshold must be finite");
    }

    bool same_form(const ModelSpec& other) const {
        if (kind != other.kind || intercept != other.intercept) return false;
        if (kind == ModelKind::ar) return p == other.p;
        return p_low == other.p_low && p_high == other.p_high && delay == other.delay;
    }
};

struct Regime {
    double intercept = 0.0;
    std::vector<double> coefficients;  ///< weights on y_{t-1}, ..., y_{t-p}
    std::size_t count = 0;             ///< observations assigned when fitted
};

/// A model with concrete coefficients, either fitted or specified as truth.
struct FittedModel {
    ModelSpec spec;
    std::vector<Regime> regimes;  ///< one for AR; lower then upper for SETAR
    double threshold = 0.0;
    std::vector<double> residuals;  ///< in-sample one-step residuals, time order
    double sse = 0.0;
    std::size_t series_length = 0;

    int max_lag() const { return spec.max_lag(); }
};

/// Smallest admissible regime: max(p + 2, ceil(n / 10)).
inline std::size_t min_regime_size(const ModelSpec& spec, std::size_t n) {
    const auto by_order = static_cast<std::size_t>(spec.order() + 2);
    const auto by_share = static_cast<std::size_t>(std::ceil(0.1 * static_cast<double>(n)));
    return std::max(by_order, by_share);
}

inline FittedModel make_ar_model(std::vector<double> coefficients, double intercept = 0.0) {
    FittedModel m;
    m.spec = ModelSpec::ar(static_cast<int>(coefficients.size()), intercept != 0.0);
    m.spec.validate();
    m.regimes.push_back({intercept, std::move(coefficients), 0});
    return m;
}

inline FittedModel make_setar_model(std::vector<double> lower, std::vector<double> upper,
                                    double threshold, int delay = 1, double lower_intercept = 0.0,
                                    double upper_intercept = 0.0) {
    FittedModel m;
    m.spec = ModelSpec::setar(delay, static_cast<int>(lower.size()), static_cast<int>(upper.size()),
                              threshold, lower_intercept != 0.0 || upper_intercept != 0.0);
    m.spec.validate();
    m.threshold = threshold;
    m.regimes.push_back({lower_intercept, std::move(lower), 0});
    m.regimes.push_back({upper_intercept, std::move(upper), 0});
    return m;
}

namespace detail {

/// Regime index for the next value given the chronological history.
inline std::size_t regime_of(const FittedModel& model, std::span<const double> history) {
    if (model.spec.kind == ModelKind::ar) return 0;
    const double z = history[history.size() - static_cast<std::size_t>(model.spec.delay)];
    return z <= model.threshold ? 0 : 1;
}

inline double regime_mean(const Regime& regime, std::span<const double> history) {
    double value = regime.intercept;
    const std::size_t last = history.size() - 1;
    for (std::size_t j = 0; j < regime.coefficients.size(); ++j)
        value += regime.coefficients[j] * history[last - j];
    return value;
}

}  // namespace detail

/**
 * Conditional mean f(history). `history` is chronological and at least
 * max_lag() long; only its final max_lag() values are read.
 */
inline double conditional_mean(const FittedModel& model, std::span<const double> history) {
    return detail::regime_mean(model.regimes[detail::regime_of(model, history)], history);
}

/// One-step conditional mean from exactly max_lag() chronological lags.
inline double one_step_mean(const FittedModel& model, std::span<const double> lags) {
    if (lags.size() != static_cast<std::size_t>(model.max_lag()))
        fail(ErrorKind::config, "expected " + std::to_string(model.max_lag()) + " lags, got " +
                                    std::to_string(lags.size()));
    return conditional_mean(model, lags);
}

/// Noise-free recursive forecast for horizons 1..K from the chronological tail.
inline std::vector<double> plugin_forecast(const FittedModel& model, std::span<const double> last_p,
                                           int horizon) {
    if (last_p.size() != static_cast<std::size_t>(model.max_lag()))
        fail(ErrorKind::config, "conditioning tail has the wrong length");
    if (horizon < 1) fail(ErrorKind::config, "horizon must be at least 1");
    std::vector<double> path(last_p.begin(), last_p.end());
    path.reserve(path.size() + static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) path.push_back(conditional_mean(model, path));
    return {path.end() - horizon, path.end()};
}

/// One stochastic forward path y_{n+1..n+K} = f(.) + innovation.
template <InnovationSource Innovation>
std::vector<double> forecast_path(const FittedModel& model, std::span<const double> last_p,
                                  int horizon, const Innovation& innovation, RandomStream& rng) {
    std::vector<double> path(last_p.begin(), last_p.end());
    path.reserve(path.size() + static_cast<std::size_t>(horizon));
    for (int k = 0; k < horizon; ++k) path.push_back(conditional_mean(model, path) + innovation(rng));
    return {path.end() - horizon, path.end()};
}

inline constexpr double divergence_bound = 1e9;

/**
 * Iterates y_t = f(lags) + innovation starting after `init`, returning all
 * generated values (init excluded). Throws once |y_t| exceeds 1e9.
 */
template <InnovationSource Innovation>
std::vector<double> simulate_path(const FittedModel& model, const Innovation& innovation,
                                  std::size_t count, std::span<const double> init,
                                  RandomStream& rng) {
    const auto lag = static_cast<std::size_t>(model.max_lag());
    if (init.size() != lag) fail(ErrorKind::config, "initial window must hold max_lag values");
    std::vector<double> buf(init.begin(), init.end());
    buf.reserve(lag + count);
    for (std::size_t i = 0; i < count; ++i) {
        const double y = conditional_mean(model, buf) + innovation(rng);
        if (!std::isfinite(y) || std::abs(y) > divergence_bound)
            fail(ErrorKind::numerical, "simulation diverged at index " + std::to_string(i));
        buf.push_back(y);
    }
    buf.erase(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(lag));
    return buf;
}

/// Simulates burn_in + length values and keeps the final `length`.
template <InnovationSource Innovation>
TimeSeries simulate(const FittedModel& model, const Innovation& innovation, std::size_t length,
                    std::size_t burn_in, std::span<const double> init, RandomStream& rng) {
    auto path = simulate_path(model, innovation, burn_in + length, init, rng);
    path.erase(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(burn_in));
    return TimeSeries(std::move(path));
}

namespace detail {

struct OlsFit {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<double> residuals;
    double sse = 0.0;
};

/// OLS of y_t on (1,) y_{t-1..t-order} over the listed rows t (0-based).
inline OlsFit ols_on_rows(std::span<const double> y, std::span<const std::size_t> rows, int order,
                          bool intercept) {
    const Eigen::Index cols = order + (intercept ? 1 : 0);
    const auto nrows = static_cast<Eigen::Index>(rows.size());
    if (nrows < cols) fail(ErrorKind::numerical, "degenerate design");
    Eigen::MatrixXd X(nrows, cols);
    Eigen::VectorXd target(nrows);
    for (Eigen::Index i = 0; i < nrows; ++i) {
        const std::size_t t = rows[static_cast<std::size_t>(i)];
        Eigen::Index c = 0;
        if (intercept) X(i, c++) = 1.0;
        for (int j = 1; j <= order; ++j) X(i, c++) = y[t - static_cast<std::size_t>(j)];
        target(i) = y[t];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < cols) fail(ErrorKind::numerical, "degenerate design");
    const Eigen::VectorXd beta = qr.solve(target);
    if (!beta.allFinite()) fail(ErrorKind::numerical, "degenerate design");
    OlsFit fit;
    Eigen::Index c = 0;
    if (intercept) fit.intercept = beta(c++);
    fit.coefficients.assign(beta.data() + c, beta.data() + cols);
    const Eigen::VectorXd resid = target - X * beta;
    fit.residuals.assign(resid.data(), resid.data() + nrows);
    for (double r : fit.residuals) fit.sse += r * r;
    return fit;
}

inline void require_length(std::size_t n, std::size_t needed) {
    if (n < needed)
        fail(ErrorKind::data, "series too short: need at least " + std::to_string(needed) +
                                  " observations, got " + std::to_string(n));
}

}  // namespace detail

/// Conditional least squares AR(p) over t = p+1..n.
inline FittedModel fit_ar(const TimeSeries& series, int p, bool intercept = false) {
    const ModelSpec spec = ModelSpec::ar(p, intercept);
    spec.validate();
    const std::size_t n = series.size();
    detail::require_length(n, static_cast<std::size_t>(p + 2 + (intercept ? 1 : 0)));
    std::vector<std::size_t> rows;
    for (auto t = static_cast<std::size_t>(p); t < n; ++t) rows.push_back(t);
    auto ols = detail::ols_on_rows(series.span(), rows, p, intercept);
    FittedModel m;
    m.spec = spec;
    m.regimes.push_back({ols.intercept, std::move(ols.coefficients), rows.size()});
    m.residuals = std::move(ols.residuals);
    m.sse = ols.sse;
    m.series_length = n;
    return m;
}

namespace detail {

inline FittedModel fit_setar_at(std::span<const double> y, const ModelSpec& spec, double threshold) {
    const auto lag = static_cast<std::size_t>(spec.max_lag());
    const auto d = static_cast<std::size_t>(spec.delay);
    std::vector<std::size_t> lower, upper;
    for (std::size_t t = lag; t < y.size(); ++t) (y[t - d] <= threshold ? lower : upper).push_back(t);
    const std::size_t min_size = min_regime_size(spec, y.size());
    if (lower.size() < min_size || upper.size() < min_size)
        fail(ErrorKind::numerical, "regime starvation");
    auto lo = ols_on_rows(y, lower, spec.p_low, spec.intercept);
    auto hi = ols_on_rows(y, upper, spec.p_high, spec.intercept);

    FittedModel m;
    m.spec = spec;
    m.threshold = threshold;
    m.series_length = y.size();
    m.regimes.push_back({lo.intercept, std::move(lo.coefficients), lower.size()});
    m.regimes.push_back({hi.intercept, std::move(hi.coefficients), upper.size()});
    m.residuals.resize(y.size() - lag);
    for (std::size_t i = 0; i < lower.size(); ++i) m.residuals[lower[i] - lag] = lo.residuals[i];
    for (std::size_t i = 0; i < upper.size(); ++i) m.residuals[upper[i] - lag] = hi.residuals[i];
    m.sse = lo.sse + hi.sse;
    return m;
}

/// Running cross-products X'X, X'y for one regime design.
struct CrossProducts {
    Eigen::MatrixXd xtx;
    Eigen::VectorXd xty;
    std::size_t count = 0;

    explicit CrossProducts(Eigen::Index cols)
        : xtx(Eigen::MatrixXd::Zero(cols, cols)), xty(Eigen::VectorXd::Zero(cols)) {}

    void add(const Eigen::VectorXd& x, double target) {
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(x);
        xty += target * x;
        ++count;
    }

    /// Explained sum of squares b'X'y, or nullopt when X'X is singular.
    std::optional<double> explained() const {
        const Eigen::MatrixXd full = xtx.selfadjointView<Eigen::Lower>();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(full);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return std::nullopt;
        const Eigen::VectorXd d = ldlt.vectorD();
        if (d.minCoeff() <= 1e-12 * std::max(1.0, d.maxCoeff())) return std::nullopt;
        return xty.dot(ldlt.solve(xty));
    }
};

inline Eigen::VectorXd design_row(std::span<const double> y, std::size_t t, int order,
                                  bool intercept) {
    Eigen::VectorXd x(order + (intercept ? 1 : 0));
    Eigen::Index c = 0;
    if (intercept) x(c++) = 1.0;
    for (int j = 1; j <= order; ++j) x(c++) = y[t - static_cast<std::size_t>(j)];
    return x;
}

/**
 * Threshold minimizing total SSE over the distinct delay values lying
 * between the 10% and 90% quantiles of y_{t-d}. One ascending sweep with
 * running cross-products, so the search is O(n log n) for fixed orders.
 */
inline double search_threshold(std::span<const double> y, const ModelSpec& spec) {
    const auto lag = static_cast<std::size_t>(spec.max_lag());
    const auto d = static_cast<std::size_t>(spec.delay);
    std::vector<std::size_t> rows;
    for (std::size_t t = lag; t < y.size(); ++t) rows.push_back(t);
    std::stable_sort(rows.begin(), rows.end(),
                     [&](std::size_t a, std::size_t b) { return y[a - d] < y[b - d]; });

    std::vector<double> z;
    z.reserve(rows.size());
    for (std::size_t t : rows) z.push_back(y[t - d]);
    const double z_lo = sorted_quantile(z, 0.1);
    const double z_hi = sorted_quantile(z, 0.9);
    const std::size_t min_size = min_regime_size(spec, y.size());

    const Eigen::Index cols_lo = spec.p_low + (spec.intercept ? 1 : 0);
    const Eigen::Index cols_hi = spec.p_high + (spec.intercept ? 1 : 0);
    CrossProducts lower(cols_lo), upper_total(cols_hi), upper_removed(cols_hi);
    double yty = 0.0;
    for (std::size_t t : rows) {
        upper_total.add(design_row(y, t, spec.p_high, spec.intercept), y[t]);
        yty += y[t] * y[t];
    }

    std::optional<double> best_threshold;
    double best_sse = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t t = rows[i];
        lower.add(design_row(y, t, spec.p_low, spec.intercept), y[t]);
        upper_removed.add(design_row(y, t, spec.p_high, spec.intercept), y[t]);
        const bool boundary = i + 1 == rows.size() || z[i + 1] > z[i];
        if (!boundary || z[i] < z_lo || z[i] > z_hi) continue;
        const std::size_t n_low = i + 1;
        const std::size_t n_high = rows.size() - n_low;
        if (n_low < min_size || n_high < min_size) continue;

        CrossProducts upper(cols_hi);
        upper.xtx = upper_total.xtx - upper_removed.xtx;
        upper.xty = upper_total.xty - upper_removed.xty;
        const auto e_lo = lower.explained();
        const auto e_hi = upper.explained();
        if (!e_lo || !e_hi) continue;
        const double sse = yty - *e_lo - *e_hi;
        if (sse < best_sse) {
            best_sse = sse;
            best_threshold = z[i];
        }
    }
    if (!best_threshold) fail(ErrorKind::numerical, "regime starvation");
    return *best_threshold;
}

}  // namespace detail

/**
 * Two-regime conditional least squares. With a fixed threshold the data
 * are split once; otherwise the threshold is chosen by grid search, ties
 * going to the smallest candidate.
 */
inline FittedModel fit_setar(const TimeSeries& series, const ModelSpec& spec) {
    if (spec.kind != ModelKind::setar) fail(ErrorKind::config, "fit_setar needs a setar spec");
    spec.validate();
    const auto y = series.span();
    detail::require_length(y.size(), static_cast<std::size_t>(spec.max_lag()) +
                                         2 * min_regime_size(spec, y.size()));
    const double threshold = spec.threshold ? *spec.threshold : detail::search_threshold(y, spec);
    return detail::fit_setar_at(y, spec, threshold);
}

/// Fits whichever structure `spec` names.
inline FittedModel fit_model(const TimeSeries& series, const ModelSpec& spec) {
    return spec.kind == ModelKind::ar ? fit_ar(series, spec.p, spec.intercept)
                                      : fit_setar(series, spec);
}

inline const std::vector<double>& residuals(const FittedModel& model) { return model.residuals; }

/// Refit has the original's form and, for SETAR, no starved regime.
inline bool validate_refit(const FittedModel& original, const FittedModel& refit) {
    if (!original.spec.same_form(refit.spec)) return false;
    if (refit.regimes.size() != original.regimes.size()) return false;
    for (std::size_t i = 0; i < refit.regimes.size(); ++i)
        if (refit.regimes[i].coefficients.size() != original.regimes[i].coefficients.size())
            return false;
    if (refit.spec.kind == ModelKind::setar) {
        const std::size_t min_size = min_regime_size(refit.spec, refit.series_length);
        for (const auto& r : refit.regimes)
            if (r.count < min_size) return false;
    }
    return true;
}

/// Forward residual pool of a fitted model: centered, variance-corrected.
inline ResidualPool residual_pool(const FittedModel& model) {
    return make_residual_pool(model.residuals, model.series_length,
                              static_cast<std::size_t>(model.spec.order()));
}

}  // namespace splicebs
