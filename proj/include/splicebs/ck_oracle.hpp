#pragma once

#include "splicebs/error.hpp"
#include "splicebs/models.hpp"
#include "splicebs/noise.hpp"
#include "splicebs/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <vector>

namespace splicebs {

struct GridSpec {
    double lo = -10.0;
    double hi = 10.0;
    std::size_t points = 2001;
};

/**
 * Predictive law of y_{n+k} on a uniform grid.
 *
 * `cdf` is the distribution function at each grid point and is what
 * intervals are read from; `density` is the matching point density. Both
 * are renormalized so that cdf.front() == 0 and cdf.back() == 1.
 */
struct DensityGrid {
    double lo = 0.0;
    double hi = 0.0;
    int horizon = 1;
    std::vector<double> density;
    std::vector<double> cdf;
    double leakage = 0.0;  ///< mass outside [lo, hi] before renormalization

    std::size_t size() const noexcept { return density.size(); }
    double step() const { return (hi - lo) / static_cast<double>(size() - 1); }
    double point(std::size_t i) const { return lo + static_cast<double>(i) * step(); }
    double mass() const { return cdf.back() - cdf.front(); }

    double trapezoid_mass() const {
        double s = 0.0;
        for (std::size_t i = 1; i < size(); ++i) s += 0.5 * (density[i - 1] + density[i]);
        return s * step();
    }
};

inline constexpr double max_grid_leakage = 1e-3;

namespace detail {

inline void require_lag_one(const FittedModel& model) {
    if (model.max_lag() != 1) fail(ErrorKind::config, "quadrature oracle supports lag-1 models only");
}

inline void check_grid(const GridSpec& grid) {
    if (grid.points < 3 || !(grid.hi > grid.lo)) fail(ErrorKind::config, "invalid quadrature grid");
}

inline void normalize(DensityGrid& g) {
    g.leakage = 1.0 - (g.cdf.back() - g.cdf.front());
    if (g.leakage > max_grid_leakage) {
        const double pad = 0.5 * (g.hi - g.lo);
        std::ostringstream msg;
        msg << "grid too narrow: " << g.leakage << " of the mass at k=" << g.horizon
            << " falls outside [" << g.lo << ", " << g.hi << "]; try [" << g.lo - pad << ", "
            << g.hi + pad << "]";
        fail(ErrorKind::numerical, msg.str());
    }
    const double base = g.cdf.front();
    const double total = g.cdf.back() - base;
    for (auto& c : g.cdf) c = (c - base) / total;
    for (auto& d : g.density) d /= total;
}

}  // namespace detail

/**
 * Grid centred on the plug-in path spanning 10 stationary standard
 * deviations either side (noise sd / sqrt(1 - phi^2) with phi the largest
 * absolute lag weight; sqrt(K) noise sd when that is not below one).
 */
inline GridSpec default_grid(const FittedModel& model, const NoiseSpec& noise, double y_n,
                             int horizon, std::size_t points = 2001) {
    detail::require_lag_one(model);
    double phi = 0.0;
    for (const auto& r : model.regimes) phi = std::max(phi, std::abs(r.coefficients.at(0)));
    const double sd = noise_sd(noise);
    const double spread = phi < 0.999 ? sd / std::sqrt(1.0 - phi * phi)
                                      : sd * std::sqrt(static_cast<double>(horizon));
    const double start[] = {y_n};
    const auto path = plugin_forecast(model, start, horizon);
    const double lo = std::min(y_n, *std::min_element(path.begin(), path.end()));
    const double hi = std::max(y_n, *std::max_element(path.begin(), path.end()));
    return {lo - 10.0 * spread, hi + 10.0 * spread, points};
}

/**
 * Forward recursion p_k(y) = integral g(y - f(x)) p_{k-1}(x) dx for a lag-1
 * model, returning the predictive laws for k = 1..horizon.
 *
 * k = 1 is the noise law shifted by f(y_n), evaluated exactly. Each later
 * step treats the mass between adjacent grid points as sitting at the cell
 * midpoint and pushes it through the analytic noise CDF and density, which
 * keeps the recursion second order even for the discontinuous exponential
 * density. Throws when more than 1e-3 of the mass leaves the grid.
 */
inline std::vector<DensityGrid> ck_densities(const FittedModel& model, const NoiseSpec& noise,
                                             double y_n, int horizon, const GridSpec& grid) {
    detail::require_lag_one(model);
    detail::check_grid(grid);
    if (horizon < 1) fail(ErrorKind::config, "horizon must be at least 1");
    const std::size_t N = grid.points;
    const double h = (grid.hi - grid.lo) / static_cast<double>(N - 1);
    auto x = [&](std::size_t i) { return grid.lo + static_cast<double>(i) * h; };
    auto f = [&](double v) {
        const double lag[] = {v};
        return conditional_mean(model, lag);
    };

    std::vector<DensityGrid> out;
    out.reserve(static_cast<std::size_t>(horizon));

    DensityGrid first{grid.lo, grid.hi, 1, std::vector<double>(N), std::vector<double>(N), 0.0};
    const double mu = f(y_n);
    for (std::size_t i = 0; i < N; ++i) {
        first.density[i] = noise_pdf(noise, x(i) - mu);
        first.cdf[i] = noise_cdf(noise, x(i) - mu);
    }
    detail::normalize(first);
    out.push_back(std::move(first));

    std::vector<double> cell_mass(N - 1), cell_mean(N - 1);
    for (int k = 2; k <= horizon; ++k) {
        const DensityGrid& prev = out.back();
        for (std::size_t j = 0; j + 1 < N; ++j) {
            cell_mass[j] = prev.cdf[j + 1] - prev.cdf[j];
            cell_mean[j] = f(0.5 * (x(j) + x(j + 1)));
        }
        DensityGrid next{grid.lo, grid.hi, k, std::vector<double>(N, 0.0), std::vector<double>(N, 0.0), 0.0};
        for (std::size_t i = 0; i < N; ++i) {
            const double y = x(i);
            double c = 0.0, d = 0.0;
            for (std::size_t j = 0; j + 1 < N; ++j) {
                if (cell_mass[j] == 0.0) continue;
                c += cell_mass[j] * noise_cdf(noise, y - cell_mean[j]);
                d += cell_mass[j] * noise_pdf(noise, y - cell_mean[j]);
            }
            next.cdf[i] = c;
            next.density[i] = d;
        }
        detail::normalize(next);
        out.push_back(std::move(next));
    }
    return out;
}

inline DensityGrid ck_density(const FittedModel& model, const NoiseSpec& noise, double y_n, int k,
                              const GridSpec& grid) {
    return ck_densities(model, noise, y_n, k, grid).back();
}

/// Equal-tail interval read off the grid CDF with linear interpolation.
inline PredictionInterval ck_interval(const DensityGrid& density, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) fail(ErrorKind::config, "level must lie in (0,1)");
    const auto& F = density.cdf;
    auto crossing = [&](double target) {
        const auto it = std::lower_bound(F.begin(), F.end(), target);
        if (it == F.begin()) return density.lo;
        if (it == F.end()) return density.hi;
        const auto i = static_cast<std::size_t>(it - F.begin());
        const double span = F[i] - F[i - 1];
        const double frac = span > 0.0 ? (target - F[i - 1]) / span : 0.0;
        return density.point(i - 1) + frac * density.step();
    };
    const double alpha = 1.0 - beta;
    return {density.horizon, crossing(alpha / 2.0), crossing(1.0 - alpha / 2.0), beta};
}

}  // namespace splicebs
