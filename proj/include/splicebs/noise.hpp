#pragma once

#include "splicebs/error.hpp"
#include "splicebs/random.hpp"
#include "splicebs/series.hpp"

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splicebs {

enum class NoiseKind { normal, centered_exponential, normal_mixture };

/**
 * One of the three zero-mean innovation laws:
 *   normal                N(0,1)
 *   centered_exponential  Exp(1) - 1
 *   normal_mixture        N(-1,1) w.p. 0.9, N(9,1) w.p. 0.1
 * optionally multiplied by `scale` (1 unless stated).
 */
struct NoiseSpec {
    NoiseKind kind = NoiseKind::normal;
    double scale = 1.0;

    double operator()(RandomStream& rng) const;
};

inline constexpr double mixture_low_weight = 0.9;
inline constexpr double mixture_low_mean = -1.0;
inline constexpr double mixture_high_mean = 9.0;

/// Config names: "normal" | "exp" | "mixture".
inline NoiseKind parse_noise_kind(std::string_view name) {
    if (name == "normal") return NoiseKind::normal;
    if (name == "exp") return NoiseKind::centered_exponential;
    if (name == "mixture") return NoiseKind::normal_mixture;
    fail(ErrorKind::config, "unknown noise kind '" + std::string(name) + "'");
}

inline std::string noise_name(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::normal: return "normal";
        case NoiseKind::centered_exponential: return "exp";
        case NoiseKind::normal_mixture: return "mixture";
    }
    return "normal";
}

/// One draw from the law.
inline double sample_noise(const NoiseSpec& spec, RandomStream& rng) {
    double e = 0.0;
    switch (spec.kind) {
        case NoiseKind::normal:
            e = rng.normal();
            break;
        case NoiseKind::centered_exponential:
            e = rng.exponential() - 1.0;
            break;
        case NoiseKind::normal_mixture: {
            const double u = rng.uniform();
            e = (u < mixture_low_weight ? mixture_low_mean : mixture_high_mean) + rng.normal();
            break;
        }
    }
    return spec.scale * e;
}

inline double NoiseSpec::operator()(RandomStream& rng) const { return sample_noise(*this, rng); }

namespace detail {

inline double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace detail

/// Density of the law at e.
inline double noise_pdf(const NoiseSpec& spec, double e) {
    const double x = e / spec.scale;
    double g = 0.0;
    switch (spec.kind) {
        case NoiseKind::normal:
            g = detail::std_normal_pdf(x);
            break;
        case NoiseKind::centered_exponential:
            g = x >= -1.0 ? std::exp(-(x + 1.0)) : 0.0;
            break;
        case NoiseKind::normal_mixture:
            g = mixture_low_weight * detail::std_normal_pdf(x - mixture_low_mean) +
                (1.0 - mixture_low_weight) * detail::std_normal_pdf(x - mixture_high_mean);
            break;
    }
    return g / spec.scale;
}

/// Distribution function of the law at e.
inline double noise_cdf(const NoiseSpec& spec, double e) {
    const double x = e / spec.scale;
    switch (spec.kind) {
        case NoiseKind::normal:
            return detail::std_normal_cdf(x);
        case NoiseKind::centered_exponential:
            return x >= -1.0 ? -std::expm1(-(x + 1.0)) : 0.0;
        case NoiseKind::normal_mixture:
            return mixture_low_weight * detail::std_normal_cdf(x - mixture_low_mean) +
                   (1.0 - mixture_low_weight) * detail::std_normal_cdf(x - mixture_high_mean);
    }
    return 0.0;
}

/// Population standard deviation of the law.
inline double noise_sd(const NoiseSpec& spec) {
    switch (spec.kind) {
        case NoiseKind::normal:
        case NoiseKind::centered_exponential:
            return spec.scale;
        case NoiseKind::normal_mixture: {
            // within-component variance 1 plus between-component variance
            const double w = mixture_low_weight;
            const double between = w * mixture_low_mean * mixture_low_mean +
                                   (1.0 - w) * mixture_high_mean * mixture_high_mean;
            return spec.scale * std::sqrt(1.0 + between);
        }
    }
    return spec.scale;
}

/**
 * Centered residuals inflated by sqrt((n-p)/(n-2p)), resampled with
 * replacement as surrogate innovations.
 */
class ResidualPool {
public:
    ResidualPool() = default;
    ResidualPool(std::vector<double> values, double rescale)
        : values_(std::move(values)), rescale_(rescale) {}

    const std::vector<double>& values() const noexcept { return values_; }
    double rescale() const noexcept { return rescale_; }
    std::size_t size() const noexcept { return values_.size(); }
    bool empty() const noexcept { return values_.empty(); }

    double operator()(RandomStream& rng) const;

private:
    std::vector<double> values_;
    double rescale_ = 1.0;
};

inline ResidualPool make_residual_pool(std::span<const double> residuals, std::size_t n,
                                       std::size_t p) {
    if (residuals.empty()) fail(ErrorKind::data, "empty residual set");
    if (n <= 2 * p) fail(ErrorKind::data, "sample too short for variance correction");
    const double rescale =
        std::sqrt(static_cast<double>(n - p) / static_cast<double>(n - 2 * p));
    double mean = 0.0;
    for (double r : residuals) mean += r;
    mean /= static_cast<double>(residuals.size());
    std::vector<double> pool;
    pool.reserve(residuals.size());
    for (double r : residuals) pool.push_back((r - mean) * rescale);
    return {std::move(pool), rescale};
}

/// Uniform draw with replacement.
inline double draw(const ResidualPool& pool, RandomStream& rng) {
    if (pool.empty()) fail(ErrorKind::data, "empty residual pool");
    return pool.values()[rng.index(pool.size())];
}

inline double ResidualPool::operator()(RandomStream& rng) const { return draw(*this, rng); }

/// Anything that turns a stream into one innovation.
template <typename T>
concept InnovationSource = requires(const T& src, RandomStream& rng) {
    { src(rng) } -> std::convertible_to<double>;
};

/// Innovation source that always returns zero.
struct ZeroNoise {
    double operator()(RandomStream&) const { return 0.0; }
};

}  // namespace splicebs
