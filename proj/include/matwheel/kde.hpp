#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "matwheel/errors.hpp"
#include "matwheel/rng.hpp"

namespace matwheel {

/// Gaussian KDE over scalar property values.
struct KdeModel {
    std::vector<double> points;
    double bandwidth = 1.0;
};

/// Normal-reference (Silverman) bandwidth: 1.06 * s * n^(-1/5), where s is
/// the sample standard deviation. Degenerate inputs (n < 2 or s == 0) fall
/// back to max(1e-3 * max(|mean|, 1), 1e-9) so constant-label datasets
/// still produce a usable model.
inline KdeModel fit_kde(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("fit_kde: no values");
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) throw NonFiniteInput("fit_kde: non-finite value");
        sum += v;
    }
    const auto n = static_cast<double>(values.size());
    const double mean = sum / n;

    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sample_sd = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    KdeModel model;
    model.points = values;
    if (values.size() < 2 || sample_sd == 0.0) {
        model.bandwidth = std::max(1e-3 * std::max(std::abs(mean), 1.0), 1e-9);
    } else {
        model.bandwidth = 1.06 * sample_sd * std::pow(n, -0.2);
    }
    return model;
}

/// Mixture density (1/(n h sqrt(2 pi))) sum_i exp(-(x-x_i)^2 / (2 h^2)).
inline double kde_pdf(const KdeModel& model, double x) {
    constexpr double inv_sqrt_two_pi = 0.39894228040143267794;
    const double h = model.bandwidth;
    double acc = 0.0;
    for (double p : model.points) {
        const double z = (x - p) / h;
        acc += std::exp(-0.5 * z * z);
    }
    return acc * inv_sqrt_two_pi / (h * static_cast<double>(model.points.size()));
}

/// n i.i.d. draws: uniformly chosen training point plus Gaussian noise of
/// scale bandwidth. Deterministic given the seed.
inline std::vector<double> sample_kde(const KdeModel& model, std::size_t n, std::uint64_t seed) {
    std::vector<double> out;
    out.reserve(n);
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const auto idx = static_cast<std::size_t>(rng.below(model.points.size()));
        out.push_back(model.points[idx] + model.bandwidth * rng.normal());
    }
    return out;
}

} // namespace matwheel
