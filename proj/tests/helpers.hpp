#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "ordagg/dist.hpp"

namespace testutil {

inline ordagg::Dist pareto_f() { return ordagg::Dist::pareto(1.0, 1.0); }
inline ordagg::Dist pareto_g() { return ordagg::Dist::pareto(2.0, 1.0); }

// Closed-form CDF of X + Y under the DL coupling of the two Pareto laws above.
inline double pareto_dl_sum_cdf(double c) { return (c + std::sqrt(c * c - 4.0 * c) - 4.0) / (2.0 * c); }

inline std::vector<double> pareto_samples(std::size_t n, double scale, double shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> out(n);
    for (double& v : out) v = scale * std::pow(1.0 - u(rng), -1.0 / shape);
    return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

}  // namespace testutil
