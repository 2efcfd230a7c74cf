#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <cstdint>
#include <limits>

#include <boost/math/tools/minima.hpp>

namespace ordagg::detail {

struct Minimum {
    double x;
    double value;
};

// Scan [a, b] at n + 1 equally spaced points, then polish the best bracket with Brent.
inline Minimum scan_minimize(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    n = std::max<std::size_t>(n, 2);
    Minimum best{a, f(a)};
    std::size_t best_i = 0;
    const double h = (b - a) / static_cast<double>(n);
    for (std::size_t i = 1; i <= n; ++i) {
        const double x = (i == n) ? b : a + h * static_cast<double>(i);
        const double v = f(x);
        if (v < best.value) {
            best = {x, v};
            best_i = i;
        }
    }
    if (!(h > 0.0)) return best;
    const double lo = best_i == 0 ? a : a + h * static_cast<double>(best_i - 1);
    const double hi = best_i == n ? b : a + h * static_cast<double>(best_i + 1);
    const double cap = std::isfinite(best.value) ? best.value + 1e6 * (1.0 + std::abs(best.value)) : 1e300;
    auto capped = [&](double x) {
        const double v = f(x);
        return std::isfinite(v) ? v : cap;
    };
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima(capped, lo, hi, std::numeric_limits<double>::digits / 2 + 4, iters);
    const double v = f(r.first);
    if (v < best.value) best = {r.first, v};
    return best;
}

inline Minimum scan_maximize(const std::function<double(double)>& f, double a, double b, std::size_t n) {
    Minimum m = scan_minimize([&](double x) { return -f(x); }, a, b, n);
    m.value = -m.value;
    return m;
}

// Equally spaced midpoint levels lo + (hi - lo)(i - 1/2)/n.
inline double mid_level(double lo, double hi, std::size_t i, std::size_t n) {
    return lo + (hi - lo) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
}

}  // namespace ordagg::detail
