#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ordagg/dist.hpp"
#include "ordagg/errors.hpp"

namespace ordagg {

double default_order_tolerance(const Dist& f, const Dist& g, std::size_t grid_size) {
    if (f.is_continuous() && g.is_continuous()) return 1e-9;
    return 2.0 / static_cast<double>(std::max<std::size_t>(grid_size, 1));
}

std::vector<double> merged_grid(const Dist& f, const Dist& g, std::size_t grid_size, double truncation_m) {
    if (grid_size < 2) throw DomainError("merged_grid: grid_size must be at least 2");
    std::vector<double> out = f.breakpoints(grid_size, truncation_m);
    const std::vector<double> other = g.breakpoints(grid_size, truncation_m);
    out.insert(out.end(), other.begin(), other.end());
    std::erase_if(out, [](double t) { return !std::isfinite(t); });
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

OrderCheckReport check_st(const Dist& f, const Dist& g, std::size_t grid_size, double tol) {
    const std::vector<double> grid = merged_grid(f, g, grid_size);
    OrderCheckReport rep;
    rep.grid_size = grid.size();
    double worst = 0.0;
    for (double t : grid) {
        const double d = f.cdf(t) - g.cdf(t);
        if (d < worst) {
            worst = d;
            rep.witness = t;
        }
    }
    rep.max_violation = -worst;
    rep.holds = rep.max_violation <= tol;
    return rep;
}

OrderCheckReport check_ss(const Dist& f, const Dist& g, std::size_t grid_size, double tol) {
    std::vector<double> grid = merged_grid(f, g, grid_size);
    const double start = g.quantile_right(0.0);
    if (std::isfinite(start)) {
        std::erase_if(grid, [start](double t) { return t < start; });
        if (grid.empty() || grid.front() != start) grid.insert(grid.begin(), start);
    }
    OrderCheckReport rep;
    rep.grid_size = grid.size();
    double running_min = kInf;
    double worst = 0.0;
    for (double t : grid) {
        const double d = f.cdf(t) - g.cdf(t);
        if (d - running_min > worst) {
            worst = d - running_min;
            rep.witness = t;
        }
        running_min = std::min(running_min, d);
    }
    rep.max_violation = worst;
    rep.holds = rep.max_violation <= tol;
    return rep;
}

std::pair<Dist, Dist> isotonic_pair_projection(const Dist& f_hat, const Dist& g_hat, double weight_f, double weight_g) {
    if (!(weight_f > 0.0 && std::isfinite(weight_f)) || !(weight_g > 0.0 && std::isfinite(weight_g))) {
        throw DomainError(fmt::format("isotonic_pair_projection: weights must be positive, got ({}, {})", weight_f, weight_g));
    }
    for (const Dist* d : {&f_hat, &g_hat}) {
        if (d->kind() != DistKind::empirical && d->kind() != DistKind::grid) {
            throw DomainError("isotonic_pair_projection: inputs must be empirical or grid laws");
        }
    }
    const std::vector<double> grid = merged_grid(f_hat, g_hat, 2);
    const std::size_t n = grid.size();
    std::vector<double> fs(n);
    std::vector<double> gs(n);
    const double wsum = weight_f + weight_g;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = f_hat.cdf(grid[j]);
        const double b = g_hat.cdf(grid[j]);
        if (a >= b) {
            fs[j] = a;
            gs[j] = b;
        } else {
            fs[j] = gs[j] = (weight_f * a + weight_g * b) / wsum;
        }
    }
    for (std::size_t j = 1; j < n; ++j) {
        fs[j] = std::max(fs[j], fs[j - 1]);
        gs[j] = std::max(gs[j], gs[j - 1]);
        fs[j] = std::max(fs[j], gs[j]);
    }
    return {Dist::step_cdf(grid, std::move(fs)), Dist::step_cdf(grid, std::move(gs))};
}

}  // namespace ordagg
