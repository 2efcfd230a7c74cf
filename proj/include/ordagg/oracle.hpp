#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ordagg/coupling.hpp"
#include "ordagg/dist.hpp"

namespace ordagg {

// Two-column rearrangement: the p-tail quantile columns of F and G on an
// n-point midpoint grid, paired anti-monotonically; returns the minimal row sum.
double ra_unconstrained_var(const Dist& f, const Dist& g, double p, std::size_t n);

struct StopLossCurve {
    std::vector<double> thresholds;
    std::vector<double> values;   // E[(S - d)_+]
    std::vector<double> stderrs;  // standard error of each value
    double mean = 0.0;            // sample mean of S
    double mean_stderr = 0.0;
};

StopLossCurve stop_loss_curve(const SampleBatch& batch, std::span<const double> thresholds);

struct DominanceResult {
    bool holds = false;
    std::size_t violations = 0;  // thresholds where upper < lower beyond z standard errors
    std::size_t budget = 0;      // violations tolerated
    double worst_z = 0.0;        // most negative standardized difference
};

// upper >= lower at every threshold within z combined standard errors, with
// a fraction `budget` of thresholds allowed to fail.
DominanceResult stop_loss_dominates(const StopLossCurve& upper, const StopLossCurve& lower, double z = 3.0,
                                    double budget = 0.05);

// sup over levels of |f(level, n) - f(level, 2n)|.
double grid_convergence(const std::function<double(double, std::size_t)>& f, std::span<const double> levels,
                        std::size_t n);

// H_{X|A} against the empirical F^[p,1]; the mask must select ceil((1-p) size) samples.
OrderCheckReport conditional_tail_ss_check(std::span<const double> samples, const std::vector<bool>& event_mask,
                                           double p, std::optional<double> tol = std::nullopt);

}  // namespace ordagg
