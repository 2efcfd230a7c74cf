#include "ordagg/oracle.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "numeric.hpp"
#include "ordagg/errors.hpp"

namespace ordagg {

double ra_unconstrained_var(const Dist& f, const Dist& g, double p, std::size_t n) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("ra_unconstrained_var: p = {} outside (0, 1)", p));
    if (n < 2) throw DomainError("ra_unconstrained_var: n must be at least 2");
    std::vector<double> a(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = detail::mid_level(p, 1.0, i, n);
        a[i] = f.quantile_left(u);
        b[i] = g.quantile_left(u);
    }
    // Columns are already sorted ascending; reverse one to make them anti-monotone.
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end(), std::greater<>());
    double best = kInf;
    for (std::size_t i = 0; i < n; ++i) best = std::min(best, a[i] + b[i]);
    return best;
}

StopLossCurve stop_loss_curve(const SampleBatch& batch, std::span<const double> thresholds) {
    const std::size_t n = batch.x.size();
    if (n == 0 || batch.y.size() != n) throw DomainError("stop_loss_curve: empty or ragged batch");
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = batch.x[j] + batch.y[j];

    StopLossCurve c;
    c.thresholds.assign(thresholds.begin(), thresholds.end());
    const double nn = static_cast<double>(n);
    auto moments = [&](auto&& fn, double& mean, double& se) {
        double m = 0.0;
        double m2 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = fn(s[j]);
            const double delta = v - m;
            m += delta / static_cast<double>(j + 1);
            m2 += delta * (v - m);
        }
        mean = m;
        se = n > 1 ? std::sqrt(m2 / (nn - 1.0) / nn) : 0.0;
    };
    moments([](double v) { return v; }, c.mean, c.mean_stderr);
    for (double d : thresholds) {
        double v = 0.0;
        double se = 0.0;
        moments([d](double x) { return std::max(x - d, 0.0); }, v, se);
        c.values.push_back(v);
        c.stderrs.push_back(se);
    }
    return c;
}

DominanceResult stop_loss_dominates(const StopLossCurve& upper, const StopLossCurve& lower, double z, double budget) {
    if (upper.thresholds != lower.thresholds) throw DomainError("stop_loss_dominates: threshold grids differ");
    DominanceResult r;
    r.budget = static_cast<std::size_t>(std::floor(budget * static_cast<double>(upper.thresholds.size())));
    r.worst_z = kInf;
    for (std::size_t i = 0; i < upper.thresholds.size(); ++i) {
        const double se = std::hypot(upper.stderrs[i], lower.stderrs[i]);
        const double diff = upper.values[i] - lower.values[i];
        const double zi = se > 0.0 ? diff / se : (diff >= 0.0 ? kInf : -kInf);
        r.worst_z = std::min(r.worst_z, zi);
        if (zi < -z) ++r.violations;
    }
    r.holds = r.violations <= r.budget;
    return r;
}

double grid_convergence(const std::function<double(double, std::size_t)>& f, std::span<const double> levels,
                        std::size_t n) {
    double worst = 0.0;
    for (double level : levels) worst = std::max(worst, std::abs(f(level, n) - f(level, 2 * n)));
    return worst;
}

OrderCheckReport conditional_tail_ss_check(std::span<const double> samples, const std::vector<bool>& event_mask,
                                           double p, std::optional<double> tol) {
    if (samples.empty()) throw DomainError("conditional_tail_ss_check: empty sample");
    if (event_mask.size() != samples.size()) throw DomainError("conditional_tail_ss_check: mask length mismatch");
    if (!(p >= 0.0 && p < 1.0)) throw DomainError("conditional_tail_ss_check: p outside [0, 1)");
    const auto want = static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(samples.size()) - 1e-9));
    std::vector<double> chosen;
    for (std::size_t j = 0; j < samples.size(); ++j) {
        if (event_mask[j]) chosen.push_back(samples[j]);
    }
    if (chosen.size() != want) {
        throw DomainError(fmt::format("conditional_tail_ss_check: mask selects {} samples, expected {}", chosen.size(), want));
    }
    const Dist h = Dist::empirical(chosen);
    const Dist tail = upper_tail(Dist::empirical(samples), p);
    const double t = tol.value_or(default_order_tolerance(h, tail, samples.size()));
    return check_ss(h, tail, 2, t);
}

}  // namespace ordagg
