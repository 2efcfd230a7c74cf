#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ordagg/dist.hpp"

namespace ordagg {

struct PairOptions {
    std::size_t grid_n = 10000;
    double truncation_m = 1.0 - 1e-6;
    std::optional<double> order_tol;  // default_order_tolerance when unset
};

// F and G with F <=_st G, prepared for repeated evaluation of the DL
// coupling quantities. Holds the gap H = F - G on the merged grid together
// with a min segment tree over it.
class DirectionalPair {
public:
    // Throws OrderViolation when F <=_st G fails on the merged grid.
    DirectionalPair(Dist f, Dist g, const PairOptions& opt = {});

    const Dist& f() const noexcept { return f_; }
    const Dist& g() const noexcept { return g_; }
    std::span<const double> knots() const noexcept { return z_; }

    double gap(double z) const { return f_.cdf(z) - g_.cdf(z); }

    // inf{z >= x : H(z) < H(x)}; +inf when empty.
    double transport_upper(double x) const;
    // inf of H over [a, b].
    double inf_gap(double a, double b) const;
    // P(X <= x, Y <= y) under the DL coupling.
    double dl_cdf(double x, double y) const;

private:
    std::size_t first_below(std::size_t start, double target) const;
    std::size_t descend(std::size_t node, std::size_t lo, std::size_t hi, std::size_t start, double target) const;
    double range_min(std::size_t i, std::size_t j) const;

    Dist f_;
    Dist g_;
    std::vector<double> z_;
    std::vector<double> h_;
    std::vector<double> tree_;
    std::size_t leaves_ = 1;
};

// Gap decrease treated as strict when below this (probability units).
inline constexpr double kGapEps = 1e-12;

double transport_upper(const Dist& f, const Dist& g, double x, const PairOptions& opt = {});
// sup{t <= x : H(t) < H(x)} through the reflection -T^{G^, F^}(-x); -inf when empty.
double transport_lower(const Dist& f, const Dist& g, double x, const PairOptions& opt = {});
double dl_cdf(const Dist& f, const Dist& g, double x, double y, const PairOptions& opt = {});

// ---------------------------------------------------------------------------
// Discrete plans

enum class PairTag { common, singular };

struct PlanPair {
    double x;
    double y;
    PairTag tag;
    std::size_t y_index;  // position of y in the y grid as built
    double x_cell;        // lower level of the quantile cell of x
    double y_cell;        // lower level of the quantile cell of y
};

enum class PlanTail { upper, lower };

struct DlPlan {
    std::size_t n = 0;
    double source_level = 0.0;  // tail level p the plan was built at
    PlanTail tail = PlanTail::upper;
    double level_lo = 0.0;  // the plan covers quantile levels [level_lo, level_hi]
    double level_hi = 1.0;
    std::vector<PlanPair> pairs;  // k = 1..n, largest x first for upper plans
};

// Directional transport between the n-point quantile grids of F^[p,1] and G^[p,1].
// Throws InfeasiblePlan if some x has no unused y >= x.
DlPlan dl_plan_discrete(const Dist& f, const Dist& g, std::size_t n, double p);
// Same construction on F^[0,q], G^[0,q], built on the reflected pair and mapped back.
DlPlan dl_plan_lower_tail(const Dist& f, const Dist& g, std::size_t n, double q);

double dl_sum_cdf(const DlPlan& plan, double t);
std::vector<double> plan_sums_sorted(const DlPlan& plan);

// Order statistics helpers on sorted samples.
double sorted_left_quantile(std::span<const double> sorted, double u);
// Mean of the lowest fraction a in (0, 1] of the sorted sample (fractional atoms split).
double lower_fraction_mean(std::span<const double> sorted, double a);
double upper_fraction_mean(std::span<const double> sorted, double a);

// ---------------------------------------------------------------------------
// Sampling

enum class CouplingKind { comonotone, countermonotone, dl };

std::string to_string(CouplingKind kind);
CouplingKind coupling_kind_from_string(const std::string& name);

struct SampleOptions {
    std::size_t plan_n = 100000;
    bool jitter = false;
};

struct SampleBatch {
    CouplingKind kind = CouplingKind::comonotone;
    std::vector<double> x;
    std::vector<double> y;
    std::uint64_t seed = 0;
    std::size_t size = 0;
};

SampleBatch sample_coupling(const Dist& f, const Dist& g, CouplingKind kind, std::size_t size, std::uint64_t seed,
                            const SampleOptions& opt = {});
// Resample an existing plan; with jitter, the pair shares one uniform within its quantile cell.
SampleBatch sample_plan(const DlPlan& plan, std::size_t size, std::uint64_t seed, const Dist* f = nullptr,
                        const Dist* g = nullptr, bool jitter = false);

}  // namespace ordagg
