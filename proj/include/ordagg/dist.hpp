#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace ordagg {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Resolution used whenever a parametric law is turned into a quantile table.
struct GridSpec {
    std::size_t n = 10000;         // interior knots at levels (i - 1/2)/n
    double truncation_m = 1.0 - 1e-6;  // level used in place of an infinite endpoint
};

enum class DistKind { pareto, uniform, normal, empirical, grid };

std::string to_string(DistKind kind);

// A one-dimensional law with CDF and generalized inverses.
//
// Parametric kinds are evaluated in closed form. The empirical kind is a
// weighted step CDF over sorted atoms. The grid kind is a piecewise linear
// quantile function through knots (level_k, value_k) with level_0 = 0 and
// level_K = 1; its CDF is the matching piecewise linear inverse.
//
// Values are immutable after construction.
class Dist {
public:
    struct Pareto {
        double scale;
        double shape;
        bool reflected;  // law of -X
    };
    struct Uniform {
        double lo;
        double hi;
    };
    struct Normal {
        double mean;
        double sd;
    };
    struct Empirical {
        std::vector<double> values;  // strictly increasing
        std::vector<double> probs;   // atom masses, sum to 1
        std::vector<double> cum;     // cum[i] = F(values[i]); cum.back() == 1
    };
    struct Grid {
        std::vector<double> levels;  // strictly increasing, 0 .. 1
        std::vector<double> values;  // nondecreasing, finite
    };

    static Dist pareto(double scale, double shape);
    static Dist uniform(double lo, double hi);
    static Dist normal(double mean, double sd);
    // Weights may be omitted (equal weights); they are normalized. Duplicate values merge.
    static Dist empirical(std::span<const double> values, std::span<const double> weights = {});
    static Dist grid(std::vector<double> levels, std::vector<double> values);
    // Step CDF with the given values at sorted atoms; cum is taken as is (last entry forced to 1).
    static Dist step_cdf(std::vector<double> values, std::vector<double> cum);

    DistKind kind() const noexcept;
    // True for the parametric and grid kinds (no atoms unless a grid segment is flat).
    bool is_continuous() const noexcept { return kind() != DistKind::empirical; }

    double cdf(double x) const;
    double quantile_left(double u) const;
    double quantile_right(double u) const;
    double support_lo() const;
    double support_hi() const;

    // Points where the CDF changes slope or jumps, plus a quantile grid for
    // smooth kinds. Finite, sorted, possibly with duplicates removed by callers.
    std::vector<double> breakpoints(std::size_t n, double truncation_m) const;

    // Integral of the right quantile over [a, b] subset of [0, 1]; may be +-inf.
    double quantile_integral(double a, double b) const;

    const Empirical* as_empirical() const noexcept { return std::get_if<Empirical>(&rep_); }
    const Grid* as_grid() const noexcept { return std::get_if<Grid>(&rep_); }
    const Pareto* as_pareto() const noexcept { return std::get_if<Pareto>(&rep_); }
    const Uniform* as_uniform() const noexcept { return std::get_if<Uniform>(&rep_); }
    const Normal* as_normal() const noexcept { return std::get_if<Normal>(&rep_); }

    std::string describe() const;

private:
    using Rep = std::variant<Pareto, Uniform, Normal, Empirical, Grid>;
    explicit Dist(Rep rep) : rep_(std::move(rep)) {}

    Rep rep_;

    friend Dist negate_dist(const Dist& d);
};

double cdf_eval(const Dist& d, double x);
double quantile_left(const Dist& d, double u);
double quantile_right(const Dist& d, double u);

// Law of F^{-1}(U), U ~ U[p, 1]; CDF (F(x) - p)_+ / (1 - p).
Dist upper_tail(const Dist& d, double p, const GridSpec& spec = {});
// Law of F^{-1}(U), U ~ U[0, p]; CDF min(F(x), p) / p.
Dist lower_tail(const Dist& d, double p, const GridSpec& spec = {});
// Law of -X.
Dist negate_dist(const Dist& d);

Dist empirical_from_samples(std::span<const double> values, std::span<const double> weights = {});

// Quantile table of d at the midpoint levels (i - 1/2)/n with endpoint knots.
Dist to_grid(const Dist& d, const GridSpec& spec = {});

// Tail averages of the right quantile. +inf / -inf signal a divergent integral.
double es_eval(const Dist& d, double p);
double rvar_eval(const Dist& d, double p, double q);

// ---------------------------------------------------------------------------
// Stochastic orders

struct OrderCheckReport {
    bool holds = false;
    double max_violation = 0.0;  // probability units
    double witness = 0.0;        // location of the maximal violation
    std::size_t grid_size = 0;   // number of evaluation points actually used
};

// Default tolerance: 1e-9 when both laws are continuous, 2/grid_size otherwise.
double default_order_tolerance(const Dist& f, const Dist& g, std::size_t grid_size);

// Evaluation points for order checks: quantiles of both laws at grid_size
// midpoint levels together with all atoms and knots.
std::vector<double> merged_grid(const Dist& f, const Dist& g, std::size_t grid_size,
                                double truncation_m = GridSpec{}.truncation_m);

// F <=_st G iff F(t) >= G(t) for all t.
OrderCheckReport check_st(const Dist& f, const Dist& g, std::size_t grid_size, double tol);
// F <=_ss G iff F - G is nonincreasing on [G^{-1}(0), inf).
OrderCheckReport check_ss(const Dist& f, const Dist& g, std::size_t grid_size, double tol);

// Two-group order-restricted least squares at every threshold of the merged
// grid. Returns empirical laws F* <=_st G*.
std::pair<Dist, Dist> isotonic_pair_projection(const Dist& f_hat, const Dist& g_hat,
                                               double weight_f, double weight_g);

}  // namespace ordagg
