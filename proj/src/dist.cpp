#include "ordagg/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <fmt/format.h>

#include "ordagg/errors.hpp"

namespace ordagg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_level(double u, const char* what) {
    if (!(u >= 0.0 && u <= 1.0)) {
        throw DomainError(fmt::format("{}: level {} outside [0, 1]", what, u));
    }
}

double std_normal_quantile(double u) {
    if (u <= 0.0) return -kInf;
    if (u >= 1.0) return kInf;
    return boost::math::quantile(boost::math::normal_distribution<double>{}, u);
}

double std_normal_pdf_at_quantile(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double z = std_normal_quantile(u);
    return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
}

// Integral of s (1 - u)^(-1/shape) over [a, b].
double pareto_quantile_integral(double scale, double shape, double a, double b) {
    const double beta = 1.0 / shape;
    if (b >= 1.0 && beta >= 1.0) return kInf;
    if (beta == 1.0) return scale * (std::log1p(-a) - std::log1p(-b));
    const double e = 1.0 - beta;
    return scale * (std::pow(1.0 - a, e) - std::pow(1.0 - b, e)) / e;
}

// Linear interpolation of the grid quantile at u.
double grid_quantile(const Dist::Grid& g, double u) {
    const auto& L = g.levels;
    const auto& V = g.values;
    if (u <= 0.0) return V.front();
    if (u >= 1.0) return V.back();
    std::size_t k = static_cast<std::size_t>(std::upper_bound(L.begin(), L.end(), u) - L.begin()) - 1;
    k = std::min(k, L.size() - 2);
    const double w = (u - L[k]) / (L[k + 1] - L[k]);
    return V[k] + w * (V[k + 1] - V[k]);
}

double grid_cdf(const Dist::Grid& g, double x) {
    const auto& L = g.levels;
    const auto& V = g.values;
    if (x < V.front()) return 0.0;
    if (x >= V.back()) return 1.0;
    const std::size_t k = static_cast<std::size_t>(std::upper_bound(V.begin(), V.end(), x) - V.begin()) - 1;
    // V[k] <= x < V[k + 1]
    const double w = (x - V[k]) / (V[k + 1] - V[k]);
    return L[k] + w * (L[k + 1] - L[k]);
}

// Exact restriction of a grid quantile function to levels [lo, hi], rescaled to [0, 1].
Dist::Grid grid_subrange(const Dist::Grid& g, double lo, double hi) {
    Dist::Grid out;
    const double width = hi - lo;
    out.levels.push_back(0.0);
    out.values.push_back(grid_quantile(g, lo));
    for (std::size_t k = 0; k < g.levels.size(); ++k) {
        if (g.levels[k] > lo && g.levels[k] < hi) {
            const double level = (g.levels[k] - lo) / width;
            if (level > out.levels.back() && level < 1.0) {
                out.levels.push_back(level);
                out.values.push_back(std::max(g.values[k], out.values.back()));
            }
        }
    }
    out.levels.push_back(1.0);
    out.values.push_back(std::max(grid_quantile(g, hi), out.values.back()));
    return out;
}

}  // namespace

std::string to_string(DistKind kind) {
    switch (kind) {
        case DistKind::pareto: return "pareto";
        case DistKind::uniform: return "uniform";
        case DistKind::normal: return "normal";
        case DistKind::empirical: return "empirical";
        case DistKind::grid: return "grid";
    }
    return "unknown";
}

Dist Dist::pareto(double scale, double shape) {
    if (!(scale > 0.0 && std::isfinite(scale)) || !(shape > 0.0 && std::isfinite(shape))) {
        throw DomainError(fmt::format("pareto: need scale > 0 and shape > 0, got ({}, {})", scale, shape));
    }
    return Dist(Pareto{scale, shape, false});
}

Dist Dist::uniform(double lo, double hi) {
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) {
        throw DomainError(fmt::format("uniform: need finite lo < hi, got ({}, {})", lo, hi));
    }
    return Dist(Uniform{lo, hi});
}

Dist Dist::normal(double mean, double sd) {
    if (!std::isfinite(mean) || !(sd > 0.0 && std::isfinite(sd))) {
        throw DomainError(fmt::format("normal: need finite mean and sd > 0, got ({}, {})", mean, sd));
    }
    return Dist(Normal{mean, sd});
}

Dist Dist::empirical(std::span<const double> values, std::span<const double> weights) {
    if (values.empty()) throw DomainError("empirical: empty sample");
    if (!weights.empty() && weights.size() != values.size()) {
        throw DomainError("empirical: weights and values differ in length");
    }
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DomainError("empirical: non-finite value");
        if (!weights.empty() && !(weights[i] > 0.0 && std::isfinite(weights[i]))) {
            throw DomainError("empirical: weights must be positive and finite");
        }
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    Empirical e;
    std::vector<double> raw;
    for (std::size_t idx : order) {
        const double w = weights.empty() ? 1.0 : weights[idx];
        if (!e.values.empty() && e.values.back() == values[idx]) {
            raw.back() += w;
        } else {
            e.values.push_back(values[idx]);
            raw.push_back(w);
        }
    }
    double running = 0.0;
    const double total = std::accumulate(raw.begin(), raw.end(), 0.0);
    e.probs.reserve(raw.size());
    e.cum.reserve(raw.size());
    for (double w : raw) {
        running += w;
        e.probs.push_back(w / total);
        e.cum.push_back(running / total);
    }
    e.cum.back() = 1.0;
    return Dist(std::move(e));
}

Dist Dist::step_cdf(std::vector<double> values, std::vector<double> cum) {
    if (values.empty() || values.size() != cum.size()) throw DomainError("step_cdf: bad table");
    Empirical e;
    double prev = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) throw DomainError("step_cdf: non-finite value");
        if (i > 0 && !(values[i] > values[i - 1])) throw DomainError("step_cdf: values must increase");
        const double c = (i + 1 == values.size()) ? 1.0 : std::clamp(cum[i], prev, 1.0);
        if (c > prev) {
            e.values.push_back(values[i]);
            e.probs.push_back(c - prev);
            e.cum.push_back(c);
            prev = c;
        }
    }
    if (e.values.empty()) throw DomainError("step_cdf: no mass");
    e.cum.back() = 1.0;
    return Dist(std::move(e));
}

Dist Dist::grid(std::vector<double> levels, std::vector<double> values) {
    if (levels.size() < 2 || levels.size() != values.size()) {
        throw DomainError("grid: need at least two knots and matching lengths");
    }
    if (levels.front() != 0.0 || levels.back() != 1.0) throw DomainError("grid: levels must run from 0 to 1");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (!std::isfinite(values[k])) throw DomainError("grid: non-finite quantile value");
        if (k > 0 && !(levels[k] > levels[k - 1])) throw DomainError("grid: levels must increase strictly");
        if (k > 0 && values[k] < values[k - 1]) throw DomainError("grid: values must be nondecreasing");
    }
    return Dist(Grid{std::move(levels), std::move(values)});
}

DistKind Dist::kind() const noexcept {
    return std::visit(Overloaded{
                          [](const Pareto&) { return DistKind::pareto; },
                          [](const Uniform&) { return DistKind::uniform; },
                          [](const Normal&) { return DistKind::normal; },
                          [](const Empirical&) { return DistKind::empirical; },
                          [](const Grid&) { return DistKind::grid; },
                      },
                      rep_);
}

double Dist::cdf(double x) const {
    if (std::isnan(x)) throw DomainError("cdf: NaN argument");
    return std::visit(Overloaded{
                          [x](const Pareto& d) {
                              if (!d.reflected) return x < d.scale ? 0.0 : 1.0 - std::pow(d.scale / x, d.shape);
                              return x > -d.scale ? 1.0 : std::pow(d.scale / -x, d.shape);
                          },
                          [x](const Uniform& d) { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
                          [x](const Normal& d) {
                              if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
                              return 0.5 * std::erfc(-(x - d.mean) / (d.sd * M_SQRT2));
                          },
                          [x](const Empirical& d) {
                              const auto it = std::upper_bound(d.values.begin(), d.values.end(), x);
                              return it == d.values.begin() ? 0.0 : d.cum[static_cast<std::size_t>(it - d.values.begin()) - 1];
                          },
                          [x](const Grid& d) { return grid_cdf(d, x); },
                      },
                      rep_);
}

double Dist::support_lo() const {
    return std::visit(Overloaded{
                          [](const Pareto& d) { return d.reflected ? -kInf : d.scale; },
                          [](const Uniform& d) { return d.lo; },
                          [](const Normal&) { return -kInf; },
                          [](const Empirical& d) { return d.values.front(); },
                          [](const Grid& d) { return d.values.front(); },
                      },
                      rep_);
}

double Dist::support_hi() const {
    return std::visit(Overloaded{
                          [](const Pareto& d) { return d.reflected ? -d.scale : kInf; },
                          [](const Uniform& d) { return d.hi; },
                          [](const Normal&) { return kInf; },
                          [](const Empirical& d) { return d.values.back(); },
                          [](const Grid& d) { return d.values.back(); },
                      },
                      rep_);
}

double Dist::quantile_left(double u) const {
    require_level(u, "quantile_left");
    if (u == 0.0) return support_lo();
    return std::visit(Overloaded{
                          [u](const Pareto& d) {
                              if (!d.reflected) return u >= 1.0 ? kInf : d.scale * std::pow(1.0 - u, -1.0 / d.shape);
                              return -d.scale * std::pow(u, -1.0 / d.shape);
                          },
                          [u](const Uniform& d) { return d.lo + u * (d.hi - d.lo); },
                          [u](const Normal& d) { return d.mean + d.sd * std_normal_quantile(u); },
                          [u](const Empirical& d) {
                              const auto it = std::lower_bound(d.cum.begin(), d.cum.end(), u);
                              const std::size_t i = std::min(static_cast<std::size_t>(it - d.cum.begin()), d.values.size() - 1);
                              return d.values[i];
                          },
                          [u](const Grid& d) { return grid_quantile(d, u); },
                      },
                      rep_);
}

double Dist::quantile_right(double u) const {
    require_level(u, "quantile_right");
    if (u == 1.0) return support_hi();
    if (const auto* e = std::get_if<Empirical>(&rep_)) {
        const auto it = std::upper_bound(e->cum.begin(), e->cum.end(), u);
        const std::size_t i = std::min(static_cast<std::size_t>(it - e->cum.begin()), e->values.size() - 1);
        return e->values[i];
    }
    if (u == 0.0) return support_lo();
    // Continuous quantile functions: left and right inverses agree off the endpoints.
    return quantile_left(u);
}

std::vector<double> Dist::breakpoints(std::size_t n, double truncation_m) const {
    std::vector<double> out;
    if (const auto* e = std::get_if<Empirical>(&rep_)) return e->values;
    if (const auto* g = std::get_if<Grid>(&rep_)) {
        out = g->values;
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }
    out.reserve(n + 4);
    for (std::size_t i = 1; i <= n; ++i) {
        out.push_back(quantile_left((static_cast<double>(i) - 0.5) / static_cast<double>(n)));
    }
    const double lo = support_lo();
    const double hi = support_hi();
    out.push_back(std::isfinite(lo) ? lo : quantile_left(1.0 - truncation_m));
    out.push_back(std::isfinite(hi) ? hi : quantile_left(truncation_m));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double Dist::quantile_integral(double a, double b) const {
    require_level(a, "quantile_integral");
    require_level(b, "quantile_integral");
    if (b < a) throw DomainError("quantile_integral: b < a");
    if (a == b) return 0.0;
    return std::visit(Overloaded{
                          [a, b](const Pareto& d) {
                              if (!d.reflected) return pareto_quantile_integral(d.scale, d.shape, a, b);
                              return -pareto_quantile_integral(d.scale, d.shape, 1.0 - b, 1.0 - a);
                          },
                          [a, b](const Uniform& d) { return d.lo * (b - a) + (d.hi - d.lo) * (b * b - a * a) / 2.0; },
                          [a, b](const Normal& d) {
                              return d.mean * (b - a) + d.sd * (std_normal_pdf_at_quantile(a) - std_normal_pdf_at_quantile(b));
                          },
                          [a, b](const Empirical& d) {
                              double acc = 0.0;
                              double prev = 0.0;
                              for (std::size_t i = 0; i < d.values.size(); ++i) {
                                  const double lo = std::max(prev, a);
                                  const double hi = std::min(d.cum[i], b);
                                  if (hi > lo) acc += d.values[i] * (hi - lo);
                                  prev = d.cum[i];
                                  if (prev >= b) break;
                              }
                              return acc;
                          },
                          [a, b](const Grid& d) {
                              double acc = 0.0;
                              for (std::size_t k = 0; k + 1 < d.levels.size(); ++k) {
                                  const double lo = std::max(d.levels[k], a);
                                  const double hi = std::min(d.levels[k + 1], b);
                                  if (hi > lo) acc += (hi - lo) * 0.5 * (grid_quantile(d, lo) + grid_quantile(d, hi));
                              }
                              return acc;
                          },
                      },
                      rep_);
}

std::string Dist::describe() const {
    return std::visit(Overloaded{
                          [](const Pareto& d) {
                              return fmt::format("{}pareto(scale={}, shape={})", d.reflected ? "-" : "", d.scale, d.shape);
                          },
                          [](const Uniform& d) { return fmt::format("uniform({}, {})", d.lo, d.hi); },
                          [](const Normal& d) { return fmt::format("normal({}, {})", d.mean, d.sd); },
                          [](const Empirical& d) { return fmt::format("empirical({} atoms)", d.values.size()); },
                          [](const Grid& d) { return fmt::format("grid({} knots)", d.levels.size()); },
                      },
                      rep_);
}

// ---------------------------------------------------------------------------

double cdf_eval(const Dist& d, double x) { return d.cdf(x); }
double quantile_left(const Dist& d, double u) { return d.quantile_left(u); }
double quantile_right(const Dist& d, double u) { return d.quantile_right(u); }

Dist empirical_from_samples(std::span<const double> values, std::span<const double> weights) {
    return Dist::empirical(values, weights);
}

namespace {

// Quantile table of d over the level window [lo, hi] with interior knots at
// midpoint levels. Infinite ends are replaced by the quantile at the
// truncation level of the window.
Dist tabulate(const Dist& d, double lo, double hi, const GridSpec& spec) {
    if (spec.n < 1) throw DomainError("grid: n must be positive");
    const std::size_t n = spec.n;
    const double width = hi - lo;
    std::vector<double> levels;
    std::vector<double> values;
    levels.reserve(n + 2);
    values.reserve(n + 2);
    levels.push_back(0.0);
    values.push_back(d.quantile_right(lo));
    for (std::size_t i = 1; i <= n; ++i) {
        const double u = (static_cast<double>(i) - 0.5) / static_cast<double>(n);
        levels.push_back(u);
        values.push_back(d.quantile_left(lo + width * u));
    }
    levels.push_back(1.0);
    values.push_back(d.quantile_left(hi));

    if (!std::isfinite(values.front())) {
        values.front() = std::min(d.quantile_left(lo + width * (1.0 - spec.truncation_m)), values[1]);
    }
    if (!std::isfinite(values.back())) {
        values.back() = std::max(d.quantile_left(lo + width * spec.truncation_m), values[values.size() - 2]);
    }
    for (std::size_t k = 1; k < values.size(); ++k) values[k] = std::max(values[k], values[k - 1]);
    return Dist::grid(std::move(levels), std::move(values));
}

}  // namespace

Dist to_grid(const Dist& d, const GridSpec& spec) {
    if (d.as_grid() != nullptr) return d;
    return tabulate(d, 0.0, 1.0, spec);
}

Dist upper_tail(const Dist& d, double p, const GridSpec& spec) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError(fmt::format("upper_tail: p = {} outside [0, 1)", p));
    if (p == 0.0) return d;
    if (const auto* e = d.as_empirical()) {
        std::vector<double> values;
        std::vector<double> cum;
        for (std::size_t i = 0; i < e->values.size(); ++i) {
            const double c = std::max(e->cum[i] - p, 0.0) / (1.0 - p);
            if (c > 1e-14) {
                values.push_back(e->values[i]);
                cum.push_back(c);
            }
        }
        return Dist::step_cdf(std::move(values), std::move(cum));
    }
    if (const auto* g = d.as_grid()) {
        Dist::Grid sub = grid_subrange(*g, p, 1.0);
        return Dist::grid(std::move(sub.levels), std::move(sub.values));
    }
    return tabulate(d, p, 1.0, spec);
}

Dist lower_tail(const Dist& d, double p, const GridSpec& spec) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError(fmt::format("lower_tail: p = {} outside (0, 1]", p));
    if (p == 1.0) return d;
    if (const auto* e = d.as_empirical()) {
        std::vector<double> values;
        std::vector<double> cum;
        for (std::size_t i = 0; i < e->values.size(); ++i) {
            values.push_back(e->values[i]);
            cum.push_back(std::min(e->cum[i], p) / p);
            if (e->cum[i] >= p) break;
        }
        return Dist::step_cdf(std::move(values), std::move(cum));
    }
    if (const auto* g = d.as_grid()) {
        Dist::Grid sub = grid_subrange(*g, 0.0, p);
        return Dist::grid(std::move(sub.levels), std::move(sub.values));
    }
    return tabulate(d, 0.0, p, spec);
}

Dist negate_dist(const Dist& d) {
    return std::visit(Overloaded{
                          [](const Dist::Pareto& x) { return Dist(Dist::Pareto{x.scale, x.shape, !x.reflected}); },
                          [](const Dist::Uniform& x) { return Dist::uniform(-x.hi, -x.lo); },
                          [](const Dist::Normal& x) { return Dist::normal(-x.mean, x.sd); },
                          [](const Dist::Empirical& x) {
                              std::vector<double> values(x.values.rbegin(), x.values.rend());
                              std::vector<double> probs(x.probs.rbegin(), x.probs.rend());
                              for (double& v : values) v = -v;
                              return Dist::empirical(values, probs);
                          },
                          [](const Dist::Grid& x) {
                              std::vector<double> levels(x.levels.size());
                              std::vector<double> values(x.values.size());
                              const std::size_t k = x.levels.size();
                              for (std::size_t i = 0; i < k; ++i) {
                                  levels[i] = 1.0 - x.levels[k - 1 - i];
                                  values[i] = -x.values[k - 1 - i];
                              }
                              return Dist::grid(std::move(levels), std::move(values));
                          },
                      },
                      d.rep_);
}

double es_eval(const Dist& d, double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("es_eval: p = {} outside (0, 1)", p));
    return d.quantile_integral(p, 1.0) / (1.0 - p);
}

double rvar_eval(const Dist& d, double p, double q) {
    if (!(p >= 0.0 && p < q && q < 1.0)) {
        throw DomainError(fmt::format("rvar_eval: need 0 <= p < q < 1, got ({}, {})", p, q));
    }
    return d.quantile_integral(p, q) / (q - p);
}

}  // namespace ordagg
