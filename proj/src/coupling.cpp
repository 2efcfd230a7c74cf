#include "ordagg/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "numeric.hpp"
#include "ordagg/errors.hpp"

namespace ordagg {

namespace {

constexpr std::size_t npos = static_cast<std::size_t>(-1);

}  // namespace

DirectionalPair::DirectionalPair(Dist f, Dist g, const PairOptions& opt) : f_(std::move(f)), g_(std::move(g)) {
    z_ = merged_grid(f_, g_, std::max<std::size_t>(opt.grid_n, 2), opt.truncation_m);
    h_.resize(z_.size());
    double worst = 0.0;
    double witness = 0.0;
    for (std::size_t i = 0; i < z_.size(); ++i) {
        h_[i] = gap(z_[i]);
        if (h_[i] < worst) {
            worst = h_[i];
            witness = z_[i];
        }
    }
    const double tol = opt.order_tol.value_or(default_order_tolerance(f_, g_, opt.grid_n));
    if (-worst > tol) {
        throw OrderViolation(fmt::format("F <=_st G fails: F - G = {} at t = {}", worst, witness), -worst, witness);
    }
    while (leaves_ < z_.size()) leaves_ *= 2;
    tree_.assign(2 * leaves_, kInf);
    std::copy(h_.begin(), h_.end(), tree_.begin() + static_cast<std::ptrdiff_t>(leaves_));
    for (std::size_t i = leaves_ - 1; i >= 1; --i) tree_[i] = std::min(tree_[2 * i], tree_[2 * i + 1]);
}

std::size_t DirectionalPair::descend(std::size_t node, std::size_t lo, std::size_t hi, std::size_t start,
                                     double target) const {
    if (hi <= start || !(tree_[node] < target)) return npos;
    if (hi - lo == 1) return lo;
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t r = descend(2 * node, lo, mid, start, target);
    if (r != npos) return r;
    return descend(2 * node + 1, mid, hi, start, target);
}

std::size_t DirectionalPair::first_below(std::size_t start, double target) const {
    if (start >= z_.size()) return npos;
    return descend(1, 0, leaves_, start, target);
}

double DirectionalPair::range_min(std::size_t i, std::size_t j) const {
    double m = kInf;
    std::size_t lo = i + leaves_;
    std::size_t hi = j + leaves_ + 1;
    while (lo < hi) {
        if (lo & 1U) m = std::min(m, tree_[lo++]);
        if (hi & 1U) m = std::min(m, tree_[--hi]);
        lo /= 2;
        hi /= 2;
    }
    return m;
}

double DirectionalPair::transport_upper(double x) const {
    if (std::isnan(x)) throw DomainError("transport_upper: NaN argument");
    if (x == kInf) return kInf;
    const double target = gap(x) - kGapEps;
    const std::size_t start = static_cast<std::size_t>(std::upper_bound(z_.begin(), z_.end(), x) - z_.begin());
    const std::size_t j = first_below(start, target);
    double lo = x;
    double hi = kInf;
    if (j != npos) {
        hi = z_[j];
        if (j > start) lo = z_[j - 1];
    } else {
        // H(+inf) = 0; a crossing past the last knot needs an unbounded support.
        if (!(0.0 < target) || !std::isinf(std::max(f_.support_hi(), g_.support_hi()))) return kInf;
        lo = std::max(x, z_.empty() ? x : z_.back());
        double step = std::max(1.0, std::abs(lo));
        for (int it = 0; it < 2000; ++it) {
            const double cand = lo + step;
            if (!std::isfinite(cand)) return kInf;
            if (gap(cand) < target) {
                hi = cand;
                break;
            }
            lo = cand;
            step *= 2.0;
        }
        if (!std::isfinite(hi)) return kInf;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (gap(mid) < target) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double DirectionalPair::inf_gap(double a, double b) const {
    if (std::isnan(a) || std::isnan(b)) throw DomainError("inf_gap: NaN argument");
    if (b < a) throw DomainError("inf_gap: empty interval");
    double best = std::min(gap(a), gap(b));
    const std::size_t i = static_cast<std::size_t>(std::lower_bound(z_.begin(), z_.end(), a) - z_.begin());
    const std::size_t j1 = static_cast<std::size_t>(std::upper_bound(z_.begin(), z_.end(), b) - z_.begin());
    if (i < j1) {
        const double m = range_min(i, j1 - 1);
        if (m < best) {
            best = m;
            if (f_.is_continuous() && g_.is_continuous()) {
                // Locate the minimizing knot and polish between its neighbours.
                const auto it = std::find(h_.begin() + static_cast<std::ptrdiff_t>(i), h_.begin() + static_cast<std::ptrdiff_t>(j1), m);
                const std::size_t k = static_cast<std::size_t>(it - h_.begin());
                const double lo = std::max(a, k > 0 ? z_[k - 1] : a);
                const double hi = std::min(b, k + 1 < z_.size() ? z_[k + 1] : b);
                if (hi > lo) {
                    const auto r = detail::scan_minimize([this](double z) { return gap(z); }, lo, hi, 8);
                    best = std::min(best, r.value);
                }
            }
        }
    }
    return best;
}

double DirectionalPair::dl_cdf(double x, double y) const {
    if (y <= x) return g_.cdf(y);
    return std::clamp(f_.cdf(x) - inf_gap(x, y), 0.0, 1.0);
}

double transport_upper(const Dist& f, const Dist& g, double x, const PairOptions& opt) {
    return DirectionalPair(f, g, opt).transport_upper(x);
}

double transport_lower(const Dist& f, const Dist& g, double x, const PairOptions& opt) {
    return -DirectionalPair(negate_dist(g), negate_dist(f), opt).transport_upper(-x);
}

double dl_cdf(const Dist& f, const Dist& g, double x, double y, const PairOptions& opt) {
    return DirectionalPair(f, g, opt).dl_cdf(x, y);
}

// ---------------------------------------------------------------------------

namespace {

// Quantile at level index i of the plan grid: level lo + (hi - lo)(n - i)/n, i = 1..n.
// The bottom level takes the right quantile (the tail's ess-inf).
double plan_quantile(const Dist& d, std::size_t i, std::size_t n, double lo, double hi) {
    const double width = hi - lo;
    if (i == n) {
        const double v = d.quantile_right(lo);
        if (std::isfinite(v)) return v;
        return d.quantile_left(lo + width / (2.0 * static_cast<double>(n)));
    }
    const double level = lo + width * static_cast<double>(n - i) / static_cast<double>(n);
    return d.quantile_left(level);
}

DlPlan plan_on_levels(const Dist& f, const Dist& g, std::size_t n, double lo, double hi) {
    if (n < 1) throw DomainError("dl plan: n must be positive");
    const double width = hi - lo;
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 1; i <= n; ++i) {
        xs[i - 1] = plan_quantile(f, i, n, lo, hi);
        ys[i - 1] = plan_quantile(g, i, n, lo, hi);
    }
    auto cell_of = [&](std::size_t idx) { return lo + width * static_cast<double>(n - 1 - idx) / static_cast<double>(n); };

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
    std::vector<double> sorted_y(n);
    for (std::size_t r = 0; r < n; ++r) sorted_y[r] = ys[order[r]];

    // next_free[r]: smallest unused rank >= r (path-compressed); n means none.
    std::vector<std::size_t> next_free(n + 1);
    std::iota(next_free.begin(), next_free.end(), std::size_t{0});
    auto find = [&](std::size_t r) {
        std::size_t root = r;
        while (next_free[root] != root) root = next_free[root];
        while (next_free[r] != root) {
            const std::size_t nx = next_free[r];
            next_free[r] = root;
            r = nx;
        }
        return root;
    };

    // xs is already in decreasing order of level, i.e. decreasing x.
    DlPlan plan;
    plan.n = n;
    plan.level_lo = lo;
    plan.level_hi = hi;
    plan.pairs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double x = xs[k];
        const std::size_t start = static_cast<std::size_t>(std::lower_bound(sorted_y.begin(), sorted_y.end(), x) - sorted_y.begin());
        const std::size_t r = find(start);
        if (r >= n) {
            throw InfeasiblePlan(fmt::format("dl plan: no unused target y >= x = {} at step {} of {}", x, k + 1, n));
        }
        next_free[r] = r + 1;
        const std::size_t yi = order[r];
        const double y = ys[yi];
        plan.pairs.push_back({x, y, x == y ? PairTag::common : PairTag::singular, yi, cell_of(k), cell_of(yi)});
    }
    return plan;
}

}  // namespace

DlPlan dl_plan_discrete(const Dist& f, const Dist& g, std::size_t n, double p) {
    if (!(p >= 0.0 && p < 1.0)) throw DomainError(fmt::format("dl_plan_discrete: p = {} outside [0, 1)", p));
    DlPlan plan = plan_on_levels(f, g, n, p, 1.0);
    plan.source_level = p;
    plan.tail = PlanTail::upper;
    return plan;
}

DlPlan dl_plan_lower_tail(const Dist& f, const Dist& g, std::size_t n, double q) {
    if (!(q > 0.0 && q <= 1.0)) throw DomainError(fmt::format("dl_plan_lower_tail: q = {} outside (0, 1]", q));
    const DlPlan hat = plan_on_levels(negate_dist(g), negate_dist(f), n, 1.0 - q, 1.0);
    const double cell = q / static_cast<double>(n);
    DlPlan plan;
    plan.n = n;
    plan.source_level = q;
    plan.tail = PlanTail::lower;
    plan.level_lo = 0.0;
    plan.level_hi = q;
    plan.pairs.reserve(n);
    for (const PlanPair& h : hat.pairs) {
        const double x = -h.y;
        const double y = -h.x;
        plan.pairs.push_back({x, y, x == y ? PairTag::common : PairTag::singular, h.y_index,
                              std::max(0.0, 1.0 - h.y_cell - cell), std::max(0.0, 1.0 - h.x_cell - cell)});
    }
    return plan;
}

std::vector<double> plan_sums_sorted(const DlPlan& plan) {
    std::vector<double> s;
    s.reserve(plan.pairs.size());
    for (const PlanPair& pr : plan.pairs) s.push_back(pr.x + pr.y);
    std::sort(s.begin(), s.end());
    return s;
}

double dl_sum_cdf(const DlPlan& plan, double t) {
    if (plan.pairs.empty()) return 0.0;
    std::size_t count = 0;
    for (const PlanPair& pr : plan.pairs) {
        if (pr.x + pr.y <= t) ++count;
    }
    return static_cast<double>(count) / static_cast<double>(plan.pairs.size());
}

double sorted_left_quantile(std::span<const double> sorted, double u) {
    if (sorted.empty()) throw DomainError("sorted_left_quantile: empty sample");
    if (!(u >= 0.0 && u <= 1.0)) throw DomainError("sorted_left_quantile: level outside [0, 1]");
    const double n = static_cast<double>(sorted.size());
    const double k = std::ceil(u * n - 1e-9);
    const std::size_t idx = k <= 0.0 ? 0 : std::min(sorted.size() - 1, static_cast<std::size_t>(k) - 1);
    return sorted[idx];
}

double lower_fraction_mean(std::span<const double> sorted, double a) {
    if (sorted.empty()) throw DomainError("lower_fraction_mean: empty sample");
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("lower_fraction_mean: fraction outside (0, 1]");
    const double mass = a * static_cast<double>(sorted.size());
    const std::size_t whole = std::min(sorted.size(), static_cast<std::size_t>(std::floor(mass)));
    double acc = 0.0;
    for (std::size_t i = 0; i < whole; ++i) acc += sorted[i];
    const double rest = mass - static_cast<double>(whole);
    if (rest > 0.0 && whole < sorted.size()) acc += rest * sorted[whole];
    return acc / mass;
}

double upper_fraction_mean(std::span<const double> sorted, double a) {
    if (sorted.empty()) throw DomainError("upper_fraction_mean: empty sample");
    if (!(a > 0.0 && a <= 1.0)) throw DomainError("upper_fraction_mean: fraction outside (0, 1]");
    std::vector<double> neg(sorted.rbegin(), sorted.rend());
    for (double& v : neg) v = -v;
    return -lower_fraction_mean(neg, a);
}

// ---------------------------------------------------------------------------

std::string to_string(CouplingKind kind) {
    switch (kind) {
        case CouplingKind::comonotone: return "comonotone";
        case CouplingKind::countermonotone: return "countermonotone";
        case CouplingKind::dl: return "dl";
    }
    return "unknown";
}

CouplingKind coupling_kind_from_string(const std::string& name) {
    if (name == "comonotone") return CouplingKind::comonotone;
    if (name == "countermonotone") return CouplingKind::countermonotone;
    if (name == "dl") return CouplingKind::dl;
    throw DomainError(fmt::format("unknown coupling kind '{}'", name));
}

namespace {

// Uniform on (0, 1) from the top 53 bits.
double open_uniform(std::mt19937_64& rng) {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(rng()) * n;
    return static_cast<std::size_t>(prod >> 64);
}

}  // namespace

SampleBatch sample_plan(const DlPlan& plan, std::size_t size, std::uint64_t seed, const Dist* f, const Dist* g,
                        bool jitter) {
    if (plan.pairs.empty()) throw DomainError("sample_plan: empty plan");
    if (jitter && (f == nullptr || g == nullptr)) throw DomainError("sample_plan: jitter needs both marginals");
    std::mt19937_64 rng(seed);
    SampleBatch b;
    b.kind = CouplingKind::dl;
    b.seed = seed;
    b.size = size;
    b.x.reserve(size);
    b.y.reserve(size);
    const double cell = (plan.level_hi - plan.level_lo) / static_cast<double>(plan.n);
    for (std::size_t j = 0; j < size; ++j) {
        const PlanPair& pr = plan.pairs[uniform_index(rng, plan.pairs.size())];
        if (!jitter) {
            b.x.push_back(pr.x);
            b.y.push_back(pr.y);
            continue;
        }
        const double w = open_uniform(rng);
        const double xv = f->quantile_left(std::min(1.0, pr.x_cell + w * cell));
        const double yv = g->quantile_left(std::min(1.0, pr.y_cell + w * cell));
        b.x.push_back(std::min(xv, yv));
        b.y.push_back(yv);
    }
    return b;
}

SampleBatch sample_coupling(const Dist& f, const Dist& g, CouplingKind kind, std::size_t size, std::uint64_t seed,
                            const SampleOptions& opt) {
    if (kind == CouplingKind::dl) {
        const DlPlan plan = dl_plan_discrete(f, g, opt.plan_n, 0.0);
        return sample_plan(plan, size, seed, &f, &g, opt.jitter);
    }
    std::mt19937_64 rng(seed);
    SampleBatch b;
    b.kind = kind;
    b.seed = seed;
    b.size = size;
    b.x.reserve(size);
    b.y.reserve(size);
    for (std::size_t j = 0; j < size; ++j) {
        const double u = open_uniform(rng);
        b.x.push_back(f.quantile_left(u));
        b.y.push_back(g.quantile_left(kind == CouplingKind::comonotone ? u : 1.0 - u));
    }
    return b;
}

}  // namespace ordagg
