#include "ordagg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <fmt/format.h>

#include "numeric.hpp"
#include "ordagg/errors.hpp"

namespace ordagg {

namespace {

void require_p(double p, const char* what) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError(fmt::format("{}: p = {} outside (0, 1)", what, p));
}

void require_order(const Dist& f, const Dist& g, const BoundOptions& opt) {
    const double tol = opt.order_tol.value_or(default_order_tolerance(f, g, opt.grid_n));
    const OrderCheckReport rep = check_st(f, g, std::max<std::size_t>(opt.grid_n, 2), tol);
    if (!rep.holds) {
        throw OrderViolation(fmt::format("F <=_st G fails: violation {} at t = {}", rep.max_violation, rep.witness),
                             rep.max_violation, rep.witness);
    }
}

double clamp_level(double u) { return std::clamp(u, 0.0, 1.0); }

double min_plan_sum(const DlPlan& plan) {
    double m = kInf;
    for (const PlanPair& pr : plan.pairs) m = std::min(m, pr.x + pr.y);
    return m;
}

double max_plan_sum(const DlPlan& plan) {
    double m = -kInf;
    for (const PlanPair& pr : plan.pairs) m = std::max(m, pr.x + pr.y);
    return m;
}

// Countermonotone sums over the level window [lo, hi] at n midpoint levels, sorted.
std::vector<double> countermonotone_sums(const Dist& f, const Dist& g, double lo, double hi, std::size_t n) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = detail::mid_level(lo, hi, i, n);
        const double v = detail::mid_level(lo, hi, n - 1 - i, n);
        s[i] = f.quantile_left(u) + g.quantile_left(v);
    }
    std::sort(s.begin(), s.end());
    return s;
}

// sup{p in (0, 1) : fn(p) <= t} for nondecreasing fn, by bisection in p.
double invert_nondecreasing(const std::function<double(double)>& fn, double t) {
    constexpr double edge = 1e-7;
    double lo = edge;
    double hi = 1.0 - edge;
    if (fn(lo) > t) return 0.0;
    if (fn(hi) <= t) return 1.0;
    while (hi - lo > 1e-7) {
        const double mid = 0.5 * (lo + hi);
        if (fn(mid) <= t) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

bool infinite(double v) { return std::isinf(v); }

}  // namespace

// ---------------------------------------------------------------------------

double worst_ess_inf_constrained(const Dist& f, const Dist& g, const BoundOptions& opt) {
    if (!f.is_continuous() || !g.is_continuous()) {
        require_order(f, g, opt);
        return min_plan_sum(dl_plan_discrete(f, g, opt.grid_n, 0.0));
    }
    const double b = g.quantile_right(0.0);
    double a = f.quantile_right(0.0);
    DirectionalPair pair(f, g, opt.pair());
    if (b == -kInf) return -kInf;
    if (a >= b) return 2.0 * b;
    if (a == -kInf) {
        a = pair.knots().front();
        if (a >= b) return 2.0 * b;
    }
    const auto m = detail::scan_minimize([&pair](double x) { return pair.transport_upper(x) + x; }, a, b,
                                         opt.scan_points);
    return std::min(m.value, 2.0 * b);
}

double best_ess_sup_constrained(const Dist& f, const Dist& g, const BoundOptions& opt) {
    return -worst_ess_inf_constrained(negate_dist(g), negate_dist(f), opt);
}

double worst_ess_inf_unconstrained(const Dist& f, const Dist& g, const BoundOptions& opt) {
    auto obj = [&](double x) { return f.quantile_left(clamp_level(x)) + g.quantile_left(clamp_level(1.0 - x)); };
    return detail::scan_minimize(obj, 0.0, 1.0, opt.grid_n).value;
}

double best_ess_sup_unconstrained(const Dist& f, const Dist& g, const BoundOptions& opt) {
    auto obj = [&](double x) { return f.quantile_left(clamp_level(x)) + g.quantile_left(clamp_level(1.0 - x)); };
    return detail::scan_maximize(obj, 0.0, 1.0, opt.grid_n).value;
}

double worst_var_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "worst_var_constrained");
    require_order(f, g, opt);
    if (!f.is_continuous() || !g.is_continuous()) return min_plan_sum(dl_plan_discrete(f, g, opt.grid_n, p));
    return worst_ess_inf_constrained(upper_tail(f, p, opt.grid()), upper_tail(g, p, opt.grid()), opt);
}

double best_var_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "best_var_constrained");
    require_order(f, g, opt);
    if (!f.is_continuous() || !g.is_continuous()) return max_plan_sum(dl_plan_lower_tail(f, g, opt.grid_n, p));
    return best_ess_sup_constrained(lower_tail(f, p, opt.grid()), lower_tail(g, p, opt.grid()), opt);
}

double worst_var_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "worst_var_unconstrained");
    auto obj = [&](double x) { return f.quantile_left(clamp_level(p + x)) + g.quantile_left(clamp_level(1.0 - x)); };
    return detail::scan_minimize(obj, 0.0, 1.0 - p, opt.grid_n).value;
}

double best_var_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "best_var_unconstrained");
    auto obj = [&](double x) { return f.quantile_left(clamp_level(x)) + g.quantile_left(clamp_level(p - x)); };
    return detail::scan_maximize(obj, 0.0, p, opt.grid_n).value;
}

double worst_es_constrained(const Dist& f, const Dist& g, double p) {
    require_p(p, "worst_es_constrained");
    return es_eval(f, p) + es_eval(g, p);
}

double best_es_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "best_es_constrained");
    require_order(f, g, opt);
    if (infinite(es_eval(f, p)) || infinite(es_eval(g, p))) return kInf;
    const std::vector<double> sums = plan_sums_sorted(dl_plan_discrete(f, g, opt.grid_n, 0.0));
    return upper_fraction_mean(sums, 1.0 - p);
}

double best_es_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "best_es_unconstrained");
    if (infinite(es_eval(f, p)) || infinite(es_eval(g, p))) return kInf;
    return upper_fraction_mean(countermonotone_sums(f, g, 0.0, 1.0, opt.grid_n), 1.0 - p);
}

namespace {

void require_pq(double p, double q, bool strict_p, const char* what) {
    const bool ok_p = strict_p ? p > 0.0 : p >= 0.0;
    if (!(ok_p && p < q && q < 1.0)) throw DomainError(fmt::format("{}: bad levels p = {}, q = {}", what, p, q));
}

}  // namespace

double worst_rvar_constrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt) {
    require_pq(p, q, false, "worst_rvar_constrained");
    require_order(f, g, opt);
    const double a = 1.0 - (1.0 - q) / (1.0 - p);
    return lower_fraction_mean(plan_sums_sorted(dl_plan_discrete(f, g, opt.grid_n, p)), a);
}

double best_rvar_constrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt) {
    require_pq(p, q, true, "best_rvar_constrained");
    require_order(f, g, opt);
    return upper_fraction_mean(plan_sums_sorted(dl_plan_lower_tail(f, g, opt.grid_n, q)), 1.0 - p / q);
}

double worst_rvar_unconstrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt) {
    require_pq(p, q, false, "worst_rvar_unconstrained");
    const double a = 1.0 - (1.0 - q) / (1.0 - p);
    return lower_fraction_mean(countermonotone_sums(f, g, p, 1.0, opt.grid_n), a);
}

double best_rvar_unconstrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt) {
    require_pq(p, q, true, "best_rvar_unconstrained");
    return upper_fraction_mean(countermonotone_sums(f, g, 0.0, q, opt.grid_n), 1.0 - p / q);
}

// ---------------------------------------------------------------------------

double prob_upper(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    require_order(f, g, opt);
    return invert_nondecreasing([&](double p) { return best_var_constrained(f, g, p, opt); }, t);
}

double prob_lower(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    require_order(f, g, opt);
    return invert_nondecreasing([&](double p) { return worst_var_constrained(f, g, p, opt); }, t);
}

double prob_upper_unconstrained(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    return invert_nondecreasing([&](double p) { return best_var_unconstrained(f, g, p, opt); }, t);
}

double prob_lower_unconstrained(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    return invert_nondecreasing([&](double p) { return worst_var_unconstrained(f, g, p, opt); }, t);
}

double var_dl_sum(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "var_dl_sum");
    return sorted_left_quantile(plan_sums_sorted(dl_plan_discrete(f, g, opt.grid_n, 0.0)), p);
}

double var_countermonotone_sum(const Dist& f, const Dist& g, double p, const BoundOptions& opt) {
    require_p(p, "var_countermonotone_sum");
    return sorted_left_quantile(countermonotone_sums(f, g, 0.0, 1.0, opt.grid_n), p);
}

double prob_dl_sum(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    return dl_sum_cdf(dl_plan_discrete(f, g, opt.grid_n, 0.0), t);
}

double prob_countermonotone_sum(const Dist& f, const Dist& g, double t, const BoundOptions& opt) {
    const std::vector<double> s = countermonotone_sums(f, g, 0.0, 1.0, opt.grid_n);
    const auto it = std::upper_bound(s.begin(), s.end(), t);
    return static_cast<double>(it - s.begin()) / static_cast<double>(s.size());
}

// ---------------------------------------------------------------------------

std::optional<DuReduction> du_reduction(double lower, double upper, double lower_o, double upper_o) {
    for (double v : {lower, upper, lower_o, upper_o}) {
        if (std::isnan(v)) throw DomainError("du_reduction: NaN input");
    }
    if (infinite(lower) || infinite(upper) || infinite(lower_o) || infinite(upper_o)) return std::nullopt;
    if (!(upper > lower)) throw DegenerateSpread(fmt::format("du_reduction: U = {} <= L = {}", upper, lower));
    const double spread = upper - lower;
    DuReduction d;
    d.r_lower = (lower_o - lower) / spread;
    d.r_upper = (upper - upper_o) / spread;
    d.r = d.r_lower + d.r_upper;
    return d;
}

std::string to_string(Measure m) {
    switch (m) {
        case Measure::ess_inf: return "ess_inf";
        case Measure::ess_sup: return "ess_sup";
        case Measure::var: return "var";
        case Measure::es: return "es";
        case Measure::rvar: return "rvar";
        case Measure::prob: return "prob";
    }
    return "unknown";
}

std::string to_string(Attaining a) {
    switch (a) {
        case Attaining::dl_upper_tail: return "dl_upper_tail";
        case Attaining::dl_lower_tail: return "dl_lower_tail";
        case Attaining::comonotone: return "comonotone";
        case Attaining::countermonotone_tail: return "countermonotone_tail";
    }
    return "unknown";
}

Measure measure_from_string(const std::string& name) {
    if (name == "ess_inf" || name == "essinf") return Measure::ess_inf;
    if (name == "ess_sup" || name == "esssup") return Measure::ess_sup;
    if (name == "var") return Measure::var;
    if (name == "es") return Measure::es;
    if (name == "rvar") return Measure::rvar;
    if (name == "prob") return Measure::prob;
    throw DomainError(fmt::format("unknown measure '{}'", name));
}

BoundReport bound_report(const Dist& f, const Dist& g, Measure measure, const Levels& levels, const BoundOptions& opt) {
    BoundReport r;
    r.measure = measure;
    r.level = levels;
    r.grid_n = opt.grid_n;
    r.truncation_m = opt.truncation_m;
    const double p = levels.p;
    switch (measure) {
        case Measure::ess_inf:
            r.constrained_worst = worst_ess_inf_constrained(f, g, opt);
            r.constrained_best = f.quantile_right(0.0) + g.quantile_right(0.0);
            r.unconstrained_worst = worst_ess_inf_unconstrained(f, g, opt);
            r.unconstrained_best = r.constrained_best;
            r.attaining_worst = Attaining::dl_upper_tail;
            r.attaining_best = Attaining::comonotone;
            break;
        case Measure::ess_sup:
            r.constrained_worst = f.quantile_left(1.0) + g.quantile_left(1.0);
            r.constrained_best = best_ess_sup_constrained(f, g, opt);
            r.unconstrained_worst = r.constrained_worst;
            r.unconstrained_best = best_ess_sup_unconstrained(f, g, opt);
            r.attaining_worst = Attaining::comonotone;
            r.attaining_best = Attaining::dl_lower_tail;
            break;
        case Measure::var:
            r.constrained_worst = worst_var_constrained(f, g, p, opt);
            r.constrained_best = best_var_constrained(f, g, p, opt);
            r.unconstrained_worst = worst_var_unconstrained(f, g, p, opt);
            r.unconstrained_best = best_var_unconstrained(f, g, p, opt);
            r.attaining_worst = Attaining::dl_upper_tail;
            r.attaining_best = Attaining::dl_lower_tail;
            break;
        case Measure::es:
            r.constrained_worst = worst_es_constrained(f, g, p);
            r.constrained_best = best_es_constrained(f, g, p, opt);
            r.unconstrained_worst = r.constrained_worst;
            r.unconstrained_best = best_es_unconstrained(f, g, p, opt);
            r.attaining_worst = Attaining::comonotone;
            r.attaining_best = Attaining::dl_upper_tail;
            break;
        case Measure::rvar: {
            if (!levels.q) throw DomainError("bound_report: rvar needs q");
            const double q = *levels.q;
            r.constrained_worst = worst_rvar_constrained(f, g, p, q, opt);
            r.constrained_best = best_rvar_constrained(f, g, p, q, opt);
            r.unconstrained_worst = worst_rvar_unconstrained(f, g, p, q, opt);
            r.unconstrained_best = best_rvar_unconstrained(f, g, p, q, opt);
            r.attaining_worst = Attaining::dl_upper_tail;
            r.attaining_best = Attaining::dl_lower_tail;
            break;
        }
        case Measure::prob: {
            if (!levels.t) throw DomainError("bound_report: prob needs t");
            const double t = *levels.t;
            r.constrained_worst = prob_upper(f, g, t, opt);
            r.constrained_best = prob_lower(f, g, t, opt);
            r.unconstrained_worst = prob_upper_unconstrained(f, g, t, opt);
            r.unconstrained_best = prob_lower_unconstrained(f, g, t, opt);
            r.attaining_worst = Attaining::dl_lower_tail;
            r.attaining_best = Attaining::dl_upper_tail;
            break;
        }
    }
    // Scan-and-polish leaves constrained values a hair outside the unconstrained ones at kinks.
    auto snap = [](double& inner, double outer, bool below) {
        if (!std::isfinite(inner) || !std::isfinite(outer)) return;
        const double slack = 1e-6 * std::max(1.0, std::abs(outer));
        if (below ? (inner > outer && inner - outer <= slack) : (inner < outer && outer - inner <= slack)) inner = outer;
    };
    snap(r.constrained_worst, r.unconstrained_worst, true);
    snap(r.constrained_best, r.unconstrained_best, false);
    if (r.unconstrained_worst > r.unconstrained_best) {
        r.du = du_reduction(r.unconstrained_best, r.unconstrained_worst, r.constrained_best, r.constrained_worst);
    }
    return r;
}

}  // namespace ordagg
