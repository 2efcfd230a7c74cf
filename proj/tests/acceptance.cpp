// Acceptance suite: one PASS/FAIL line per criterion.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "helpers.hpp"
#include "ordagg/bounds.hpp"
#include "ordagg/coupling.hpp"
#include "ordagg/dist.hpp"
#include "ordagg/oracle.hpp"

using namespace ordagg;

namespace {

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;

    void expect(bool ok, std::string note) {
        pass = pass && ok;
        notes.push_back((ok ? "" : "!! ") + std::move(note));
    }
};

struct Family {
    std::string name;
    Dist f;
    Dist g;
};

std::vector<Family> reference_families() {
    return {
        {"uniform G1", Dist::uniform(0, 100), Dist::uniform(0, 120)},
        {"uniform G2", Dist::uniform(0, 100), Dist::uniform(0, 140)},
        {"uniform G3", Dist::uniform(0, 100), Dist::uniform(0, 160)},
        {"pareto G1", Dist::pareto(25, 2), Dist::pareto(30, 2)},
        {"pareto G2", Dist::pareto(25, 2), Dist::pareto(35, 2)},
        {"pareto G3", Dist::pareto(25, 2), Dist::pareto(40, 2)},
    };
}

std::vector<double> sums_of(const SampleBatch& b) {
    std::vector<double> s(b.x.size());
    for (std::size_t j = 0; j < s.size(); ++j) s[j] = b.x[j] + b.y[j];
    return s;
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

double stderr_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    const double n = static_cast<double>(v.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

const Dist kParF = testutil::pareto_f();
const Dist kParG = testutil::pareto_g();

Outcome c1() {
    Outcome o;
    const DlPlan plan = dl_plan_discrete(kParF, kParG, 100000, 0.0);
    for (double c : {4.5, 5.0, 6.0, 8.0, 16.0}) {
        const double err = std::abs(dl_sum_cdf(plan, c) - testutil::pareto_dl_sum_cdf(c));
        o.expect(err <= 5e-3, fmt::format("c={} err={:.2e}", c, err));
    }
    return o;
}

Outcome c2() {
    Outcome o;
    const double closed = worst_ess_inf_constrained(kParF, kParG);
    o.expect(closed == 4.0, fmt::format("closed form {}", closed));
    BoundOptions opt;
    opt.grid_n = 100000;
    const DlPlan plan = dl_plan_discrete(kParF, kParG, opt.grid_n, 0.0);
    double lo = kInf;
    for (const PlanPair& pr : plan.pairs) lo = std::min(lo, pr.x + pr.y);
    o.expect(std::abs(lo - 4.0) <= 1e-3, fmt::format("grid route {:.6f}", lo));
    const double unc = worst_ess_inf_unconstrained(kParF, kParG, opt);
    o.expect(std::abs(unc - (3.0 + 2.0 * std::sqrt(2.0))) <= 1e-4, fmt::format("unconstrained {:.8f}", unc));
    const double co = bound_report(kParF, kParG, Measure::ess_inf, {}).constrained_best;
    o.expect(co == 3.0, fmt::format("comonotone {}", co));
    return o;
}

Outcome c3() {
    Outcome o;
    BoundOptions opt;
    opt.grid_n = 100000;
    for (double p : {0.5, 0.9, 0.95, 0.99}) {
        const double w = worst_var_constrained(kParF, kParG, p, opt);
        const double b = best_var_constrained(kParF, kParG, p, opt);
        const double ew = std::abs(w / (4.0 / (1.0 - p)) - 1.0);
        const double eb = std::abs(b / (1.0 + 2.0 / (1.0 - p)) - 1.0);
        o.expect(ew <= 1e-3 && eb <= 1e-3, fmt::format("p={} worst {:.6g} (rel {:.1e}) best {:.6g} (rel {:.1e})", p, w,
                                                       ew, b, eb));
    }
    return o;
}

Outcome c4() {
    Outcome o;
    const double p = 0.9;
    // quantile tables whose p-tails are U(0,1) and U(0,1.5)
    const Dist f = Dist::grid({0.0, p, 1.0}, {-10.0, 0.0, 1.0});
    const Dist g = Dist::grid({0.0, p, 1.0}, {-10.0, 0.0, 1.5});
    BoundOptions opt;
    opt.grid_n = 100000;
    const double a5 = worst_rvar_constrained(f, g, p, 0.95, opt);
    const double a9 = worst_rvar_constrained(f, g, p, 0.99, opt);
    o.expect(std::abs(a5 - 0.75) <= 2e-3, fmt::format("a=0.5 {:.6f}", a5));
    o.expect(std::abs(a9 - 1.17222) <= 2e-3, fmt::format("a=0.9 {:.6f}", a9));
    return o;
}

Outcome c5() {
    Outcome o;
    const double up = prob_upper(kParF, kParG, 8.0);
    const double lo = prob_lower(kParF, kParG, 5.0);
    o.expect(std::abs(up - 0.5) <= 1e-3, fmt::format("prob_upper(8)={:.6f} want 0.5", up));
    o.expect(std::abs(lo - 0.5) <= 1e-3, fmt::format("prob_lower(5)={:.6f} want 0.5", lo));
    for (double p : {0.5, 0.9, 0.95}) {
        const double back = prob_lower(kParF, kParG, worst_var_constrained(kParF, kParG, p));
        o.expect(std::abs(back - p) <= 1e-4, fmt::format("duality p={} err={:.1e}", p, std::abs(back - p)));
    }
    return o;
}

Outcome c6() {
    Outcome o;
    const double p = 0.9;
    for (const Family& fam : reference_families()) {
        if (fam.f.kind() != DistKind::uniform) continue;
        const double direct = worst_es_constrained(fam.f, fam.g, p);
        const double midpoint = fam.f.quantile_left((1.0 + p) / 2.0) + fam.g.quantile_left((1.0 + p) / 2.0);
        o.expect(std::abs(direct - midpoint) <= 1e-12, fmt::format("{} {} vs {}", fam.name, direct, midpoint));

        const SampleBatch b = sample_coupling(upper_tail(fam.f, p), upper_tail(fam.g, p), CouplingKind::dl, 1000000, 61);
        const std::vector<double> s = sums_of(b);
        const double z = (mean_of(s) - direct) / stderr_of(s);
        o.expect(std::abs(z) <= 3.0, fmt::format("{} mc z={:.2f}", fam.name, z));
    }
    return o;
}

Outcome c7() {
    Outcome o;
    std::vector<Family> fams = reference_families();
    const double m = 1.0 - 1e-4;
    fams.push_back({"pareto pair truncated", lower_tail(kParF, m), lower_tail(kParG, m)});
    std::uint64_t seed = 100;
    for (const Family& fam : fams) {
        const SampleBatch co = sample_coupling(fam.f, fam.g, CouplingKind::comonotone, 1000000, ++seed);
        SampleOptions so;
        so.jitter = true;
        const SampleBatch dl = sample_coupling(fam.f, fam.g, CouplingKind::dl, 1000000, ++seed, so);
        std::vector<double> s = sums_of(co);
        std::sort(s.begin(), s.end());
        const std::vector<double> d = testutil::linspace(s.front(), sorted_left_quantile(s, 0.999), 50);
        const StopLossCurve sc = stop_loss_curve(co, d);
        const StopLossCurve sd = stop_loss_curve(dl, d);
        const DominanceResult r = stop_loss_dominates(sc, sd, 3.0, 0.0);
        const double zm = (sc.mean - sd.mean) / std::hypot(sc.mean_stderr, sd.mean_stderr);
        o.expect(r.holds && std::abs(zm) <= 3.0,
                 fmt::format("{} violations {} worst z {:.2f} mean z {:.2f}", fam.name, r.violations, r.worst_z, zm));
    }
    return o;
}

Outcome c8() {
    Outcome o;
    const std::size_t n = 100000;
    BoundOptions opt;
    opt.grid_n = n;
    for (const Family& fam : reference_families()) {
        for (double p : {0.9, 0.95, 0.99}) {
            const double hi = 1.0 - 0.5 / static_cast<double>(n);
            const double lo = p + (1.0 - p) * 0.5 / static_cast<double>(n);
            const double range = (fam.f.quantile_left(hi) - fam.f.quantile_left(lo)) +
                                 (fam.g.quantile_left(hi) - fam.g.quantile_left(lo));
            const double ra = ra_unconstrained_var(fam.f, fam.g, p, n);
            const double mk = worst_var_unconstrained(fam.f, fam.g, p, opt);
            const double bound = 2.0 * range / static_cast<double>(n);
            o.expect(std::abs(ra - mk) <= bound,
                     fmt::format("{} p={} diff {:.1e} bound {:.1e}", fam.name, p, std::abs(ra - mk), bound));
        }
    }
    const double v = ra_unconstrained_var(kParF, kParG, 0.5, n);
    o.expect(std::abs(v - (6.0 + 4.0 * std::sqrt(2.0))) <= 1e-3, fmt::format("pareto p=0.5 {:.6f}", v));
    return o;
}

Outcome c9() {
    Outcome o;
    const double from = 0.9;
    const double to = 0.99;
    auto jumps = [&](const Family& fam, double h, double& predicted) {
        const auto steps = static_cast<std::size_t>(std::llround((to - from) / h));
        double prev = worst_var_constrained(fam.f, fam.g, from);
        double jump = 0.0;
        predicted = 0.0;
        for (std::size_t i = 1; i <= steps; ++i) {
            const double a = from + h * static_cast<double>(i - 1);
            const double b = from + h * static_cast<double>(i);
            const double v = worst_var_constrained(fam.f, fam.g, b);
            jump = std::max(jump, std::abs(v - prev));
            prev = v;
            predicted = std::max(predicted, (fam.f.quantile_left(b) - fam.f.quantile_left(a)) +
                                                (fam.g.quantile_left(b) - fam.g.quantile_left(a)));
        }
        return jump;
    };
    for (const Family& fam : reference_families()) {
        double pred = 0.0;
        double pred_half = 0.0;
        const double j = jumps(fam, 1e-3, pred);
        const double jh = jumps(fam, 5e-4, pred_half);
        const double ratio = jh / j;
        o.expect(j <= 3.0 * pred && ratio >= 0.25 && ratio <= 0.75,
                 fmt::format("{} jump {:.4g} modulus {:.4g} halving ratio {:.3f}", fam.name, j, pred, ratio));
    }
    return o;
}

Outcome c10() {
    Outcome o;
    std::vector<double> ps;
    for (int i = 1; i < 19; ++i) ps.push_back(0.9 + 0.005 * i);
    const std::vector<Family> fams = reference_families();
    std::vector<std::vector<double>> rs(fams.size());
    double rmin = kInf;
    double rmax = -kInf;
    for (std::size_t k = 0; k < fams.size(); ++k) {
        for (double p : ps) {
            const BoundReport r = bound_report(fams[k].f, fams[k].g, Measure::var, {p});
            const double v = r.du ? r.du->r : std::nan("");
            rs[k].push_back(v);
            rmin = std::min(rmin, v);
            rmax = std::max(rmax, v);
            o.expect(v >= 0.25 && v <= 0.85, fmt::format("{} p={:.3f} R={:.4f}", fams[k].name, p, v));
        }
    }
    o.notes.erase(std::remove_if(o.notes.begin(), o.notes.end(), [](const std::string& s) { return s.rfind("!!", 0) != 0; }),
                  o.notes.end());
    o.notes.push_back(fmt::format("R range [{:.4f}, {:.4f}]", rmin, rmax));
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (!(rs[0][i] > rs[2][i]) || !(rs[3][i] > rs[5][i])) {
            o.expect(false, fmt::format("G1 vs G3 ordering fails at p={:.3f}", ps[i]));
        }
    }
    for (std::size_t k = 0; k < 3; ++k) {
        bool inc = true;
        for (std::size_t i = 1; i < ps.size(); ++i) inc = inc && rs[k][i] >= rs[k][i - 1] - 1e-9;
        o.expect(inc, fmt::format("{} R increasing", fams[k].name));
    }
    return o;
}

Outcome c11() {
    Outcome o;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int positives = 0;
    int st_failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        Dist f = Dist::uniform(0, 1);
        Dist g = f;
        switch (trial % 4) {
            case 0: {
                // conditional law on a random event against the upper tail
                const std::vector<double> z = testutil::pareto_samples(80, 1.0, 1.0 + 2.0 * unif(rng), rng());
                std::vector<double> chosen(z.begin(), z.begin() + 40);
                f = Dist::empirical(chosen);
                g = upper_tail(Dist::empirical(z), 0.5);
                break;
            }
            case 1: {
                const double a = 5.0 * unif(rng);
                const double w = 0.5 + 3.0 * unif(rng);
                const double s = 2.0 * unif(rng);
                f = Dist::uniform(a, a + w);
                g = Dist::uniform(a + s, a + s + w);
                break;
            }
            case 2: {
                const double m = 4.0 * unif(rng) - 2.0;
                f = Dist::normal(m, 1.0 + unif(rng));
                g = Dist::normal(m + 2.0 * unif(rng), 1.0 + unif(rng));
                break;
            }
            default: {
                f = Dist::empirical(testutil::pareto_samples(50, 1.0, 2.0, rng()));
                g = Dist::empirical(testutil::pareto_samples(50, 1.0 + unif(rng), 2.0, rng()));
                break;
            }
        }
        if (check_ss(f, g, 400, 1e-12).holds) {
            ++positives;
            if (!check_st(f, g, 400, 1e-12).holds) ++st_failures;
        }
    }
    o.expect(positives >= 30 && st_failures == 0, fmt::format("ss pairs {} of 100, st failures {}", positives, st_failures));

    const std::vector<std::pair<Dist, Dist>> same_left{
        {Dist::uniform(0, 1), Dist::uniform(0, 1)}, {Dist::uniform(0, 1), Dist::uniform(0, 2)},
        {Dist::pareto(1, 2), Dist::pareto(1, 1)},   {Dist::pareto(3, 1.5), Dist::pareto(3, 1.5)},
        {Dist::normal(0, 1), Dist::normal(0, 1)},
    };
    int eq_bad = 0;
    for (const auto& [f, g] : same_left) {
        if (!check_ss(f, g, 2000, 1e-12).holds) continue;
        for (double t : merged_grid(f, g, 2000)) eq_bad += std::abs(f.cdf(t) - g.cdf(t)) > 1e-9 ? 1 : 0;
    }
    o.expect(eq_bad == 0, fmt::format("equal left endpoint: {} grid points differ", eq_bad));

    const std::size_t n = 100000;
    const double p = 0.9;
    const std::vector<double> xs = testutil::pareto_samples(n, 1.0, 2.0, 99);
    const auto m = static_cast<std::size_t>(std::ceil((1.0 - p) * static_cast<double>(n) - 1e-9));
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    int cond_fail = 0;
    double worst = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<bool> mask(n, false);
        for (std::size_t k = 0; k < m; ++k) mask[perm[k]] = true;
        const OrderCheckReport r = conditional_tail_ss_check(xs, mask, p);
        cond_fail += r.holds ? 0 : 1;
        worst = std::max(worst, r.max_violation);
    }
    o.expect(cond_fail == 0, fmt::format("conditional tail masks: {} failures, worst violation {:.2e}", cond_fail, worst));
    return o;
}

Outcome c12() {
    Outcome o;
    const std::size_t n = 10000;
    const DlPlan a = dl_plan_discrete(kParF, kParG, n, 0.0);
    const DlPlan b = dl_plan_discrete(kParF, kParG, n, 0.0);
    bool same = a.pairs.size() == b.pairs.size();
    for (std::size_t k = 0; same && k < a.pairs.size(); ++k) {
        same = a.pairs[k].x == b.pairs[k].x && a.pairs[k].y == b.pairs[k].y && a.pairs[k].y_index == b.pairs[k].y_index;
    }
    o.expect(same, "bit-for-bit reproducible");

    bool bijection = true;
    for (const Family& fam : reference_families()) {
        for (double p : {0.0, 0.9}) {
            const DlPlan plan = dl_plan_discrete(fam.f, fam.g, n, p);
            std::vector<std::size_t> used;
            for (const PlanPair& pr : plan.pairs) {
                bijection = bijection && pr.x <= pr.y;
                used.push_back(pr.y_index);
            }
            std::sort(used.begin(), used.end());
            for (std::size_t k = 0; k < n; ++k) bijection = bijection && used[k] == k;
        }
    }
    o.expect(bijection, "grid bijection with x <= y");

    const std::vector<double> ts = testutil::linspace(4.5, 16.0, 47);
    auto cdf_at = [&](double t, std::size_t m) { return dl_sum_cdf(dl_plan_discrete(kParF, kParG, m, 0.0), t); };
    const double d1 = grid_convergence(cdf_at, ts, n);
    const double d2 = grid_convergence(cdf_at, ts, 2 * n);
    const double ratio = d2 / d1;
    o.expect(ratio >= 0.25 && ratio <= 0.75, fmt::format("dl_sum_cdf discrepancy {:.2e} -> {:.2e} ratio {:.3f}", d1, d2, ratio));
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Pareto DL sum CDF", c1},
        {"worst-case essential infimum", c2},
        {"VaR bounds on the Pareto pair", c3},
        {"uniform RVaR", c4},
        {"probability bounds and inversion", c5},
        {"worst ES", c6},
        {"concave-order sandwich", c7},
        {"unconstrained oracle agreement", c8},
        {"continuity in p", c9},
        {"DU-spread reduction band", c10},
        {"strong stochastic order suite", c11},
        {"determinism and plan invariants", c12},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::string detail;
        for (const std::string& s : o.notes) detail += (detail.empty() ? "" : "; ") + s;
        std::cout << fmt::format("{} criterion {:>2} {} ({:.1f}s): {}", o.pass ? "PASS" : "FAIL", i + 1,
                                 criteria[i].first, secs, detail)
                  << std::endl;
        failed += o.pass ? 0 : 1;
    }
    std::cout << fmt::format("{} of {} criteria passed", criteria.size() - failed, criteria.size()) << std::endl;
    return failed == 0 ? 0 : 1;
}
