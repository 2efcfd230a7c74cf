#include "ordagg/cli.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ordagg/bounds.hpp"
#include "ordagg/coupling.hpp"
#include "ordagg/errors.hpp"
#include "ordagg/io.hpp"
#include "ordagg/oracle.hpp"

namespace ordagg::cli {

namespace fs = std::filesystem;

void validate(const RunConfig& cfg) {
    if (!(cfg.p_from > 0.0 && cfg.p_to < 1.0 && cfg.p_from <= cfg.p_to && cfg.p_step > 0.0)) {
        throw DomainError(fmt::format("p-range [{}, {}] step {} must lie in (0, 1) with positive step", cfg.p_from,
                                      cfg.p_to, cfg.p_step));
    }
    if (cfg.grid_n < 100) throw DomainError(fmt::format("grid-n = {} must be at least 100", cfg.grid_n));
    if (!(cfg.truncate_m > 0.5 && cfg.truncate_m < 1.0)) {
        throw DomainError(fmt::format("truncate-m = {} must lie in (0.5, 1)", cfg.truncate_m));
    }
}

std::vector<double> level_grid(double from, double to, double step) {
    if (!(step > 0.0) || to < from) throw DomainError("level grid: need from <= to and step > 0");
    const auto n = static_cast<std::size_t>(std::floor((to - from) / step + 1e-9));
    std::vector<double> out;
    out.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) {
        out.push_back(std::round((from + step * static_cast<double>(i)) * 1e12) / 1e12);
    }
    return out;
}

namespace {

BoundOptions options_of(const RunConfig& cfg) {
    BoundOptions o;
    o.grid_n = cfg.grid_n;
    o.truncation_m = cfg.truncate_m;
    return o;
}

// Runs fn and maps library exceptions onto exit codes.
int guarded(std::ostream& log, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const OrderViolation& e) {
        log << "order check failed: " << e.what() << "\n";
        OrderCheckReport rep;
        rep.holds = false;
        rep.max_violation = e.max_violation();
        rep.witness = e.witness();
        log << to_json(rep).dump() << "\n";
        return precondition;
    } catch (const IoError& e) {
        log << "i/o error: " << e.what() << "\n";
        return io_failure;
    } catch (const InfeasiblePlan& e) {
        log << "infeasible plan: " << e.what() << "\n";
        return precondition;
    } catch (const std::domain_error& e) {
        log << "invalid input: " << e.what() << "\n";
        return precondition;
    }
}

std::string cell(double v) { return std::isnan(v) ? std::string() : format_number(v); }

// Curve, per-level reports and coupled-sum VaR for a checked pair.
void emit_bounds(const Dist& f, const Dist& g, const RunConfig& cfg, std::ostream& log) {
    const BoundOptions opt = options_of(cfg);
    const Measure measure = measure_from_string(cfg.measure);
    const std::vector<double> ps = level_grid(cfg.p_from, cfg.p_to, cfg.p_step);

    std::string curve = "p,L,Lo,Uo,U,R\n";
    std::string coupled = "p,var_dl,var_ct\n";
    std::vector<double> dl_sums;
    std::vector<double> ct_sums;
    if (measure == Measure::var) {
        dl_sums = plan_sums_sorted(dl_plan_discrete(f, g, opt.grid_n, 0.0));
        ct_sums.reserve(opt.grid_n);
        for (std::size_t i = 0; i < opt.grid_n; ++i) {
            const double u = (static_cast<double>(i) + 0.5) / static_cast<double>(opt.grid_n);
            ct_sums.push_back(f.quantile_left(u) + g.quantile_left(1.0 - u));
        }
        std::sort(ct_sums.begin(), ct_sums.end());
    }
    for (double p : ps) {
        Levels lv;
        lv.p = p;
        lv.q = cfg.q;
        const BoundReport r = bound_report(f, g, measure, lv, opt);
        curve += fmt::format("{},{},{},{},{},{}\n", format_number(p), format_number(r.unconstrained_best),
                             format_number(r.constrained_best), format_number(r.constrained_worst),
                             format_number(r.unconstrained_worst), r.du ? cell(r.du->r) : std::string());
        write_json(cfg.out / "reports" / fmt::format("report_p{:.4f}.json", p), to_json(r));
        if (measure == Measure::var) {
            coupled += fmt::format("{},{},{}\n", format_number(p), format_number(sorted_left_quantile(dl_sums, p)),
                                   format_number(sorted_left_quantile(ct_sums, p)));
        }
        log << fmt::format("p={:.4f} L={:.6g} Lo={:.6g} Uo={:.6g} U={:.6g} R={}\n", p, r.unconstrained_best,
                           r.constrained_best, r.constrained_worst, r.unconstrained_worst,
                           r.du ? fmt::format("{:.4f}", r.du->r) : std::string("n/a"));
    }
    write_text(cfg.out / "curve.csv", curve);
    if (measure == Measure::var) write_text(cfg.out / "coupled_var.csv", coupled);
}

// check_st with optional projection; returns the pair to use.
std::pair<Dist, Dist> checked_pair(Dist f, Dist g, const RunConfig& cfg, double threshold, nlohmann::json* logj,
                                   std::ostream& log) {
    const OrderCheckReport rep = check_st(f, g, cfg.grid_n, 0.0);
    if (logj != nullptr) {
        (*logj)["order_check"] = to_json(rep);
        (*logj)["threshold"] = threshold;
    }
    if (rep.max_violation <= 0.0) {
        if (logj != nullptr) (*logj)["projected"] = false;
        return {std::move(f), std::move(g)};
    }
    const bool projectable = f.kind() == DistKind::empirical || f.kind() == DistKind::grid;
    const bool projectable_g = g.kind() == DistKind::empirical || g.kind() == DistKind::grid;
    if (rep.max_violation > threshold && !cfg.project) {
        throw OrderViolation(fmt::format("F <=_st G fails by {} at t = {} (threshold {}); rerun with --project",
                                         rep.max_violation, rep.witness, threshold),
                             rep.max_violation, rep.witness);
    }
    if (!projectable || !projectable_g) {
        if (rep.max_violation <= threshold) return {std::move(f), std::move(g)};
        throw OrderViolation("projection needs empirical marginals", rep.max_violation, rep.witness);
    }
    auto [fs_, gs_] = isotonic_pair_projection(f, g, 1.0, 1.0);
    const OrderCheckReport after = check_st(fs_, gs_, cfg.grid_n, 0.0);
    log << fmt::format("projected pair: violation {} -> {}\n", rep.max_violation, after.max_violation);
    if (logj != nullptr) {
        (*logj)["projected"] = true;
        (*logj)["order_check_after"] = to_json(after);
    }
    return {std::move(fs_), std::move(gs_)};
}

}  // namespace

int cmd_bounds(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        validate(cfg);
        Dist f = parse_marginal(cfg.marg_f);
        Dist g = parse_marginal(cfg.marg_g);
        const double tol = default_order_tolerance(f, g, cfg.grid_n);
        auto [pf, pg] = checked_pair(std::move(f), std::move(g), cfg, tol, nullptr, log);
        emit_bounds(pf, pg, cfg, log);
        return static_cast<int>(ok);
    });
}

int cmd_probbounds(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        validate(cfg);
        const Dist f = parse_marginal(cfg.marg_f);
        const Dist g = parse_marginal(cfg.marg_g);
        const BoundOptions opt = options_of(cfg);
        const DlPlan plan = dl_plan_discrete(f, g, opt.grid_n, 0.0);
        std::string s = "t,m,mo,Mo,M,prob_dl,prob_ct\n";
        for (double t : level_grid(cfg.t_from, cfg.t_to, cfg.t_step)) {
            const double m = prob_lower_unconstrained(f, g, t, opt);
            const double mo = prob_lower(f, g, t, opt);
            const double mo_up = prob_upper(f, g, t, opt);
            const double mm = prob_upper_unconstrained(f, g, t, opt);
            const double pdl = dl_sum_cdf(plan, t);
            const double pct = prob_countermonotone_sum(f, g, t, opt);
            s += fmt::format("{},{},{},{},{},{},{}\n", format_number(t), format_number(m), format_number(mo),
                             format_number(mo_up), format_number(mm), format_number(pdl), format_number(pct));
            log << fmt::format("t={:.4g} m={:.4f} mo={:.4f} Mo={:.4f} M={:.4f} dl={:.4f} ct={:.4f}\n", t, m, mo, mo_up,
                               mm, pdl, pct);
        }
        write_text(cfg.out / "probbounds.csv", s);
        return static_cast<int>(ok);
    });
}

int cmd_sample(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        validate(cfg);
        const Dist f = parse_marginal(cfg.marg_f);
        const Dist g = parse_marginal(cfg.marg_g);
        const CouplingKind kind = coupling_kind_from_string(cfg.kind);
        SampleOptions so;
        so.plan_n = cfg.grid_n;
        so.jitter = cfg.jitter;
        SampleBatch batch;
        if (kind == CouplingKind::dl) {
            const DlPlan plan = dl_plan_discrete(f, g, cfg.grid_n, 0.0);
            if (cfg.export_plan) write_plan_csv(cfg.out / "plan.csv", plan);
            batch = sample_plan(plan, cfg.size, cfg.seed, &f, &g, cfg.jitter);
        } else {
            batch = sample_coupling(f, g, kind, cfg.size, cfg.seed, so);
        }
        write_batch_csv(cfg.out / "sample.csv", batch);
        if (cfg.export_grid) {
            const GridSpec spec{cfg.grid_n, cfg.truncate_m};
            write_grid_csv(cfg.out / "grid_F.csv", f, spec);
            write_grid_csv(cfg.out / "grid_G.csv", g, spec);
        }
        if (cfg.stop_loss_points > 0) {
            double lo = kInf;
            double hi = -kInf;
            for (std::size_t j = 0; j < batch.x.size(); ++j) {
                lo = std::min(lo, batch.x[j] + batch.y[j]);
                hi = std::max(hi, batch.x[j] + batch.y[j]);
            }
            std::vector<double> ds;
            const std::size_t k = cfg.stop_loss_points;
            for (std::size_t i = 0; i < k; ++i) {
                ds.push_back(k == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1));
            }
            write_stop_loss_csv(cfg.out / "stop_loss.csv", stop_loss_curve(batch, ds));
        }
        log << fmt::format("wrote {} {} pairs (seed {})\n", batch.size, to_string(batch.kind), batch.seed);
        return static_cast<int>(ok);
    });
}

int cmd_casestudy(const RunConfig& cfg, std::ostream& log) {
    return guarded(log, [&] {
        validate(cfg);
        if (cfg.replicates < 2 || cfg.group_f < 1 || cfg.group_g < 1) {
            throw DomainError("casestudy: need at least two replicates and nonempty groups");
        }
        const std::vector<double> obs_f = read_value_column(cfg.data_f);
        const std::vector<double> obs_g = read_value_column(cfg.data_g);
        std::mt19937_64 rng(cfg.seed);
        auto bootstrap = [&](const std::vector<double>& obs, std::size_t group) {
            std::vector<double> sums(cfg.replicates);
            for (double& s : sums) {
                s = 0.0;
                for (std::size_t k = 0; k < group; ++k) {
                    const unsigned __int128 prod = static_cast<unsigned __int128>(rng()) * obs.size();
                    s += obs[static_cast<std::size_t>(prod >> 64)];
                }
            }
            return sums;
        };
        const std::vector<double> sums_f = bootstrap(obs_f, cfg.group_f);
        const std::vector<double> sums_g = bootstrap(obs_g, cfg.group_g);
        Dist f = Dist::empirical(sums_f);
        Dist g = Dist::empirical(sums_g);

        const double threshold = cfg.order_threshold.value_or(2.0 / std::sqrt(static_cast<double>(cfg.replicates)));
        nlohmann::json logj;
        logj["data_f"] = cfg.data_f;
        logj["data_g"] = cfg.data_g;
        logj["group_f"] = cfg.group_f;
        logj["group_g"] = cfg.group_g;
        logj["replicates"] = cfg.replicates;
        logj["seed"] = cfg.seed;
        logj["project_flag"] = cfg.project;
        auto [pf, pg] = checked_pair(std::move(f), std::move(g), cfg, threshold, &logj, log);
        write_json(cfg.out / "preprocessing.json", logj);
        emit_bounds(pf, pg, cfg, log);
        return static_cast<int>(ok);
    });
}

int cmd_selftest(const RunConfig& cfg, std::ostream& out) {
    return guarded(out, [&] {
        const Dist f = Dist::pareto(1.0, 1.0);
        const Dist g = Dist::pareto(2.0, 1.0);
        const Dist u1 = Dist::uniform(0.0, 1.0);
        const Dist u2 = Dist::uniform(0.0, 1.5);
        BoundOptions opt;
        opt.grid_n = cfg.grid_n;
        opt.truncation_m = cfg.truncate_m;

        struct Check {
            std::string name;
            double observed;
            double expected;
            double tol;
            bool relative;
        };
        std::vector<Check> checks;
        const double p = 0.9;
        checks.push_back({"pareto T(1.5)", transport_upper(f, g, 1.5), 3.0, 1e-9, false});
        checks.push_back({"pareto dl sum cdf at 5", dl_sum_cdf(dl_plan_discrete(f, g, opt.grid_n, 0.0), 5.0),
                          (1.0 + std::sqrt(5.0)) / 10.0, 1e-2, false});
        checks.push_back({"pareto worst ess-inf", worst_ess_inf_constrained(f, g, opt), 4.0, 1e-3, false});
        checks.push_back({"pareto unconstrained ess-inf", worst_ess_inf_unconstrained(f, g, opt), 3.0 + 2.0 * std::sqrt(2.0),
                          1e-4, false});
        checks.push_back({"pareto worst VaR p=0.9", worst_var_constrained(f, g, p, opt), 4.0 / (1.0 - p), 1e-3, true});
        checks.push_back({"pareto best VaR p=0.9", best_var_constrained(f, g, p, opt), 1.0 + 2.0 / (1.0 - p), 1e-3, true});
        checks.push_back({"pareto M^o(8)", prob_upper(f, g, 8.0, opt), 1.0 - 2.0 / 7.0, 1e-3, false});
        checks.push_back({"pareto m^o(8)", prob_lower(f, g, 8.0, opt), 0.5, 1e-3, false});
        checks.push_back({"uniform worst RVaR a=0.5", worst_rvar_constrained(u1, u2, 0.0, 0.5, opt), 0.75, 2e-3, false});
        checks.push_back({"uniform worst RVaR a=0.9", worst_rvar_constrained(u1, u2, 0.0, 0.9, opt), 1.17222, 2e-3, false});
        checks.push_back({"uniform ES_0.5", es_eval(u1, 0.5), 0.75, 1e-12, false});

        bool all = true;
        out << fmt::format("{:<32} {:>16} {:>16} {:>12} {:>12}  {}\n", "check", "observed", "expected", "error", "tol",
                           "result");
        for (const Check& c : checks) {
            const double err = c.relative ? std::abs(c.observed - c.expected) / std::abs(c.expected)
                                          : std::abs(c.observed - c.expected);
            const double tol = c.tol * cfg.tol_scale;
            const bool pass = err <= tol;
            all = all && pass;
            out << fmt::format("{:<32} {:>16.10g} {:>16.10g} {:>12.3e} {:>12.3e}  {}\n", c.name, c.observed, c.expected,
                               err, tol, pass ? "PASS" : "FAIL");
        }
        out << (all ? "selftest: all checks passed\n" : "selftest: FAILED\n");
        return static_cast<int>(all ? ok : selftest_failure);
    });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bounds for the sum of two ordered risks under dependence uncertainty", "ordagg"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto shared = [&cfg](CLI::App* sub, bool marginals) {
        if (marginals) {
            sub->add_option("--margF", cfg.marg_f, "law of X: pareto:s,a | uniform:lo,hi | normal:m,sd | csv:path")->required();
            sub->add_option("--margG", cfg.marg_g, "law of Y, same syntax")->required();
        }
        sub->add_option("--p-from", cfg.p_from, "first level")->capture_default_str();
        sub->add_option("--p-to", cfg.p_to, "last level")->capture_default_str();
        sub->add_option("--p-step", cfg.p_step, "level step")->capture_default_str();
        sub->add_option("--grid-n", cfg.grid_n, "quantile grid size")->capture_default_str();
        sub->add_option("--truncate-m", cfg.truncate_m, "truncation level for unbounded supports")->capture_default_str();
        sub->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
        sub->add_option("--out", cfg.out, "output directory")->capture_default_str();
        sub->add_flag("--project", cfg.project, "repair order violations by isotonic projection");
    };

    CLI::App* bounds = app.add_subcommand("bounds", "bound curves over a level grid");
    shared(bounds, true);
    bounds->add_option("--measure", cfg.measure, "var|es|rvar|essinf|esssup")
        ->check(CLI::IsMember({"var", "es", "rvar", "essinf", "esssup"}))
        ->capture_default_str();
    bounds->add_option("--q", cfg.q, "upper level for rvar");

    CLI::App* prob = app.add_subcommand("probbounds", "probability bounds over a threshold grid");
    shared(prob, true);
    prob->add_option("--t-from", cfg.t_from, "first threshold")->capture_default_str();
    prob->add_option("--t-to", cfg.t_to, "last threshold")->capture_default_str();
    prob->add_option("--t-step", cfg.t_step, "threshold step")->capture_default_str();

    CLI::App* sample = app.add_subcommand("sample", "draw coupled pairs");
    shared(sample, true);
    sample->add_option("--kind", cfg.kind, "comonotone|countermonotone|dl")
        ->check(CLI::IsMember({"comonotone", "countermonotone", "dl"}))
        ->capture_default_str();
    sample->add_option("--size", cfg.size, "number of pairs")->capture_default_str();
    sample->add_flag("--jitter", cfg.jitter, "jitter dl pairs within their quantile cells");
    sample->add_flag("--export-plan", cfg.export_plan, "also write plan.csv (dl only)");
    sample->add_flag("--export-grid", cfg.export_grid, "also write grid_F.csv and grid_G.csv");
    sample->add_option("--stop-loss", cfg.stop_loss_points, "write stop_loss.csv with this many thresholds");

    CLI::App* cs = app.add_subcommand("casestudy", "bootstrap, order check, projection and bounds");
    shared(cs, false);
    cs->add_option("--dataF", cfg.data_f, "observations for X (CSV value[,weight])")->required();
    cs->add_option("--dataG", cfg.data_g, "observations for Y")->required();
    cs->add_option("--groupF", cfg.group_f, "observations summed per replicate for X")->capture_default_str();
    cs->add_option("--groupG", cfg.group_g, "observations summed per replicate for Y")->capture_default_str();
    cs->add_option("--replicates", cfg.replicates, "bootstrap replicates")->capture_default_str();
    cs->add_option("--threshold", cfg.order_threshold, "tolerated order violation (default 2/sqrt(replicates))");

    CLI::App* st = app.add_subcommand("selftest", "analytic oracle checks");
    st->add_option("--grid-n", cfg.grid_n, "quantile grid size")->capture_default_str();
    st->add_option("--tol-scale", cfg.tol_scale, "multiply every tolerance")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return precondition;
    }
    if (cfg.measure == "essinf") cfg.measure = "ess_inf";
    if (cfg.measure == "esssup") cfg.measure = "ess_sup";

    if (bounds->parsed()) return cmd_bounds(cfg, err);
    if (prob->parsed()) return cmd_probbounds(cfg, err);
    if (sample->parsed()) return cmd_sample(cfg, err);
    if (cs->parsed()) return cmd_casestudy(cfg, err);
    return cmd_selftest(cfg, out);
}

}  // namespace ordagg::cli
