#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "ordagg/coupling.hpp"
#include "ordagg/dist.hpp"

namespace ordagg {

struct BoundOptions {
    std::size_t grid_n = 10000;
    double truncation_m = 1.0 - 1e-6;
    std::size_t scan_points = 1024;
    std::optional<double> order_tol;

    GridSpec grid() const { return {grid_n, truncation_m}; }
    PairOptions pair() const { return {grid_n, truncation_m, order_tol}; }
};

// Essential infimum / supremum of X + Y.
double worst_ess_inf_constrained(const Dist& f, const Dist& g, const BoundOptions& opt = {});
double best_ess_sup_constrained(const Dist& f, const Dist& g, const BoundOptions& opt = {});
double worst_ess_inf_unconstrained(const Dist& f, const Dist& g, const BoundOptions& opt = {});
double best_ess_sup_unconstrained(const Dist& f, const Dist& g, const BoundOptions& opt = {});

// Worst VaR^R_p and best VaR^L_p.
double worst_var_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double best_var_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double worst_var_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double best_var_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});

double worst_es_constrained(const Dist& f, const Dist& g, double p);
// ES_p of the DL-coupled sum on the whole distributions.
double best_es_constrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double best_es_unconstrained(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});

double worst_rvar_constrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt = {});
double best_rvar_constrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt = {});
double worst_rvar_unconstrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt = {});
double best_rvar_unconstrained(const Dist& f, const Dist& g, double p, double q, const BoundOptions& opt = {});

// M^o(t) = sup{p : best VaR^L_p <= t} and m^o(t) = sup{p : worst VaR^R_p <= t}.
double prob_upper(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});
double prob_lower(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});
// Same inversion for the unconstrained VaR bounds.
double prob_upper_unconstrained(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});
double prob_lower_unconstrained(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});

// VaR^L_p of X + Y under the DL coupling and under countermonotonicity.
double var_dl_sum(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double var_countermonotone_sum(const Dist& f, const Dist& g, double p, const BoundOptions& opt = {});
double prob_dl_sum(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});
double prob_countermonotone_sum(const Dist& f, const Dist& g, double t, const BoundOptions& opt = {});

struct DuReduction {
    double r_lower;
    double r_upper;
    double r;
};

// nullopt when any input is infinite. Throws DegenerateSpread when U <= L.
std::optional<DuReduction> du_reduction(double lower, double upper, double lower_o, double upper_o);

enum class Measure { ess_inf, ess_sup, var, es, rvar, prob };
enum class Attaining { dl_upper_tail, dl_lower_tail, comonotone, countermonotone_tail };

std::string to_string(Measure m);
std::string to_string(Attaining a);
Measure measure_from_string(const std::string& name);

struct Levels {
    double p = 0.0;
    std::optional<double> q;
    std::optional<double> t;
};

struct BoundReport {
    Measure measure = Measure::var;
    Levels level;
    double constrained_worst = 0.0;
    double constrained_best = 0.0;
    double unconstrained_worst = 0.0;
    double unconstrained_best = 0.0;
    std::optional<DuReduction> du;
    Attaining attaining_worst = Attaining::dl_upper_tail;
    Attaining attaining_best = Attaining::dl_lower_tail;
    std::size_t grid_n = 0;
    double truncation_m = 0.0;
};

BoundReport bound_report(const Dist& f, const Dist& g, Measure measure, const Levels& levels,
                         const BoundOptions& opt = {});

}  // namespace ordagg
