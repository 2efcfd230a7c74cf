#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ordagg::cli {

enum ExitCode : int { ok = 0, precondition = 2, io_failure = 3, selftest_failure = 4 };

struct RunConfig {
    std::string marg_f;
    std::string marg_g;
    double p_from = 0.900;
    double p_to = 0.995;
    double p_step = 0.005;
    std::size_t grid_n = 10000;
    double truncate_m = 1.0 - 1e-6;
    std::uint64_t seed = 1;
    std::filesystem::path out = "out";
    bool project = false;
    std::string measure = "var";
    std::optional<double> q;

    // probbounds
    double t_from = 4.0;
    double t_to = 40.0;
    double t_step = 1.0;

    // sample
    std::string kind = "dl";
    std::size_t size = 100000;
    bool jitter = false;
    bool export_plan = false;
    bool export_grid = false;
    std::size_t stop_loss_points = 0;

    // casestudy
    std::string data_f;
    std::string data_g;
    std::size_t group_f = 50;
    std::size_t group_g = 50;
    std::size_t replicates = 1000;
    std::optional<double> order_threshold;  // default 2/sqrt(replicates)

    // selftest
    double tol_scale = 1.0;
};

// Throws DomainError when the config breaks its invariants.
void validate(const RunConfig& cfg);
std::vector<double> level_grid(double from, double to, double step);

int cmd_bounds(const RunConfig& cfg, std::ostream& log);
int cmd_probbounds(const RunConfig& cfg, std::ostream& log);
int cmd_sample(const RunConfig& cfg, std::ostream& log);
int cmd_casestudy(const RunConfig& cfg, std::ostream& log);
int cmd_selftest(const RunConfig& cfg, std::ostream& out);

// Parses argv with subcommands and dispatches.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ordagg::cli
