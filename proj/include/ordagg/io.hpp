#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "ordagg/bounds.hpp"
#include "ordagg/coupling.hpp"
#include "ordagg/dist.hpp"
#include "ordagg/oracle.hpp"

namespace ordagg {

// pareto:scale,shape | uniform:lo,hi | normal:mean,sd | csv:path
Dist parse_marginal(const std::string& spec);

// CSV with header `value[,weight]`.
Dist read_empirical_csv(const std::filesystem::path& path);
std::vector<double> read_value_column(const std::filesystem::path& path);

// Shortest round-trip decimal text; "inf" / "-inf" for infinities.
std::string format_number(double v);

nlohmann::json number_json(double v);
nlohmann::json to_json(const BoundReport& r);
nlohmann::json to_json(const OrderCheckReport& r);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

// Grid export `u,x` at the midpoint levels of the spec.
void write_grid_csv(const std::filesystem::path& path, const Dist& d, const GridSpec& spec = {});
void write_plan_csv(const std::filesystem::path& path, const DlPlan& plan);
// Writes `x,y` and a sidecar `<path>.json` with {kind, seed, size}.
void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch);
void write_stop_loss_csv(const std::filesystem::path& path, const StopLossCurve& curve);

}  // namespace ordagg
