#include "ordagg/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "ordagg/errors.hpp"

namespace ordagg {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

double parse_double(const std::string& text, const std::string& context) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size()) {
        throw DomainError(fmt::format("{}: cannot parse '{}' as a number", context, t));
    }
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

struct Columns {
    std::vector<double> values;
    std::vector<double> weights;
};

Columns read_columns(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path.string()));
    std::string line;
    if (!std::getline(in, line)) throw IoError(fmt::format("'{}' is empty", path.string()));
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
    const std::vector<std::string> header = split(trim(line), ',');
    if (header.empty() || trim(header[0]) != "value" || header.size() > 2 ||
        (header.size() == 2 && trim(header[1]) != "weight")) {
        throw IoError(fmt::format("'{}': header must be value[,weight]", path.string()));
    }
    const bool weighted = header.size() == 2;
    Columns c;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const std::vector<std::string> cells = split(trim(line), ',');
        if (cells.size() != header.size()) throw IoError(fmt::format("'{}' line {}: wrong field count", path.string(), row));
        try {
            c.values.push_back(parse_double(cells[0], "value"));
            if (weighted) c.weights.push_back(parse_double(cells[1], "weight"));
        } catch (const DomainError& e) {
            throw IoError(fmt::format("'{}' line {}: {}", path.string(), row, e.what()));
        }
    }
    if (c.values.empty()) throw IoError(fmt::format("'{}' has no observations", path.string()));
    return c;
}

}  // namespace

Dist parse_marginal(const std::string& spec) {
    const auto colon = spec.find(':');
    if (colon == std::string::npos) throw DomainError(fmt::format("marginal spec '{}' lacks a kind prefix", spec));
    const std::string kind = spec.substr(0, colon);
    const std::string rest = spec.substr(colon + 1);
    if (kind == "csv") return read_empirical_csv(rest);
    const std::vector<std::string> args = split(rest, ',');
    if (args.size() != 2) throw DomainError(fmt::format("marginal spec '{}' needs two parameters", spec));
    const double a = parse_double(args[0], spec);
    const double b = parse_double(args[1], spec);
    if (kind == "pareto") return Dist::pareto(a, b);
    if (kind == "uniform") return Dist::uniform(a, b);
    if (kind == "normal") return Dist::normal(a, b);
    throw DomainError(fmt::format("unknown marginal kind '{}'", kind));
}

Dist read_empirical_csv(const std::filesystem::path& path) {
    const Columns c = read_columns(path);
    return Dist::empirical(c.values, c.weights);
}

std::vector<double> read_value_column(const std::filesystem::path& path) { return read_columns(path).values; }

std::string format_number(double v) { return fmt::format("{}", v); }

nlohmann::json number_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return nullptr;
    return v;
}

nlohmann::json to_json(const BoundReport& r) {
    nlohmann::json j;
    j["measure"] = to_string(r.measure);
    j["p"] = r.level.p;
    j["q"] = r.level.q ? number_json(*r.level.q) : nlohmann::json(nullptr);
    j["t"] = r.level.t ? number_json(*r.level.t) : nlohmann::json(nullptr);
    j["constrained_worst"] = number_json(r.constrained_worst);
    j["constrained_best"] = number_json(r.constrained_best);
    j["unconstrained_worst"] = number_json(r.unconstrained_worst);
    j["unconstrained_best"] = number_json(r.unconstrained_best);
    if (r.du) {
        j["R_L"] = r.du->r_lower;
        j["R_U"] = r.du->r_upper;
        j["R"] = r.du->r;
    } else {
        j["R_L"] = nullptr;
        j["R_U"] = nullptr;
        j["R"] = nullptr;
    }
    j["attaining"] = {{"worst", to_string(r.attaining_worst)}, {"best", to_string(r.attaining_best)}};
    j["grid_n"] = r.grid_n;
    j["truncation_m"] = r.truncation_m;
    return j;
}

nlohmann::json to_json(const OrderCheckReport& r) {
    return {{"holds", r.holds},
            {"max_violation", number_json(r.max_violation)},
            {"witness", number_json(r.witness)},
            {"grid_size", r.grid_size}};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
        if (ec) throw IoError(fmt::format("cannot create '{}': {}", path.parent_path().string(), ec.message()));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("write to '{}' failed", path.string()));
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

void write_grid_csv(const std::filesystem::path& path, const Dist& d, const GridSpec& spec) {
    std::string s = "u,x\n";
    for (std::size_t i = 1; i <= spec.n; ++i) {
        const double u = (static_cast<double>(i) - 0.5) / static_cast<double>(spec.n);
        s += fmt::format("{},{}\n", format_number(u), format_number(d.quantile_left(u)));
    }
    write_text(path, s);
}

void write_plan_csv(const std::filesystem::path& path, const DlPlan& plan) {
    std::string s = "k,x,y,tag\n";
    for (std::size_t k = 0; k < plan.pairs.size(); ++k) {
        const PlanPair& pr = plan.pairs[k];
        s += fmt::format("{},{},{},{}\n", k + 1, format_number(pr.x), format_number(pr.y),
                         pr.tag == PairTag::common ? "common" : "singular");
    }
    write_text(path, s);
}

void write_batch_csv(const std::filesystem::path& path, const SampleBatch& batch) {
    std::string s = "x,y\n";
    for (std::size_t j = 0; j < batch.x.size(); ++j) {
        s += fmt::format("{},{}\n", format_number(batch.x[j]), format_number(batch.y[j]));
    }
    write_text(path, s);
    nlohmann::json side = {{"kind", to_string(batch.kind)}, {"seed", batch.seed}, {"size", batch.size}};
    write_json(path.string() + ".json", side);
}

void write_stop_loss_csv(const std::filesystem::path& path, const StopLossCurve& curve) {
    std::string s = "d,value,stderr\n";
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        s += fmt::format("{},{},{}\n", format_number(curve.thresholds[i]), format_number(curve.values[i]),
                         format_number(curve.stderrs[i]));
    }
    write_text(path, s);
}

}  // namespace ordagg
