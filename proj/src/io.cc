#include "f3a/io.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <variant>

#include "json.hpp"

namespace f3a {
namespace {

using nlohmann::json;

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

void require_object(const json& j, const std::string& path) {
  if (!j.is_object()) throw FormatError(path + ": expected an object");
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& path) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (auto a : allowed) known = known || a == key;
    if (!known) throw FormatError(path + ": unknown key '" + key + "'");
  }
}

const json& require(const json& j, const char* key, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(path + ": missing required key '" + key + "'");
  return *it;
}

int as_int(const json& j, const std::string& path, int min_value) {
  if (!j.is_number_integer()) throw FormatError(path + ": expected an integer");
  const auto v = j.get<int64_t>();
  if (v < min_value || v > INT32_MAX) throw FormatError(path + ": integer out of range");
  return static_cast<int>(v);
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw FormatError(path + ": expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw FormatError(path + ": expected a finite number");
  return v;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw FormatError(path + ": expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw FormatError(path + ": expected a boolean");
  return j.get<bool>();
}

double as_ratio(const json& j, const std::string& path) {
  const double r = as_number(j, path);
  if (!(r > 0.0 && r <= 1.0)) throw FormatError(path + ": ratio must lie in (0, 1]");
  return r;
}

using ParamField = std::variant<int HyperParams::*, double HyperParams::*, bool HyperParams::*, uint64_t HyperParams::*>;

const std::map<std::string, ParamField, std::less<>>& param_fields() {
  static const std::map<std::string, ParamField, std::less<>> fields{
      {"heads", &HyperParams::heads},
      {"sensing_dim", &HyperParams::sensing_dim},
      {"nnz_visual", &HyperParams::nnz_visual},
      {"nnz_text", &HyperParams::nnz_text},
      {"mask_ones", &HyperParams::mask_ones},
      {"active_heads", &HyperParams::active_heads},
      {"gate_temperature", &HyperParams::gate_temperature},
      {"seed", &HyperParams::seed},
      {"window", &HyperParams::window},
      {"scaffold_per_window", &HyperParams::scaffold_per_window},
      {"pool_multiplier", &HyperParams::pool_multiplier},
      {"lock_radius", &HyperParams::lock_radius},
      {"spatial_bandwidth", &HyperParams::spatial_bandwidth},
      {"local_weight", &HyperParams::local_weight},
      {"redundancy_weight", &HyperParams::redundancy_weight},
      {"jump_fraction", &HyperParams::jump_fraction},
      {"coverage_balance", &HyperParams::coverage_balance},
      {"uncertainty_weight", &HyperParams::uncertainty_weight},
      {"coverage_penalty", &HyperParams::coverage_penalty},
      {"use_odor_cue", &HyperParams::use_odor_cue},
      {"use_multi_cue", &HyperParams::use_multi_cue},
      {"use_lockon", &HyperParams::use_lockon},
      {"use_rescue", &HyperParams::use_rescue},
      {"merge_threshold", &HyperParams::merge_threshold},
      {"relevance_floor", &HyperParams::relevance_floor},
  };
  return fields;
}

void apply_params(HyperParams& hp, const json& j, const std::string& path) {
  require_object(j, path);
  for (const auto& [key, value] : j.items()) {
    auto it = param_fields().find(key);
    if (it == param_fields().end()) throw FormatError(path + ": unknown parameter '" + key + "'");
    const std::string where = path + "." + key;
    std::visit(
        [&](auto member) {
          using T = std::remove_reference_t<decltype(hp.*member)>;
          if constexpr (std::is_same_v<T, bool>) {
            hp.*member = as_bool(value, where);
          } else if constexpr (std::is_same_v<T, int>) {
            hp.*member = as_int(value, where, INT32_MIN);
          } else if constexpr (std::is_same_v<T, uint64_t>) {
            if (!value.is_number_unsigned()) throw FormatError(where + ": expected a non-negative integer");
            hp.*member = value.get<uint64_t>();
          } else {
            hp.*member = as_number(value, where);
          }
        },
        it->second);
  }
}

json index_array(const IndexSet& s) { return json(s); }

json scored_array(const std::vector<ScoredIndex>& v) {
  json out = json::array();
  for (const auto& s : v) out.push_back({{"index", s.index}, {"score", s.score}});
  return out;
}

json coord_array(const TokenGrid& grid, const IndexSet& s) {
  json out = json::array();
  for (Index i : s) {
    const GridCoord p = grid.coord(i);
    out.push_back({p.row, p.col});
  }
  return out;
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_double_cell(const std::string& cell, const std::string& where) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw FormatError(where + ": '" + cell + "' is not a number");
  }
  if (used != cell.size() || !std::isfinite(v)) throw FormatError(where + ": '" + cell + "' is not a number");
  return v;
}

}  // namespace

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void apply_param_overrides(HyperParams& hp, std::string_view json_object) {
  apply_params(hp, parse_json(json_object, "params"), "params");
}

Instance parse_instance(std::string_view json_text) {
  const json doc = parse_json(json_text, "instance");
  require_object(doc, "instance");
  check_keys(doc, {"grid", "prompt", "budget", "method", "params"}, "instance");
  Instance inst;

  const json& grid = require(doc, "grid", "instance");
  require_object(grid, "grid");
  check_keys(grid, {"rows", "cols", "tensor_key"}, "grid");
  inst.rows = as_int(require(grid, "rows", "grid"), "grid.rows", 1);
  inst.cols = as_int(require(grid, "cols", "grid"), "grid.cols", 1);
  inst.tensor_key = as_string(require(grid, "tensor_key", "grid"), "grid.tensor_key");
  if (inst.tensor_key.empty()) throw FormatError("grid.tensor_key: must not be empty");

  const json& prompt = require(doc, "prompt", "instance");
  require_object(prompt, "prompt");
  check_keys(prompt, {"question", "options", "task_hint", "target_phrase"}, "prompt");
  inst.prompt.question = as_string(require(prompt, "question", "prompt"), "prompt.question");
  if (auto it = prompt.find("options"); it != prompt.end()) {
    if (!it->is_array()) throw FormatError("prompt.options: expected an array");
    for (size_t k = 0; k < it->size(); ++k) {
      const std::string where = "prompt.options[" + std::to_string(k) + "]";
      const json& o = (*it)[k];
      require_object(o, where);
      check_keys(o, {"letter", "text"}, where);
      inst.prompt.options.push_back({as_string(require(o, "letter", where), where + ".letter"),
                                     as_string(require(o, "text", where), where + ".text")});
    }
  }
  if (auto it = prompt.find("task_hint"); it != prompt.end()) {
    try {
      inst.prompt.task_hint = parse_task_hint(as_string(*it, "prompt.task_hint"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("prompt.task_hint: ") + e.what());
    }
  }
  if (auto it = prompt.find("target_phrase"); it != prompt.end()) {
    inst.prompt.target_phrase = as_string(*it, "prompt.target_phrase");
  }

  const json& budget = require(doc, "budget", "instance");
  require_object(budget, "budget");
  check_keys(budget, {"ratio"}, "budget");
  inst.ratio = as_ratio(require(budget, "ratio", "budget"), "budget.ratio");

  if (auto it = doc.find("method"); it != doc.end()) {
    try {
      inst.method = parse_pruner(as_string(*it, "method"));
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("method: ") + e.what());
    }
  }
  if (auto it = doc.find("params"); it != doc.end()) apply_params(inst.hp, *it, "params");
  return inst;
}

Instance load_instance(const std::filesystem::path& path) { return parse_instance(read_text_file(path)); }

TokenGrid grid_from_container(const F3TContainer& container, const Instance& instance) {
  const Tensor& t = container.at(instance.tensor_key);
  const size_t n = static_cast<size_t>(instance.rows) * instance.cols;
  size_t dim = 0;
  if (t.dims.size() == 3 && t.dims[0] == static_cast<uint32_t>(instance.rows) &&
      t.dims[1] == static_cast<uint32_t>(instance.cols)) {
    dim = t.dims[2];
  } else if (t.dims.size() == 2 && t.dims[0] == n) {
    dim = t.dims[1];
  } else {
    throw FormatError("tensor '" + instance.tensor_key + "' does not have shape [" + std::to_string(instance.rows) +
                      ", " + std::to_string(instance.cols) + ", dim]");
  }
  if (dim == 0) throw FormatError("tensor '" + instance.tensor_key + "' has zero feature dimension");
  std::vector<double> values(t.data.begin(), t.data.end());
  try {
    return TokenGrid(instance.rows, instance.cols, static_cast<int>(dim), std::move(values));
  } catch (const std::invalid_argument& e) {
    throw FormatError("tensor '" + instance.tensor_key + "': " + e.what());
  }
}

BenchConfig parse_bench_config(std::string_view json_text) {
  const json doc = parse_json(json_text, "config");
  require_object(doc, "config");
  check_keys(doc,
             {"scenarios", "methods", "ratios", "seeds", "first_seed", "rows", "cols", "dim_v", "dim_t", "params",
              "sweep", "sweep_ratio", "ablations", "ablation_ratio"},
             "config");
  BenchConfig cfg;
  BatteryConfig& b = cfg.battery;
  auto string_list = [&](const char* key, auto parse) {
    const json& a = doc.at(key);
    if (!a.is_array() || a.empty()) throw FormatError(std::string("config.") + key + ": expected a non-empty array");
    std::vector<decltype(parse(std::string{}))> out;
    for (const json& e : a) {
      try {
        out.push_back(parse(as_string(e, std::string("config.") + key)));
      } catch (const std::invalid_argument& err) {
        throw FormatError(std::string("config.") + key + ": " + err.what());
      }
    }
    return out;
  };
  if (doc.contains("scenarios")) b.scenarios = string_list("scenarios", [](const std::string& s) { return parse_scenario(s); });
  if (doc.contains("methods")) b.methods = string_list("methods", [](const std::string& s) { return parse_pruner(s); });
  if (doc.contains("ratios")) {
    const json& a = doc.at("ratios");
    if (!a.is_array() || a.empty()) throw FormatError("config.ratios: expected a non-empty array");
    b.ratios.clear();
    for (const json& e : a) b.ratios.push_back(as_ratio(e, "config.ratios"));
  }
  if (doc.contains("seeds")) b.seeds = as_int(doc.at("seeds"), "config.seeds", 1);
  if (doc.contains("first_seed")) {
    if (!doc.at("first_seed").is_number_unsigned()) throw FormatError("config.first_seed: expected a non-negative integer");
    b.first_seed = doc.at("first_seed").get<uint64_t>();
  }
  if (doc.contains("rows")) b.rows = as_int(doc.at("rows"), "config.rows", 1);
  if (doc.contains("cols")) b.cols = as_int(doc.at("cols"), "config.cols", 1);
  if (doc.contains("dim_v")) b.dim_v = as_int(doc.at("dim_v"), "config.dim_v", 1);
  if (doc.contains("dim_t")) b.dim_t = as_int(doc.at("dim_t"), "config.dim_t", 1);
  if (doc.contains("params")) apply_params(b.hp, doc.at("params"), "config.params");
  if (doc.contains("sweep")) cfg.sweep = as_bool(doc.at("sweep"), "config.sweep");
  if (doc.contains("sweep_ratio")) cfg.sweep_ratio = as_ratio(doc.at("sweep_ratio"), "config.sweep_ratio");
  if (doc.contains("ablations")) cfg.ablations = as_bool(doc.at("ablations"), "config.ablations");
  if (doc.contains("ablation_ratio")) cfg.ablation_ratio = as_ratio(doc.at("ablation_ratio"), "config.ablation_ratio");
  return cfg;
}

BenchConfig load_bench_config(const std::filesystem::path& path) { return parse_bench_config(read_text_file(path)); }

std::string selection_json(const TokenGrid& grid, const IndexSet& indices, std::string_view method,
                           const SelectionTrace* trace) {
  json doc;
  doc["indices"] = index_array(indices);
  doc["coords"] = coord_array(grid, indices);
  doc["K"] = indices.size();
  doc["method"] = std::string(method);
  json sizes{{"final", indices.size()}};
  if (trace) {
    sizes["coarse_pool"] = trace->coarse_pool.size();
    sizes["scaffold"] = trace->scaffold.size();
    sizes["locked_pool"] = trace->locked_pool.size();
    sizes["locked"] = trace->locked.size();
    sizes["rescue"] = trace->rescue.size();
    sizes["k_main"] = trace->k_main;
    sizes["k_jump"] = trace->k_jump;
  }
  doc["stage_sizes"] = sizes;
  return doc.dump(2) + "\n";
}

std::string trace_json(const SelectionTrace& trace, const TokenGrid& grid) {
  json doc;
  doc["grid"] = {{"rows", grid.rows()}, {"cols", grid.cols()}, {"dim", grid.dim()}};
  doc["odor"] = trace.odor;
  doc["coarse_pool"] = index_array(trace.coarse_pool);
  doc["scaffold"] = index_array(trace.scaffold);
  doc["locked_pool"] = index_array(trace.locked_pool);
  doc["locked"] = index_array(trace.locked);
  doc["rescue"] = index_array(trace.rescue);
  doc["final"] = index_array(trace.final_set);
  doc["final_coords"] = coord_array(grid, trace.final_set);
  doc["lock_scores"] = scored_array(trace.lock_scores);
  doc["lock_picks"] = scored_array(trace.lock_picks);
  doc["rescue_scores"] = scored_array(trace.rescue_scores);
  doc["rescue_picks"] = scored_array(trace.rescue_picks);
  doc["K"] = trace.k;
  doc["k_main"] = trace.k_main;
  doc["k_jump"] = trace.k_jump;
  return doc.dump(2) + "\n";
}

std::string metrics_csv(const std::vector<MetricRow>& rows, bool with_runtime) {
  std::string out = "scenario,method,rho,seed,k,evidence_recall,distractor_rate,spatial_coverage";
  out += with_runtime ? ",runtime_ns\n" : "\n";
  for (const MetricRow& r : rows) {
    out += r.scenario + "," + r.method + "," + fmt("%.2f", r.rho) + "," + std::to_string(r.seed) + "," +
           std::to_string(r.k) + "," + fmt("%.6f", r.evidence_recall) + "," + fmt("%.6f", r.distractor_rate) + "," +
           fmt("%.6f", r.spatial_coverage);
    out += with_runtime ? "," + std::to_string(r.runtime_ns) + "\n" : "\n";
  }
  return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "scenario,method,rho,count,evidence_recall,distractor_rate,spatial_coverage\n";
  for (const SummaryRow& r : rows) {
    out += r.scenario + "," + r.method + "," + fmt("%.2f", r.rho) + "," + std::to_string(r.count) + "," +
           fmt("%.6f", r.evidence_recall) + "," + fmt("%.6f", r.distractor_rate) + "," +
           fmt("%.6f", r.spatial_coverage) + "\n";
  }
  return out;
}

std::string summary_json(const std::vector<SummaryRow>& rows) {
  json doc = json::array();
  for (const SummaryRow& r : rows) {
    doc.push_back({{"scenario", r.scenario},
                   {"method", r.method},
                   {"rho", r.rho},
                   {"count", r.count},
                   {"evidence_recall", r.evidence_recall},
                   {"distractor_rate", r.distractor_rate},
                   {"spatial_coverage", r.spatial_coverage}});
  }
  return doc.dump(2) + "\n";
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "group,setting,mean_recall,delta\n";
  for (const SweepRow& r : rows) {
    out += r.group + "," + r.setting + "," + fmt("%.6f", r.mean_recall) + "," + fmt("%+.6f", r.delta) + "\n";
  }
  return out;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "variant,scenario,mean_recall,delta\n";
  for (const AblationRow& r : rows) {
    out += r.variant + "," + r.scenario + "," + fmt("%.6f", r.mean_recall) + "," + fmt("%+.6f", r.delta) + "\n";
  }
  return out;
}

std::vector<RetentionCurve> parse_curves_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw FormatError("curves: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "model,method,rho,accuracy") throw FormatError("curves: header must be model,method,rho,accuracy");
  std::vector<RetentionCurve> curves;
  std::map<std::pair<std::string, std::string>, size_t> slot;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = "curves line " + std::to_string(line_no);
    const auto cells = split_csv_line(line);
    if (cells.size() != 4 || cells[0].empty() || cells[1].empty()) throw FormatError(where + ": expected 4 fields");
    const double rho = parse_double_cell(cells[2], where);
    const double acc = parse_double_cell(cells[3], where);
    auto key = std::make_pair(cells[0], cells[1]);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, curves.size()).first;
      curves.push_back({cells[0], cells[1], {}});
    }
    curves[it->second].points.emplace_back(rho, acc);
  }
  for (RetentionCurve& c : curves) {
    std::sort(c.points.begin(), c.points.end());
    try {
      c.validate();
    } catch (const std::invalid_argument& e) {
      throw FormatError(std::string("curves: ") + e.what());
    }
  }
  return curves;
}

std::vector<RetentionCurve> load_curves_csv(const std::filesystem::path& path) {
  return parse_curves_csv(read_text_file(path));
}

std::string format_p_value(double p) {
  if (p >= 1.0) return "1.0";
  if (p <= 0.0) return "0.0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4e", p);
  std::string s = buf;
  const auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  int exponent = std::stoi(s.substr(e + 1));
  return mantissa + "e" + std::to_string(exponent);
}

}  // namespace f3a
