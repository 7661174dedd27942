#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "f3a/baselines.h"
#include "f3a/cues.h"
#include "f3a/f3t.h"
#include "f3a/harness.h"
#include "f3a/model.h"

namespace f3a {

// Selection request read from an instance JSON document. Validation errors
// (unknown keys, wrong types, out-of-range ratio) raise FormatError.
struct Instance {
  int rows = 0;
  int cols = 0;
  std::string tensor_key;
  PromptSpec prompt;
  double ratio = 1.0;
  std::optional<PrunerKind> method;
  HyperParams hp;
};

Instance parse_instance(std::string_view json_text);
Instance load_instance(const std::filesystem::path& path);

// Applies a JSON object of hyperparameter overrides. FormatError on unknown
// names or wrong types.
void apply_param_overrides(HyperParams& hp, std::string_view json_object);

// The grid named by instance.tensor_key. Accepts rank-3 [rows, cols, dim] or
// rank-2 [rows*cols, dim] tensors; FormatError on a shape mismatch.
TokenGrid grid_from_container(const F3TContainer& container, const Instance& instance);

// Benchmark configuration JSON; every field is optional.
struct BenchConfig {
  BatteryConfig battery;
  bool sweep = false;
  double sweep_ratio = 0.4;
  bool ablations = false;
  double ablation_ratio = 0.2;
};

BenchConfig parse_bench_config(std::string_view json_text);
BenchConfig load_bench_config(const std::filesystem::path& path);

// JSON documents, stable key order, trailing newline.
std::string selection_json(const TokenGrid& grid, const IndexSet& indices, std::string_view method,
                           const SelectionTrace* trace);
std::string trace_json(const SelectionTrace& trace, const TokenGrid& grid);

// CSV reports with a header row. Runtime is only included when asked, so the
// default output is reproducible byte for byte.
std::string metrics_csv(const std::vector<MetricRow>& rows, bool with_runtime);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::string summary_json(const std::vector<SummaryRow>& rows);
std::string sweep_csv(const std::vector<SweepRow>& rows);
std::string ablation_csv(const std::vector<AblationRow>& rows);

// CSV with header model,method,rho,accuracy. Curves keep first-appearance
// order; points are sorted by rho. FormatError on malformed input.
std::vector<RetentionCurve> parse_curves_csv(std::string_view text);
std::vector<RetentionCurve> load_curves_csv(const std::filesystem::path& path);

// "1.0" for p == 1, otherwise a 4-digit mantissa and a plain exponent, for
// example "1.8626e-9".
std::string format_p_value(double p);

std::string read_text_file(const std::filesystem::path& path);

}  // namespace f3a
