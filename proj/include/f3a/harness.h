#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "f3a/baselines.h"
#include "f3a/model.h"
#include "f3a/sensing.h"

namespace f3a {

enum class Scenario { kSingleRegion, kDistributed, kPeripheralSmall, kOptionDiscrimination };

inline constexpr Scenario kAllScenarios[] = {Scenario::kSingleRegion, Scenario::kDistributed,
                                             Scenario::kPeripheralSmall, Scenario::kOptionDiscrimination};

const char* to_string(Scenario s);
Scenario parse_scenario(std::string_view name);

struct SyntheticTask {
  TokenGrid grid;
  CueSet cues;
  IndexSet evidence;
  IndexSet distractor;
  Scenario scenario = Scenario::kSingleRegion;
  uint64_t seed = 0;
};

// Planted-evidence task. Cue vectors are random unit vectors; evidence
// directions are the best of 64 random candidates under the default sensing
// bank. Throws std::invalid_argument when the grid cannot hold the layout.
SyntheticTask generate_task(Scenario scenario, uint64_t seed, int rows, int cols, int dim_v, int dim_t);

struct MetricRow {
  std::string method;
  std::string scenario;
  double rho = 0.0;
  uint64_t seed = 0;
  int k = 0;
  double evidence_recall = 0.0;
  double distractor_rate = 0.0;
  double spatial_coverage = 0.0;
  int64_t runtime_ns = 0;
};

MetricRow metrics_for(const SyntheticTask& task, const IndexSet& selected);

// Runs one selector on the task. Cue ablations in hp are applied to the
// task's cues before selection.
MetricRow evaluate(const SyntheticTask& task, PrunerKind method, const HyperParams& hp, double rho,
                   const SensingBank& bank);
MetricRow evaluate(const SyntheticTask& task, PrunerKind method, const HyperParams& hp, double rho);

struct BatteryConfig {
  std::vector<Scenario> scenarios{std::begin(kAllScenarios), std::end(kAllScenarios)};
  std::vector<PrunerKind> methods{std::begin(kAllPruners), std::end(kAllPruners)};
  std::vector<double> ratios{0.2, 0.4, 0.6};
  int seeds = 100;
  uint64_t first_seed = 0;
  int rows = 24;
  int cols = 24;
  int dim_v = 64;
  int dim_t = 64;
  HyperParams hp;
};

// Rows ordered by (scenario, method, rho, seed) in config order. Runs tasks in
// parallel; output does not depend on the worker count.
std::vector<MetricRow> run_battery(const BatteryConfig& config);

struct SummaryRow {
  std::string method;
  std::string scenario;
  double rho = 0.0;
  int count = 0;
  double evidence_recall = 0.0;
  double distractor_rate = 0.0;
  double spatial_coverage = 0.0;
};

// Means per (scenario, method, rho), in first-appearance order.
std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows);

double mean_recall(const std::vector<MetricRow>& rows, std::string_view method, std::string_view scenario,
                   double rho);

struct SweepRow {
  std::string group;
  std::string setting;
  double mean_recall = 0.0;
  double delta = 0.0;
};

// One hyperparameter group at a time; every group includes its default value,
// whose delta is exactly 0.
std::vector<SweepRow> run_sweep(const BatteryConfig& base, double rho);

struct AblationRow {
  std::string variant;
  std::string scenario;
  double mean_recall = 0.0;
  double delta = 0.0;
};

// Full f3a against each single-switch ablation, f3a method only.
std::vector<AblationRow> run_ablations(const BatteryConfig& base, double rho);

struct RetentionCurve {
  std::string model;
  std::string method;
  std::vector<std::pair<double, double>> points;  // (rho, accuracy), rho ascending

  // Throws std::invalid_argument unless rho values are distinct, in (0, 1]
  // and include 1.0.
  void validate() const;
};

// Minimum retention in percent at which the piecewise-linear accuracy reaches
// tau times the full-token accuracy. Clamped to the lowest measured point,
// 100 when no measured segment reaches the target.
double token_demand(const RetentionCurve& curve, double tau);

// Two-sided exact binomial sign test at p = 0.5.
double sign_test(int wins, int trials);

}  // namespace f3a
