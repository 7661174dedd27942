#include "f3a/harness.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <tuple>

#include "f3a/cues.h"
#include "f3a/forage.h"
#include "f3a/parallel.h"
#include "f3a/rng.h"

namespace f3a {
namespace {

constexpr double kNoise = 0.3;
constexpr int kCandidates = 64;
constexpr double kMaxDistractorCos = 0.2;
constexpr int kPlacementTries = 4000;

std::vector<double> random_unit(Rng& rng, int dim) {
  std::vector<double> v(dim);
  for (double& x : v) x = rng.gaussian();
  return normalized(std::move(v));
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Tasks are always planted through the default bank so that hyperparameter
// sweeps see identical inputs.
const SensingBank& planting_bank(int dim_v, int dim_t) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, SensingBank> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({dim_v, dim_t});
  if (it == cache.end()) it = cache.emplace(std::pair{dim_v, dim_t}, SensingBank::build(HyperParams{}, dim_v, dim_t)).first;
  return it->second;
}

struct Objective {
  std::vector<const std::vector<double>*> cues;
  std::vector<HeadGate> gates;
};

Objective make_objective(const SensingBank& bank, std::vector<const std::vector<double>*> cues) {
  Objective o;
  o.cues = std::move(cues);
  for (const auto* c : o.cues) o.gates.push_back(gate_heads(bank, *c, HyperParams{}));
  return o;
}

double response(const SensingBank& bank, const Objective& o, std::span<const double> v) {
  double total = 0.0;
  for (size_t c = 0; c < o.cues.size(); ++c) {
    const auto& g = o.gates[c];
    for (size_t k = 0; k < g.heads.size(); ++k) total += g.weights[k] * head_response(bank, v, *o.cues[c], g.heads[k]);
  }
  return total;
}

std::vector<double> best_direction(Rng& rng, const SensingBank& bank, const Objective& o, int dim_v,
                                   const std::vector<double>* avoid = nullptr) {
  std::vector<double> best;
  double best_score = 0.0;
  for (int accepted = 0; accepted < kCandidates;) {
    auto v = random_unit(rng, dim_v);
    if (avoid && std::abs(dot(v, *avoid)) >= kMaxDistractorCos) continue;
    ++accepted;
    const double s = response(bank, o, v);
    if (best.empty() || s > best_score) {
      best = std::move(v);
      best_score = s;
    }
  }
  return best;
}

struct Blob {
  int row = 0, col = 0, h = 0, w = 0;
};

class Layout {
 public:
  Layout(int rows, int cols) : rows_(rows), cols_(cols), used_(rows * cols, 0) {}

  // Cells within one step of an existing blob are also off limits, so blobs
  // never touch.
  bool fits(const Blob& b) const {
    if (b.row < 0 || b.col < 0 || b.row + b.h > rows_ || b.col + b.w > cols_) return false;
    for (int r = std::max(0, b.row - 1); r < std::min(rows_, b.row + b.h + 1); ++r) {
      for (int c = std::max(0, b.col - 1); c < std::min(cols_, b.col + b.w + 1); ++c) {
        if (used_[r * cols_ + c]) return false;
      }
    }
    return true;
  }

  IndexSet place(const Blob& b) {
    IndexSet cells;
    for (int r = b.row; r < b.row + b.h; ++r) {
      for (int c = b.col; c < b.col + b.w; ++c) {
        used_[r * cols_ + c] = 1;
        cells.push_back(r * cols_ + c);
      }
    }
    return cells;
  }

  // Uniform placement of an h x w blob (either orientation) satisfying pred.
  template <typename Pred>
  IndexSet place_random(Rng& rng, int h, int w, Pred pred) {
    for (int t = 0; t < kPlacementTries; ++t) {
      Blob b{0, 0, h, w};
      if (rng.coin()) std::swap(b.h, b.w);
      if (b.h > rows_ || b.w > cols_) continue;
      b.row = static_cast<int>(rng.below(rows_ - b.h + 1));
      b.col = static_cast<int>(rng.below(cols_ - b.w + 1));
      if (fits(b) && pred(b)) return place(b);
    }
    throw std::invalid_argument("grid " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                                " too small for the scenario layout");
  }
  IndexSet place_random(Rng& rng, int h, int w) {
    return place_random(rng, h, w, [](const Blob&) { return true; });
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_, cols_;
  std::vector<char> used_;
};

void append(IndexSet& dst, const IndexSet& src) { dst.insert(dst.end(), src.begin(), src.end()); }

int chebyshev(GridCoord a, GridCoord b) { return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col)); }

}  // namespace

const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::kSingleRegion: return "single_region";
    case Scenario::kDistributed: return "distributed";
    case Scenario::kPeripheralSmall: return "peripheral_small";
    case Scenario::kOptionDiscrimination: return "option_discrimination";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (name == to_string(s)) return s;
  }
  throw std::invalid_argument("unknown scenario '" + std::string(name) + "'");
}

SyntheticTask generate_task(Scenario scenario, uint64_t seed, int rows, int cols, int dim_v, int dim_t) {
  if (rows < 1 || cols < 1 || dim_v < 1 || dim_t < 1) throw std::invalid_argument("task dimensions must be positive");
  HyperParams defaults;
  if (dim_v < defaults.nnz_visual || dim_t < defaults.nnz_text) {
    throw std::invalid_argument("feature dimensions too small for the planting bank");
  }
  const SensingBank& bank = planting_bank(dim_v, dim_t);
  Rng rng(seed ^ fnv1a64(to_string(scenario)));

  SyntheticTask task;
  task.scenario = scenario;
  task.seed = seed;
  const auto c_g = random_unit(rng, dim_t);
  const auto c_t = random_unit(rng, dim_t);
  task.cues.cues.push_back({CueKind::kGlobal, c_g, "global"});
  task.cues.cues.push_back({CueKind::kTarget, c_t, "target"});
  std::vector<std::vector<double>> options;
  if (scenario == Scenario::kOptionDiscrimination) {
    const char* letters[] = {"A", "B", "C", "D"};
    for (const char* l : letters) {
      options.push_back(random_unit(rng, dim_t));
      task.cues.option_cues.push_back({CueKind::kOption, options.back(), l});
    }
    task.cues.prompt_kind = PromptKind::kMultipleChoice;
  }

  // Evidence follows the target cue, distractors follow the global cue.
  std::vector<std::vector<double>> evidence_dirs;
  std::vector<double> distractor_dir;
  if (scenario == Scenario::kOptionDiscrimination) {
    for (int k = 0; k < 2; ++k) {
      evidence_dirs.push_back(best_direction(rng, bank, make_objective(bank, {&c_t, &options[k]}), dim_v));
    }
    distractor_dir =
        best_direction(rng, bank, make_objective(bank, {&c_g, &options[2]}), dim_v, &evidence_dirs[0]);
  } else {
    evidence_dirs.push_back(best_direction(rng, bank, make_objective(bank, {&c_t}), dim_v));
    distractor_dir = best_direction(rng, bank, make_objective(bank, {&c_g}), dim_v, &evidence_dirs[0]);
  }

  Layout layout(rows, cols);
  std::vector<IndexSet> evidence_blobs;
  switch (scenario) {
    case Scenario::kSingleRegion:
      evidence_blobs.push_back(layout.place_random(rng, 2, 4));
      task.distractor = layout.place_random(rng, 2, 4);
      break;
    case Scenario::kDistributed: {
      evidence_blobs.push_back(layout.place_random(rng, 2, 2));
      const GridCoord first{evidence_blobs[0][0] / cols, evidence_blobs[0][0] % cols};
      const int far = std::max(rows, cols) / 2;
      evidence_blobs.push_back(layout.place_random(
          rng, 2, 2, [&](const Blob& b) { return chebyshev(first, {b.row, b.col}) >= far; }));
      task.distractor = layout.place_random(rng, 2, 4);
      break;
    }
    case Scenario::kPeripheralSmall: {
      Blob center{rows / 2 - 1 + static_cast<int>(rng.below(3)) - 1,
                  cols / 2 - 2 + static_cast<int>(rng.below(3)) - 1, 3, 4};
      if (!layout.fits(center)) throw std::invalid_argument("grid too small for the scenario layout");
      task.distractor = layout.place(center);
      // Every evidence cell sits in one of the two outermost rings.
      auto near_border = [&](const Blob& b) {
        for (int r = b.row; r < b.row + b.h; ++r) {
          for (int c = b.col; c < b.col + b.w; ++c) {
            if (!(r <= 1 || c <= 1 || r >= rows - 2 || c >= cols - 2)) return false;
          }
        }
        return true;
      };
      evidence_blobs.push_back(layout.place_random(rng, 1, 2, near_border));
      break;
    }
    case Scenario::kOptionDiscrimination:
      evidence_blobs.push_back(layout.place_random(rng, 2, 2));
      evidence_blobs.push_back(layout.place_random(rng, 2, 2));
      task.distractor = layout.place_random(rng, 2, 4);
      break;
  }

  const int n = rows * cols;
  std::vector<int> owner(n, -1);  // blob index, or -2 for distractor
  for (size_t b = 0; b < evidence_blobs.size(); ++b) {
    for (Index i : evidence_blobs[b]) owner[i] = static_cast<int>(b);
    append(task.evidence, evidence_blobs[b]);
  }
  for (Index i : task.distractor) owner[i] = -2;

  std::vector<double> values(static_cast<size_t>(n) * dim_v);
  for (Index i = 0; i < n; ++i) {
    std::vector<double> v(dim_v);
    const std::vector<double>* base = nullptr;
    if (owner[i] >= 0) base = &evidence_dirs[std::min<size_t>(owner[i], evidence_dirs.size() - 1)];
    if (owner[i] == -2) base = &distractor_dir;
    for (int d = 0; d < dim_v; ++d) v[d] = (base ? (*base)[d] : 0.0) + (base ? kNoise : 1.0) * rng.gaussian();
    v = normalized(std::move(v));
    std::copy(v.begin(), v.end(), values.begin() + static_cast<size_t>(i) * dim_v);
  }
  task.grid = TokenGrid(rows, cols, dim_v, std::move(values));
  std::sort(task.evidence.begin(), task.evidence.end());
  std::sort(task.distractor.begin(), task.distractor.end());
  return task;
}

MetricRow metrics_for(const SyntheticTask& task, const IndexSet& selected) {
  MetricRow row;
  row.scenario = to_string(task.scenario);
  row.seed = task.seed;
  row.k = static_cast<int>(selected.size());
  std::vector<char> in(task.grid.size(), 0);
  for (Index i : selected) in[i] = 1;
  int hits = 0, covered = 0, distract = 0;
  for (Index i : task.evidence) {
    hits += in[i];
    bool near = false;
    for (Index j : neighborhood(task.grid.rows(), task.grid.cols(), i, 1)) near = near || in[j];
    covered += near;
  }
  for (Index i : task.distractor) distract += in[i];
  row.evidence_recall = static_cast<double>(hits) / task.evidence.size();
  row.spatial_coverage = static_cast<double>(covered) / task.evidence.size();
  row.distractor_rate = selected.empty() ? 0.0 : static_cast<double>(distract) / selected.size();
  return row;
}

MetricRow evaluate(const SyntheticTask& task, PrunerKind method, const HyperParams& hp, double rho,
                   const SensingBank& bank) {
  const Budget budget = make_budget(rho, task.grid.size());
  const CueSet cues = apply_cue_ablations(task.cues, hp);
  const auto start = std::chrono::steady_clock::now();
  const IndexSet selected = run_pruner(method, task.grid, cues, bank, hp, budget.k);
  const auto stop = std::chrono::steady_clock::now();
  MetricRow row = metrics_for(task, selected);
  row.method = to_string(method);
  row.rho = rho;
  row.runtime_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count();
  return row;
}

MetricRow evaluate(const SyntheticTask& task, PrunerKind method, const HyperParams& hp, double rho) {
  const SensingBank bank = SensingBank::build(hp, task.grid.dim(), task.cues.dim());
  return evaluate(task, method, hp, rho, bank);
}

std::vector<MetricRow> run_battery(const BatteryConfig& config) {
  const SensingBank bank = SensingBank::build(config.hp, config.dim_v, config.dim_t);
  const int n_s = static_cast<int>(config.scenarios.size());
  const int n_m = static_cast<int>(config.methods.size());
  const int n_r = static_cast<int>(config.ratios.size());
  const int n_seed = config.seeds;
  std::vector<MetricRow> rows(static_cast<size_t>(n_s) * n_m * n_r * n_seed);
  parallel_for(
      n_s * n_seed,
      [&](int t) {
        const int s = t / n_seed, k = t % n_seed;
        const SyntheticTask task = generate_task(config.scenarios[s], config.first_seed + k, config.rows,
                                                 config.cols, config.dim_v, config.dim_t);
        for (int m = 0; m < n_m; ++m) {
          for (int r = 0; r < n_r; ++r) {
            rows[((static_cast<size_t>(s) * n_m + m) * n_r + r) * n_seed + k] =
                evaluate(task, config.methods[m], config.hp, config.ratios[r], bank);
          }
        }
      },
      1);
  return rows;
}

std::vector<SummaryRow> summarize(const std::vector<MetricRow>& rows) {
  std::vector<SummaryRow> out;
  std::map<std::tuple<std::string, std::string, double>, size_t> slot;
  for (const MetricRow& r : rows) {
    auto key = std::make_tuple(r.scenario, r.method, r.rho);
    auto it = slot.find(key);
    if (it == slot.end()) {
      it = slot.emplace(key, out.size()).first;
      out.push_back({r.method, r.scenario, r.rho});
    }
    SummaryRow& s = out[it->second];
    ++s.count;
    s.evidence_recall += r.evidence_recall;
    s.distractor_rate += r.distractor_rate;
    s.spatial_coverage += r.spatial_coverage;
  }
  for (SummaryRow& s : out) {
    s.evidence_recall /= s.count;
    s.distractor_rate /= s.count;
    s.spatial_coverage /= s.count;
  }
  return out;
}

double mean_recall(const std::vector<MetricRow>& rows, std::string_view method, std::string_view scenario,
                   double rho) {
  double sum = 0.0;
  int count = 0;
  for (const MetricRow& r : rows) {
    if (r.method == method && r.scenario == scenario && r.rho == rho) {
      sum += r.evidence_recall;
      ++count;
    }
  }
  if (count == 0) throw std::invalid_argument("no rows for " + std::string(method) + "/" + std::string(scenario));
  return sum / count;
}

namespace {

double overall_recall(const std::vector<MetricRow>& rows) {
  double sum = 0.0;
  for (const MetricRow& r : rows) sum += r.evidence_recall;
  return rows.empty() ? 0.0 : sum / rows.size();
}

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::vector<SweepRow> run_sweep(const BatteryConfig& base, double rho) {
  BatteryConfig cfg = base;
  cfg.methods = {PrunerKind::kF3a};
  cfg.ratios = {rho};
  const double reference = overall_recall(run_battery(cfg));

  struct Variant {
    std::string group, setting;
    HyperParams hp;
  };
  std::vector<Variant> variants;
  const HyperParams d = base.hp;
  variants.push_back({"default", "defaults", d});
  for (int h : {8, 16, 32}) {
    HyperParams hp = d;
    hp.heads = h;
    variants.push_back({"sensing_heads", "heads=" + std::to_string(h), hp});
  }
  for (int w : {1, 2, 3}) {
    HyperParams hp = d;
    hp.window = w;
    variants.push_back({"coarse_window", "window=" + std::to_string(w), hp});
  }
  for (double a : {0.10, 0.15, 0.20}) {
    HyperParams hp = d;
    hp.jump_fraction = a;
    variants.push_back({"rescue_budget", "jump_fraction=" + format_real(a), hp});
  }
  for (uint64_t s : {uint64_t{7}, uint64_t{42}, uint64_t{123}}) {
    HyperParams hp = d;
    hp.seed = s;
    variants.push_back({"random_seed", "seed=" + std::to_string(s), hp});
  }

  std::vector<SweepRow> out;
  for (const Variant& v : variants) {
    double recall = reference;
    const bool is_default = v.hp.heads == d.heads && v.hp.window == d.window &&
                            v.hp.jump_fraction == d.jump_fraction && v.hp.seed == d.seed;
    if (!is_default) {
      cfg.hp = v.hp;
      recall = overall_recall(run_battery(cfg));
    }
    out.push_back({v.group, v.setting, recall, recall - reference});
  }
  return out;
}

std::vector<AblationRow> run_ablations(const BatteryConfig& base, double rho) {
  struct Variant {
    std::string name;
    HyperParams hp;
  };
  std::vector<Variant> variants{{"full", base.hp}};
  {
    HyperParams hp = base.hp;
    hp.use_odor_cue = false;
    variants.push_back({"no_odor_cue", hp});
  }
  {
    HyperParams hp = base.hp;
    hp.use_multi_cue = false;
    variants.push_back({"no_multi_cue", hp});
  }
  {
    HyperParams hp = base.hp;
    hp.use_lockon = false;
    variants.push_back({"no_lockon", hp});
  }
  {
    HyperParams hp = base.hp;
    hp.use_rescue = false;
    variants.push_back({"no_rescue", hp});
  }
  BatteryConfig cfg = base;
  cfg.methods = {PrunerKind::kF3a};
  cfg.ratios = {rho};
  std::vector<AblationRow> out;
  std::map<std::string, double> full;
  for (const Variant& v : variants) {
    cfg.hp = v.hp;
    const auto rows = run_battery(cfg);
    for (Scenario s : cfg.scenarios) {
      const double r = mean_recall(rows, "f3a", to_string(s), rho);
      if (v.name == "full") full[to_string(s)] = r;
      out.push_back({v.name, to_string(s), r, r - full[to_string(s)]});
    }
  }
  return out;
}

void RetentionCurve::validate() const {
  if (points.empty()) throw std::invalid_argument("retention curve " + model + "/" + method + " is empty");
  bool has_full = false;
  for (size_t i = 0; i < points.size(); ++i) {
    const auto [rho, acc] = points[i];
    if (!(rho > 0.0 && rho <= 1.0) || !std::isfinite(acc)) {
      throw std::invalid_argument("retention curve " + model + "/" + method + " has an invalid point");
    }
    if (i > 0 && !(rho > points[i - 1].first)) {
      throw std::invalid_argument("retention curve " + model + "/" + method + " is not strictly ascending in rho");
    }
    has_full = has_full || rho == 1.0;
  }
  if (!has_full) throw std::invalid_argument("retention curve " + model + "/" + method + " lacks rho = 1.0");
}

double token_demand(const RetentionCurve& curve, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("tau must lie in (0, 1]");
  curve.validate();
  const auto& p = curve.points;
  const double target = tau * p.back().second;
  if (p.front().second >= target) return 100.0 * p.front().first;
  for (size_t k = 0; k + 1 < p.size(); ++k) {
    const auto [r0, a0] = p[k];
    const auto [r1, a1] = p[k + 1];
    if (a0 < target && a1 >= target) return 100.0 * (r0 + (target - a0) / (a1 - a0) * (r1 - r0));
  }
  return 100.0;
}

double sign_test(int wins, int trials) {
  if (trials < 1 || wins < 0 || wins > trials) {
    throw std::invalid_argument("sign test needs 0 <= wins <= trials and trials >= 1");
  }
  const long double n = trials;
  auto pmf = [&](int i) {
    return std::exp(std::lgamma(n + 1.0L) - std::lgamma(i + 1.0L) - std::lgamma(n - i + 1.0L) - n * std::log(2.0L));
  };
  long double lower = 0.0L, upper = 0.0L;
  for (int i = 0; i <= wins; ++i) lower += pmf(i);
  for (int i = wins; i <= trials; ++i) upper += pmf(i);
  return static_cast<double>(std::min(1.0L, 2.0L * std::min(lower, upper)));
}

}  // namespace f3a
