#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace f3a {

using Index = int;
using IndexSet = std::vector<Index>;  // kept sorted ascending unless noted

struct GridCoord {
  int row = 0;
  int col = 0;
  bool operator==(const GridCoord&) const = default;
};

// N = rows*cols visual tokens of dimension dim, stored row-major. Token i
// sits at (i / cols, i % cols).
class TokenGrid {
 public:
  TokenGrid() = default;
  // Throws std::invalid_argument on shape mismatch or non-finite entries.
  TokenGrid(int rows, int cols, int dim, std::vector<double> values);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int dim() const { return dim_; }
  int size() const { return rows_ * cols_; }

  std::span<const double> token(Index i) const {
    return {values_.data() + static_cast<size_t>(i) * dim_,
            static_cast<size_t>(dim_)};
  }
  const std::vector<double>& values() const { return values_; }

  // Throws std::invalid_argument when i is outside [0, N).
  GridCoord coord(Index i) const;
  Index index(GridCoord p) const { return p.row * cols_ + p.col; }

  TokenGrid scaled(double s) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  int dim_ = 0;
  std::vector<double> values_;
};

enum class CueKind { kGlobal, kTarget, kTask, kOption };
enum class PromptKind { kOpenEnded, kMultipleChoice };

const char* to_string(CueKind kind);
const char* to_string(PromptKind kind);

struct Cue {
  CueKind kind = CueKind::kGlobal;
  std::vector<double> vector;  // unit norm
  std::string label;
};

struct CueSet {
  std::vector<Cue> cues;         // non-option cues, at least one
  std::vector<Cue> option_cues;  // empty for open-ended prompts
  PromptKind prompt_kind = PromptKind::kOpenEnded;

  int dim() const { return cues.empty() ? 0 : static_cast<int>(cues[0].vector.size()); }
  // The global cue if present, otherwise the first cue.
  const Cue& global() const;
  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

struct HyperParams {
  // Sparse sensing.
  int heads = 16;
  int sensing_dim = 128;
  int nnz_visual = 32;
  int nnz_text = 8;
  int mask_ones = 16;
  int active_heads = 4;
  double gate_temperature = 0.5;
  uint64_t seed = 42;
  // Coarse search.
  int window = 2;
  int scaffold_per_window = 1;
  double pool_multiplier = 2.0;
  // Lock-on.
  int lock_radius = 1;
  double spatial_bandwidth = 2.0;
  double local_weight = 0.35;
  double redundancy_weight = 0.35;
  // Rescue.
  double jump_fraction = 0.15;
  double coverage_balance = 0.5;
  double uncertainty_weight = 0.25;
  double coverage_penalty = 0.50;
  // Ablations.
  bool use_odor_cue = true;
  bool use_multi_cue = true;
  bool use_lockon = true;
  bool use_rescue = true;
  // Baseline constants.
  double merge_threshold = 0.95;
  double relevance_floor = 0.05;

  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

int round_half_up(double x);

struct Budget {
  double ratio = 1.0;
  int k = 0;
};

// K = clamp(round_half_up(ratio * n), 1, n). Throws on ratio outside (0, 1]
// or n < 1.
Budget make_budget(double ratio, int n);

struct ScoredIndex {
  Index index = 0;
  double score = 0.0;
};

struct SelectionTrace {
  std::vector<double> odor;
  IndexSet coarse_pool;
  IndexSet scaffold;
  IndexSet locked_pool;
  IndexSet locked;
  IndexSet rescue;
  IndexSet final_set;
  std::vector<GridCoord> final_coords;
  // Lock-on score of every pool candidate against the initial locked set,
  // and the greedy picks in order with the score they won with.
  std::vector<ScoredIndex> lock_scores;
  std::vector<ScoredIndex> lock_picks;
  std::vector<ScoredIndex> rescue_scores;
  std::vector<ScoredIndex> rescue_picks;
  int k = 0;
  int k_main = 0;
  int k_jump = 0;
};

}  // namespace f3a
