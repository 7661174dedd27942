#pragma once

#include <span>
#include <vector>

#include "f3a/model.h"
#include "f3a/sensing.h"

namespace f3a {

// K split into the lock-on share and the rescue reserve.
struct StageBudgets {
  int k = 0;
  int k_main = 0;
  int k_jump = 0;
};

// k_jump = round_half_up(jump_fraction * k) clamped to [0, k-1] when rescue
// is enabled, else 0.
StageBudgets split_budget(int k, const HyperParams& hp);

// Non-overlapping w x w windows in row-major window order. Edge windows of
// ragged grids are smaller. Token lists are ascending.
struct WindowPartition {
  int w = 0;
  int window_rows = 0;
  int window_cols = 0;
  std::vector<IndexSet> windows;
};

WindowPartition partition_windows(int rows, int cols, int w);

// Min-max rescaling to [0, 1]; all zeros when max - min <= 1e-12.
std::vector<double> normalize(std::span<const double> values);

struct CoarseResult {
  std::vector<int> windows;  // selected windows, best first
  IndexSet pool;
  IndexSet scaffold;
};

// Window TopM by mean odor (ties to lower window index), with
// M = min(#windows, ceil(pool_multiplier * k_main / w^2)) grown until the
// pool holds at least k_main tokens.
CoarseResult coarse_search(std::span<const double> odor, int rows, int cols, const HyperParams& hp,
                           const StageBudgets& budgets);

// Chebyshev neighborhood of radius r, clipped at borders, including i.
IndexSet neighborhood(int rows, int cols, Index i, int radius);

// 0.5 * mean of odor over the neighborhood + 0.5 * max of task score over it.
double local_support(std::span<const double> odor, int rows, int cols, const HyperParams& hp, Index i,
                     std::span<const double> task_score);

// Mean Euclidean distance from each token to its 4-neighbors.
std::vector<double> detail_contrast(const TokenGrid& grid);

// Per token, the best option-cue response and the runner-up. Requires at
// least two option cues.
struct OptionSupport {
  std::vector<double> best;
  std::vector<double> second;
};
OptionSupport option_support(const SensingBank& bank, const TokenGrid& grid, const CueSet& cues,
                             const HyperParams& hp);
OptionSupport option_support(const SensingBank& bank, const VisualProjection& projected, const CueSet& cues,
                             const HyperParams& hp);

// Equal-weight mean of the normalized cue agreement, option support (MC
// prompts only) and detail contrast.
std::vector<double> task_scores(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                                const SensingBank& bank, const HyperParams& hp);

// Gaussian spatial kernel exp(-|p - q|^2 / (2 sigma^2)).
double spatial_kernel(GridCoord p, GridCoord q, double sigma);

// max over j in selected of cos(v_i, v_j) + kernel(p_i, p_j); 0 for an
// empty set.
double redundancy(const TokenGrid& grid, const HyperParams& hp, Index i, const IndexSet& selected);

struct GreedyResult {
  IndexSet pool;
  IndexSet chosen;
  std::vector<ScoredIndex> initial_scores;
  std::vector<ScoredIndex> picks;
};

// Greedy lock-on inside the coarse pool, starting from the scaffold.
GreedyResult lock_on(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                     const SensingBank& bank, const HyperParams& hp, const CoarseResult& coarse,
                     const StageBudgets& budgets);

// 1 - normalized top-two option margin (MC) or 1 - normalized global-cue
// agreement (open-ended).
std::vector<double> uncertainty(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                                const SensingBank& bank, const HyperParams& hp);

double coverage(const TokenGrid& grid, const HyperParams& hp, Index i, const IndexSet& selected);

// Greedy rescue picks outside the locked set. The result's pool is the
// candidate set (complement of locked).
GreedyResult rescue_jump(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                         const SensingBank& bank, const HyperParams& hp, const IndexSet& locked,
                         const StageBudgets& budgets);

// Full three-stage search. Throws std::invalid_argument when K > N.
SelectionTrace select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                      const HyperParams& hp, const Budget& budget);

}  // namespace f3a
