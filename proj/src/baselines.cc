#include "f3a/baselines.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "f3a/forage.h"

namespace f3a {
namespace {

void check_k(const TokenGrid& grid, int k) {
  if (k < 1 || k > grid.size()) {
    throw std::invalid_argument("budget K=" + std::to_string(k) + " outside [1, " + std::to_string(grid.size()) +
                                "]");
  }
}

std::vector<double> unit_rows(const TokenGrid& grid) {
  std::vector<double> u = grid.values();
  const int d = grid.dim();
  for (int i = 0; i < grid.size(); ++i) {
    double* x = u.data() + static_cast<size_t>(i) * d;
    double n2 = 0.0;
    for (int j = 0; j < d; ++j) n2 += x[j] * x[j];
    if (n2 > 0.0) {
      const double inv = 1.0 / std::sqrt(n2);
      for (int j = 0; j < d; ++j) x[j] *= inv;
    }
  }
  return u;
}

double dot_rows(const std::vector<double>& u, int d, Index i, Index j) {
  const double* a = u.data() + static_cast<size_t>(i) * d;
  const double* b = u.data() + static_cast<size_t>(j) * d;
  double s = 0.0;
  for (int k = 0; k < d; ++k) s += a[k] * b[k];
  return s;
}

IndexSet top_k(const std::vector<double>& score, int k) {
  IndexSet order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return score[x] > score[y]; });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

// Greedy max of weight_i * min cosine distance to the chosen set. Ties go to
// the larger weight, then the lower index.
IndexSet weighted_farthest_point(const TokenGrid& grid, const std::vector<double>& weight, Index seed, int k) {
  const int n = grid.size();
  const int d = grid.dim();
  IndexSet chosen;
  if (k == 0) return chosen;
  const auto u = unit_rows(grid);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  Index pick = seed;
  while (true) {
    taken[pick] = 1;
    chosen.push_back(pick);
    if (static_cast<int>(chosen.size()) == k) break;
    for (Index i = 0; i < n; ++i) {
      if (!taken[i]) min_dist[i] = std::min(min_dist[i], 1.0 - dot_rows(u, d, i, pick));
    }
    Index best = -1;
    double best_gain = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (taken[i]) continue;
      const double g = weight[i] * min_dist[i];
      if (best < 0 || g > best_gain || (g == best_gain && weight[i] > weight[best])) {
        best = i;
        best_gain = g;
      }
    }
    pick = best;
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

}  // namespace

const char* to_string(PrunerKind kind) {
  switch (kind) {
    case PrunerKind::kF3a: return "f3a";
    case PrunerKind::kScoreRank: return "score_rank";
    case PrunerKind::kDiversityMaxmin: return "diversity_maxmin";
    case PrunerKind::kSimilarityMerge: return "similarity_merge";
    case PrunerKind::kConditionalDiversity: return "conditional_diversity";
  }
  return "?";
}

PrunerKind parse_pruner(std::string_view name) {
  for (PrunerKind k : kAllPruners) {
    if (name == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown method '" + std::string(name) + "'");
}

IndexSet score_rank_select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                           const HyperParams& hp, int k) {
  check_k(grid, k);
  return top_k(single_cue_field(bank, grid, cues.global().vector, hp), k);
}

IndexSet diversity_maxmin_select(const TokenGrid& grid, int k) {
  check_k(grid, k);
  Index seed = 0;
  double best = -1.0;
  for (Index i = 0; i < grid.size(); ++i) {
    double n2 = 0.0;
    for (double x : grid.token(i)) n2 += x * x;
    if (n2 > best) {
      best = n2;
      seed = i;
    }
  }
  return weighted_farthest_point(grid, std::vector<double>(grid.size(), 1.0), seed, k);
}

IndexSet similarity_merge_select(const TokenGrid& grid, int k, double threshold) {
  check_k(grid, k);
  const int n = grid.size();
  const int d = grid.dim();
  const auto u = unit_rows(grid);
  // sum_j cos(i, j) = u_i . sum_j u_j
  std::vector<double> total(d, 0.0);
  for (Index j = 0; j < n; ++j) {
    for (int k = 0; k < d; ++k) total[k] += u[static_cast<size_t>(j) * d + k];
  }
  std::vector<double> dominance(n, 0.0);
  for (Index i = 0; i < n; ++i) {
    for (int k = 0; k < d; ++k) dominance[i] += u[static_cast<size_t>(i) * d + k] * total[k];
  }
  IndexSet order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return dominance[x] > dominance[y]; });

  IndexSet kept, skipped;
  for (Index i : order) {
    if (static_cast<int>(kept.size()) == k) break;
    bool duplicate = false;
    for (Index j : kept) {
      if (dot_rows(u, d, i, j) > threshold) {
        duplicate = true;
        break;
      }
    }
    (duplicate ? skipped : kept).push_back(i);
  }
  for (Index i : skipped) {
    if (static_cast<int>(kept.size()) == k) break;
    kept.push_back(i);
  }
  std::sort(kept.begin(), kept.end());
  return kept;
}

IndexSet conditional_diversity_select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                                      const HyperParams& hp, int k) {
  check_k(grid, k);
  std::vector<double> rel = normalize(single_cue_field(bank, grid, cues.global().vector, hp));
  for (double& r : rel) r += hp.relevance_floor;
  const Index seed = static_cast<Index>(std::max_element(rel.begin(), rel.end()) - rel.begin());
  return weighted_farthest_point(grid, rel, seed, k);
}

IndexSet run_pruner(PrunerKind kind, const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                    const HyperParams& hp, int k) {
  switch (kind) {
    case PrunerKind::kF3a: return select(grid, cues, bank, hp, Budget{1.0, k}).final_set;
    case PrunerKind::kScoreRank: return score_rank_select(grid, cues, bank, hp, k);
    case PrunerKind::kDiversityMaxmin: return diversity_maxmin_select(grid, k);
    case PrunerKind::kSimilarityMerge: return similarity_merge_select(grid, k, hp.merge_threshold);
    case PrunerKind::kConditionalDiversity: return conditional_diversity_select(grid, cues, bank, hp, k);
  }
  throw std::invalid_argument("unknown pruner");
}

}  // namespace f3a
