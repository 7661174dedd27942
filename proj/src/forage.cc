#include "f3a/forage.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace f3a {
namespace {

constexpr double kFlatRange = 1e-12;

// L2-normalized copies of every token (zero vectors stay zero).
class UnitTokens {
 public:
  explicit UnitTokens(const TokenGrid& grid) : dim_(grid.dim()), v_(grid.values()) {
    for (int i = 0; i < grid.size(); ++i) {
      double* x = v_.data() + static_cast<size_t>(i) * dim_;
      double n2 = 0.0;
      for (int d = 0; d < dim_; ++d) n2 += x[d] * x[d];
      if (n2 > 0.0) {
        const double inv = 1.0 / std::sqrt(n2);
        for (int d = 0; d < dim_; ++d) x[d] *= inv;
      }
    }
  }

  double cos(Index i, Index j) const {
    const double* a = v_.data() + static_cast<size_t>(i) * dim_;
    const double* b = v_.data() + static_cast<size_t>(j) * dim_;
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) s += a[d] * b[d];
    return s;
  }

 private:
  int dim_;
  std::vector<double> v_;
};

// spatial_kernel for every grid displacement, indexed by token pair.
class KernelTable {
 public:
  KernelTable(int rows, int cols, double sigma) : rows_(rows), cols_(cols), span_(2 * cols - 1) {
    table_.resize(static_cast<size_t>(2 * rows - 1) * span_);
    for (int dr = -(rows - 1); dr <= rows - 1; ++dr) {
      for (int dc = -(cols - 1); dc <= cols - 1; ++dc) {
        table_[static_cast<size_t>(dr + rows - 1) * span_ + (dc + cols - 1)] = spatial_kernel({0, 0}, {dr, dc}, sigma);
      }
    }
  }

  double operator()(Index i, Index j) const {
    const int dr = i / cols_ - j / cols_ + rows_ - 1;
    const int dc = i % cols_ - j % cols_ + cols_ - 1;
    return table_[static_cast<size_t>(dr) * span_ + dc];
  }

 private:
  int rows_, cols_, span_;
  std::vector<double> table_;
};

// Indices sorted by descending value, ties to the lower index.
IndexSet rank_descending(std::span<const double> values, const IndexSet& candidates) {
  IndexSet order = candidates;
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return values[x] > values[y]; });
  return order;
}

IndexSet complement(int n, const IndexSet& sorted_subset) {
  IndexSet out;
  out.reserve(n - sorted_subset.size());
  size_t k = 0;
  for (Index i = 0; i < n; ++i) {
    if (k < sorted_subset.size() && sorted_subset[k] == i) {
      ++k;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

std::vector<double> normalized_over(std::span<const double> values, const IndexSet& domain) {
  std::vector<double> sub(domain.size());
  for (size_t k = 0; k < domain.size(); ++k) sub[k] = values[domain[k]];
  return normalize(sub);
}

}  // namespace

StageBudgets split_budget(int k, const HyperParams& hp) {
  StageBudgets b;
  b.k = k;
  b.k_jump = hp.use_rescue ? std::clamp(round_half_up(hp.jump_fraction * k), 0, std::max(0, k - 1)) : 0;
  b.k_main = k - b.k_jump;
  return b;
}

WindowPartition partition_windows(int rows, int cols, int w) {
  if (rows < 1 || cols < 1 || w < 1) throw std::invalid_argument("invalid window partition request");
  WindowPartition p;
  p.w = w;
  p.window_rows = (rows + w - 1) / w;
  p.window_cols = (cols + w - 1) / w;
  for (int wr = 0; wr < p.window_rows; ++wr) {
    for (int wc = 0; wc < p.window_cols; ++wc) {
      IndexSet win;
      for (int r = wr * w; r < std::min(rows, (wr + 1) * w); ++r) {
        for (int c = wc * w; c < std::min(cols, (wc + 1) * w); ++c) win.push_back(r * cols + c);
      }
      p.windows.push_back(std::move(win));
    }
  }
  return p;
}

std::vector<double> normalize(std::span<const double> values) {
  std::vector<double> out(values.size(), 0.0);
  if (values.empty()) return out;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double range = *hi - *lo;
  if (!(range > kFlatRange)) return out;
  for (size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - *lo) / range;
  return out;
}

CoarseResult coarse_search(std::span<const double> odor, int rows, int cols, const HyperParams& hp,
                           const StageBudgets& budgets) {
  if (static_cast<int>(odor.size()) != rows * cols) throw std::invalid_argument("odor field size mismatch");
  const WindowPartition part = partition_windows(rows, cols, hp.window);
  const int nw = static_cast<int>(part.windows.size());
  std::vector<double> score(nw);
  for (int w = 0; w < nw; ++w) {
    double s = 0.0;
    for (Index i : part.windows[w]) s += odor[i];
    score[w] = s / static_cast<double>(part.windows[w].size());
  }
  std::vector<int> order(nw);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return score[x] > score[y]; });

  const double area = static_cast<double>(hp.window) * hp.window;
  int m = static_cast<int>(std::ceil(hp.pool_multiplier * budgets.k_main / area));
  m = std::clamp(m, 1, nw);
  CoarseResult out;
  int pooled = 0;
  for (int k = 0; k < nw; ++k) {
    if (k >= m && pooled >= budgets.k_main) break;
    const int w = order[k];
    out.windows.push_back(w);
    pooled += static_cast<int>(part.windows[w].size());
    out.pool.insert(out.pool.end(), part.windows[w].begin(), part.windows[w].end());
    const IndexSet ranked = rank_descending(odor, part.windows[w]);
    const int take = std::min<int>(hp.scaffold_per_window, static_cast<int>(ranked.size()));
    out.scaffold.insert(out.scaffold.end(), ranked.begin(), ranked.begin() + take);
  }
  std::sort(out.pool.begin(), out.pool.end());
  std::sort(out.scaffold.begin(), out.scaffold.end());
  return out;
}

IndexSet neighborhood(int rows, int cols, Index i, int radius) {
  const int r0 = i / cols, c0 = i % cols;
  IndexSet out;
  for (int r = std::max(0, r0 - radius); r <= std::min(rows - 1, r0 + radius); ++r) {
    for (int c = std::max(0, c0 - radius); c <= std::min(cols - 1, c0 + radius); ++c) out.push_back(r * cols + c);
  }
  return out;
}

double local_support(std::span<const double> odor, int rows, int cols, const HyperParams& hp, Index i,
                     std::span<const double> task_score) {
  const IndexSet nb = neighborhood(rows, cols, i, hp.lock_radius);
  double sum = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (Index j : nb) {
    sum += odor[j];
    best = std::max(best, task_score[j]);
  }
  return 0.5 * sum / static_cast<double>(nb.size()) + 0.5 * best;
}

std::vector<double> detail_contrast(const TokenGrid& grid) {
  const int rows = grid.rows(), cols = grid.cols(), dim = grid.dim();
  std::vector<double> out(grid.size(), 0.0);
  constexpr int kDr[4] = {-1, 1, 0, 0};
  constexpr int kDc[4] = {0, 0, -1, 1};
  for (Index i = 0; i < grid.size(); ++i) {
    const int r = i / cols, c = i % cols;
    const auto vi = grid.token(i);
    double sum = 0.0;
    int count = 0;
    for (int k = 0; k < 4; ++k) {
      const int rr = r + kDr[k], cc = c + kDc[k];
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      const auto vj = grid.token(rr * cols + cc);
      double d2 = 0.0;
      for (int d = 0; d < dim; ++d) d2 += (vi[d] - vj[d]) * (vi[d] - vj[d]);
      sum += std::sqrt(d2);
      ++count;
    }
    out[i] = count > 0 ? sum / count : 0.0;
  }
  return out;
}

OptionSupport option_support(const SensingBank& bank, const VisualProjection& projected, const CueSet& cues,
                             const HyperParams& hp) {
  if (cues.option_cues.size() < 2) {
    throw std::invalid_argument("option support needs at least two option cues");
  }
  const size_t n = projected.data.size() / std::max(1, projected.sensing_dim);
  OptionSupport out;
  out.best.assign(n, -std::numeric_limits<double>::infinity());
  out.second.assign(n, -std::numeric_limits<double>::infinity());
  for (const Cue& o : cues.option_cues) {
    const auto f = single_cue_field(bank, projected, o.vector, hp);
    for (size_t i = 0; i < n; ++i) {
      if (f[i] > out.best[i]) {
        out.second[i] = out.best[i];
        out.best[i] = f[i];
      } else if (f[i] > out.second[i]) {
        out.second[i] = f[i];
      }
    }
  }
  return out;
}

OptionSupport option_support(const SensingBank& bank, const TokenGrid& grid, const CueSet& cues,
                             const HyperParams& hp) {
  return option_support(bank, project_grid(bank, grid), cues, hp);
}

namespace {

// The field's cached projection, or a fresh one for hand-built fields.
VisualProjection projection_for(const OdorField& field, const TokenGrid& grid, const SensingBank& bank) {
  if (!field.projected.data.empty()) return field.projected;
  return project_grid(bank, grid);
}

}  // namespace

std::vector<double> task_scores(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                                const SensingBank& bank, const HyperParams& hp) {
  std::vector<std::vector<double>> parts;
  parts.push_back(normalize(field.a));
  if (cues.prompt_kind == PromptKind::kMultipleChoice) {
    parts.push_back(normalize(option_support(bank, projection_for(field, grid, bank), cues, hp).best));
  }
  parts.push_back(normalize(detail_contrast(grid)));
  std::vector<double> s(grid.size(), 0.0);
  for (const auto& p : parts) {
    for (int i = 0; i < grid.size(); ++i) s[i] += p[i];
  }
  for (double& x : s) x /= static_cast<double>(parts.size());
  return s;
}

double spatial_kernel(GridCoord p, GridCoord q, double sigma) {
  const double dr = p.row - q.row, dc = p.col - q.col;
  return std::exp(-(dr * dr + dc * dc) / (2.0 * sigma * sigma));
}

double redundancy(const TokenGrid& grid, const HyperParams& hp, Index i, const IndexSet& selected) {
  if (selected.empty()) return 0.0;
  const UnitTokens unit(grid);
  double best = -std::numeric_limits<double>::infinity();
  for (Index j : selected) {
    best = std::max(best, unit.cos(i, j) + spatial_kernel(grid.coord(i), grid.coord(j), hp.spatial_bandwidth));
  }
  return best;
}

double coverage(const TokenGrid& grid, const HyperParams& hp, Index i, const IndexSet& selected) {
  if (selected.empty()) return 0.0;
  const UnitTokens unit(grid);
  const double a = hp.coverage_balance;
  double best = -std::numeric_limits<double>::infinity();
  for (Index j : selected) {
    best = std::max(best, a * unit.cos(i, j) +
                              (1.0 - a) * spatial_kernel(grid.coord(i), grid.coord(j), hp.spatial_bandwidth));
  }
  return best;
}

GreedyResult lock_on(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                     const SensingBank& bank, const HyperParams& hp, const CoarseResult& coarse,
                     const StageBudgets& budgets) {
  const auto& odor = field.a;
  GreedyResult out;
  out.pool = coarse.pool;

  IndexSet chosen = coarse.scaffold;
  if (static_cast<int>(chosen.size()) > budgets.k_main) {
    chosen = rank_descending(odor, chosen);
    chosen.resize(budgets.k_main);
    std::sort(chosen.begin(), chosen.end());
  }
  std::vector<char> in_set(grid.size(), 0);
  for (Index i : chosen) in_set[i] = 1;

  if (!hp.use_lockon) {
    for (Index i : rank_descending(odor, out.pool)) {
      out.initial_scores.push_back({i, odor[i]});
    }
    std::sort(out.initial_scores.begin(), out.initial_scores.end(),
              [](const ScoredIndex& x, const ScoredIndex& y) { return x.index < y.index; });
    for (Index i : rank_descending(odor, out.pool)) {
      if (static_cast<int>(chosen.size()) >= budgets.k_main) break;
      if (in_set[i]) continue;
      in_set[i] = 1;
      chosen.push_back(i);
      out.picks.push_back({i, odor[i]});
    }
    std::sort(chosen.begin(), chosen.end());
    out.chosen = std::move(chosen);
    return out;
  }

  const std::vector<double> s = task_scores(field, grid, cues, bank, hp);
  std::vector<double> support(out.pool.size());
  for (size_t k = 0; k < out.pool.size(); ++k) {
    support[k] = local_support(odor, grid.rows(), grid.cols(), hp, out.pool[k], s);
  }
  const std::vector<double> norm_odor = normalized_over(odor, out.pool);
  const std::vector<double> norm_support = normalize(support);

  const UnitTokens unit(grid);
  const int pool_n = static_cast<int>(out.pool.size());
  std::vector<double> red(pool_n, 0.0);
  const KernelTable kernel(grid.rows(), grid.cols(), hp.spatial_bandwidth);
  auto absorb = [&](Index j) {
    for (int k = 0; k < pool_n; ++k) {
      const Index i = out.pool[k];
      const double r = unit.cos(i, j) + kernel(i, j);
      red[k] = std::max(red[k], r);
    }
  };
  if (!chosen.empty()) {
    std::fill(red.begin(), red.end(), -std::numeric_limits<double>::infinity());
    for (Index j : chosen) absorb(j);
  }
  auto score = [&](int k) {
    return norm_odor[k] + hp.local_weight * norm_support[k] - hp.redundancy_weight * 0.5 * red[k];
  };
  for (int k = 0; k < pool_n; ++k) out.initial_scores.push_back({out.pool[k], score(k)});

  while (static_cast<int>(chosen.size()) < budgets.k_main) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < pool_n; ++k) {
      if (in_set[out.pool[k]]) continue;
      const double m = score(k);
      if (best < 0 || m > best_score) {
        best = k;
        best_score = m;
      }
    }
    if (best < 0) break;
    const Index pick = out.pool[best];
    in_set[pick] = 1;
    chosen.push_back(pick);
    out.picks.push_back({pick, best_score});
    absorb(pick);
  }
  std::sort(chosen.begin(), chosen.end());
  out.chosen = std::move(chosen);
  return out;
}

std::vector<double> uncertainty(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                                const SensingBank& bank, const HyperParams& hp) {
  std::vector<double> signal(grid.size());
  if (cues.prompt_kind == PromptKind::kMultipleChoice) {
    const OptionSupport os = option_support(bank, projection_for(field, grid, bank), cues, hp);
    for (int i = 0; i < grid.size(); ++i) signal[i] = os.best[i] - os.second[i];
  } else {
    // The global cue's field is already part of the odor field.
    size_t g = 0;
    for (size_t c = 0; c < cues.cues.size(); ++c) {
      if (cues.cues[c].kind == CueKind::kGlobal) {
        g = c;
        break;
      }
    }
    signal = g < field.per_cue.size() ? field.per_cue[g]
                                      : single_cue_field(bank, grid, cues.global().vector, hp);
  }
  std::vector<double> u = normalize(signal);
  for (double& x : u) x = 1.0 - x;
  return u;
}

GreedyResult rescue_jump(const OdorField& field, const TokenGrid& grid, const CueSet& cues,
                         const SensingBank& bank, const HyperParams& hp, const IndexSet& locked,
                         const StageBudgets& budgets) {
  GreedyResult out;
  out.pool = complement(grid.size(), locked);
  if (budgets.k_jump <= 0) return out;

  const std::vector<double> norm_odor = normalize(field.a);
  const std::vector<double> u = uncertainty(field, grid, cues, bank, hp);
  const UnitTokens unit(grid);
  const int cand_n = static_cast<int>(out.pool.size());
  const double a = hp.coverage_balance;
  std::vector<double> cov(cand_n, -std::numeric_limits<double>::infinity());
  const KernelTable kernel(grid.rows(), grid.cols(), hp.spatial_bandwidth);
  auto absorb = [&](Index j) {
    for (int k = 0; k < cand_n; ++k) {
      const Index i = out.pool[k];
      const double c = a * unit.cos(i, j) + (1.0 - a) * kernel(i, j);
      cov[k] = std::max(cov[k], c);
    }
  };
  if (locked.empty()) std::fill(cov.begin(), cov.end(), 0.0);
  for (Index j : locked) absorb(j);
  auto score = [&](int k) {
    const Index i = out.pool[k];
    return norm_odor[i] + hp.uncertainty_weight * u[i] - hp.coverage_penalty * cov[k];
  };
  for (int k = 0; k < cand_n; ++k) out.initial_scores.push_back({out.pool[k], score(k)});

  std::vector<char> taken(cand_n, 0);
  const int want = std::min(budgets.k_jump, cand_n);
  for (int step = 0; step < want; ++step) {
    int best = -1;
    double best_score = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < cand_n; ++k) {
      if (taken[k]) continue;
      const double q = score(k);
      if (best < 0 || q > best_score) {
        best = k;
        best_score = q;
      }
    }
    taken[best] = 1;
    out.picks.push_back({out.pool[best], best_score});
    out.chosen.push_back(out.pool[best]);
    absorb(out.pool[best]);
  }
  std::sort(out.chosen.begin(), out.chosen.end());
  return out;
}

SelectionTrace select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                      const HyperParams& hp, const Budget& budget) {
  hp.validate();
  cues.validate();
  const int n = grid.size();
  if (budget.k < 1 || budget.k > n) {
    throw std::invalid_argument("budget K=" + std::to_string(budget.k) + " outside [1, " + std::to_string(n) + "]");
  }
  SelectionTrace t;
  const OdorField field = odor_field(bank, grid, cues, hp);
  t.odor = field.a;
  const StageBudgets budgets = split_budget(budget.k, hp);
  t.k = budgets.k;
  t.k_main = budgets.k_main;
  t.k_jump = budgets.k_jump;

  const CoarseResult coarse = coarse_search(field.a, grid.rows(), grid.cols(), hp, budgets);
  t.coarse_pool = coarse.pool;
  t.scaffold = coarse.scaffold;

  GreedyResult locked = lock_on(field, grid, cues, bank, hp, coarse, budgets);
  t.locked_pool = locked.pool;
  t.locked = locked.chosen;
  t.lock_scores = std::move(locked.initial_scores);
  t.lock_picks = std::move(locked.picks);

  GreedyResult rescue = rescue_jump(field, grid, cues, bank, hp, t.locked, budgets);
  t.rescue = rescue.chosen;
  t.rescue_scores = std::move(rescue.initial_scores);
  t.rescue_picks = std::move(rescue.picks);

  t.final_set = t.locked;
  t.final_set.insert(t.final_set.end(), t.rescue.begin(), t.rescue.end());
  std::sort(t.final_set.begin(), t.final_set.end());
  for (Index i : t.final_set) t.final_coords.push_back(grid.coord(i));
  return t;
}

}  // namespace f3a
