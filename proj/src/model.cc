#include "f3a/model.h"

#include <cmath>
#include <stdexcept>
#include <string>

namespace f3a {

TokenGrid::TokenGrid(int rows, int cols, int dim, std::vector<double> values)
    : rows_(rows), cols_(cols), dim_(dim), values_(std::move(values)) {
  if (rows <= 0 || cols <= 0 || dim <= 0) {
    throw std::invalid_argument("token grid dimensions must be positive");
  }
  const size_t expected = static_cast<size_t>(rows) * cols * dim;
  if (values_.size() != expected) {
    throw std::invalid_argument("token grid has " + std::to_string(values_.size()) +
                                " values, expected " + std::to_string(expected));
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("token grid has a non-finite entry");
  }
}

GridCoord TokenGrid::coord(Index i) const {
  if (i < 0 || i >= size()) {
    throw std::invalid_argument("token index " + std::to_string(i) + " out of range");
  }
  return {i / cols_, i % cols_};
}

TokenGrid TokenGrid::scaled(double s) const {
  std::vector<double> v = values_;
  for (double& x : v) x *= s;
  return TokenGrid(rows_, cols_, dim_, std::move(v));
}

const char* to_string(CueKind kind) {
  switch (kind) {
    case CueKind::kGlobal: return "global";
    case CueKind::kTarget: return "target";
    case CueKind::kTask: return "task";
    case CueKind::kOption: return "option";
  }
  return "?";
}

const char* to_string(PromptKind kind) {
  return kind == PromptKind::kMultipleChoice ? "multiple_choice" : "open_ended";
}

const Cue& CueSet::global() const {
  if (cues.empty()) throw std::invalid_argument("cue set is empty");
  for (const Cue& c : cues) {
    if (c.kind == CueKind::kGlobal) return c;
  }
  return cues.front();
}

void CueSet::validate() const {
  if (cues.empty()) throw std::invalid_argument("cue set needs at least one cue");
  const size_t d = cues[0].vector.size();
  if (d == 0) throw std::invalid_argument("cue vectors must be non-empty");
  auto check = [d](const Cue& c) {
    if (c.vector.size() != d) throw std::invalid_argument("cue dimension mismatch");
    double n2 = 0.0;
    for (double x : c.vector) n2 += x * x;
    if (std::abs(std::sqrt(n2) - 1.0) > 1e-6) {
      throw std::invalid_argument("cue '" + c.label + "' is not unit norm");
    }
  };
  for (const Cue& c : cues) {
    if (c.kind == CueKind::kOption) throw std::invalid_argument("option cue in main cue list");
    check(c);
  }
  for (const Cue& c : option_cues) {
    if (c.kind != CueKind::kOption) throw std::invalid_argument("non-option cue in option list");
    check(c);
  }
  const bool mc = prompt_kind == PromptKind::kMultipleChoice;
  if (mc != !option_cues.empty()) {
    throw std::invalid_argument("prompt kind disagrees with option cues");
  }
}

void HyperParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("hyperparameter " + what); };
  if (heads < 1) fail("heads must be >= 1");
  if (sensing_dim < 1) fail("sensing_dim must be >= 1");
  if (nnz_visual < 1 || nnz_text < 1) fail("non-zero counts must be >= 1");
  if (mask_ones < 1 || mask_ones > sensing_dim) fail("mask_ones must be in [1, sensing_dim]");
  if (active_heads < 1 || active_heads > heads) fail("active_heads must be in [1, heads]");
  if (!(gate_temperature > 0.0)) fail("gate_temperature must be positive");
  if (window < 1) fail("window must be >= 1");
  if (scaffold_per_window < 0) fail("scaffold_per_window must be >= 0");
  if (!(pool_multiplier >= 1.0)) fail("pool_multiplier must be >= 1");
  if (lock_radius < 0) fail("lock_radius must be >= 0");
  if (!(spatial_bandwidth > 0.0)) fail("spatial_bandwidth must be positive");
  if (!(jump_fraction > 0.0 && jump_fraction < 1.0)) fail("jump_fraction must be in (0, 1)");
  if (!(coverage_balance >= 0.0 && coverage_balance <= 1.0)) fail("coverage_balance must be in [0, 1]");
  for (double w : {local_weight, redundancy_weight, uncertainty_weight, coverage_penalty,
                   merge_threshold, relevance_floor}) {
    if (!std::isfinite(w)) fail("weights must be finite");
  }
}

int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5)); }

Budget make_budget(double ratio, int n) {
  if (!(ratio > 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("retention ratio must be in (0, 1]");
  }
  if (n < 1) throw std::invalid_argument("token count must be >= 1");
  int k = round_half_up(ratio * n);
  if (k < 1) k = 1;
  if (k > n) k = n;
  return {ratio, k};
}

}  // namespace f3a
