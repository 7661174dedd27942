#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "f3a/model.h"

namespace f3a {

// One row of a sparse projection matrix.
struct SparseRow {
  std::vector<int> cols;
  std::vector<double> vals;

  double dot(std::span<const double> x) const;
  bool operator==(const SparseRow&) const = default;
};

// Frozen sensing bank: shared sparse projections A_v (d_s x d_v) and
// A_t (d_s x d_t), and one binary mask per head over the d_s sensing axes.
// Head identity lives entirely in the masks.
class SensingBank {
 public:
  // Generated from one Rng stream seeded with hp.seed, in the order: A_v
  // rows, A_t rows, head masks. Each row picks its non-zero positions by a
  // partial Fisher-Yates shuffle, then draws one sign per position.
  static SensingBank build(const HyperParams& hp, int dim_visual, int dim_text);

  // Explicit construction for hand-built tests. Masks are 0/1 vectors of
  // length sensing_dim.
  static SensingBank from_parts(int sensing_dim, int dim_visual, int dim_text,
                                std::vector<SparseRow> visual, std::vector<SparseRow> text,
                                std::vector<std::vector<uint8_t>> masks);

  int sensing_dim() const { return sensing_dim_; }
  int dim_visual() const { return dim_visual_; }
  int dim_text() const { return dim_text_; }
  int heads() const { return static_cast<int>(masks_.size()); }

  const std::vector<SparseRow>& visual_rows() const { return visual_; }
  const std::vector<SparseRow>& text_rows() const { return text_; }
  const std::vector<uint8_t>& mask(int h) const { return masks_[h]; }

  std::vector<double> project_visual(std::span<const double> v) const;
  std::vector<double> project_text(std::span<const double> c) const;

  bool operator==(const SensingBank&) const = default;

 private:
  int sensing_dim_ = 0;
  int dim_visual_ = 0;
  int dim_text_ = 0;
  std::vector<SparseRow> visual_;
  std::vector<SparseRow> text_;
  std::vector<std::vector<uint8_t>> masks_;
};

// Cosine of the masked projections; 0 when either has norm below 1e-12.
double head_response(const SensingBank& bank, std::span<const double> v,
                     std::span<const double> c, int head);

struct HeadGate {
  std::vector<int> heads;        // descending activation, ties to lower index
  std::vector<double> weights;   // softmax(act / tau) over heads, sums to 1
  std::vector<double> activation;  // per head, all heads
};

// act_h = ||b_h * A_t c||; keeps the top hp.active_heads heads.
HeadGate gate_heads(const SensingBank& bank, std::span<const double> c, const HyperParams& hp);

// A_v v_i for every token, row-major N x d_s.
struct VisualProjection {
  int sensing_dim = 0;
  std::vector<double> data;

  std::span<const double> row(Index i) const {
    return {data.data() + static_cast<size_t>(i) * sensing_dim, static_cast<size_t>(sensing_dim)};
  }
};

// Throws std::invalid_argument when the grid dimension does not match.
VisualProjection project_grid(const SensingBank& bank, const TokenGrid& grid);

struct OdorField {
  VisualProjection projected;
  std::vector<double> a;                     // max over cues
  std::vector<std::vector<double>> per_cue;  // one field per non-option cue
  std::vector<HeadGate> gates;               // one per non-option cue
};

// Per token, sum over active heads of weight * head_response, for one cue.
std::vector<double> single_cue_field(const SensingBank& bank, const TokenGrid& grid,
                                     std::span<const double> cue, const HyperParams& hp);
std::vector<double> single_cue_field(const SensingBank& bank, const VisualProjection& projected,
                                     std::span<const double> cue, const HyperParams& hp);

// Max over the non-option cues of single_cue_field. Option cues are not
// included. Throws std::invalid_argument on dimension mismatch.
OdorField odor_field(const SensingBank& bank, const TokenGrid& grid, const CueSet& cues,
                     const HyperParams& hp);

}  // namespace f3a
