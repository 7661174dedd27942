#include "f3a/sensing.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "f3a/parallel.h"
#include "f3a/rng.h"

namespace f3a {
namespace {

constexpr double kDegenerateNorm = 1e-12;

std::vector<int> sample_positions(Rng& rng, int n, int count) {
  std::vector<int> pos(n);
  std::iota(pos.begin(), pos.end(), 0);
  for (int k = 0; k < count; ++k) {
    const int j = k + static_cast<int>(rng.below(static_cast<uint64_t>(n - k)));
    std::swap(pos[k], pos[j]);
  }
  pos.resize(count);
  return pos;
}

SparseRow sparse_sign_row(Rng& rng, int dim, int nnz) {
  SparseRow row;
  row.cols = sample_positions(rng, dim, nnz);
  const double mag = 1.0 / std::sqrt(static_cast<double>(nnz));
  row.vals.reserve(nnz);
  for (int k = 0; k < nnz; ++k) row.vals.push_back(rng.coin() ? mag : -mag);
  return row;
}

std::vector<double> project(const std::vector<SparseRow>& rows, std::span<const double> x) {
  std::vector<double> out(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) out[r] = rows[r].dot(x);
  return out;
}

// Masked cosine between two projections.
double masked_cosine(std::span<const double> p, std::span<const double> q,
                     const std::vector<uint8_t>& mask) {
  double dot = 0.0, pp = 0.0, qq = 0.0;
  for (size_t d = 0; d < mask.size(); ++d) {
    if (!mask[d]) continue;
    dot += p[d] * q[d];
    pp += p[d] * p[d];
    qq += q[d] * q[d];
  }
  const double np = std::sqrt(pp), nq = std::sqrt(qq);
  if (np < kDegenerateNorm || nq < kDegenerateNorm) return 0.0;
  return dot / (np * nq);
}

void check_dims(const SensingBank& bank, const TokenGrid& grid, size_t cue_dim) {
  if (grid.dim() != bank.dim_visual()) {
    throw std::invalid_argument("token dimension " + std::to_string(grid.dim()) +
                                " does not match sensing bank (" + std::to_string(bank.dim_visual()) + ")");
  }
  if (static_cast<int>(cue_dim) != bank.dim_text()) {
    throw std::invalid_argument("cue dimension " + std::to_string(cue_dim) +
                                " does not match sensing bank (" + std::to_string(bank.dim_text()) + ")");
  }
}

}  // namespace

double SparseRow::dot(std::span<const double> x) const {
  double s = 0.0;
  for (size_t k = 0; k < cols.size(); ++k) s += vals[k] * x[cols[k]];
  return s;
}

SensingBank SensingBank::build(const HyperParams& hp, int dim_visual, int dim_text) {
  hp.validate();
  if (dim_visual < 1 || dim_text < 1) throw std::invalid_argument("feature dimensions must be positive");
  if (hp.nnz_visual > dim_visual) throw std::invalid_argument("nnz_visual exceeds visual dimension");
  if (hp.nnz_text > dim_text) throw std::invalid_argument("nnz_text exceeds text dimension");
  if (hp.mask_ones > hp.sensing_dim) throw std::invalid_argument("mask_ones exceeds sensing_dim");

  SensingBank bank;
  bank.sensing_dim_ = hp.sensing_dim;
  bank.dim_visual_ = dim_visual;
  bank.dim_text_ = dim_text;
  Rng rng(hp.seed);
  for (int r = 0; r < hp.sensing_dim; ++r) bank.visual_.push_back(sparse_sign_row(rng, dim_visual, hp.nnz_visual));
  for (int r = 0; r < hp.sensing_dim; ++r) bank.text_.push_back(sparse_sign_row(rng, dim_text, hp.nnz_text));
  for (int h = 0; h < hp.heads; ++h) {
    std::vector<uint8_t> mask(hp.sensing_dim, 0);
    for (int p : sample_positions(rng, hp.sensing_dim, hp.mask_ones)) mask[p] = 1;
    bank.masks_.push_back(std::move(mask));
  }
  return bank;
}

SensingBank SensingBank::from_parts(int sensing_dim, int dim_visual, int dim_text,
                                    std::vector<SparseRow> visual, std::vector<SparseRow> text,
                                    std::vector<std::vector<uint8_t>> masks) {
  if (static_cast<int>(visual.size()) != sensing_dim || static_cast<int>(text.size()) != sensing_dim) {
    throw std::invalid_argument("projection row count must equal sensing_dim");
  }
  if (masks.empty()) throw std::invalid_argument("sensing bank needs at least one head");
  auto check_row = [](const SparseRow& row, int dim) {
    if (row.cols.size() != row.vals.size()) throw std::invalid_argument("sparse row size mismatch");
    for (int c : row.cols) {
      if (c < 0 || c >= dim) throw std::invalid_argument("sparse row column out of range");
    }
  };
  for (const auto& r : visual) check_row(r, dim_visual);
  for (const auto& r : text) check_row(r, dim_text);
  for (const auto& m : masks) {
    if (static_cast<int>(m.size()) != sensing_dim) throw std::invalid_argument("mask length must equal sensing_dim");
  }
  SensingBank bank;
  bank.sensing_dim_ = sensing_dim;
  bank.dim_visual_ = dim_visual;
  bank.dim_text_ = dim_text;
  bank.visual_ = std::move(visual);
  bank.text_ = std::move(text);
  bank.masks_ = std::move(masks);
  return bank;
}

std::vector<double> SensingBank::project_visual(std::span<const double> v) const { return project(visual_, v); }

std::vector<double> SensingBank::project_text(std::span<const double> c) const { return project(text_, c); }

double head_response(const SensingBank& bank, std::span<const double> v, std::span<const double> c, int head) {
  if (head < 0 || head >= bank.heads()) throw std::invalid_argument("head index out of range");
  const auto p = bank.project_visual(v);
  const auto q = bank.project_text(c);
  return masked_cosine(p, q, bank.mask(head));
}

HeadGate gate_heads(const SensingBank& bank, std::span<const double> c, const HyperParams& hp) {
  const int n_heads = bank.heads();
  const int k = std::min(hp.active_heads, n_heads);
  if (k < 1) throw std::invalid_argument("active_heads must be >= 1");
  const auto q = bank.project_text(c);
  HeadGate gate;
  gate.activation.resize(n_heads);
  for (int h = 0; h < n_heads; ++h) {
    double e = 0.0;
    const auto& m = bank.mask(h);
    for (size_t d = 0; d < m.size(); ++d) {
      if (m[d]) e += q[d] * q[d];
    }
    gate.activation[h] = std::sqrt(e);
  }
  std::vector<int> order(n_heads);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return gate.activation[x] > gate.activation[y]; });
  gate.heads.assign(order.begin(), order.begin() + k);
  const double top = gate.activation[gate.heads.front()] / hp.gate_temperature;
  double z = 0.0;
  for (int h : gate.heads) {
    gate.weights.push_back(std::exp(gate.activation[h] / hp.gate_temperature - top));
    z += gate.weights.back();
  }
  for (double& w : gate.weights) w /= z;
  return gate;
}

namespace {

std::vector<double> field_for_gate(const SensingBank& bank, const VisualProjection& projected,
                                   std::span<const double> cue, const HeadGate& gate) {
  const auto q = bank.project_text(cue);
  const int n = static_cast<int>(projected.data.size() / std::max(1, projected.sensing_dim));
  std::vector<double> field(n);
  parallel_for(n, [&](int i) {
    const auto p = projected.row(i);
    double s = 0.0;
    for (size_t k = 0; k < gate.heads.size(); ++k) {
      s += gate.weights[k] * masked_cosine(p, q, bank.mask(gate.heads[k]));
    }
    field[i] = s;
  });
  return field;
}

void check_text_dim(const SensingBank& bank, size_t cue_dim) {
  if (static_cast<int>(cue_dim) != bank.dim_text()) {
    throw std::invalid_argument("cue dimension " + std::to_string(cue_dim) +
                                " does not match sensing bank (" + std::to_string(bank.dim_text()) + ")");
  }
}

}  // namespace

VisualProjection project_grid(const SensingBank& bank, const TokenGrid& grid) {
  if (grid.dim() != bank.dim_visual()) {
    throw std::invalid_argument("token dimension " + std::to_string(grid.dim()) +
                                " does not match sensing bank (" + std::to_string(bank.dim_visual()) + ")");
  }
  VisualProjection out;
  out.sensing_dim = bank.sensing_dim();
  out.data.resize(static_cast<size_t>(grid.size()) * bank.sensing_dim());
  parallel_for(grid.size(), [&](int i) {
    const auto p = bank.project_visual(grid.token(i));
    std::copy(p.begin(), p.end(), out.data.begin() + static_cast<size_t>(i) * out.sensing_dim);
  });
  return out;
}

std::vector<double> single_cue_field(const SensingBank& bank, const VisualProjection& projected,
                                     std::span<const double> cue, const HyperParams& hp) {
  check_text_dim(bank, cue.size());
  return field_for_gate(bank, projected, cue, gate_heads(bank, cue, hp));
}

std::vector<double> single_cue_field(const SensingBank& bank, const TokenGrid& grid,
                                     std::span<const double> cue, const HyperParams& hp) {
  check_dims(bank, grid, cue.size());
  return single_cue_field(bank, project_grid(bank, grid), cue, hp);
}

OdorField odor_field(const SensingBank& bank, const TokenGrid& grid, const CueSet& cues,
                     const HyperParams& hp) {
  if (cues.cues.empty()) throw std::invalid_argument("cue set needs at least one cue");
  for (const Cue& c : cues.cues) check_dims(bank, grid, c.vector.size());
  OdorField out;
  out.projected = project_grid(bank, grid);
  for (const Cue& c : cues.cues) {
    out.gates.push_back(gate_heads(bank, c.vector, hp));
    out.per_cue.push_back(field_for_gate(bank, out.projected, c.vector, out.gates.back()));
  }
  out.a = out.per_cue.front();
  for (size_t c = 1; c < out.per_cue.size(); ++c) {
    for (int i = 0; i < grid.size(); ++i) out.a[i] = std::max(out.a[i], out.per_cue[c][i]);
  }
  return out;
}

}  // namespace f3a
