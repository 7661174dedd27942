#pragma once

#include <string_view>

#include "f3a/model.h"
#include "f3a/sensing.h"

namespace f3a {

enum class PrunerKind { kF3a, kScoreRank, kDiversityMaxmin, kSimilarityMerge, kConditionalDiversity };

inline constexpr PrunerKind kAllPruners[] = {PrunerKind::kF3a, PrunerKind::kScoreRank,
                                             PrunerKind::kDiversityMaxmin, PrunerKind::kSimilarityMerge,
                                             PrunerKind::kConditionalDiversity};

const char* to_string(PrunerKind kind);
// Throws std::invalid_argument on an unknown name.
PrunerKind parse_pruner(std::string_view name);

// Top-K by global-cue response.
IndexSet score_rank_select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                           const HyperParams& hp, int k);

// Farthest-point sampling on cosine distance, seeded at the largest-norm token.
IndexSet diversity_maxmin_select(const TokenGrid& grid, int k);

// Dominance sweep that skips near-duplicates of kept tokens.
IndexSet similarity_merge_select(const TokenGrid& grid, int k, double threshold = 0.95);

// Greedy relevance-weighted max-min diversity.
IndexSet conditional_diversity_select(const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                                      const HyperParams& hp, int k);

// Dispatches on kind; f3a runs the full search. All results are sorted.
IndexSet run_pruner(PrunerKind kind, const TokenGrid& grid, const CueSet& cues, const SensingBank& bank,
                    const HyperParams& hp, int k);

}  // namespace f3a
