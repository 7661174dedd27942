#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "f3a/embedding.h"
#include "f3a/model.h"

namespace f3a {

enum class TaskHint { kOcrDetail, kCounting, kSpatialRelation, kVerification };

const char* to_string(TaskHint hint);
// Throws std::invalid_argument for unknown names.
TaskHint parse_task_hint(std::string_view name);

struct PromptOption {
  std::string letter;
  std::string text;
};

struct PromptSpec {
  std::string question;
  std::vector<PromptOption> options;  // empty, or >= 2 with distinct letters
  std::optional<TaskHint> task_hint;
  std::optional<std::string> target_phrase;
};

namespace templates {
std::string global(std::string_view question);
std::string target(std::string_view phrase);
std::string task(TaskHint hint);
std::string option(std::string_view letter, std::string_view text);
}  // namespace templates

// Lowercases, strips punctuation, and drops interrogatives, articles,
// auxiliaries, pronouns and prepositions. Empty result -> nullopt.
std::optional<std::string> extract_target_phrase(std::string_view question);

// Builds the global/target/task cues plus option cues, then applies the cue
// ablations in hp.
CueSet build_cues(const PromptSpec& prompt, const EmbeddingProvider& provider,
                  const HyperParams& hp);

// use_odor_cue=false: every cue vector becomes the uniform unit vector and
// only a single global cue remains. use_multi_cue=false: only the global cue
// remains. Option cues are kept (their vectors are made uniform as well when
// the odor cue is disabled).
CueSet apply_cue_ablations(CueSet cues, const HyperParams& hp);

}  // namespace f3a
