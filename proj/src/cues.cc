#include "f3a/cues.h"

#include <array>
#include <cctype>
#include <cmath>
#include <set>
#include <stdexcept>

namespace f3a {
namespace {

constexpr std::string_view kStopWords[] = {
    // interrogatives
    "what", "which", "who", "whom", "whose", "where", "when", "why", "how",
    // articles
    "a", "an", "the",
    // auxiliaries
    "is", "are", "was", "were", "be", "been", "being", "am", "do", "does", "did",
    "can", "could", "will", "would", "shall", "should", "may", "might", "must",
    "has", "have", "had",
    // pronouns and demonstratives
    "it", "its", "this", "that", "these", "those", "there", "they", "them",
    "he", "she", "his", "her", "i", "you", "we",
    // prepositions and particles
    "in", "on", "at", "of", "to", "for", "with", "by", "from", "into", "onto",
    "about", "above", "below", "under", "over", "between", "behind", "near",
    "inside", "outside", "through", "up", "down", "as", "any", "or", "and",
    "not", "if"};

bool is_stop_word(std::string_view w) {
  for (auto s : kStopWords) {
    if (s == w) return true;
  }
  return false;
}

std::vector<double> uniform_unit(int dim) {
  return std::vector<double>(dim, 1.0 / std::sqrt(static_cast<double>(dim)));
}

}  // namespace

const char* to_string(TaskHint hint) {
  switch (hint) {
    case TaskHint::kOcrDetail: return "ocr_detail";
    case TaskHint::kCounting: return "counting";
    case TaskHint::kSpatialRelation: return "spatial_relation";
    case TaskHint::kVerification: return "verification";
  }
  return "?";
}

TaskHint parse_task_hint(std::string_view name) {
  for (TaskHint h : {TaskHint::kOcrDetail, TaskHint::kCounting, TaskHint::kSpatialRelation,
                     TaskHint::kVerification}) {
    if (name == to_string(h)) return h;
  }
  throw std::invalid_argument("unknown task hint '" + std::string(name) + "'");
}

namespace templates {

std::string global(std::string_view question) {
  return "describe the image region relevant to: " + std::string(question);
}

std::string target(std::string_view phrase) { return "find " + std::string(phrase) + " in the image"; }

std::string task(TaskHint hint) {
  switch (hint) {
    case TaskHint::kOcrDetail: return "read the text and fine details in the image";
    case TaskHint::kCounting: return "count every instance of the object in the image";
    case TaskHint::kSpatialRelation: return "locate the objects and their spatial relation in the image";
    case TaskHint::kVerification: return "check whether the described object is present in the image";
  }
  return {};
}

std::string option(std::string_view letter, std::string_view text) {
  return "the answer is " + std::string(letter) + ": " + std::string(text);
}

}  // namespace templates

std::optional<std::string> extract_target_phrase(std::string_view question) {
  std::string cleaned;
  cleaned.reserve(question.size());
  for (unsigned char c : question) {
    if (std::isalnum(c) || c >= 0x80) {
      cleaned.push_back(static_cast<char>(std::tolower(c)));
    } else {
      cleaned.push_back(' ');
    }
  }
  std::string phrase;
  size_t pos = 0;
  while (pos < cleaned.size()) {
    while (pos < cleaned.size() && cleaned[pos] == ' ') ++pos;
    size_t end = pos;
    while (end < cleaned.size() && cleaned[end] != ' ') ++end;
    if (end > pos) {
      std::string_view w(cleaned.data() + pos, end - pos);
      if (!is_stop_word(w)) {
        if (!phrase.empty()) phrase.push_back(' ');
        phrase.append(w);
      }
    }
    pos = end;
  }
  if (phrase.empty()) return std::nullopt;
  return phrase;
}

CueSet build_cues(const PromptSpec& prompt, const EmbeddingProvider& provider,
                  const HyperParams& hp) {
  bool blank = true;
  for (unsigned char c : prompt.question) blank = blank && std::isspace(c);
  if (blank) throw std::invalid_argument("prompt question is empty");
  if (!prompt.options.empty()) {
    if (prompt.options.size() < 2) throw std::invalid_argument("multiple-choice prompts need >= 2 options");
    std::set<std::string> letters;
    for (const auto& o : prompt.options) {
      if (!letters.insert(o.letter).second) {
        throw std::invalid_argument("duplicate option letter '" + o.letter + "'");
      }
    }
  }

  CueSet set;
  const int dim = provider.dim();
  {
    auto ex = provider.embed(prompt.question);
    auto et = provider.embed(templates::global(prompt.question));
    std::vector<double> g(dim);
    for (int d = 0; d < dim; ++d) g[d] = 0.5 * (ex[d] + et[d]);
    set.cues.push_back({CueKind::kGlobal, normalized(std::move(g)), "global"});
  }
  std::optional<std::string> phrase = prompt.target_phrase;
  if (!phrase) phrase = extract_target_phrase(prompt.question);
  if (phrase && !phrase->empty()) {
    set.cues.push_back({CueKind::kTarget, provider.embed(templates::target(*phrase)), "target"});
  }
  if (prompt.task_hint) {
    set.cues.push_back(
        {CueKind::kTask, provider.embed(templates::task(*prompt.task_hint)), to_string(*prompt.task_hint)});
  }
  for (const auto& o : prompt.options) {
    set.option_cues.push_back({CueKind::kOption, provider.embed(templates::option(o.letter, o.text)), o.letter});
  }
  set.prompt_kind = set.option_cues.empty() ? PromptKind::kOpenEnded : PromptKind::kMultipleChoice;
  return apply_cue_ablations(std::move(set), hp);
}

CueSet apply_cue_ablations(CueSet cues, const HyperParams& hp) {
  const int dim = cues.dim();
  if (!hp.use_odor_cue) {
    CueSet out;
    out.cues.push_back({CueKind::kGlobal, uniform_unit(dim), "constant"});
    for (const Cue& o : cues.option_cues) out.option_cues.push_back({CueKind::kOption, uniform_unit(dim), o.label});
    out.prompt_kind = cues.prompt_kind;
    return out;
  }
  if (!hp.use_multi_cue) {
    Cue g = cues.global();
    g.kind = CueKind::kGlobal;
    cues.cues = {std::move(g)};
  }
  return cues;
}

}  // namespace f3a
