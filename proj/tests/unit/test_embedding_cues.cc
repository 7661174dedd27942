#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "f3a/cues.h"
#include "f3a/embedding.h"
#include "f3a/f3t.h"
#include "f3a/rng.h"

namespace f3a {
namespace {

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s / (norm(a) * norm(b));
}

// Word vector rebuilt by hand from the hash-seeded generator.
std::vector<double> oracle_word(const std::string& w, int dim) {
  Rng rng(fnv1a64(w));
  std::vector<double> v(dim);
  for (double& x : v) {
    const double u1 = std::max(rng.uniform01(), 0x1p-64);
    const double u2 = rng.uniform01();
    x = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  const double n = norm(v);
  for (double& x : v) x /= n;
  return v;
}

TEST(EmbeddingTest, DeterministicAndUnitNorm) {
  const auto p = EmbeddingProvider::desk_hash(64);
  const auto a = p.embed("cat");
  EXPECT_EQ(a, p.embed("cat"));
  EXPECT_NEAR(norm(a), 1.0, 1e-6);
  EXPECT_NEAR(norm(p.embed("a much longer sentence with many words")), 1.0, 1e-6);
}

TEST(EmbeddingTest, WordVectorMatchesHandDerivation) {
  const auto oracle = oracle_word("cat", 32);
  const auto got = desk_word_vector("cat", 32);
  for (int d = 0; d < 32; ++d) EXPECT_NEAR(got[d], oracle[d], 1e-12);
}

TEST(EmbeddingTest, MeanPooledPair) {
  const auto p = EmbeddingProvider::desk_hash(48);
  const auto cat = oracle_word("cat", 48), dog = oracle_word("dog", 48);
  std::vector<double> mean(48);
  for (int d = 0; d < 48; ++d) mean[d] = 0.5 * (cat[d] + dog[d]);
  const double n = norm(mean);
  const auto got = p.embed("cat dog");
  for (int d = 0; d < 48; ++d) EXPECT_NEAR(got[d], mean[d] / n, 1e-12);
}

TEST(EmbeddingTest, WhitespaceAndOrderInsensitive) {
  const auto p = EmbeddingProvider::desk_hash(64);
  EXPECT_EQ(p.embed("a  b"), p.embed("a b"));
  EXPECT_EQ(p.embed("a b"), p.embed("b a"));
  EXPECT_EQ(p.embed("\tRed  Cape \n"), p.embed("cape red"));
}

TEST(EmbeddingTest, RandomWordsAreNearlyOrthogonal) {
  const int dim = 64;
  Rng rng(3);
  double sum = 0;
  const int pairs = 10000;
  for (int i = 0; i < pairs; ++i) {
    const auto a = desk_word_vector("w" + std::to_string(rng.next()), dim);
    const auto b = desk_word_vector("w" + std::to_string(rng.next()), dim);
    sum += std::abs(cosine(a, b));
  }
  EXPECT_LE(sum / pairs, 3.0 / std::sqrt(dim));
}

TEST(EmbeddingTest, EmptyTextRejected) {
  const auto p = EmbeddingProvider::desk_hash(8);
  EXPECT_THROW(p.embed(""), std::invalid_argument);
  EXPECT_THROW(p.embed("   "), std::invalid_argument);
}

TEST(EmbeddingTest, FileBackedLookup) {
  F3TContainer c;
  c.add("hello world", Tensor{{3}, {3.f, 0.f, 4.f}});
  c.add("other", Tensor{{3}, {0.f, 1.f, 0.f}});
  const auto path = std::filesystem::temp_directory_path() / "f3a_emb_test.f3t";
  c.write(path);
  const auto p = EmbeddingProvider::from_file(path);
  EXPECT_EQ(p.mode(), EmbeddingProvider::Mode::kFileBacked);
  EXPECT_EQ(p.dim(), 3);
  const auto v = p.embed("hello world");
  EXPECT_NEAR(v[0], 0.6, 1e-7);
  EXPECT_NEAR(v[2], 0.8, 1e-7);
  try {
    p.embed("hello  world");
    FAIL() << "expected a miss";
  } catch (const MissingEmbeddingError& e) {
    EXPECT_EQ(e.key(), "hello  world");
  }
  std::filesystem::remove(path);
}

TEST(EmbeddingTest, FileBackedRejectsHigherRank) {
  F3TContainer c;
  c.add("m", Tensor{{2, 2}, {1.f, 0.f, 0.f, 1.f}});
  const auto path = std::filesystem::temp_directory_path() / "f3a_emb_rank.f3t";
  c.write(path);
  EXPECT_THROW(EmbeddingProvider::from_file(path), FormatError);
  std::filesystem::remove(path);
}

TEST(CuesTest, TargetPhraseExtraction) {
  EXPECT_EQ(extract_target_phrase("What color cape is the woman wearing?"), "color cape woman wearing");
  EXPECT_EQ(extract_target_phrase("Is it?"), std::nullopt);
  EXPECT_EQ(extract_target_phrase(""), std::nullopt);
  EXPECT_EQ(extract_target_phrase("How many DOGS are on the sofa?"), "many dogs sofa");
}

TEST(CuesTest, OpenQuestionGetsGlobalAndTarget) {
  const auto p = EmbeddingProvider::desk_hash(32);
  PromptSpec spec{"What color cape is the woman wearing?", {}, std::nullopt, std::nullopt};
  const CueSet cues = build_cues(spec, p, HyperParams{});
  ASSERT_EQ(cues.cues.size(), 2u);
  EXPECT_EQ(cues.cues[0].kind, CueKind::kGlobal);
  EXPECT_EQ(cues.cues[1].kind, CueKind::kTarget);
  EXPECT_EQ(cues.prompt_kind, PromptKind::kOpenEnded);
  EXPECT_EQ(cues.cues[1].vector, p.embed(templates::target("color cape woman wearing")));
  EXPECT_NO_THROW(cues.validate());
}

TEST(CuesTest, GlobalCueIsNormalizedAverage) {
  const auto p = EmbeddingProvider::desk_hash(32);
  const std::string q = "where is the cat";
  const CueSet cues = build_cues({q, {}, std::nullopt, std::nullopt}, p, HyperParams{});
  const auto a = p.embed(q), b = p.embed(templates::global(q));
  std::vector<double> m(32);
  for (int d = 0; d < 32; ++d) m[d] = 0.5 * (a[d] + b[d]);
  const double n = norm(m);
  for (int d = 0; d < 32; ++d) EXPECT_NEAR(cues.cues[0].vector[d], m[d] / n, 1e-12);
}

TEST(CuesTest, MultipleChoiceAndTaskHint) {
  const auto p = EmbeddingProvider::desk_hash(32);
  PromptSpec spec{"Which animal is shown?",
                  {{"A", "cat"}, {"B", "dog"}, {"C", "bird"}, {"D", "fish"}},
                  TaskHint::kCounting,
                  std::nullopt};
  const CueSet cues = build_cues(spec, p, HyperParams{});
  EXPECT_EQ(cues.option_cues.size(), 4u);
  EXPECT_EQ(cues.prompt_kind, PromptKind::kMultipleChoice);
  EXPECT_EQ(cues.cues.back().kind, CueKind::kTask);
  EXPECT_EQ(cues.option_cues[1].vector, p.embed(templates::option("B", "dog")));
}

TEST(CuesTest, TargetOverrideWinsAndLeavesGlobalAlone) {
  const auto p = EmbeddingProvider::desk_hash(32);
  PromptSpec a{"What color cape is the woman wearing?", {}, std::nullopt, std::nullopt};
  PromptSpec b = a;
  b.target_phrase = "red cape";
  const CueSet ca = build_cues(a, p, HyperParams{}), cb = build_cues(b, p, HyperParams{});
  EXPECT_EQ(ca.cues[0].vector, cb.cues[0].vector);
  EXPECT_EQ(cb.cues[1].vector, p.embed(templates::target("red cape")));
}

TEST(CuesTest, Ablations) {
  const auto p = EmbeddingProvider::desk_hash(16);
  PromptSpec spec{"Is the red cup left of the plate?", {{"A", "yes"}, {"B", "no"}}, TaskHint::kSpatialRelation,
                  std::nullopt};
  HyperParams single;
  single.use_multi_cue = false;
  const CueSet s = build_cues(spec, p, single);
  ASSERT_EQ(s.cues.size(), 1u);
  EXPECT_EQ(s.cues[0].kind, CueKind::kGlobal);

  HyperParams constant;
  constant.use_odor_cue = false;
  const CueSet c1 = build_cues(spec, p, constant);
  const CueSet c2 = build_cues({"totally different words", {}, std::nullopt, std::nullopt}, p, constant);
  ASSERT_EQ(c1.cues.size(), 1u);
  EXPECT_EQ(c1.cues[0].vector, c2.cues[0].vector);
  for (double x : c1.cues[0].vector) EXPECT_NEAR(x, 0.25, 1e-15);
}

TEST(CuesTest, Errors) {
  const auto p = EmbeddingProvider::desk_hash(8);
  EXPECT_THROW(build_cues({"", {}, std::nullopt, std::nullopt}, p, {}), std::invalid_argument);
  EXPECT_THROW(build_cues({"q", {{"A", "x"}}, std::nullopt, std::nullopt}, p, {}), std::invalid_argument);
  EXPECT_THROW(build_cues({"q", {{"A", "x"}, {"A", "y"}}, std::nullopt, std::nullopt}, p, {}),
               std::invalid_argument);
  EXPECT_THROW(parse_task_hint("vibes"), std::invalid_argument);
  EXPECT_EQ(parse_task_hint("ocr_detail"), TaskHint::kOcrDetail);
}

}  // namespace
}  // namespace f3a
