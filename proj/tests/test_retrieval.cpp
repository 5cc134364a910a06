#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "xlingual/retrieval.hpp"
#include "xlingual/synthbench.hpp"

using namespace xlingual;

namespace {

std::vector<std::string> labels(const std::string& prefix, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

}  // namespace

TEST(CslsScore, HandValues) {
  EXPECT_DOUBLE_EQ(csls_score(1.0, 1.0, 1.0), 0.0);
  EXPECT_NEAR(csls_score(0.8, 0.7, 0.5), 0.4, 1e-12);
  std::vector<double> x{0.6, 0.8};
  EXPECT_DOUBLE_EQ(csls_score(x, x, 0.0, 0.0), 2.0);
}

TEST(MeanNNSimilarity, Examples) {
  auto unit = [](double c) { return std::vector<double>{c, std::sqrt(1 - c * c)}; };
  Matrix rows(3, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    auto u = unit(std::vector<double>{0.9, 0.5, 0.1}[i]);
    rows(i, 0) = u[0];
    rows(i, 1) = u[1];
  }
  EmbeddingSpace space({"a", "b", "c"}, rows, true);
  std::vector<double> x{1.0, 0.0};
  EXPECT_NEAR(mean_nn_similarity(x, space, 2), 0.7, 1e-12);
  EXPECT_NEAR(mean_nn_similarity(space.vector(1), space, 1), 1.0, 1e-12);
  EXPECT_THROW(mean_nn_similarity(x, space, 3), Error);
  EXPECT_THROW(mean_nn_similarity(x, space, 0), Error);
}

TEST(Translate, SelfRetrievalWithIdentity) {
  SynthSpec spec;
  spec.n = 300;
  spec.seed = 2;
  auto pair = make_pair(spec);
  for (auto method : {RetrievalMethod::Cosine, RetrievalMethod::Csls}) {
    RetrievalConfig cfg;
    cfg.method = method;
    auto r = translate(pair.src.words(), pair.src, pair.src, TranslationMatrix::identity(spec.d), cfg);
    ASSERT_EQ(r.predictions.size(), 300u);
    for (const auto& p : r.predictions) EXPECT_EQ(p.predicted, p.query);
  }
}

TEST(Translate, NoiselessRotationWithTrueMapIsPerfect) {
  SynthSpec spec;
  spec.n = 500;
  spec.seed = 6;
  auto pair = make_pair(spec);
  auto r = translate(pair.gold.sources(), pair.src, pair.tgt, pair.true_w);
  EXPECT_EQ(evaluate_p1(r.predictions, pair.gold).p_at_1, 1.0);
}

TEST(Translate, HandThreeWordCsls) {
  // A hub target (t0) near every source; CSLS penalises it.
  Matrix src{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  Matrix tgt{{0.577, 0.577, 0.577}, {0.9, 0.1, 0.0}, {0.0, 0.2, 0.9}};
  EmbeddingSpace s({"a", "b", "c"}, src, true);
  EmbeddingSpace t = normalize(EmbeddingSpace({"hub", "x", "z"}, tgt));
  RetrievalConfig cfg;
  cfg.k = 1;
  auto r = translate(s.words(), s, t, TranslationMatrix::identity(3), cfg);
  auto oracle = oracle::brute_force_csls(s.vectors(), t.vectors(), 1);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.predictions[i].predicted, t.word(oracle[i]));
  cfg.method = RetrievalMethod::Cosine;
  auto rc = translate(s.words(), s, t, TranslationMatrix::identity(3), cfg);
  EXPECT_EQ(rc.predictions[1].predicted, "hub");
}

TEST(Translate, OovQueriesSkippedAndAllOovRejected) {
  EmbeddingSpace s({"a", "b"}, Matrix{{1, 0}, {0, 1}}, true);
  RetrievalConfig cfg;
  cfg.method = RetrievalMethod::Cosine;
  auto r = translate({"a", "nope"}, s, s, TranslationMatrix::identity(2), cfg);
  EXPECT_EQ(r.predictions.size(), 1u);
  EXPECT_EQ(r.skipped_oov, std::vector<std::string>{"nope"});
  try {
    translate({"nope"}, s, s, TranslationMatrix::identity(2), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoEvaluable);
  }
}

TEST(Translate, TiesGoToMoreFrequentTarget) {
  EmbeddingSpace s({"q"}, Matrix{{1, 0}}, true);
  const double h = std::sqrt(0.5);
  EmbeddingSpace t({"first", "second"}, Matrix{{h, h}, {h, -h}}, true);
  RetrievalConfig cfg;
  cfg.method = RetrievalMethod::Cosine;
  EXPECT_EQ(translate({"q"}, s, t, TranslationMatrix::identity(2), cfg).predictions[0].predicted, "first");
}

TEST(Translate, CandidateCapRestrictsTargets) {
  EmbeddingSpace s({"q"}, Matrix{{1, 0}}, true);
  EmbeddingSpace t({"far", "near"}, Matrix{{0, 1}, {1, 0}}, true);
  RetrievalConfig cfg;
  cfg.method = RetrievalMethod::Cosine;
  cfg.candidates = 1;
  EXPECT_EQ(translate({"q"}, s, t, TranslationMatrix::identity(2), cfg).predictions[0].predicted, "far");
}

TEST(Translate, CslsMatchesCosineOnSymmetricInstance) {
  // Orthonormal basis on both sides: every off-diagonal cosine is equal.
  EmbeddingSpace s(labels("s", 4), Matrix::identity(4), true);
  EmbeddingSpace t(labels("t", 4), Matrix::identity(4), true);
  RetrievalConfig csls, cos;
  csls.k = 2;
  cos.method = RetrievalMethod::Cosine;
  auto a = translate(s.words(), s, t, TranslationMatrix::identity(4), csls);
  auto b = translate(s.words(), s, t, TranslationMatrix::identity(4), cos);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.predictions[i].predicted, b.predictions[i].predicted);
  // Full candidate rankings coincide as well.
  const Matrix mapped = s.vectors();
  CrossLingualScorer sc_csls(mapped, t.vectors(), RetrievalMethod::Csls, 2);
  CrossLingualScorer sc_cos(mapped, t.vectors(), RetrievalMethod::Cosine, 2);
  for (std::size_t i = 0; i < 4; ++i) {
    std::vector<std::size_t> ra(4), rb(4);
    std::iota(ra.begin(), ra.end(), 0);
    std::iota(rb.begin(), rb.end(), 0);
    std::stable_sort(ra.begin(), ra.end(), [&](auto x, auto y) { return sc_csls.score(i, x) > sc_csls.score(i, y); });
    std::stable_sort(rb.begin(), rb.end(), [&](auto x, auto y) { return sc_cos.score(i, x) > sc_cos.score(i, y); });
    EXPECT_EQ(ra, rb);
  }
}

TEST(Translate, CslsArgmaxMatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> size(4, 10), dim(2, 6), kk(1, 3);
  for (int t = 0; t < 200; ++t) {
    const std::size_t ns = size(rng), nt = size(rng), d = dim(rng), k = kk(rng);
    auto src = normalize(EmbeddingSpace(labels("s", ns), random_gaussian(ns, d, rng)));
    auto tgt = normalize(EmbeddingSpace(labels("t", nt), random_gaussian(nt, d, rng)));
    TranslationMatrix w(random_orthogonal(d, rng));
    RetrievalConfig cfg;
    cfg.k = k;
    auto r = translate(src.words(), src, tgt, w, cfg);
    auto oracle = oracle::brute_force_csls(w.apply(src.vectors()), tgt.vectors(), k);
    for (std::size_t i = 0; i < ns; ++i) ASSERT_EQ(r.predictions[i].predicted, tgt.word(oracle[i])) << "case " << t;
  }
}

TEST(EvaluateP1, Counts) {
  BilingualDictionary gold;
  gold.add("q1", "a");
  gold.add("q2", "b");
  gold.add("q3", "x");
  gold.add("q3", "y");
  EXPECT_EQ(evaluate_p1({{"q1", "a", 0}, {"q2", "b", 0}}, gold).p_at_1, 1.0);
  EXPECT_EQ(evaluate_p1({{"q1", "a", 0}, {"q2", "zz", 0}}, gold).p_at_1, 0.5);
  EXPECT_EQ(evaluate_p1({{"q3", "y", 0}}, gold).p_at_1, 1.0);

  auto r = evaluate_p1({{"q1", "a", 0}, {"nogold", "a", 0}}, gold);
  EXPECT_EQ(r.evaluated, 1u);
  EXPECT_EQ(r.skipped_no_gold, 1u);
  EXPECT_THROW(evaluate_p1({{"nogold", "a", 0}}, gold), Error);
  EXPECT_THROW(evaluate_p1({{"q1", "a", 0}}, BilingualDictionary{}), Error);
}

TEST(EvaluateP1, PermutationInvariant) {
  BilingualDictionary gold;
  std::vector<Prediction> preds;
  std::mt19937_64 rng(1);
  for (int i = 0; i < 40; ++i) {
    gold.add("q" + std::to_string(i), "t" + std::to_string(i));
    preds.push_back({"q" + std::to_string(i), "t" + std::to_string(rng() % 50), 0.0});
  }
  const double base = evaluate_p1(preds, gold).p_at_1;
  for (int k = 0; k < 10; ++k) {
    std::shuffle(preds.begin(), preds.end(), rng);
    EXPECT_EQ(evaluate_p1(preds, gold).p_at_1, base);
  }
}

TEST(Breakdown, GroupsAndBoundaries) {
  EXPECT_EQ(frequency_group(50), "freq:1-100");
  EXPECT_EQ(frequency_group(100), "freq:1-100");
  EXPECT_EQ(frequency_group(101), "freq:101-1000");
  EXPECT_EQ(frequency_group(1000), "freq:101-1000");
  EXPECT_EQ(frequency_group(10000), "freq:1001-10000");
  EXPECT_EQ(frequency_group(10001), "freq:10001+");

  EmbeddingSpace src({"madrid", "the", "dog"}, Matrix::identity(3), true);
  EmbeddingSpace tgt({"madrid", "the", "perro"}, Matrix::identity(3), true);
  BilingualDictionary gold;
  gold.add("madrid", "madrid");
  gold.add("the", "el");
  gold.add("dog", "perro");
  EXPECT_EQ(homograph_group("madrid", gold, tgt), "homograph:same-same");
  EXPECT_EQ(homograph_group("the", gold, tgt), "homograph:same-diff");
  EXPECT_EQ(homograph_group("dog", gold, tgt), "homograph:diff-diff");

  std::istringstream classes("madrid\tPROPN\ndog\tNOUN\n");
  WordClassMap wc = read_word_classes(classes);
  auto rep = breakdown_report({{"madrid", "madrid", 1}, {"the", "the", 1}, {"dog", "madrid", 1}}, gold, src, tgt, &wc);
  EXPECT_EQ(rep.evaluated, 3u);
  EXPECT_EQ(rep.groups["freq:1-100"].count, 3u);
  EXPECT_EQ(rep.groups["freq:1-100"].correct, 1u);
  EXPECT_EQ(rep.groups["homograph:same-same"].correct, 1u);
  EXPECT_EQ(rep.groups["class:NOUN"].count, 1u);
  EXPECT_EQ(rep.groups["class:unlabeled"].count, 1u);

  // Each family partitions the evaluated queries.
  for (std::string family : {"freq:", "homograph:", "class:"}) {
    std::size_t sum = 0;
    for (const auto& [name, g] : rep.groups)
      if (name.rfind(family, 0) == 0) sum += g.count;
    EXPECT_EQ(sum, rep.evaluated) << family;
  }
}

TEST(WordClasses, MalformedLineRejected) {
  std::istringstream in("word label-without-tab\n");
  EXPECT_THROW(read_word_classes(in), Error);
}
