#include <gtest/gtest.h>

#include "cli_fixture.hpp"
#include "xlingual/synthbench.hpp"

using namespace xlingual;
using fixture::run;
using fixture::ScratchDir;

namespace {

SynthPair small_pair(double sigma, double shared, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = 300;
  spec.d = 10;
  spec.noise_sigma = sigma;
  spec.shared_fraction = shared;
  spec.seed = seed;
  return make_pair(spec);
}

std::vector<std::string> synth_args(const std::string& out) {
  return {"synth", "--n", "200", "--dim", "8", "--seed", "3", "--iterations", "1", "--out", out};
}

}  // namespace

TEST(Cli, HelpAndVersionSucceed) {
  EXPECT_EQ(run({"--help"}).code, 0);
  auto v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_NE(v.out.find(xlalign::kVersion), std::string::npos);
}

TEST(Cli, BadUsageIsExitTwo) {
  EXPECT_EQ(run({}).code, xlalign::kBadInput);
  EXPECT_EQ(run({"bogus"}).code, xlalign::kBadInput);
  EXPECT_EQ(run({"align", "--src", "a", "--tgt", "b", "--out", "w", "--mode", "magic"}).code, xlalign::kBadInput);
}

TEST(Cli, MissingInputFileIsExitTwo) {
  ScratchDir dir;
  auto r = run({"align", "--src", dir / "nope.vec", "--tgt", dir / "nope.vec", "--out", dir / "w.txt"});
  EXPECT_EQ(r.code, xlalign::kBadInput);
  EXPECT_NE(r.err.find("nope.vec"), std::string::npos);
}

TEST(Cli, MalformedVecReportsLine) {
  ScratchDir dir;
  fixture::spit(dir / "bad.vec", "a 1 0\nb 1\n");
  fixture::spit(dir / "ok.vec", "a 1 0\nb 0 1\n");
  auto r = run({"align", "--src", dir / "bad.vec", "--tgt", dir / "ok.vec", "--out", dir / "w.txt"});
  EXPECT_EQ(r.code, xlalign::kBadInput);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(Cli, SynthWritesLoadableFilesAndFiveRows) {
  ScratchDir dir;
  auto r = run(synth_args(dir / "out"));
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string csv = fixture::slurp(dir / "out/suite.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.rfind("sigma,mean_delta,p_at_1,isomorphic_samples\n", 0), 0u);
  auto rep = r.report();
  EXPECT_EQ(rep["rows"].size(), 5u);
  EXPECT_EQ(rep["manifest"]["command"], "synth");
  EXPECT_EQ(rep["manifest"]["seed"], 3);
  EXPECT_TRUE(rep.contains("pearson") && rep.contains("spearman"));
  EXPECT_EQ(load_vec_file(dir / "out/src.vec").space.size(), 200u);

  // The generated pair feeds straight into align.
  auto a = run({"align", "--src", dir / "out/src.vec", "--tgt", dir / "out/tgt.vec", "--mode", "seed-file",
                "--seed-dict", dir / "out/gold.txt", "--iterations", "1", "--out", dir / "w.txt"});
  EXPECT_EQ(a.code, 0) << a.err;
}

TEST(Cli, SynthRepeatIsByteIdentical) {
  ScratchDir dir;
  auto a = run(synth_args(dir / "a"));
  auto b = run(synth_args(dir / "b"));
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  for (std::string f : {"src.vec", "tgt.vec", "gold.txt", "suite.csv"})
    EXPECT_EQ(fixture::slurp(dir / ("a/" + f)), fixture::slurp(dir / ("b/" + f))) << f;
  EXPECT_EQ(fixture::without_timings(a.out), fixture::without_timings(b.out));
}

TEST(Cli, SynthInvalidSpecIsExitTwo) {
  ScratchDir dir;
  EXPECT_EQ(run({"synth", "--n", "1", "--out", dir / "x"}).code, xlalign::kBadInput);
  EXPECT_EQ(run({"synth", "--noise-levels", "0,0.1", "--out", dir / "x"}).code, xlalign::kBadInput);
}

TEST(Cli, AlignIdenticalModeOnSharedLabels) {
  ScratchDir dir;
  auto p = small_pair(0.05, 0.3, 1);
  fixture::write_space(dir / "s.vec", p.src);
  fixture::write_space(dir / "t.vec", p.tgt);
  auto r = run({"align", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--mode", "identical", "--out", dir / "w.txt"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = r.report();
  EXPECT_LT(rep["orthogonality_residual"].get<double>(), 1e-6);
  EXPECT_EQ(rep["init"]["seed_pairs_used"], 90);
  EXPECT_EQ(rep["dictionary_sizes"].size(), 5u);
  EXPECT_EQ(fixture::without_timings(fixture::slurp(dir / "w.txt.json")), fixture::without_timings(r.out));
  EXPECT_EQ(rep["manifest"]["inputs"]["src"]["sha256"].get<std::string>().size(), 64u);
  auto w = read_matrix_file(dir / "w.txt");
  EXPECT_LT(frobenius_norm(w.w - p.true_w.w), 0.1);
}

TEST(Cli, AlignEmptySeedFileIsExitThree) {
  ScratchDir dir;
  auto p = small_pair(0.0, 0.0, 2);
  fixture::write_space(dir / "s.vec", p.src);
  fixture::write_space(dir / "t.vec", p.tgt);
  fixture::spit(dir / "empty.txt", "");
  auto r = run({"align", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--mode", "seed-file", "--seed-dict",
                dir / "empty.txt", "--out", dir / "w.txt"});
  EXPECT_EQ(r.code, xlalign::kEmptySeed);
  auto none = run({"align", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--mode", "identical", "--out", dir / "w.txt"});
  EXPECT_EQ(none.code, xlalign::kEmptySeed);
}

TEST(Cli, AlignSeedFileModeNeedsDictionary) {
  ScratchDir dir;
  auto p = small_pair(0.0, 0.0, 2);
  fixture::write_space(dir / "s.vec", p.src);
  EXPECT_EQ(run({"align", "--src", dir / "s.vec", "--tgt", dir / "s.vec", "--mode", "seed-file", "--out", dir / "w.txt"}).code,
            xlalign::kBadInput);
}

TEST(Cli, AlignAdversarialZeroEpochsWritesIdentity) {
  ScratchDir dir;
  auto p = small_pair(0.0, 0.0, 3);
  fixture::write_space(dir / "s.vec", p.src);
  fixture::write_space(dir / "t.vec", p.tgt);
  auto r = run({"align", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--mode", "adversarial", "--epochs", "0",
                "--iterations", "0", "--out", dir / "w.txt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_matrix_file(dir / "w.txt").w, Matrix::identity(10));
}

TEST(Cli, EvaluateTrueMapIsPerfect) {
  ScratchDir dir;
  auto p = small_pair(0.0, 0.0, 4);
  fixture::write_space(dir / "s.vec", p.src);
  fixture::write_space(dir / "t.vec", p.tgt);
  fixture::write_dict(dir / "gold.txt", p.gold);
  fixture::write_w(dir / "w.txt", p.true_w);
  auto r = run({"evaluate", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--matrix", dir / "w.txt", "--gold",
                dir / "gold.txt", "--out", dir / "eval"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = r.report();
  EXPECT_EQ(rep["p_at_1"], 1.0);
  EXPECT_EQ(rep["evaluated"], 300);
  EXPECT_EQ(rep["groups"]["freq:1-100"]["count"], 100);
  EXPECT_EQ(rep["manifest"]["config"]["retrieval"], "csls");
  const std::string tsv = fixture::slurp(dir / "eval.tsv");
  EXPECT_EQ(tsv.rfind("query\tprediction\tscore\tcorrect\tgroups\n", 0), 0u);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 301);
}

TEST(Cli, EvaluateHalfCorrectFixture) {
  ScratchDir dir;
  fixture::spit(dir / "s.vec", "2 2\na 1 0\nb 0 1\n");
  fixture::spit(dir / "t.vec", "2 2\nx 1 0\ny 0 1\n");
  fixture::spit(dir / "gold.txt", "a x\nb x\n");
  fixture::spit(dir / "w.txt", "2 2\n1 0\n0 1\n");
  fixture::spit(dir / "classes.tsv", "a\tNOUN\n");
  auto r = run({"evaluate", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--matrix", dir / "w.txt", "--gold",
                dir / "gold.txt", "--retrieval", "cosine", "--word-classes", dir / "classes.tsv"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = r.report();
  EXPECT_EQ(rep["p_at_1"], 0.5);
  EXPECT_EQ(rep["groups"]["class:NOUN"]["correct"], 1);
  EXPECT_EQ(rep["groups"]["class:unlabeled"]["correct"], 0);
}

TEST(Cli, EvaluateNothingEvaluableIsExitFive) {
  ScratchDir dir;
  fixture::spit(dir / "s.vec", "2 2\na 1 0\nb 0 1\n");
  fixture::spit(dir / "gold.txt", "zzz a\n");
  fixture::spit(dir / "w.txt", "2 2\n1 0\n0 1\n");
  auto r = run({"evaluate", "--src", dir / "s.vec", "--tgt", dir / "s.vec", "--matrix", dir / "w.txt", "--gold",
                dir / "gold.txt", "--retrieval", "cosine"});
  EXPECT_EQ(r.code, xlalign::kNoEvaluable);
}

TEST(Cli, EvaluateDimensionMismatchIsExitTwo) {
  ScratchDir dir;
  fixture::spit(dir / "s.vec", "2 2\na 1 0\nb 0 1\n");
  fixture::spit(dir / "gold.txt", "a a\n");
  fixture::spit(dir / "w.txt", "3 3\n1 0 0\n0 1 0\n0 0 1\n");
  auto r = run({"evaluate", "--src", dir / "s.vec", "--tgt", dir / "s.vec", "--matrix", dir / "w.txt", "--gold",
                dir / "gold.txt"});
  EXPECT_EQ(r.code, xlalign::kBadInput);
}

TEST(Cli, DomainsimCases) {
  ScratchDir dir;
  fixture::spit(dir / "a.txt", "a a\n");
  fixture::spit(dir / "b.txt", "a b\n");
  fixture::spit(dir / "c.txt", "z z z\n");
  fixture::spit(dir / "empty.txt", "\n");
  fixture::spit(dir / "dict.txt", "z a\n");

  auto same = run({"domainsim", dir / "a.txt", dir / "a.txt"});
  ASSERT_EQ(same.code, 0) << same.err;
  EXPECT_NEAR(same.report()["dsim"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(run({"domainsim", dir / "a.txt", dir / "c.txt"}).report()["dsim"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(run({"domainsim", dir / "a.txt", dir / "b.txt"}).report()["dsim"].get<double>(), 0.6887, 1e-4);
  // Translating "z z z" through the dictionary makes it identical to "a a".
  EXPECT_NEAR(run({"domainsim", dir / "c.txt", dir / "a.txt", "--dict", dir / "dict.txt"}).report()["dsim"].get<double>(),
              1.0, 1e-12);
  EXPECT_EQ(run({"domainsim", dir / "empty.txt", dir / "a.txt"}).code, xlalign::kBadInput);
}

TEST(Cli, DiagnoseIdenticalSpacesIsIsomorphic) {
  ScratchDir dir;
  auto p = small_pair(0.0, 0.0, 5);
  fixture::write_space(dir / "s.vec", p.src);
  BilingualDictionary identity;
  for (const auto& w : p.src.words()) identity.add(w, w);
  fixture::write_dict(dir / "gold.txt", identity);
  auto r = run({"diagnose", "--src", dir / "s.vec", "--tgt", dir / "s.vec", "--gold", dir / "gold.txt", "--seed", "7",
                "--out", dir / "diag.json"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto rep = r.report();
  EXPECT_NEAR(rep["mean_delta"].get<double>(), 0.0, 1e-9);
  EXPECT_EQ(rep["isomorphic_count"], 10);
  EXPECT_EQ(rep["samples"].size(), 10u);
  EXPECT_EQ(fixture::slurp(dir / "diag.json"), r.out);
}

TEST(Cli, DiagnoseNoisyPairReportsPositiveDelta) {
  ScratchDir dir;
  auto p = small_pair(0.5, 0.0, 6);
  fixture::write_space(dir / "s.vec", p.src);
  fixture::write_space(dir / "t.vec", p.tgt);
  fixture::write_dict(dir / "gold.txt", p.gold);
  auto r = run({"diagnose", "--src", dir / "s.vec", "--tgt", dir / "t.vec", "--gold", dir / "gold.txt"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_GT(r.report()["mean_delta"].get<double>(), 0.0);
}
