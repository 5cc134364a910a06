#include "cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <optional>
#include <sstream>

#include "xlingual/adversarial.hpp"
#include "xlingual/alignment.hpp"
#include "xlingual/corpus_stats.hpp"
#include "xlingual/graph.hpp"
#include "xlingual/retrieval.hpp"
#include "xlingual/synthbench.hpp"

namespace xlalign {
namespace {

using json = nlohmann::json;
using namespace xlingual;
using Clock = std::chrono::steady_clock;

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Parse, "cannot open '" + path + "'");
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) throw std::runtime_error("sha256 init failed");
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// Everything needed to re-run a command. Timings are the only field that
// varies between identical runs.
class Manifest {
 public:
  Manifest(std::string command, std::uint64_t seed) : command_(std::move(command)), seed_(seed), start_(Clock::now()), last_(start_) {}

  json& config() { return config_; }

  void input(const std::string& role, const std::string& path) {
    inputs_[role] = {{"path", path}, {"sha256", sha256_file(path)}};
  }

  void stage(const std::string& name) {
    const auto now = Clock::now();
    timings_[name + "_seconds"] = std::chrono::duration<double>(now - last_).count();
    last_ = now;
  }

  json to_json() const {
    json t = timings_;
    t["total_seconds"] = std::chrono::duration<double>(Clock::now() - start_).count();
    return {{"command", command_}, {"config", config_}, {"inputs", inputs_}, {"seed", seed_},
            {"version", kVersion}, {"timings", t}};
  }

 private:
  std::string command_;
  std::uint64_t seed_;
  json config_ = json::object();
  json inputs_ = json::object();
  json timings_ = json::object();
  Clock::time_point start_, last_;
};

struct Options {
  std::string src, tgt, gold, seed_dict, matrix, out, word_classes, dict;
  std::string mode = "identical";
  std::string retrieval = "csls";
  std::string transform = "rotation";
  std::string corpus_a, corpus_b;
  std::size_t iterations = 5;
  std::size_t csls_k = 10;
  std::size_t max_vocab = 0;  // 0: no limit
  std::size_t samples = 10;
  std::size_t sample_size = 10;
  std::size_t neighbors = 1;
  std::size_t top_frequent = 10000;
  std::size_t epochs = 50;
  std::size_t candidates = 0;  // 0: whole target vocabulary
  std::uint64_t seed = 0;
  std::size_t n = 2000;
  std::size_t dim = 20;
  double sigma = 0.0;
  double domain_shift = 0.0;
  double shared_fraction = 0.0;
  double train_fraction = 0.1;
  std::vector<double> noise_levels{0.0, 0.2, 0.4, 0.6, 0.8};
};

std::string format_double(double v) {
  std::ostringstream s;
  xlingual::detail::write_double(s, v);
  return s.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  f << content;
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

void emit(std::ostream& out, const json& report, const std::string& path) {
  const std::string text = report.dump(2) + "\n";
  out << text;
  if (!path.empty()) write_file(path, text);
}

EmbeddingSpace load_space(const std::string& path, std::size_t max_vocab) {
  LoadOptions o;
  if (max_vocab) o.max_vocab = max_vocab;
  return normalize(load_vec_file(path, o).space);
}

RetrievalMethod retrieval_method(const std::string& name) {
  return name == "cosine" ? RetrievalMethod::Cosine : RetrievalMethod::Csls;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

int cmd_diagnose(const Options& o, std::ostream& out) {
  Manifest m("diagnose", o.seed);
  m.config() = {{"max_vocab", o.max_vocab}, {"samples", o.samples}, {"sample_size", o.sample_size},
                {"neighbors", o.neighbors}};
  m.input("src", o.src);
  m.input("tgt", o.tgt);
  m.input("gold", o.gold);
  const auto src = load_space(o.src, o.max_vocab);
  const auto tgt = load_space(o.tgt, o.max_vocab);
  const auto gold = read_dictionary_file(o.gold);
  m.stage("load");

  SubgraphSampling sampling{o.samples, o.sample_size, o.seed, o.neighbors};
  const SubgraphDiagnostic diag = sampled_subgraph_similarity(src, tgt, gold, sampling);
  m.stage("diagnose");

  json samples = json::array();
  std::size_t iso = 0, checked = 0;
  for (const auto& s : diag.samples) {
    json j = {{"delta", s.similarity.delta}, {"k", s.similarity.k_used},
              {"source_words", s.source_words}, {"target_words", s.target_words}};
    j["isomorphic"] = s.isomorphic ? json(*s.isomorphic) : json(nullptr);
    if (s.isomorphic) {
      ++checked;
      iso += *s.isomorphic;
    }
    samples.push_back(std::move(j));
  }
  json report = {{"manifest", m.to_json()},
                 {"pairs_available", diag.pairs_available},
                 {"pairs_sampled", diag.pairs_sampled},
                 {"mean_delta", diag.mean_delta},
                 {"isomorphic_count", iso},
                 {"isomorphism_checked", checked},
                 {"samples", samples}};
  emit(out, report, o.out);
  return kOk;
}

int cmd_align(const Options& o, std::ostream& out, std::ostream& err) {
  Manifest m("align", o.seed);
  m.config() = {{"mode", o.mode}, {"iterations", o.iterations}, {"retrieval", o.retrieval}, {"csls_k", o.csls_k},
                {"max_vocab", o.max_vocab}, {"top_frequent", o.top_frequent}};
  if (o.mode == "adversarial") m.config()["epochs"] = o.epochs;
  require(o.mode != "seed-file" || !o.seed_dict.empty(), "align: --mode seed-file needs --seed-dict");
  m.input("src", o.src);
  m.input("tgt", o.tgt);
  if (o.mode == "seed-file") m.input("seed_dict", o.seed_dict);
  const auto src = load_space(o.src, o.max_vocab);
  const auto tgt = load_space(o.tgt, o.max_vocab);
  m.stage("load");

  json init = {{"mode", o.mode}};
  TranslationMatrix w0;
  if (o.mode == "adversarial") {
    AdversarialConfig cfg;
    cfg.epochs = o.epochs;
    cfg.seed = o.seed;
    auto r = adversarial_init(src, tgt, cfg);
    w0 = r.w;
    if (!r.trace.empty()) {
      init["final_discriminator_accuracy"] = r.trace.back().discriminator_accuracy;
      init["final_discriminator_loss"] = r.trace.back().discriminator_loss;
    }
  } else {
    const BilingualDictionary seed =
        o.mode == "identical" ? identical_seed(src, tgt) : read_dictionary_file(o.seed_dict, Provenance::Gold);
    auto r = procrustes(src, tgt, seed);
    w0 = r.w;
    init["seed_pairs_used"] = r.pairs_used;
    init["seed_pairs_dropped"] = r.pairs_dropped;
    init["rank_deficient"] = r.rank_deficient;
    if (r.rank_deficient) {
      err << "warning: " << r.pairs_used << " seed pairs for " << src.dim() << " dimensions; the Procrustes solution is not unique\n";
    }
  }
  m.stage("init");

  MutualNNOptions mopts{o.top_frequent, retrieval_method(o.retrieval), o.csls_k};
  const RefineResult refined = refine(src, tgt, w0, o.iterations, mopts);
  m.stage("refine");

  std::ostringstream mat;
  write_matrix(mat, refined.w);
  write_file(o.out, mat.str());

  json report = {{"manifest", m.to_json()},
                 {"init", init},
                 {"dictionary_sizes", refined.dictionary_sizes},
                 {"orthogonality_residual", refined.w.orthogonality_residual},
                 {"matrix", o.out}};
  emit(out, report, o.out + ".json");
  return kOk;
}

int cmd_evaluate(const Options& o, std::ostream& out) {
  Manifest m("evaluate", o.seed);
  m.config() = {{"retrieval", o.retrieval}, {"csls_k", o.csls_k}, {"max_vocab", o.max_vocab}, {"candidates", o.candidates}};
  m.input("src", o.src);
  m.input("tgt", o.tgt);
  m.input("matrix", o.matrix);
  m.input("gold", o.gold);
  if (!o.word_classes.empty()) m.input("word_classes", o.word_classes);
  const auto src = load_space(o.src, o.max_vocab);
  const auto tgt = load_space(o.tgt, o.max_vocab);
  const auto w = read_matrix_file(o.matrix);
  const auto gold = read_dictionary_file(o.gold);
  std::optional<WordClassMap> classes;
  if (!o.word_classes.empty()) {
    std::ifstream in(o.word_classes);
    if (!in) fail(ErrorKind::Parse, "cannot open word classes '" + o.word_classes + "'");
    classes = read_word_classes(in);
  }
  if (w.dim() != src.dim() || src.dim() != tgt.dim()) fail(ErrorKind::InvalidArgument, "evaluate: dimension mismatch");
  m.stage("load");

  RetrievalConfig cfg;
  cfg.method = retrieval_method(o.retrieval);
  cfg.k = o.csls_k;
  if (o.candidates) cfg.candidates = o.candidates;
  const auto tr = translate(gold.sources(), src, tgt, w, cfg);
  EvalReport rep = breakdown_report(tr.predictions, gold, src, tgt, classes ? &*classes : nullptr);
  rep.skipped_oov = tr.skipped_oov.size();
  m.stage("evaluate");

  json groups = json::object();
  for (const auto& [name, g] : rep.groups)
    groups[name] = {{"count", g.count}, {"correct", g.correct}, {"p_at_1", g.p_at_1()}};
  json report = {{"manifest", m.to_json()},
                 {"p_at_1", rep.p_at_1},
                 {"evaluated", rep.evaluated},
                 {"correct", rep.correct},
                 {"skipped_oov", rep.skipped_oov},
                 {"skipped_no_gold", rep.skipped_no_gold},
                 {"groups", groups}};

  if (!o.out.empty()) {
    std::ostringstream tsv;
    tsv << "query\tprediction\tscore\tcorrect\tgroups\n";
    for (const auto& q : rep.outcomes) {
      tsv << q.prediction.query << '\t' << q.prediction.predicted << '\t' << format_double(q.prediction.score) << '\t'
          << (q.correct ? 1 : 0) << '\t';
      for (std::size_t i = 0; i < q.labels.size(); ++i) tsv << (i ? "," : "") << q.labels[i];
      tsv << '\n';
    }
    write_file(o.out + ".tsv", tsv.str());
  }
  emit(out, report, o.out.empty() ? "" : o.out + ".json");
  return kOk;
}

std::vector<std::string> read_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open corpus '" + path + "'");
  return read_tokens(in);
}

int cmd_domainsim(const Options& o, std::ostream& out) {
  Manifest m("domainsim", o.seed);
  m.config() = {{"max_vocab", o.max_vocab}};
  m.input("corpus_a", o.corpus_a);
  m.input("corpus_b", o.corpus_b);
  auto a = read_corpus(o.corpus_a);
  const auto b = read_corpus(o.corpus_b);
  std::size_t dropped = 0;
  if (!o.dict.empty()) {
    m.input("dict", o.dict);
    auto t = translate_tokens(a, read_dictionary_file(o.dict));
    a = std::move(t.tokens);
    dropped = t.dropped;
  }
  std::optional<std::size_t> cap;
  if (o.max_vocab) cap = o.max_vocab;
  const auto pa = term_distribution(a, cap);
  const auto pb = term_distribution(b, cap);
  const auto ds = domain_similarity(pa, pb);
  m.stage("compute");
  json report = {{"manifest", m.to_json()},   {"js", ds.js},
                 {"dsim", ds.dsim},           {"vocabulary_a", pa.vocabulary.size()},
                 {"vocabulary_b", pb.vocabulary.size()}, {"tokens_dropped", dropped}};
  emit(out, report, o.out);
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& out) {
  Manifest m("synth", o.seed);
  SynthSpec spec;
  spec.n = o.n;
  spec.d = o.dim;
  spec.noise_sigma = o.sigma;
  spec.transform = o.transform == "rotation-scaling" ? SynthTransform::RotationScaling : SynthTransform::Rotation;
  spec.domain_shift = o.domain_shift;
  spec.shared_fraction = o.shared_fraction;
  spec.seed = o.seed;
  spec.validate();
  require(o.noise_levels.size() >= 3, "synth: need at least three noise levels");
  m.config() = {{"n", o.n},
                {"dim", o.dim},
                {"sigma", o.sigma},
                {"transform", o.transform},
                {"domain_shift", o.domain_shift},
                {"shared_fraction", o.shared_fraction},
                {"noise_levels", o.noise_levels},
                {"train_fraction", o.train_fraction},
                {"iterations", o.iterations},
                {"retrieval", o.retrieval},
                {"csls_k", o.csls_k},
                {"samples", o.samples},
                {"sample_size", o.sample_size}};

  namespace fs = std::filesystem;
  const fs::path dir(o.out);
  fs::create_directories(dir);

  const SynthPair pair = make_pair(spec);
  std::ostringstream sv, tv, gd;
  write_vec(sv, pair.src);
  write_vec(tv, pair.tgt);
  write_dictionary(gd, pair.gold);
  write_file((dir / "src.vec").string(), sv.str());
  write_file((dir / "tgt.vec").string(), tv.str());
  write_file((dir / "gold.txt").string(), gd.str());
  m.stage("generate");

  SuiteOptions opts;
  opts.train_fraction = o.train_fraction;
  opts.refine_iterations = o.iterations;
  opts.retrieval.method = retrieval_method(o.retrieval);
  opts.retrieval.k = o.csls_k;
  opts.mutual.method = opts.retrieval.method;
  opts.mutual.k = o.csls_k;
  opts.sampling.num_samples = o.samples;
  opts.sampling.sample_size = o.sample_size;
  const SuiteResult suite = correlation_suite(o.noise_levels, spec, opts);
  m.stage("suite");

  std::ostringstream csv;
  csv << "sigma,mean_delta,p_at_1,isomorphic_samples\n";
  json rows = json::array();
  for (const auto& r : suite.rows) {
    csv << format_double(r.sigma) << ',' << format_double(r.mean_delta) << ',' << format_double(r.p_at_1) << ','
        << r.isomorphic_samples << '\n';
    rows.push_back({{"sigma", r.sigma}, {"mean_delta", r.mean_delta}, {"p_at_1", r.p_at_1},
                    {"isomorphic_samples", r.isomorphic_samples}});
  }
  write_file((dir / "suite.csv").string(), csv.str());

  json report = {{"manifest", m.to_json()},
                 {"rows", rows},
                 {"pearson", optional_number(suite.correlation.pearson)},
                 {"spearman", optional_number(suite.correlation.spearman)}};
  emit(out, report, (dir / "suite.json").string());
  return kOk;
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::EmptySeed:
      return kEmptySeed;
    case ErrorKind::Divergence:
      return kDivergence;
    case ErrorKind::NoEvaluable:
      return kNoEvaluable;
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
      return kBadInput;
  }
  return kFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Cross-lingual embedding alignment and diagnostics", "xlalign"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto add_spaces = [&](CLI::App* c) {
    c->add_option("--src", o.src, "source embeddings (.vec)")->required();
    c->add_option("--tgt", o.tgt, "target embeddings (.vec)")->required();
    c->add_option("--max-vocab", o.max_vocab, "read only the first N words (0 = all)");
  };
  auto add_retrieval = [&](CLI::App* c) {
    c->add_option("--retrieval", o.retrieval, "cosine or csls")->check(CLI::IsMember({"cosine", "csls"}));
    c->add_option("--csls-k", o.csls_k, "CSLS neighbourhood size")->check(CLI::PositiveNumber);
  };
  auto add_sampling = [&](CLI::App* c) {
    c->add_option("--samples", o.samples, "number of sampled subgraphs");
    c->add_option("--sample-size", o.sample_size, "nodes per sampled subgraph");
  };

  auto* diagnose = app.add_subcommand("diagnose", "isomorphism diagnostics on sampled gold subgraphs");
  add_spaces(diagnose);
  diagnose->add_option("--gold", o.gold, "gold dictionary")->required();
  add_sampling(diagnose);
  diagnose->add_option("--neighbors", o.neighbors, "nearest neighbours linked per node");
  diagnose->add_option("--seed", o.seed);
  diagnose->add_option("--out", o.out, "also write the JSON report here");

  auto* align = app.add_subcommand("align", "learn an orthogonal translation matrix");
  add_spaces(align);
  align->add_option("--mode", o.mode, "identical, seed-file or adversarial")
      ->check(CLI::IsMember({"identical", "seed-file", "adversarial"}));
  align->add_option("--seed-dict", o.seed_dict, "seed dictionary for --mode seed-file");
  align->add_option("--iterations", o.iterations, "refinement iterations");
  align->add_option("--top-frequent", o.top_frequent, "source words considered when inducing dictionaries");
  align->add_option("--epochs", o.epochs, "adversarial epochs");
  add_retrieval(align);
  align->add_option("--seed", o.seed);
  align->add_option("--out", o.out, "matrix file; the report goes to <out>.json")->required();

  auto* evaluate = app.add_subcommand("evaluate", "precision at 1 against a gold dictionary");
  add_spaces(evaluate);
  evaluate->add_option("--matrix", o.matrix, "translation matrix file")->required();
  evaluate->add_option("--gold", o.gold, "gold dictionary")->required();
  evaluate->add_option("--word-classes", o.word_classes, "word<TAB>label file for per-class scores");
  evaluate->add_option("--candidates", o.candidates, "restrict retrieval to the N most frequent targets (0 = all)");
  add_retrieval(evaluate);
  evaluate->add_option("--seed", o.seed);
  evaluate->add_option("--out", o.out, "prefix for <out>.json and <out>.tsv");

  auto* domainsim = app.add_subcommand("domainsim", "Jensen-Shannon domain similarity of two corpora");
  domainsim->add_option("corpus_a", o.corpus_a)->required();
  domainsim->add_option("corpus_b", o.corpus_b)->required();
  domainsim->add_option("--dict", o.dict, "translate corpus_a tokens first");
  domainsim->add_option("--max-vocab", o.max_vocab, "keep the N most frequent terms (0 = all)");
  domainsim->add_option("--seed", o.seed);
  domainsim->add_option("--out", o.out, "also write the JSON report here");

  auto* synth = app.add_subcommand("synth", "synthetic pair and noise/isomorphism/precision suite");
  synth->add_option("--n", o.n, "words per language");
  synth->add_option("--dim", o.dim, "dimensionality");
  synth->add_option("--sigma", o.sigma, "noise of the written pair");
  synth->add_option("--transform", o.transform)->check(CLI::IsMember({"rotation", "rotation-scaling"}));
  synth->add_option("--domain-shift", o.domain_shift, "fraction of target rows replaced");
  synth->add_option("--shared-fraction", o.shared_fraction, "fraction of pairs with identical labels");
  synth->add_option("--noise-levels", o.noise_levels, "comma-separated sigmas for the suite")->delimiter(',');
  synth->add_option("--train-fraction", o.train_fraction, "gold fraction used for the Procrustes seed");
  synth->add_option("--iterations", o.iterations, "refinement iterations");
  add_retrieval(synth);
  add_sampling(synth);
  synth->add_option("--seed", o.seed);
  synth->add_option("--out", o.out, "output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*diagnose) return cmd_diagnose(o, out);
    if (*align) return cmd_align(o, out, err);
    if (*evaluate) return cmd_evaluate(o, out);
    if (*domainsim) return cmd_domainsim(o, out);
    if (*synth) return cmd_synth(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kFailure;
}

}  // namespace xlalign
