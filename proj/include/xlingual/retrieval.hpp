#pragma once

// Cross-lingual nearest-neighbour retrieval (cosine or CSLS) and P@1 scoring.
//
// CSLS(x, y) = 2 cos(x, y) - mnn_T(x) - mnn_S(y), where mnn_T(x) is the mean
// cosine of the mapped source vector x to its K nearest target vectors and
// mnn_S(y) the mean cosine of target y to its K nearest mapped source vectors.

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/numerics.hpp"

namespace xlingual {

enum class RetrievalMethod { Cosine, Csls };

inline std::string_view to_string(RetrievalMethod m) {
  return m == RetrievalMethod::Cosine ? "cosine" : "csls";
}

struct RetrievalConfig {
  RetrievalMethod method = RetrievalMethod::Csls;
  std::size_t k = 10;
  std::optional<std::size_t> candidates;  // cap on the target vocabulary
};

inline double csls_score(double cosine, double mnn_x, double mnn_y) {
  return 2.0 * cosine - mnn_x - mnn_y;
}

inline double csls_score(std::span<const double> x, std::span<const double> y, double mnn_x, double mnn_y) {
  return csls_score(dot(x, y), mnn_x, mnn_y);
}

namespace detail {

inline double top_k_mean(std::vector<double>& values, std::size_t k) {
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                   std::greater<>());
  double s = 0.0;
  for (std::size_t i = 0; i < k; ++i) s += values[i];
  return s / static_cast<double>(k);
}

inline void check_k(std::size_t k, std::size_t vocab) {
  if (k < 1 || k >= vocab) {
    fail(ErrorKind::InvalidArgument,
         "neighbourhood size K=" + std::to_string(k) + " must lie in [1, " + std::to_string(vocab) + ")");
  }
}

}  // namespace detail

// Mean cosine of each row of `queries` to its k most similar rows of `space`.
// Both matrices hold unit-norm rows.
inline std::vector<double> mean_top_k_similarity(const Matrix& queries, const Matrix& space, std::size_t k) {
  detail::check_k(k, space.rows());
  std::vector<double> out(queries.rows());
  std::vector<double> sims(space.rows());
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    auto q = queries.row(i);
    for (std::size_t j = 0; j < space.rows(); ++j) sims[j] = dot(q, space.row(j));
    out[i] = detail::top_k_mean(sims, k);
  }
  return out;
}

inline double mean_nn_similarity(std::span<const double> x, const EmbeddingSpace& space, std::size_t k) {
  require(space.normalized(), "mean_nn_similarity: space must be normalized");
  require(x.size() == space.dim(), "mean_nn_similarity: dimension mismatch");
  detail::check_k(k, space.size());
  std::vector<double> sims(space.size());
  for (std::size_t j = 0; j < space.size(); ++j) sims[j] = dot(x, space.vector(j));
  return detail::top_k_mean(sims, k);
}

struct Match {
  std::size_t index = 0;
  double score = 0.0;
};

// Scores mapped source rows against target rows in both directions. Ties in
// the argmax go to the lower row index (the more frequent word).
class CrossLingualScorer {
 public:
  CrossLingualScorer(const Matrix& mapped_source, const Matrix& target, RetrievalMethod method, std::size_t k)
      : source_(mapped_source), target_(target), method_(method), k_(k) {
    require(source_.cols() == target_.cols(), "retrieval: dimension mismatch");
    if (method_ == RetrievalMethod::Csls) {
      detail::check_k(k_, target_.rows());
      detail::check_k(k_, source_.rows());
      target_mnn_ = mean_top_k_similarity(target_, source_, k_);
    }
  }

  // mnn_T for one source row.
  double source_mnn(std::size_t row) const {
    if (source_mnn_) return (*source_mnn_)[row];
    std::vector<double> sims(target_.rows());
    auto x = source_.row(row);
    for (std::size_t j = 0; j < target_.rows(); ++j) sims[j] = dot(x, target_.row(j));
    return detail::top_k_mean(sims, k_);
  }

  double target_mnn(std::size_t row) const { return target_mnn_[row]; }

  double score(std::size_t s, std::size_t t) const {
    const double c = dot(source_.row(s), target_.row(t));
    if (method_ == RetrievalMethod::Cosine) return c;
    return csls_score(c, source_mnn(s), target_mnn_[t]);
  }

  Match best_target(std::size_t s) const {
    auto x = source_.row(s);
    const double mx = method_ == RetrievalMethod::Csls ? source_mnn(s) : 0.0;
    Match best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t j = 0; j < target_.rows(); ++j) {
      const double c = dot(x, target_.row(j));
      const double sc = method_ == RetrievalMethod::Csls ? csls_score(c, mx, target_mnn_[j]) : c;
      if (sc > best.score) best = {j, sc};
    }
    return best;
  }

  Match best_source(std::size_t t) {
    if (method_ == RetrievalMethod::Csls && !source_mnn_) {
      source_mnn_ = mean_top_k_similarity(source_, target_, k_);
    }
    auto y = target_.row(t);
    const double my = method_ == RetrievalMethod::Csls ? target_mnn_[t] : 0.0;
    Match best{0, -std::numeric_limits<double>::infinity()};
    for (std::size_t i = 0; i < source_.rows(); ++i) {
      const double c = dot(source_.row(i), y);
      const double sc = method_ == RetrievalMethod::Csls ? csls_score(c, (*source_mnn_)[i], my) : c;
      if (sc > best.score) best = {i, sc};
    }
    return best;
  }

 private:
  const Matrix& source_;
  const Matrix& target_;
  RetrievalMethod method_;
  std::size_t k_;
  std::vector<double> target_mnn_;
  std::optional<std::vector<double>> source_mnn_;
};

struct Prediction {
  std::string query;
  std::string predicted;
  double score = 0.0;
};

struct TranslationResult {
  std::vector<Prediction> predictions;
  std::vector<std::string> skipped_oov;
};

// Maps each in-vocabulary query with x W^T and retrieves its best target word.
inline TranslationResult translate(const std::vector<std::string>& queries, const EmbeddingSpace& src,
                                   const EmbeddingSpace& tgt, const TranslationMatrix& w, const RetrievalConfig& cfg = {}) {
  require(src.normalized() && tgt.normalized(), "translate: spaces must be normalized");
  require(src.dim() == tgt.dim() && w.dim() == src.dim(), "translate: dimension mismatch");

  TranslationResult out;
  std::vector<std::size_t> rows;
  for (const auto& q : queries) {
    if (auto i = src.find(q)) {
      rows.push_back(*i);
      out.predictions.push_back({q, {}, 0.0});
    } else {
      out.skipped_oov.push_back(q);
    }
  }
  if (rows.empty()) fail(ErrorKind::NoEvaluable, "translate: every query is out of vocabulary");

  const std::size_t ncand = cfg.candidates ? std::min(*cfg.candidates, tgt.size()) : tgt.size();
  const EmbeddingSpace candidates = ncand == tgt.size() ? tgt : tgt.head(ncand);
  const Matrix mapped = w.apply(src.vectors());
  CrossLingualScorer scorer(mapped, candidates.vectors(), cfg.method, cfg.k);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Match m = scorer.best_target(rows[i]);
    out.predictions[i].predicted = candidates.word(m.index);
    out.predictions[i].score = m.score;
  }
  return out;
}

struct GroupScore {
  std::size_t count = 0;
  std::size_t correct = 0;
  double p_at_1() const { return count ? static_cast<double>(correct) / static_cast<double>(count) : 0.0; }
};

struct QueryOutcome {
  Prediction prediction;
  bool correct = false;
  std::vector<std::string> labels;  // group names this query was counted under
};

struct EvalReport {
  double p_at_1 = 0.0;
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  std::size_t skipped_oov = 0;      // queries missing from the source vocabulary
  std::size_t skipped_no_gold = 0;  // predictions whose query has no gold entry
  std::map<std::string, GroupScore> groups;
  std::vector<QueryOutcome> outcomes;
};

// A prediction is correct when it is any of the query's gold translations.
inline EvalReport evaluate_p1(const std::vector<Prediction>& predictions, const BilingualDictionary& gold) {
  require(!gold.empty(), "evaluate_p1: gold dictionary is empty");
  EvalReport r;
  for (const auto& p : predictions) {
    if (gold.translations(p.query).empty()) {
      ++r.skipped_no_gold;
      continue;
    }
    const bool ok = gold.contains(p.query, p.predicted);
    r.outcomes.push_back({p, ok, {}});
    ++r.evaluated;
    if (ok) ++r.correct;
  }
  if (r.evaluated == 0) fail(ErrorKind::NoEvaluable, "evaluate_p1: no prediction has a gold entry");
  r.p_at_1 = static_cast<double>(r.correct) / static_cast<double>(r.evaluated);
  return r;
}

// Frequency bins on the 1-based source rank.
inline std::string frequency_group(std::size_t rank) {
  if (rank <= 100) return "freq:1-100";
  if (rank <= 1000) return "freq:101-1000";
  if (rank <= 10000) return "freq:1001-10000";
  return "freq:10001+";
}

// Homograph classes, approximated through the gold dictionary: same/same when
// the query is spelled like one of its gold translations, same/diff when the
// spelling exists in the target vocabulary but is not a gold translation.
inline std::string homograph_group(const std::string& query, const BilingualDictionary& gold,
                                   const EmbeddingSpace& tgt) {
  if (gold.contains(query, query)) return "homograph:same-same";
  if (tgt.contains(query)) return "homograph:same-diff";
  return "homograph:diff-diff";
}

using WordClassMap = std::unordered_map<std::string, std::string>;

// "word<TAB>label" per line.
inline WordClassMap read_word_classes(std::istream& in) {
  WordClassMap m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 >= line.size()) {
      fail(ErrorKind::Parse, "word classes line " + std::to_string(line_no) + ": expected 'word<TAB>label'");
    }
    m.emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return m;
}

inline EvalReport breakdown_report(const std::vector<Prediction>& predictions, const BilingualDictionary& gold,
                                   const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                   const WordClassMap* word_classes = nullptr) {
  EvalReport r = evaluate_p1(predictions, gold);
  for (auto& o : r.outcomes) {
    const auto rank = src.frequency_rank(o.prediction.query);
    o.labels.push_back(rank ? frequency_group(*rank) : "freq:oov");
    o.labels.push_back(homograph_group(o.prediction.query, gold, tgt));
    if (word_classes) {
      auto it = word_classes->find(o.prediction.query);
      o.labels.push_back("class:" + (it == word_classes->end() ? std::string("unlabeled") : it->second));
    }
    for (const auto& l : o.labels) {
      auto& g = r.groups[l];
      ++g.count;
      if (o.correct) ++g.correct;
    }
  }
  return r;
}

}  // namespace xlingual
