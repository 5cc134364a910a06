#pragma once

// Supervised and self-learning alignment: identical-word seeds, orthogonal
// Procrustes, and iterative refinement on mutual nearest neighbours.

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/numerics.hpp"
#include "xlingual/retrieval.hpp"

namespace xlingual {

// Words spelled byte-identically in both vocabularies, in source rank order.
inline BilingualDictionary identical_seed(const EmbeddingSpace& src, const EmbeddingSpace& tgt) {
  BilingualDictionary dict(Provenance::IdenticalSeed);
  for (const auto& w : src.words())
    if (tgt.contains(w)) dict.add(w, w);
  if (dict.empty()) fail(ErrorKind::EmptySeed, "identical_seed: vocabularies share no words");
  return dict;
}

struct ProcrustesResult {
  TranslationMatrix w;
  std::size_t pairs_used = 0;
  std::size_t pairs_dropped = 0;  // pairs with an out-of-vocabulary side
  bool rank_deficient = false;    // fewer pairs than dimensions
};

// W = U V^T with U S V^T = svd(T^T S), where S and T stack the source and
// target vectors of the in-vocabulary pairs; minimises ||S W^T - T||_F.
inline ProcrustesResult procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                   const BilingualDictionary& dict) {
  if (src.dim() != tgt.dim()) fail(ErrorKind::InvalidArgument, "procrustes: dimension mismatch");
  require(src.normalized() && tgt.normalized(), "procrustes: spaces must be normalized");

  const std::size_t d = src.dim();
  Matrix m(d, d);
  ProcrustesResult r;
  for (const auto& [s, t] : dict.pairs()) {
    auto si = src.find(s);
    auto ti = tgt.find(t);
    if (!si || !ti) {
      ++r.pairs_dropped;
      continue;
    }
    auto x = src.vector(*si);
    auto y = tgt.vector(*ti);
    for (std::size_t i = 0; i < d; ++i) {
      auto mrow = m.row(i);
      for (std::size_t j = 0; j < d; ++j) mrow[j] += y[i] * x[j];
    }
    ++r.pairs_used;
  }
  if (r.pairs_used == 0) fail(ErrorKind::EmptySeed, "procrustes: no dictionary pair is in both vocabularies");
  r.rank_deficient = r.pairs_used < d;

  SvdResult dec = svd(m);
  r.w = TranslationMatrix(multiply_transposed(dec.u, dec.v));
  return r;
}

struct MutualNNOptions {
  std::size_t top_frequent = 10000;
  RetrievalMethod method = RetrievalMethod::Csls;
  std::size_t k = 10;
};

// Candidate pairs from the most frequent source words, kept only when the
// backward retrieval from the chosen target returns the same source word.
inline BilingualDictionary mutual_nn_dictionary(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                                const TranslationMatrix& w, const MutualNNOptions& opts = {}) {
  require(src.normalized() && tgt.normalized(), "mutual_nn_dictionary: spaces must be normalized");
  require(src.dim() == tgt.dim() && w.dim() == src.dim(), "mutual_nn_dictionary: dimension mismatch");

  const Matrix mapped = w.apply(src.vectors());
  CrossLingualScorer scorer(mapped, tgt.vectors(), opts.method, opts.k);
  const std::size_t top = std::min(opts.top_frequent, src.size());

  BilingualDictionary dict(Provenance::MutualNN);
  std::vector<std::ptrdiff_t> backward(tgt.size(), -1);
  for (std::size_t s = 0; s < top; ++s) {
    const std::size_t t = scorer.best_target(s).index;
    if (backward[t] < 0) backward[t] = static_cast<std::ptrdiff_t>(scorer.best_source(t).index);
    if (static_cast<std::size_t>(backward[t]) == s) dict.add(src.word(s), tgt.word(t));
  }
  if (dict.empty()) fail(ErrorKind::EmptySeed, "mutual_nn_dictionary: no mutual nearest neighbours");
  return dict;
}

struct RefineResult {
  TranslationMatrix w;
  std::vector<std::size_t> dictionary_sizes;  // one per iteration
};

// Alternates {mutual-NN dictionary, Procrustes}; each iteration re-seeds from
// the current map rather than accumulating pairs.
inline RefineResult refine(const EmbeddingSpace& src, const EmbeddingSpace& tgt, const TranslationMatrix& w0,
                           std::size_t iterations = 5, const MutualNNOptions& opts = {}) {
  RefineResult r{w0, {}};
  for (std::size_t it = 0; it < iterations; ++it) {
    BilingualDictionary dict = [&] {
      try {
        return mutual_nn_dictionary(src, tgt, r.w, opts);
      } catch (const Error& e) {
        fail(e.kind(), "refine iteration " + std::to_string(it) + ": " + e.what());
      }
    }();
    r.dictionary_sizes.push_back(dict.size());
    r.w = procrustes(src, tgt, dict).w;
  }
  return r;
}

}  // namespace xlingual
