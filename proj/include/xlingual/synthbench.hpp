#pragma once

// Synthetic embedding-space pairs with controlled distortion: the target is a
// random rotation of the source plus Gaussian noise, optionally with a
// per-axis scaling and a fraction of rows replaced by unrelated vectors.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "xlingual/alignment.hpp"
#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/graph.hpp"
#include "xlingual/numerics.hpp"
#include "xlingual/retrieval.hpp"
#include "xlingual/statistics.hpp"

namespace xlingual {

enum class SynthTransform { Rotation, RotationScaling };

struct SynthSpec {
  std::size_t n = 2000;
  std::size_t d = 20;
  double noise_sigma = 0.0;
  SynthTransform transform = SynthTransform::Rotation;
  double domain_shift = 0.0;     // fraction of target rows re-drawn independently
  double shared_fraction = 0.0;  // fraction of pairs whose two words share a label
  std::uint64_t seed = 0;

  void validate() const {
    require(n >= 2, "synth spec: n must be at least 2");
    require(d >= 2, "synth spec: d must be at least 2");
    require(std::isfinite(noise_sigma) && noise_sigma >= 0.0, "synth spec: noise sigma must be non-negative");
    require(domain_shift >= 0.0 && domain_shift <= 1.0, "synth spec: domain shift must lie in [0, 1]");
    require(shared_fraction >= 0.0 && shared_fraction <= 1.0, "synth spec: shared fraction must lie in [0, 1]");
  }
};

struct SynthPair {
  EmbeddingSpace src;
  EmbeddingSpace tgt;
  BilingualDictionary gold{Provenance::Gold};
  TranslationMatrix true_w;
};

namespace detail {

inline std::vector<std::size_t> seeded_subset(std::size_t n, std::size_t count, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, n - 1);
    std::swap(idx[i], idx[pick(rng)]);
  }
  idx.resize(count);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline void normalize_rows(Matrix& m) {
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    const double nr = norm(r);
    require(nr > 0.0, "synth: degenerate zero vector");
    for (double& v : r) v /= nr;
  }
}

}  // namespace detail

// Pair i is (s<i>, t<i>), or (w<i>, w<i>) for the shared-label subset.
inline SynthPair make_pair(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const std::size_t n = spec.n, d = spec.d;

  Matrix src = random_gaussian(n, d, rng);
  detail::normalize_rows(src);
  Matrix q = random_orthogonal(d, rng);

  Matrix map = q;
  if (spec.transform == SynthTransform::RotationScaling) {
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    for (std::size_t j = 0; j < d; ++j) {
      const double s = scale(rng);
      for (std::size_t i = 0; i < d; ++i) map(i, j) *= s;
    }
  }
  Matrix tgt = multiply_transposed(src, map);
  if (spec.noise_sigma > 0.0) {
    Matrix noise = random_gaussian(n, d, rng, spec.noise_sigma);
    tgt = tgt + noise;
  }
  const auto shifted = detail::seeded_subset(n, static_cast<std::size_t>(std::llround(spec.domain_shift * static_cast<double>(n))), rng);
  if (!shifted.empty()) {
    Matrix fresh = random_gaussian(shifted.size(), d, rng);
    for (std::size_t k = 0; k < shifted.size(); ++k)
      std::copy(fresh.row(k).begin(), fresh.row(k).end(), tgt.row(shifted[k]).begin());
  }
  detail::normalize_rows(tgt);

  const auto shared = detail::seeded_subset(n, static_cast<std::size_t>(std::llround(spec.shared_fraction * static_cast<double>(n))), rng);
  std::vector<bool> is_shared(n, false);
  for (auto i : shared) is_shared[i] = true;
  std::vector<std::string> sw(n), tw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = std::to_string(i);
    sw[i] = is_shared[i] ? "w" + id : "s" + id;
    tw[i] = is_shared[i] ? "w" + id : "t" + id;
  }

  SynthPair out{EmbeddingSpace(sw, std::move(src), true), EmbeddingSpace(tw, std::move(tgt), true),
                BilingualDictionary(Provenance::Gold), TranslationMatrix(std::move(q))};
  for (std::size_t i = 0; i < n; ++i) out.gold.add(sw[i], tw[i]);
  return out;
}

struct SuiteOptions {
  double train_fraction = 0.1;
  std::size_t refine_iterations = 5;
  RetrievalConfig retrieval{};
  MutualNNOptions mutual{};
  SubgraphSampling sampling{};
};

struct SuiteRow {
  double sigma = 0.0;
  double mean_delta = 0.0;
  double p_at_1 = 0.0;
  std::size_t isomorphic_samples = 0;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  Correlation correlation;  // between mean_delta and p_at_1
};

// Splits gold pairs (seeded) into a Procrustes training subset and held-out
// evaluation pairs.
inline std::pair<BilingualDictionary, BilingualDictionary> split_gold(const BilingualDictionary& gold,
                                                                      double train_fraction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t n = gold.size();
  auto train_idx = detail::seeded_subset(n, static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n))), rng);
  std::vector<bool> in_train(n, false);
  for (auto i : train_idx) in_train[i] = true;
  BilingualDictionary train(Provenance::Gold), test(Provenance::Gold);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& [s, t] = gold.pairs()[i];
    (in_train[i] ? train : test).add(s, t);
  }
  return {std::move(train), std::move(test)};
}

inline SuiteRow evaluate_synthetic(const SynthSpec& spec, const SuiteOptions& opts) {
  SynthPair pair = make_pair(spec);
  auto [train, test] = split_gold(pair.gold, opts.train_fraction, spec.seed);
  TranslationMatrix w = procrustes(pair.src, pair.tgt, train).w;
  w = refine(pair.src, pair.tgt, w, opts.refine_iterations, opts.mutual).w;
  auto tr = translate(test.sources(), pair.src, pair.tgt, w, opts.retrieval);
  EvalReport rep = evaluate_p1(tr.predictions, test);

  SubgraphSampling sampling = opts.sampling;
  sampling.seed = spec.seed;
  SubgraphDiagnostic diag = sampled_subgraph_similarity(pair.src, pair.tgt, pair.gold, sampling);

  SuiteRow row{spec.noise_sigma, diag.mean_delta, rep.p_at_1, 0};
  for (const auto& s : diag.samples) row.isomorphic_samples += s.isomorphic.value_or(false);
  return row;
}

inline SuiteResult correlation_suite(const std::vector<double>& noise_levels, const SynthSpec& base,
                                     const SuiteOptions& opts = {}) {
  require(noise_levels.size() >= 3, "correlation_suite: need at least three noise levels");
  SuiteResult out;
  std::vector<double> deltas, precisions;
  for (double sigma : noise_levels) {
    SynthSpec spec = base;
    spec.noise_sigma = sigma;
    out.rows.push_back(evaluate_synthetic(spec, opts));
    deltas.push_back(out.rows.back().mean_delta);
    precisions.push_back(out.rows.back().p_at_1);
  }
  out.correlation = correlation(deltas, precisions);
  return out;
}

}  // namespace xlingual
