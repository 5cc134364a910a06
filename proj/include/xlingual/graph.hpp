#pragma once

// Nearest-neighbour graphs over word sets, Laplacian spectra, the
// eigenvalue-based similarity Delta, and exact isomorphism (VF2).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/numerics.hpp"

namespace xlingual {

// Undirected simple graph; adjacency is symmetric 0/1 with zero diagonal.
class NNGraph {
 public:
  NNGraph() = default;

  NNGraph(std::vector<std::string> nodes, Matrix adjacency)
      : nodes_(std::move(nodes)), adjacency_(std::move(adjacency)) {
    const std::size_t n = nodes_.size();
    require(adjacency_.rows() == n && adjacency_.cols() == n, "graph: adjacency shape differs from node count");
    for (std::size_t i = 0; i < n; ++i) {
      require(adjacency_(i, i) == 0.0, "graph: self loop");
      for (std::size_t j = 0; j < n; ++j) {
        const double a = adjacency_(i, j);
        require(a == 0.0 || a == 1.0, "graph: adjacency entries must be 0 or 1");
        require(a == adjacency_(j, i), "graph: adjacency must be symmetric");
      }
    }
  }

  static NNGraph from_edges(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
    std::vector<std::string> nodes(n);
    for (std::size_t i = 0; i < n; ++i) nodes[i] = std::to_string(i);
    Matrix a(n, n);
    for (auto [u, v] : edges) {
      require(u < n && v < n && u != v, "graph: invalid edge");
      a(u, v) = a(v, u) = 1.0;
    }
    return NNGraph(std::move(nodes), std::move(a));
  }

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const Matrix& adjacency() const noexcept { return adjacency_; }
  bool has_edge(std::size_t i, std::size_t j) const { return adjacency_(i, j) != 0.0; }

  std::size_t degree(std::size_t i) const {
    std::size_t d = 0;
    for (std::size_t j = 0; j < size(); ++j) d += has_edge(i, j);
    return d;
  }

  std::size_t edge_count() const {
    std::size_t e = 0;
    for (std::size_t i = 0; i < size(); ++i) e += degree(i);
    return e / 2;
  }

 private:
  std::vector<std::string> nodes_;
  Matrix adjacency_;
};

// Each node links to its `neighbors_per_node` most cosine-similar nodes within
// the node set; the directed choices are symmetrised. Cosine ties go to the
// node with the better frequency rank in `space`.
inline NNGraph build_nn_graph(const EmbeddingSpace& space, const std::vector<std::string>& nodes,
                              std::size_t neighbors_per_node = 1) {
  require(space.normalized(), "build_nn_graph: space must be normalized");
  if (nodes.size() < 2) fail(ErrorKind::InvalidArgument, "build_nn_graph: need at least two nodes");
  require(neighbors_per_node >= 1 && neighbors_per_node < nodes.size(),
          "build_nn_graph: neighbors_per_node must lie in [1, node count)");

  const std::size_t n = nodes.size();
  std::vector<std::size_t> rows(n);
  std::unordered_set<std::string> seen;
  for (std::size_t i = 0; i < n; ++i) {
    auto r = space.find(nodes[i]);
    if (!r) fail(ErrorKind::InvalidArgument, "build_nn_graph: '" + nodes[i] + "' is not in the vocabulary");
    if (!seen.insert(nodes[i]).second) fail(ErrorKind::InvalidArgument, "build_nn_graph: duplicate node '" + nodes[i] + "'");
    rows[i] = *r;
  }

  Matrix adj(n, n);
  std::vector<std::size_t> cand(n - 1);
  std::vector<double> cos(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) cos[j] = dot(space.vector(rows[i]), space.vector(rows[j]));
    cand.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) cand.push_back(j);
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(neighbors_per_node), cand.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (cos[a] != cos[b]) return cos[a] > cos[b];
                        return rows[a] < rows[b];
                      });
    for (std::size_t k = 0; k < neighbors_per_node; ++k) adj(i, cand[k]) = adj(cand[k], i) = 1.0;
  }
  return NNGraph(nodes, std::move(adj));
}

struct Laplacian {
  Matrix matrix;
};

// L = D - A
inline Laplacian laplacian(const NNGraph& g) {
  const std::size_t n = g.size();
  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) l(i, j) = -g.adjacency()(i, j);
    l(i, i) = static_cast<double>(g.degree(i));
  }
  return {std::move(l)};
}

inline SymSpectrum laplacian_spectrum(const NNGraph& g) { return sym_eigenvalues(laplacian(g).matrix); }

// Smallest k whose k largest eigenvalues carry more than `fraction` of the
// total spectral mass. `spectrum` must be sorted descending.
inline std::size_t spectral_mass_k(const std::vector<double>& spectrum, double fraction = 0.9) {
  const double total = std::accumulate(spectrum.begin(), spectrum.end(), 0.0);
  if (!(total > 0.0)) fail(ErrorKind::InvalidArgument, "eigensimilarity: spectrum has no positive mass (graph without edges)");
  double partial = 0.0;
  for (std::size_t k = 1; k <= spectrum.size(); ++k) {
    partial += spectrum[k - 1];
    if (partial / total > fraction) return k;
  }
  // Rounding can leave the full sum a hair under the total.
  return spectrum.size();
}

struct EigenSimilarity {
  double delta = 0.0;
  std::size_t k_used = 0;
  std::size_t k_source = 0;
  std::size_t k_target = 0;
  std::vector<double> source_spectrum;  // truncated to k_used
  std::vector<double> target_spectrum;
};

inline EigenSimilarity eigensimilarity(const SymSpectrum& s1, const SymSpectrum& s2) {
  EigenSimilarity r;
  r.k_source = spectral_mass_k(s1.eigenvalues);
  r.k_target = spectral_mass_k(s2.eigenvalues);
  r.k_used = std::min(r.k_source, r.k_target);
  r.source_spectrum.assign(s1.eigenvalues.begin(), s1.eigenvalues.begin() + static_cast<std::ptrdiff_t>(r.k_used));
  r.target_spectrum.assign(s2.eigenvalues.begin(), s2.eigenvalues.begin() + static_cast<std::ptrdiff_t>(r.k_used));
  for (std::size_t i = 0; i < r.k_used; ++i) {
    const double diff = r.source_spectrum[i] - r.target_spectrum[i];
    r.delta += diff * diff;
  }
  return r;
}

inline EigenSimilarity eigensimilarity(const NNGraph& g1, const NNGraph& g2) {
  require(g1.size() >= 2 && g2.size() >= 2, "eigensimilarity: graphs need at least two nodes");
  return eigensimilarity(laplacian_spectrum(g1), laplacian_spectrum(g2));
}

// ---------------------------------------------------------------------------
// VF2 graph isomorphism for undirected graphs.

struct Vf2Options {
  std::size_t max_nodes = 64;
};

namespace detail {

class Vf2State {
 public:
  Vf2State(const NNGraph& g1, const NNGraph& g2) : n_(g1.size()) {
    adj1_ = lists(g1);
    adj2_ = lists(g2);
    core1_.assign(n_, kNone);
    core2_.assign(n_, kNone);
    term1_.assign(n_, 0);
    term2_.assign(n_, 0);
    e1_ = g1;
    e2_ = g2;
  }

  bool match() { return recurse(0); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  static std::vector<std::vector<std::size_t>> lists(const NNGraph& g) {
    std::vector<std::vector<std::size_t>> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
      for (std::size_t j = 0; j < g.size(); ++j)
        if (g.has_edge(i, j)) out[i].push_back(j);
    return out;
  }

  bool recurse(std::size_t depth) {
    if (depth == n_) return true;

    // Candidate pairs: (first unmatched terminal node of G1, every unmatched
    // terminal node of G2); without terminal nodes fall back to all unmatched.
    std::size_t n1 = kNone;
    bool use_terminal = false;
    for (std::size_t i = 0; i < n_; ++i) {
      if (core1_[i] == kNone && term1_[i] != 0) {
        n1 = i;
        use_terminal = true;
        break;
      }
    }
    if (!use_terminal) {
      for (std::size_t i = 0; i < n_; ++i) {
        if (core1_[i] == kNone) {
          n1 = i;
          break;
        }
      }
    }

    for (std::size_t n2 = 0; n2 < n_; ++n2) {
      if (core2_[n2] != kNone) continue;
      if (use_terminal != (term2_[n2] != 0)) continue;
      if (!feasible(n1, n2)) continue;

      core1_[n1] = n2;
      core2_[n2] = n1;
      const std::size_t mark = depth + 1;
      std::vector<std::size_t> added1, added2;
      if (term1_[n1] == 0) {
        term1_[n1] = mark;
        added1.push_back(n1);
      }
      if (term2_[n2] == 0) {
        term2_[n2] = mark;
        added2.push_back(n2);
      }
      for (auto v : adj1_[n1])
        if (term1_[v] == 0) {
          term1_[v] = mark;
          added1.push_back(v);
        }
      for (auto v : adj2_[n2])
        if (term2_[v] == 0) {
          term2_[v] = mark;
          added2.push_back(v);
        }

      if (recurse(depth + 1)) return true;

      for (auto v : added1) term1_[v] = 0;
      for (auto v : added2) term2_[v] = 0;
      core1_[n1] = kNone;
      core2_[n2] = kNone;
    }
    return false;
  }

  bool feasible(std::size_t n1, std::size_t n2) const {
    if (adj1_[n1].size() != adj2_[n2].size()) return false;

    std::size_t mapped1 = 0, term1 = 0, fresh1 = 0;
    for (auto v : adj1_[n1]) {
      if (core1_[v] != kNone) {
        if (!e2_.has_edge(n2, core1_[v])) return false;
        ++mapped1;
      } else if (term1_[v] != 0) {
        ++term1;
      } else {
        ++fresh1;
      }
    }
    std::size_t mapped2 = 0, term2 = 0, fresh2 = 0;
    for (auto v : adj2_[n2]) {
      if (core2_[v] != kNone) {
        if (!e1_.has_edge(n1, core2_[v])) return false;
        ++mapped2;
      } else if (term2_[v] != 0) {
        ++term2;
      } else {
        ++fresh2;
      }
    }
    return mapped1 == mapped2 && term1 == term2 && fresh1 == fresh2;
  }

  std::size_t n_;
  std::vector<std::vector<std::size_t>> adj1_, adj2_;
  std::vector<std::size_t> core1_, core2_;
  std::vector<std::size_t> term1_, term2_;
  NNGraph e1_, e2_;
};

}  // namespace detail

// Exact isomorphism test. Graphs larger than opts.max_nodes are rejected.
inline bool vf2_isomorphic(const NNGraph& g1, const NNGraph& g2, const Vf2Options& opts = {}) {
  if (g1.size() > opts.max_nodes || g2.size() > opts.max_nodes) {
    fail(ErrorKind::InvalidArgument, "vf2_isomorphic: graph exceeds the node ceiling of " + std::to_string(opts.max_nodes));
  }
  if (g1.size() != g2.size()) return false;
  if (g1.edge_count() != g2.edge_count()) return false;
  std::vector<std::size_t> d1(g1.size()), d2(g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) {
    d1[i] = g1.degree(i);
    d2[i] = g2.degree(i);
  }
  std::sort(d1.begin(), d1.end());
  std::sort(d2.begin(), d2.end());
  if (d1 != d2) return false;
  return detail::Vf2State(g1, g2).match();
}

// ---------------------------------------------------------------------------
// Sampled subgraph diagnostic.

struct SubgraphSampling {
  std::size_t num_samples = 10;
  std::size_t sample_size = 10;
  std::uint64_t seed = 0;
  std::size_t neighbors_per_node = 1;
};

struct SubgraphSample {
  std::vector<std::string> source_words;
  std::vector<std::string> target_words;
  EigenSimilarity similarity;
  std::optional<bool> isomorphic;  // unset above the VF2 node ceiling
};

struct SubgraphDiagnostic {
  std::size_t pairs_available = 0;  // usable gold pairs in the sampling pool
  std::size_t pairs_sampled = 0;
  double mean_delta = 0.0;
  std::vector<SubgraphSample> samples;
};

// Each gold source word is paired with its in-vocabulary translation of best
// target frequency rank. Samples draw distinct sources with distinct targets.
inline SubgraphDiagnostic sampled_subgraph_similarity(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                                      const BilingualDictionary& gold,
                                                      const SubgraphSampling& opts = {},
                                                      const Vf2Options& vf2 = {}) {
  require(opts.num_samples >= 1, "sampled_subgraph_similarity: need at least one sample");
  require(opts.sample_size >= 2, "sampled_subgraph_similarity: sample size must be at least 2");

  std::vector<std::pair<std::size_t, std::size_t>> pool;  // (source row, target row)
  for (const auto& s : gold.sources()) {
    auto si = src.find(s);
    if (!si) continue;
    std::optional<std::size_t> best;
    for (const auto& t : gold.translations(s)) {
      auto ti = tgt.find(t);
      if (ti && (!best || *ti < *best)) best = ti;
    }
    if (best) pool.emplace_back(*si, *best);
  }
  std::unordered_set<std::size_t> distinct_targets;
  for (auto [s, t] : pool) distinct_targets.insert(t);
  const std::size_t usable = std::min(pool.size(), distinct_targets.size());
  if (usable < opts.sample_size) {
    fail(ErrorKind::InvalidArgument, "sampled_subgraph_similarity: " + std::to_string(usable) +
                                         " usable in-vocabulary gold pairs, need " + std::to_string(opts.sample_size));
  }

  SubgraphDiagnostic out;
  out.pairs_available = pool.size();
  std::mt19937_64 rng(opts.seed);
  std::vector<std::size_t> order(pool.size());
  for (std::size_t sample = 0; sample < opts.num_samples; ++sample) {
    std::iota(order.begin(), order.end(), 0);
    SubgraphSample smp;
    std::unordered_set<std::size_t> used_targets;
    for (std::size_t i = 0; i < order.size() && smp.source_words.size() < opts.sample_size; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
      std::swap(order[i], order[pick(rng)]);
      auto [s, t] = pool[order[i]];
      if (!used_targets.insert(t).second) continue;
      smp.source_words.push_back(src.word(s));
      smp.target_words.push_back(tgt.word(t));
    }
    NNGraph g1 = build_nn_graph(src, smp.source_words, opts.neighbors_per_node);
    NNGraph g2 = build_nn_graph(tgt, smp.target_words, opts.neighbors_per_node);
    smp.similarity = eigensimilarity(g1, g2);
    if (opts.sample_size <= vf2.max_nodes) smp.isomorphic = vf2_isomorphic(g1, g2, vf2);
    out.mean_delta += smp.similarity.delta;
    out.pairs_sampled += smp.source_words.size();
    out.samples.push_back(std::move(smp));
  }
  out.mean_delta /= static_cast<double>(opts.num_samples);
  return out;
}

}  // namespace xlingual
