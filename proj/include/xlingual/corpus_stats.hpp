#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "xlingual/dictionary.hpp"
#include "xlingual/error.hpp"

namespace xlingual {

struct TermDistribution {
  std::vector<std::string> vocabulary;  // by descending count, then lexicographic
  std::vector<double> probabilities;
};

inline TermDistribution term_distribution(const std::vector<std::string>& tokens,
                                          std::optional<std::size_t> vocab_cap = std::nullopt) {
  if (tokens.empty()) fail(ErrorKind::InvalidArgument, "term_distribution: empty token stream");
  std::unordered_map<std::string, std::size_t> counts;
  for (const auto& t : tokens) ++counts[t];

  std::vector<std::pair<std::string, std::size_t>> entries(counts.begin(), counts.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (vocab_cap) {
    require(*vocab_cap > 0, "term_distribution: vocabulary cap must be positive");
    if (entries.size() > *vocab_cap) entries.resize(*vocab_cap);
  }

  double total = 0.0;
  for (const auto& e : entries) total += static_cast<double>(e.second);
  TermDistribution d;
  for (auto& [w, c] : entries) {
    d.vocabulary.push_back(w);
    d.probabilities.push_back(static_cast<double>(c) / total);
  }
  return d;
}

// Whitespace tokens from a text stream.
inline std::vector<std::string> read_tokens(std::istream& in) {
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

struct TokenTranslation {
  std::vector<std::string> tokens;
  std::size_t dropped = 0;
};

// Replaces each token with its first-listed translation; untranslatable
// tokens are dropped.
inline TokenTranslation translate_tokens(const std::vector<std::string>& tokens, const BilingualDictionary& dict) {
  TokenTranslation out;
  for (const auto& t : tokens) {
    const auto& tr = dict.translations(t);
    if (tr.empty()) {
      ++out.dropped;
    } else {
      out.tokens.push_back(tr.front());
    }
  }
  return out;
}

struct DomainSimilarity {
  double js = 0.0;
  double dsim = 1.0;
};

// Jensen-Shannon divergence in bits over the union of both supports;
// dsim = 1 - JS.
inline DomainSimilarity domain_similarity(const TermDistribution& p, const TermDistribution& q) {
  std::map<std::string, std::pair<double, double>> joint;
  for (std::size_t i = 0; i < p.vocabulary.size(); ++i) joint[p.vocabulary[i]].first += p.probabilities[i];
  for (std::size_t i = 0; i < q.vocabulary.size(); ++i) joint[q.vocabulary[i]].second += q.probabilities[i];

  double kl_p = 0.0, kl_q = 0.0;
  for (const auto& [w, pq] : joint) {
    const auto [pi, qi] = pq;
    const double mi = 0.5 * (pi + qi);
    if (pi > 0.0) kl_p += pi * std::log2(pi / mi);
    if (qi > 0.0) kl_q += qi * std::log2(qi / mi);
  }
  DomainSimilarity r;
  r.js = std::clamp(0.5 * kl_p + 0.5 * kl_q, 0.0, 1.0);
  r.dsim = 1.0 - r.js;
  return r;
}

}  // namespace xlingual
