#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"

namespace xlingual {

enum class Provenance { IdenticalSeed, MutualNN, Gold, Induced };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::IdenticalSeed: return "identical-seed";
    case Provenance::MutualNN: return "mutual-nn";
    case Provenance::Gold: return "gold";
    case Provenance::Induced: return "induced";
  }
  return "unknown";
}

// Multi-valued source -> target word pairs, insertion ordered, no duplicates.
class BilingualDictionary {
 public:
  using Pair = std::pair<std::string, std::string>;

  explicit BilingualDictionary(Provenance provenance = Provenance::Gold) : provenance_(provenance) {}

  // Returns false when the pair was already present.
  bool add(std::string source, std::string target) {
    require(!source.empty() && !target.empty(), "dictionary: empty word in pair");
    if (!seen_.emplace(source, target).second) return false;
    auto [it, inserted] = by_source_.try_emplace(source);
    if (inserted) sources_.push_back(source);
    it->second.push_back(target);
    pairs_.emplace_back(std::move(source), std::move(target));
    return true;
  }

  Provenance provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }
  const std::vector<Pair>& pairs() const noexcept { return pairs_; }

  // Distinct source words in first-seen order.
  const std::vector<std::string>& sources() const noexcept { return sources_; }

  const std::vector<std::string>& translations(const std::string& source) const {
    static const std::vector<std::string> none;
    auto it = by_source_.find(source);
    return it == by_source_.end() ? none : it->second;
  }

  bool contains(const std::string& source, const std::string& target) const {
    return seen_.count({source, target}) > 0;
  }

 private:
  Provenance provenance_;
  std::vector<Pair> pairs_;
  std::vector<std::string> sources_;
  std::unordered_map<std::string, std::vector<std::string>> by_source_;
  std::set<Pair> seen_;
};

// One "source target" pair per line; tab or space separated. Blank lines are
// skipped; repeated pairs are ignored.
inline BilingualDictionary read_dictionary(std::istream& in, Provenance provenance = Provenance::Gold) {
  BilingualDictionary dict(provenance);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 2) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 'source target', got " +
                                 std::to_string(tok.size()) + " fields");
    }
    dict.add(std::string(tok[0]), std::string(tok[1]));
  }
  return dict;
}

inline BilingualDictionary read_dictionary_file(const std::string& path, Provenance provenance = Provenance::Gold) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open dictionary '" + path + "'");
  try {
    return read_dictionary(in, provenance);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

inline void write_dictionary(std::ostream& out, const BilingualDictionary& dict) {
  for (const auto& [s, t] : dict.pairs()) out << s << ' ' << t << '\n';
}

// Orthogonal map between spaces. Row convention: a source row x maps to x W^T.
struct TranslationMatrix {
  Matrix w;
  double orthogonality_residual = 0.0;

  TranslationMatrix() = default;
  explicit TranslationMatrix(Matrix m) : w(std::move(m)) {
    require(w.rows() == w.cols(), "translation matrix must be square");
    orthogonality_residual = xlingual::orthogonality_residual(w);
  }

  static TranslationMatrix identity(std::size_t d) { return TranslationMatrix(Matrix::identity(d)); }

  std::size_t dim() const noexcept { return w.rows(); }

  // Maps every row of `x`.
  Matrix apply(const Matrix& x) const {
    require(x.cols() == dim(), "translation matrix: dimension mismatch");
    return multiply_transposed(x, w);
  }
};

// "d d" header, then d rows of d numbers.
inline void write_matrix(std::ostream& out, const TranslationMatrix& t) {
  out << t.dim() << ' ' << t.dim() << '\n';
  for (std::size_t i = 0; i < t.dim(); ++i) {
    for (std::size_t j = 0; j < t.dim(); ++j) {
      if (j) out << ' ';
      detail::write_double(out, t.w(i, j));
    }
    out << '\n';
  }
}

inline TranslationMatrix read_matrix(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t d = 0;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (d == 0) {
      if (!detail::looks_like_header(tok) || tok[0] != tok[1]) {
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected 'd d' header");
      }
      d = *detail::parse_number<std::size_t>(tok[0]);
      if (d == 0) fail(ErrorKind::Parse, "matrix header has zero dimension");
      continue;
    }
    if (tok.size() != d) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " + std::to_string(d) + " values");
    }
    for (auto t : tok) {
      auto v = detail::parse_number<double>(t);
      if (!v || !std::isfinite(*v)) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad value");
      values.push_back(*v);
    }
  }
  if (d == 0) fail(ErrorKind::Parse, "empty matrix file");
  if (values.size() != d * d) fail(ErrorKind::Parse, "matrix file has " + std::to_string(values.size() / d) + " rows, expected " + std::to_string(d));
  return TranslationMatrix(Matrix(d, d, std::move(values)));
}

inline TranslationMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open matrix file '" + path + "'");
  try {
    return read_matrix(in);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

}  // namespace xlingual
