#pragma once

// Text .vec embeddings (fastText output). Row order is the frequency rank:
// fastText writes the most frequent word first.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xlingual/error.hpp"
#include "xlingual/numerics.hpp"

namespace xlingual {

class EmbeddingSpace {
 public:
  EmbeddingSpace() = default;

  EmbeddingSpace(std::vector<std::string> words, Matrix vectors, bool normalized = false)
      : words_(std::move(words)), vectors_(std::move(vectors)), normalized_(normalized) {
    require(vectors_.rows() == words_.size(), "embedding space: row count differs from word count");
    require(vectors_.all_finite(), "embedding space: non-finite vector entry");
    index_.reserve(words_.size());
    for (std::size_t i = 0; i < words_.size(); ++i) {
      require(!words_[i].empty(), "embedding space: empty word");
      if (!index_.emplace(words_[i], i).second) {
        fail(ErrorKind::InvalidArgument, "embedding space: duplicate word '" + words_[i] + "'");
      }
    }
    if (normalized_) require(rows_unit_norm(vectors_), "embedding space: rows are not unit norm");
  }

  std::size_t size() const noexcept { return words_.size(); }
  std::size_t dim() const noexcept { return vectors_.cols(); }
  bool normalized() const noexcept { return normalized_; }

  const std::vector<std::string>& words() const noexcept { return words_; }
  const std::string& word(std::size_t i) const { return words_[i]; }
  const Matrix& vectors() const noexcept { return vectors_; }
  std::span<const double> vector(std::size_t i) const { return vectors_.row(i); }

  std::optional<std::size_t> find(std::string_view w) const {
    auto it = index_.find(std::string(w));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  bool contains(std::string_view w) const { return find(w).has_value(); }

  // 1-based position in load order.
  std::optional<std::size_t> frequency_rank(std::string_view w) const {
    auto i = find(w);
    if (!i) return std::nullopt;
    return *i + 1;
  }

  // The `count` most frequent entries.
  EmbeddingSpace head(std::size_t count) const {
    count = std::min(count, size());
    std::vector<std::string> w(words_.begin(), words_.begin() + static_cast<std::ptrdiff_t>(count));
    std::vector<double> v(vectors_.data().begin(),
                          vectors_.data().begin() + static_cast<std::ptrdiff_t>(count * dim()));
    return EmbeddingSpace(std::move(w), Matrix(count, dim(), std::move(v)), normalized_);
  }

 private:
  std::vector<std::string> words_;
  Matrix vectors_;
  bool normalized_ = false;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class HeaderMode { Detect, Present, Absent };

struct LoadOptions {
  std::optional<std::size_t> max_vocab;
  HeaderMode header = HeaderMode::Detect;
  bool fold_case = false;
};

struct LoadResult {
  EmbeddingSpace space;
  std::size_t duplicates_dropped = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
std::optional<T> parse_number(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline bool looks_like_header(const std::vector<std::string_view>& tok) {
  return tok.size() == 2 && parse_number<std::size_t>(tok[0]) && parse_number<std::size_t>(tok[1]);
}

}  // namespace detail

inline LoadResult load_vec(std::istream& in, const LoadOptions& opts = {}) {
  std::vector<std::string> words;
  std::vector<double> values;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t dim = 0;
  std::size_t duplicates = 0;
  std::size_t line_no = 0;
  bool first = true;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    auto tok = detail::split_ws(line);
    if (tok.empty()) continue;

    if (first) {
      first = false;
      const bool header = opts.header == HeaderMode::Present ||
                          (opts.header == HeaderMode::Detect && detail::looks_like_header(tok));
      if (header) {
        if (!detail::looks_like_header(tok)) {
          fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected header '<count> <dim>'");
        }
        dim = *detail::parse_number<std::size_t>(tok[1]);
        if (dim == 0) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": zero dimension in header");
        continue;
      }
    }

    if (opts.max_vocab && words.size() >= *opts.max_vocab) break;
    if (dim == 0) {
      if (tok.size() < 2) fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": row has no vector values");
      dim = tok.size() - 1;
    }
    if (tok.size() - 1 != dim) {
      fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": arity " + std::to_string(tok.size() - 1) +
                                 " != " + std::to_string(dim));
    }

    std::string w = opts.fold_case ? detail::ascii_lower(tok[0]) : std::string(tok[0]);
    if (seen.count(w)) {
      ++duplicates;
      continue;
    }
    for (std::size_t k = 1; k < tok.size(); ++k) {
      auto v = detail::parse_number<double>(tok[k]);
      if (!v || !std::isfinite(*v)) {
        fail(ErrorKind::Parse, "line " + std::to_string(line_no) + ": bad value '" + std::string(tok[k]) + "'");
      }
      values.push_back(*v);
    }
    seen.emplace(w, words.size());
    words.push_back(std::move(w));
  }

  if (words.empty()) fail(ErrorKind::Parse, "embedding file has no vectors");
  const std::size_t n = words.size();
  return {EmbeddingSpace(std::move(words), Matrix(n, dim, std::move(values))), duplicates};
}

inline LoadResult load_vec_file(const std::string& path, const LoadOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Parse, "cannot open embedding file '" + path + "'");
  try {
    return load_vec(in, opts);
  } catch (const Error& e) {
    fail(e.kind(), path + ": " + e.what());
  }
}

namespace detail {

inline void write_double(std::ostream& out, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.write(buf, ptr - buf);
}

}  // namespace detail

// Header line then one "<word> v1 ... vd" row per word, shortest round-trip
// decimal representation.
inline void write_vec(std::ostream& out, const EmbeddingSpace& space) {
  out << space.size() << ' ' << space.dim() << '\n';
  for (std::size_t i = 0; i < space.size(); ++i) {
    out << space.word(i);
    for (double v : space.vector(i)) {
      out << ' ';
      detail::write_double(out, v);
    }
    out << '\n';
  }
}

inline EmbeddingSpace normalize(const EmbeddingSpace& space) {
  Matrix v = space.vectors();
  for (std::size_t i = 0; i < v.rows(); ++i) {
    auto r = v.row(i);
    const double n = norm(r);
    if (n == 0.0) fail(ErrorKind::InvalidArgument, "normalize: zero-norm vector for word '" + space.word(i) + "'");
    for (double& x : r) x /= n;
  }
  return EmbeddingSpace(space.words(), std::move(v), true);
}

}  // namespace xlingual
