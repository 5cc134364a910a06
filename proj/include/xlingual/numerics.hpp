#pragma once

// Dense real kernels: a row-major matrix, products, one-sided Jacobi SVD and
// cyclic Jacobi symmetric eigenvalues. Sized for embedding dimensions (a few
// hundred) and small graph Laplacians, not for vocabulary-sized systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "xlingual/error.hpp"

namespace xlingual {

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    require(data_.size() == rows_ * cols_, "matrix: entry count does not match shape");
    for (double v : data_) {
      require(std::isfinite(v), "matrix: non-finite entry");
    }
  }

  Matrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      require(r.size() == cols_, "matrix: ragged initializer");
      for (double v : r) {
        require(std::isfinite(v), "matrix: non-finite entry");
        data_.push_back(v);
      }
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double frobenius_norm(const Matrix& m) { return norm(m.data()); }

inline Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

inline Matrix operator-(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix subtraction: shape mismatch");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return out;
}

inline Matrix operator+(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "matrix addition: shape mismatch");
  Matrix out = a;
  auto o = out.data();
  auto bd = b.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return out;
}

// A * B
inline Matrix multiply(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.rows(), "matrix product: inner dimension mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

// A * B^T; rows of A against rows of B.
inline Matrix multiply_transposed(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), "matrix product A*B^T: column count mismatch");
  Matrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto arow = a.row(i);
    auto orow = out.row(i);
    for (std::size_t j = 0; j < b.rows(); ++j) orow[j] = dot(arow, b.row(j));
  }
  return out;
}

// A^T * B
inline Matrix transposed_multiply(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows(), "matrix product A^T*B: row count mismatch");
  Matrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    auto arow = a.row(k);
    auto brow = b.row(k);
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double v = arow[i];
      if (v == 0.0) continue;
      auto orow = out.row(i);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += v * brow[j];
    }
  }
  return out;
}

// ||M^T M - I||_F
inline double orthogonality_residual(const Matrix& m) {
  Matrix g = transposed_multiply(m, m);
  return frobenius_norm(g - Matrix::identity(g.rows()));
}

struct SvdResult {
  Matrix u;               // m x r, orthonormal columns
  std::vector<double> s;  // r values, descending
  Matrix v;               // n x r, orthonormal columns
};

struct SymSpectrum {
  std::vector<double> eigenvalues;  // descending
};

namespace detail {

// Completes the columns flagged in `missing` so that all columns of `q` are
// orthonormal. Existing columns must already be orthonormal.
inline void complete_orthonormal_columns(Matrix& q, const std::vector<bool>& missing) {
  const std::size_t m = q.rows();
  const std::size_t r = q.cols();
  std::vector<bool> filled(r);
  for (std::size_t j = 0; j < r; ++j) filled[j] = !missing[j];
  std::size_t basis = 0;
  for (std::size_t j = 0; j < r; ++j) {
    if (filled[j]) continue;
    while (basis < m) {
      std::vector<double> cand(m, 0.0);
      cand[basis++] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t c = 0; c < r; ++c) {
          if (!filled[c]) continue;
          double proj = 0.0;
          for (std::size_t i = 0; i < m; ++i) proj += q(i, c) * cand[i];
          for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * q(i, c);
        }
      }
      const double nrm = norm(cand);
      if (nrm > 1e-6) {
        for (std::size_t i = 0; i < m; ++i) q(i, j) = cand[i] / nrm;
        filled[j] = true;
        break;
      }
    }
    require(filled[j], "svd: failed to complete orthonormal basis");
  }
}

// One-sided Jacobi (Hestenes) for m >= n.
inline SvdResult svd_tall(const Matrix& in) {
  const std::size_t m = in.rows();
  const std::size_t n = in.cols();
  Matrix a = in;
  Matrix v = Matrix::identity(n);
  constexpr double eps = std::numeric_limits<double>::epsilon();

  for (int sweep = 0; sweep < 100; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          alpha += ap * ap;
          beta += aq * aq;
          gamma += ap * aq;
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double ap = a(i, p), aq = a(i, q);
          a(i, p) = c * ap - s * aq;
          a(i, q) = s * ap + c * aq;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += a(i, j) * a(i, j);
    sigma[j] = std::sqrt(s);
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  SvdResult out{Matrix(m, n), std::vector<double>(n), Matrix(n, n)};
  const double smax = n ? sigma[order[0]] : 0.0;
  const double tol = smax * eps * static_cast<double>(std::max(m, n));
  std::vector<bool> missing(n, false);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    for (std::size_t i = 0; i < n; ++i) out.v(i, k) = v(i, j);
    if (sigma[j] > tol && sigma[j] > 0.0) {
      out.s[k] = sigma[j];
      for (std::size_t i = 0; i < m; ++i) out.u(i, k) = a(i, j) / sigma[j];
    } else {
      out.s[k] = 0.0;
      missing[k] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end()) {
    complete_orthonormal_columns(out.u, missing);
  }
  return out;
}

}  // namespace detail

// Thin SVD: M (m x n) = U diag(S) V^T with r = min(m, n). Each column of U is
// sign-normalized so that its largest-magnitude entry is positive.
inline SvdResult svd(const Matrix& m) {
  if (m.rows() == 0 || m.cols() == 0) fail(ErrorKind::InvalidArgument, "svd: empty matrix");
  if (!m.all_finite()) fail(ErrorKind::InvalidArgument, "svd: matrix has non-finite entries");

  SvdResult r;
  if (m.rows() >= m.cols()) {
    r = detail::svd_tall(m);
  } else {
    SvdResult t = detail::svd_tall(transpose(m));
    r = SvdResult{std::move(t.v), std::move(t.s), std::move(t.u)};
  }

  for (std::size_t j = 0; j < r.u.cols(); ++j) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < r.u.rows(); ++i)
      if (std::abs(r.u(i, j)) > std::abs(r.u(best, j))) best = i;
    if (r.u(best, j) < 0.0) {
      for (std::size_t i = 0; i < r.u.rows(); ++i) r.u(i, j) = -r.u(i, j);
      for (std::size_t i = 0; i < r.v.rows(); ++i) r.v(i, j) = -r.v(i, j);
    }
  }
  return r;
}

// Closest orthogonal matrix in Frobenius norm (polar factor U V^T).
inline Matrix nearest_orthogonal(const Matrix& m) {
  require(m.rows() == m.cols(), "nearest_orthogonal: matrix must be square");
  SvdResult d = svd(m);
  return multiply_transposed(d.u, d.v);
}

// Eigenvalues of a symmetric matrix via cyclic Jacobi rotations.
inline SymSpectrum sym_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) fail(ErrorKind::InvalidArgument, "sym_eigenvalues: matrix is not square");
  if (!m.all_finite()) fail(ErrorKind::InvalidArgument, "sym_eigenvalues: non-finite entries");
  const std::size_t n = m.rows();
  const double asym = frobenius_norm(m - transpose(m));
  if (asym > 1e-9 * frobenius_norm(m)) {
    fail(ErrorKind::InvalidArgument, "sym_eigenvalues: matrix is not symmetric");
  }

  Matrix a = m;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = a(j, i) = 0.5 * (m(i, j) + m(j, i));

  const double scale = std::max(frobenius_norm(a), std::numeric_limits<double>::min());
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (std::sqrt(off) <= 1e-15 * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }

  SymSpectrum out;
  out.eigenvalues.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.eigenvalues[i] = a(i, i);
  std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), std::greater<>());
  return out;
}

inline bool rows_unit_norm(const Matrix& m, double tol = 1e-6) {
  for (std::size_t i = 0; i < m.rows(); ++i)
    if (std::abs(norm(m.row(i)) - 1.0) > tol) return false;
  return true;
}

// Pairwise cosines between unit-norm rows of A and B.
inline Matrix cosine_matrix(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) fail(ErrorKind::InvalidArgument, "cosine_matrix: dimension mismatch");
  require(rows_unit_norm(a) && rows_unit_norm(b), "cosine_matrix: rows must be unit-normalized");
  return multiply_transposed(a, b);
}

inline Matrix random_gaussian(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                              double stddev = 1.0) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(rng);
  return m;
}

// Haar-distributed orthogonal matrix: polar factor of a Gaussian matrix.
inline Matrix random_orthogonal(std::size_t d, std::mt19937_64& rng) {
  return nearest_orthogonal(random_gaussian(d, d, rng));
}

}  // namespace xlingual
