#pragma once

// Adversarial initialisation of the translation matrix. A one-hidden-layer
// discriminator learns to tell mapped source vectors from target vectors; the
// map is updated to fool it and projected back onto the orthogonal group
// after every generator step.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "xlingual/dictionary.hpp"
#include "xlingual/embedding_io.hpp"
#include "xlingual/error.hpp"
#include "xlingual/numerics.hpp"

namespace xlingual {

struct AdversarialConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::size_t discriminator_hidden_units = 256;
  std::size_t iterations_per_epoch = 0;  // 0: sampling pool size / batch size
  std::size_t discriminator_steps = 1;   // discriminator updates per generator update
  double generator_learning_rate = 0.05;
  double discriminator_learning_rate = 0.1;
  double learning_rate_decay = 0.98;  // multiplicative, per epoch
  double label_smoothing = 0.1;
  double leaky_slope = 0.2;
  std::size_t vocab_cap = 5000;  // batches are drawn from the most frequent words
  std::uint64_t seed = 0;

  void validate() const {
    require(batch_size > 0 && discriminator_hidden_units > 0 && discriminator_steps > 0 && vocab_cap > 0,
            "adversarial config: counts must be positive");
    require(label_smoothing >= 0.0 && label_smoothing < 0.5, "adversarial config: label smoothing must lie in [0, 0.5)");
    require(generator_learning_rate > 0.0 && discriminator_learning_rate > 0.0 && learning_rate_decay > 0.0,
            "adversarial config: learning rates must be positive");
  }
};

struct EpochTrace {
  std::size_t epoch = 0;
  double discriminator_accuracy = 0.0;
  double discriminator_loss = 0.0;
  double orthogonality_residual = 0.0;
};

struct AdversarialResult {
  TranslationMatrix w;
  std::vector<EpochTrace> trace;
};

namespace detail {

// p(mapped source | z) = sigmoid(w2 . leaky(W1 z + b1) + b2)
class Discriminator {
 public:
  Discriminator(std::size_t dim, std::size_t hidden, double slope, std::mt19937_64& rng)
      : w1_(random_gaussian(hidden, dim, rng, std::sqrt(2.0 / static_cast<double>(dim)))),
        b1_(hidden, 0.0),
        w2_(hidden),
        b2_(0.0),
        slope_(slope) {
    std::normal_distribution<double> dist(0.0, std::sqrt(1.0 / static_cast<double>(hidden)));
    for (double& v : w2_) v = dist(rng);
  }

  // Returns the mean binary cross-entropy of `inputs` against `labels`. When
  // `input_grad` is non-null it receives dLoss/dInput; when `lr` > 0 the
  // parameters take one SGD step.
  double step(const Matrix& inputs, const std::vector<double>& labels, double lr, Matrix* input_grad) {
    const std::size_t n = inputs.rows();
    const std::size_t h = b1_.size();
    const std::size_t d = inputs.cols();
    Matrix pre(n, h), act(n, h);
    std::vector<double> logits(n);
    for (std::size_t i = 0; i < n; ++i) {
      auto z = inputs.row(i);
      double o = b2_;
      for (std::size_t u = 0; u < h; ++u) {
        const double a = dot(w1_.row(u), z) + b1_[u];
        pre(i, u) = a;
        act(i, u) = a > 0.0 ? a : slope_ * a;
        o += w2_[u] * act(i, u);
      }
      logits[i] = o;
    }

    double loss = 0.0;
    std::vector<double> g_out(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double o = logits[i];
      // log(1 + exp(-|o|)) form keeps the loss finite for large logits.
      loss += std::max(o, 0.0) - o * labels[i] + std::log1p(std::exp(-std::abs(o)));
      g_out[i] = (1.0 / (1.0 + std::exp(-o)) - labels[i]) / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);

    Matrix g_pre(n, h);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t u = 0; u < h; ++u)
        g_pre(i, u) = g_out[i] * w2_[u] * (pre(i, u) > 0.0 ? 1.0 : slope_);

    if (input_grad) *input_grad = multiply(g_pre, w1_);

    if (lr > 0.0) {
      for (std::size_t u = 0; u < h; ++u) {
        double gw2 = 0.0, gb1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          gw2 += g_out[i] * act(i, u);
          gb1 += g_pre(i, u);
        }
        w2_[u] -= lr * gw2;
        b1_[u] -= lr * gb1;
      }
      double gb2 = 0.0;
      for (double g : g_out) gb2 += g;
      b2_ -= lr * gb2;
      Matrix gw1 = transposed_multiply(g_pre, inputs);
      for (std::size_t u = 0; u < h; ++u)
        for (std::size_t j = 0; j < d; ++j) w1_(u, j) -= lr * gw1(u, j);
    }
    return loss;
  }

  double probability(std::span<const double> z) const {
    double o = b2_;
    for (std::size_t u = 0; u < b1_.size(); ++u) {
      const double a = dot(w1_.row(u), z) + b1_[u];
      o += w2_[u] * (a > 0.0 ? a : slope_ * a);
    }
    return 1.0 / (1.0 + std::exp(-o));
  }

 private:
  Matrix w1_;
  std::vector<double> b1_;
  std::vector<double> w2_;
  double b2_;
  double slope_;
};

inline Matrix gather_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
  Matrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto src = m.row(rows[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

}  // namespace detail

inline AdversarialResult adversarial_init(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                          const AdversarialConfig& cfg = {}) {
  cfg.validate();
  if (src.dim() != tgt.dim()) fail(ErrorKind::InvalidArgument, "adversarial_init: dimension mismatch");
  require(src.normalized() && tgt.normalized(), "adversarial_init: spaces must be normalized");

  const std::size_t d = src.dim();
  AdversarialResult result{TranslationMatrix::identity(d), {}};
  if (cfg.epochs == 0) return result;

  std::mt19937_64 rng(cfg.seed);
  detail::Discriminator disc(d, cfg.discriminator_hidden_units, cfg.leaky_slope, rng);
  const std::size_t src_pool = std::min(cfg.vocab_cap, src.size());
  const std::size_t tgt_pool = std::min(cfg.vocab_cap, tgt.size());
  std::uniform_int_distribution<std::size_t> pick_src(0, src_pool - 1);
  std::uniform_int_distribution<std::size_t> pick_tgt(0, tgt_pool - 1);
  const std::size_t iterations =
      cfg.iterations_per_epoch ? cfg.iterations_per_epoch : std::max<std::size_t>(1, std::max(src_pool, tgt_pool) / cfg.batch_size);
  const std::size_t bs = cfg.batch_size;
  const double smooth = cfg.label_smoothing;

  Matrix w = Matrix::identity(d);
  double lr_d = cfg.discriminator_learning_rate;
  double lr_g = cfg.generator_learning_rate;

  std::vector<std::size_t> rows(bs);
  auto sample = [&](auto& dist) {
    for (auto& r : rows) r = dist(rng);
    return rows;
  };

  const Matrix eval_src = src.head(src_pool).vectors();
  const Matrix eval_tgt = tgt.head(tgt_pool).vectors();

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t loss_count = 0;
    for (std::size_t it = 0; it < iterations; ++it) {
      for (std::size_t s = 0; s < cfg.discriminator_steps; ++s) {
        Matrix batch(2 * bs, d);
        Matrix mapped = multiply_transposed(detail::gather_rows(src.vectors(), sample(pick_src)), w);
        Matrix real = detail::gather_rows(tgt.vectors(), sample(pick_tgt));
        std::vector<double> labels(2 * bs);
        for (std::size_t i = 0; i < bs; ++i) {
          std::copy(mapped.row(i).begin(), mapped.row(i).end(), batch.row(i).begin());
          std::copy(real.row(i).begin(), real.row(i).end(), batch.row(bs + i).begin());
          labels[i] = 1.0 - smooth;
          labels[bs + i] = smooth;
        }
        const double loss = disc.step(batch, labels, lr_d, nullptr);
        if (!std::isfinite(loss)) {
          fail(ErrorKind::Divergence, "adversarial_init: non-finite discriminator loss at epoch " + std::to_string(epoch));
        }
        loss_sum += loss;
        ++loss_count;
      }

      // Generator: make mapped source look like target (flipped labels).
      Matrix x = detail::gather_rows(src.vectors(), sample(pick_src));
      Matrix mapped = multiply_transposed(x, w);
      std::vector<double> flipped(bs, smooth);
      Matrix grad_mapped;
      const double gloss = disc.step(mapped, flipped, 0.0, &grad_mapped);
      if (!std::isfinite(gloss)) {
        fail(ErrorKind::Divergence, "adversarial_init: non-finite generator loss at epoch " + std::to_string(epoch));
      }
      // mapped = x W^T  =>  dL/dW = (dL/dmapped)^T x
      Matrix grad_w = transposed_multiply(grad_mapped, x);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) w(i, j) -= lr_g * grad_w(i, j);
      if (!w.all_finite()) {
        fail(ErrorKind::Divergence, "adversarial_init: non-finite translation matrix at epoch " + std::to_string(epoch));
      }
      w = nearest_orthogonal(w);
    }

    // Accuracy over the full sampling pools: mapped source counts as correct
    // above 0.5, target at or below.
    const Matrix mapped_eval = multiply_transposed(eval_src, w);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < mapped_eval.rows(); ++i) correct += disc.probability(mapped_eval.row(i)) > 0.5;
    for (std::size_t i = 0; i < eval_tgt.rows(); ++i) correct += disc.probability(eval_tgt.row(i)) <= 0.5;

    EpochTrace t;
    t.epoch = epoch;
    t.discriminator_accuracy = static_cast<double>(correct) / static_cast<double>(mapped_eval.rows() + eval_tgt.rows());
    t.discriminator_loss = loss_count ? loss_sum / static_cast<double>(loss_count) : 0.0;
    t.orthogonality_residual = orthogonality_residual(w);
    result.trace.push_back(t);

    lr_d *= cfg.learning_rate_decay;
    lr_g *= cfg.learning_rate_decay;
  }
  result.w = TranslationMatrix(std::move(w));
  return result;
}

}  // namespace xlingual
