#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include "morphexp/corpus.hpp"
#include "morphexp/embeddings.hpp"

namespace morphexp {

struct TrainConfig {
  std::size_t dim = 100;
  std::uint64_t min_count = 5;
  std::size_t negative_samples = 5;
  std::size_t window = 5;
  std::size_t epochs = 5;
  double learning_rate = 0.025;  // decays linearly to 1e-4 of this value
  std::uint64_t seed = 1;
  std::size_t workers = 1;  // > 1 trains lock-free and is not reproducible

  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct TrainStats {
  std::size_t vocab_size = 0;
  std::uint64_t train_tokens = 0;  // per epoch, after the min_count filter
  std::uint64_t skipped_invalid = 0;
  double final_loss = 0;  // mean pair loss over the last epoch
};

// Skip-gram with negative sampling. Negatives are drawn from the unigram
// distribution raised to 0.75; every context within `window` positions of
// the centre word is used. Returns the input (centre-word) vectors for the
// tokens with frequency >= min_count, ordered by descending frequency.
// Throws TrainingError if no token reaches min_count.
EmbeddingTable train_sgns(const SentenceSource& corpus, const TrainConfig& cfg,
                          TrainStats* stats = nullptr);

namespace sgns {

template <typename T>
T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

// log(sigmoid(x)) without overflow.
template <typename T>
T log_sigmoid(T x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Loss of one (centre, context) pair with k negatives:
//   -log s(c.v) - sum_k log s(-n_k.v)
// `negatives` holds k rows of length dim back to back.
template <typename T>
T pair_loss(std::span<const T> centre, std::span<const T> context, std::span<const T> negatives) {
  const std::size_t dim = centre.size();
  T loss = -log_sigmoid(dot(context, centre));
  for (std::size_t off = 0; off < negatives.size(); off += dim) {
    loss -= log_sigmoid(-dot(negatives.subspan(off, dim), centre));
  }
  return loss;
}

// Writes d(loss)/d(parameter) into the three gradient spans (same shapes as
// the inputs) and returns the loss.
template <typename T>
T pair_gradient(std::span<const T> centre, std::span<const T> context,
                std::span<const T> negatives, std::span<T> g_centre, std::span<T> g_context,
                std::span<T> g_negatives) {
  const std::size_t dim = centre.size();
  std::fill(g_centre.begin(), g_centre.end(), T(0));
  const T pos = dot(context, centre);
  T loss = -log_sigmoid(pos);
  const T gp = sigmoid(pos) - T(1);
  for (std::size_t i = 0; i < dim; ++i) {
    g_centre[i] += gp * context[i];
    g_context[i] = gp * centre[i];
  }
  for (std::size_t off = 0; off < negatives.size(); off += dim) {
    const auto neg = negatives.subspan(off, dim);
    const T s = dot(neg, centre);
    loss -= log_sigmoid(-s);
    const T gn = sigmoid(s);
    for (std::size_t i = 0; i < dim; ++i) {
      g_centre[i] += gn * neg[i];
      g_negatives[off + i] = gn * centre[i];
    }
  }
  return loss;
}

// One in-place SGD step for a (centre, context, negatives) example. Each
// output row moves along its own gradient and the centre row along the
// summed gradient, all taken at the centre's incoming value; `scratch`
// (length dim) receives that summed gradient. When every negative row is
// distinct from the others and from the context, this equals
// `param -= lr * pair_gradient(...)`. Returns the pair loss before the step
// if `want_loss`, else 0.
template <typename T>
T sgd_step(std::span<T> centre, T* context, std::span<T* const> negatives, T lr,
           std::span<T> scratch, bool want_loss) {
  const std::size_t dim = centre.size();
  std::fill(scratch.begin(), scratch.end(), T(0));
  T loss = 0;
  auto target = [&](T* row, bool positive) {
    T f = 0;
    for (std::size_t i = 0; i < dim; ++i) f += row[i] * centre[i];
    if (want_loss) loss -= positive ? log_sigmoid(f) : log_sigmoid(-f);
    const T g = sigmoid(f) - (positive ? T(1) : T(0));  // d loss / d f
    const T step = lr * g;
    for (std::size_t i = 0; i < dim; ++i) {
      scratch[i] += g * row[i];
      row[i] -= step * centre[i];
    }
  };
  target(context, true);
  for (T* row : negatives) target(row, false);
  for (std::size_t i = 0; i < dim; ++i) centre[i] -= lr * scratch[i];
  return loss;
}

}  // namespace sgns
}  // namespace morphexp
