#include "morphexp/sgns.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "morphexp/error.hpp"
#include "morphexp/random.hpp"

namespace morphexp {

void TrainConfig::validate() const {
  if (dim == 0) throw std::invalid_argument("dim must be positive");
  if (min_count == 0) throw std::invalid_argument("min_count must be positive");
  if (negative_samples == 0) throw std::invalid_argument("negative_samples must be positive");
  if (window == 0) throw std::invalid_argument("window must be positive");
  if (epochs == 0) throw std::invalid_argument("epochs must be positive");
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (workers == 0) throw std::invalid_argument("workers must be positive");
}

namespace {

// Rows are rescaled onto this norm if an update pushes them past it. Normal
// training stays far below; it keeps a too-large learning rate from
// overflowing to infinity.
constexpr float kMaxRowNorm = 1000.0f;

void cap_norm(std::span<float> row) {
  float sq = 0;
  for (float x : row) sq += x * x;
  if (sq <= kMaxRowNorm * kMaxRowNorm) return;
  const float scale = kMaxRowNorm / std::sqrt(sq);
  for (float& x : row) x *= scale;
}

class NegativeSampler {
 public:
  explicit NegativeSampler(const std::vector<std::uint64_t>& counts) {
    cumulative_.reserve(counts.size());
    double acc = 0;
    for (auto c : counts) {
      acc += std::pow(static_cast<double>(c), 0.75);
      cumulative_.push_back(acc);
    }
  }

  std::uint32_t draw(Rng& rng) const {
    const double u = rng.uniform() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    if (it == cumulative_.end()) --it;
    return static_cast<std::uint32_t>(it - cumulative_.begin());
  }

 private:
  std::vector<double> cumulative_;
};

struct Model {
  std::size_t dim;
  std::vector<float> input;
  std::vector<float> output;
  std::span<float> in_row(std::uint32_t i) { return {input.data() + std::size_t(i) * dim, dim}; }
  std::span<float> out_row(std::uint32_t i) { return {output.data() + std::size_t(i) * dim, dim}; }
};

}  // namespace

EmbeddingTable train_sgns(const SentenceSource& corpus, const TrainConfig& cfg, TrainStats* stats) {
  cfg.validate();

  const Vocabulary full = build_vocabulary(corpus);
  std::vector<std::string> words;
  std::vector<std::uint64_t> counts;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> ids;
  std::uint64_t train_tokens = 0;
  for (auto& [w, n] : full.sorted()) {
    if (n < cfg.min_count) break;
    ids.emplace(w, static_cast<std::uint32_t>(words.size()));
    words.push_back(w);
    counts.push_back(n);
    train_tokens += n;
  }
  if (words.empty()) {
    throw TrainingError("no token reaches min_count=" + std::to_string(cfg.min_count));
  }

  const std::size_t dim = cfg.dim;
  const std::size_t k = cfg.negative_samples;
  Model model{dim, std::vector<float>(words.size() * dim), std::vector<float>(words.size() * dim)};
  {
    Rng init(cfg.seed);
    for (auto& x : model.input) x = static_cast<float>((init.uniform() - 0.5) / double(dim));
  }
  const NegativeSampler sampler(counts);

  const double total_work = double(cfg.epochs) * double(train_tokens) + 1.0;
  const double min_rate = cfg.learning_rate * 1e-4;
  std::atomic<std::uint64_t> processed{0};
  std::vector<double> last_epoch_loss(cfg.workers, 0.0);
  std::vector<std::uint64_t> last_epoch_pairs(cfg.workers, 0);
  std::vector<std::uint64_t> skipped(cfg.workers, 0);

  auto worker = [&](std::size_t t) {
    Rng rng(Rng::derive(cfg.seed, t + 1));
    std::vector<std::uint32_t> ids_buf;
    std::vector<std::uint32_t> neg_ids(k);
    std::vector<float*> neg_rows(k);
    std::vector<float> g_centre(dim);
    std::uint64_t local = 0;
    double rate = cfg.learning_rate;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      const bool last = epoch + 1 == cfg.epochs;
      std::uint64_t index = 0;
      corpus.for_each([&](const Sentence& s) {
        if (index++ % cfg.workers != t) return;
        ids_buf.clear();
        for (const auto& tok : s) {
          auto it = ids.find(tok);
          if (it != ids.end()) ids_buf.push_back(it->second);
        }
        for (std::size_t pos = 0; pos < ids_buf.size(); ++pos) {
          if (++local % 10000 == 0) {
            const auto done = processed.fetch_add(10000, std::memory_order_relaxed) + 10000;
            rate = std::max(min_rate, cfg.learning_rate * (1.0 - double(done) / total_work));
          }
          const std::uint32_t c = ids_buf[pos];
          const std::size_t lo = pos >= cfg.window ? pos - cfg.window : 0;
          const std::size_t hi = std::min(ids_buf.size(), pos + cfg.window + 1);
          for (std::size_t j = lo; j < hi; ++j) {
            if (j == pos) continue;
            const std::uint32_t ctx = ids_buf[j];
            std::size_t used = 0;
            for (std::size_t d = 0; d < k; ++d) {
              const std::uint32_t n = sampler.draw(rng);
              if (n == ctx) continue;
              neg_ids[used++] = n;
            }
            for (std::size_t d = 0; d < used; ++d) neg_rows[d] = model.out_row(neg_ids[d]).data();
            auto in = model.in_row(c);
            auto out = model.out_row(ctx);
            const float loss = sgns::sgd_step<float>(in, out.data(), std::span<float* const>(neg_rows).first(used),
                                                     static_cast<float>(rate), g_centre, last);
            cap_norm(in);
            cap_norm(out);
            for (std::size_t d = 0; d < used; ++d) cap_norm(model.out_row(neg_ids[d]));
            if (last) {
              last_epoch_loss[t] += loss;
              ++last_epoch_pairs[t];
            }
          }
        }
      });
    }
    if (auto* fs = dynamic_cast<const FileSentences*>(&corpus)) skipped[t] = fs->skipped_invalid();
  };

  if (cfg.workers == 1) {
    worker(0);
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < cfg.workers; ++t) threads.emplace_back(worker, t);
    for (auto& th : threads) th.join();
  }

  EmbeddingTable table(dim);
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto row = model.in_row(static_cast<std::uint32_t>(i));
    for (float x : row) {
      if (!std::isfinite(x)) throw TrainingError("training diverged: non-finite vector for " + words[i]);
    }
    table.add(words[i], row);
  }
  if (stats) {
    stats->vocab_size = words.size();
    stats->train_tokens = train_tokens;
    stats->skipped_invalid = skipped[0];
    double loss = 0;
    std::uint64_t pairs = 0;
    for (std::size_t t = 0; t < cfg.workers; ++t) {
      loss += last_epoch_loss[t];
      pairs += last_epoch_pairs[t];
    }
    stats->final_loss = pairs ? loss / double(pairs) : 0.0;
  }
  return table;
}

}  // namespace morphexp
