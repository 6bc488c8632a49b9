#include "morphexp/expansion.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "morphexp/error.hpp"
#include "morphexp/utf8.hpp"

namespace morphexp {

void ExpansionConfig::validate() const {
  if (k == 0) throw std::invalid_argument("k must be at least 1");
  if (!(replace_probability > 0 && replace_probability < 1)) {
    throw std::invalid_argument("replace_probability must be in (0, 1)");
  }
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  if (chunk_size == 0) throw std::invalid_argument("chunk_size must be positive");
}

MorphIndex index_morph_sets(const std::vector<MorphSet>& sets) {
  MorphIndex index;
  for (const auto& ms : sets) {
    if (ms.variants.empty()) continue;
    auto& v = index[ms.head];
    v.insert(v.end(), ms.variants.begin(), ms.variants.end());
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return index;
}

std::vector<Sentence> expand_sentence(const Sentence& s, const MorphIndex& index,
                                      const ExpansionConfig& cfg, Rng& rng,
                                      ExpansionTally* tally) {
  std::vector<const std::vector<std::string>*> variants(s.size(), nullptr);
  bool any = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto it = index.find(s[i]);
    if (it != index.end()) {
      variants[i] = &it->second;
      any = true;
    }
  }
  std::vector<Sentence> kept;
  if (!any) return kept;
  for (std::size_t attempt = 0; attempt < cfg.k; ++attempt) {
    Sentence out = s;
    bool changed = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!variants[i]) continue;
      if (tally) ++tally->replaceable_positions;
      if (!rng.bernoulli(cfg.replace_probability)) continue;
      const auto& v = *variants[i];
      out[i] = v[rng.below(v.size())];
      changed = changed || out[i] != s[i];
      if (tally) ++tally->replacements;
    }
    if (tally) ++tally->attempts;
    if (!changed) continue;
    if (std::find(kept.begin(), kept.end(), out) != kept.end()) continue;
    kept.push_back(std::move(out));
  }
  return kept;
}

std::string ExpansionStats::to_json() const {
  nlohmann::json j = {{"sentences_read", sentences_read},
                      {"sentences_generated", sentences_generated},
                      {"skipped_invalid", skipped_invalid},
                      {"attempts", tally.attempts},
                      {"replaceable_positions", tally.replaceable_positions},
                      {"replacements", tally.replacements}};
  return j.dump(2);
}

namespace {

struct Line {
  std::string raw;
  bool newline = true;  // raw was terminated by '\n' in the input
};

struct Chunk {
  std::vector<Line> lines;
  std::vector<std::vector<Sentence>> generated;
  ExpansionTally tally;
  std::uint64_t invalid = 0;
};

void process_chunk(Chunk& chunk, std::uint64_t chunk_index, const MorphIndex& index,
                   const ExpansionConfig& cfg) {
  Rng rng(Rng::derive(cfg.seed, chunk_index));
  chunk.generated.assign(chunk.lines.size(), {});
  for (std::size_t i = 0; i < chunk.lines.size(); ++i) {
    std::string_view text = chunk.lines[i].raw;
    if (!text.empty() && text.back() == '\r') text.remove_suffix(1);
    if (!utf8::is_valid(text)) {
      ++chunk.invalid;
      continue;
    }
    chunk.generated[i] = expand_sentence(normalize_line(text), index, cfg, rng, &chunk.tally);
  }
}

}  // namespace

ExpansionStats expand_corpus(const std::filesystem::path& in_path, const MorphIndex& index,
                             const ExpansionConfig& cfg, const std::filesystem::path& out_path) {
  cfg.validate();
  std::ifstream in(in_path, std::ios::binary);
  if (!in) throw IoError(in_path.string(), "cannot open corpus");
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw IoError(out_path.string(), "cannot open for writing");

  ExpansionStats stats;
  std::uint64_t chunk_index = 0;
  bool eof = false;
  std::vector<Chunk> batch(cfg.workers);
  while (!eof) {
    std::size_t filled = 0;
    for (; filled < batch.size() && !eof; ++filled) {
      Chunk& c = batch[filled];
      c = Chunk{};
      std::string line;
      while (c.lines.size() < cfg.chunk_size) {
        if (!std::getline(in, line)) {
          eof = true;
          break;
        }
        c.lines.push_back({line, !in.eof()});
      }
      if (c.lines.empty()) break;
    }
    if (in.bad()) throw IoError(in_path.string(), "read failed");
    while (filled > 0 && batch[filled - 1].lines.empty()) --filled;
    if (filled == 0) break;

    if (filled == 1) {
      process_chunk(batch[0], chunk_index, index, cfg);
    } else {
      std::vector<std::thread> threads;
      for (std::size_t t = 0; t < filled; ++t) {
        threads.emplace_back(process_chunk, std::ref(batch[t]), chunk_index + t, std::cref(index),
                             std::cref(cfg));
      }
      for (auto& th : threads) th.join();
    }

    for (std::size_t t = 0; t < filled; ++t) {
      const Chunk& c = batch[t];
      for (std::size_t i = 0; i < c.lines.size(); ++i) {
        const auto& gen = c.generated[i];
        out << c.lines[i].raw;
        if (c.lines[i].newline || !gen.empty()) out << '\n';
        for (const auto& g : gen) out << join(g) << '\n';
        ++stats.sentences_read;
        stats.sentences_generated += gen.size();
      }
      stats.skipped_invalid += c.invalid;
      stats.tally.attempts += c.tally.attempts;
      stats.tally.replaceable_positions += c.tally.replaceable_positions;
      stats.tally.replacements += c.tally.replacements;
    }
    chunk_index += filled;
  }
  out.flush();
  if (!out) throw IoError(out_path.string(), "write failed");
  return stats;
}

}  // namespace morphexp
