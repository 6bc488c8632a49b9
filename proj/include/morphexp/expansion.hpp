#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphexp/corpus.hpp"
#include "morphexp/morphology.hpp"
#include "morphexp/random.hpp"

namespace morphexp {

struct ExpansionConfig {
  std::size_t k = 1;  // attempts per sentence: 1 = Exp, 2 = 2-Exp, ...
  double replace_probability = 0.5;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t chunk_size = 4096;  // sentences per random stream

  void validate() const;
};

// head -> variants, as looked up during expansion.
using MorphIndex = std::unordered_map<std::string, std::vector<std::string>, StringHash, std::equal_to<>>;

MorphIndex index_morph_sets(const std::vector<MorphSet>& sets);

// Counters over every attempt, kept or not.
struct ExpansionTally {
  std::uint64_t attempts = 0;
  std::uint64_t replaceable_positions = 0;
  std::uint64_t replacements = 0;
};

// Up to cfg.k distinct sentences, each differing from `s` only at tokens
// that head a morph set.
std::vector<Sentence> expand_sentence(const Sentence& s, const MorphIndex& index,
                                      const ExpansionConfig& cfg, Rng& rng,
                                      ExpansionTally* tally = nullptr);

struct ExpansionStats {
  std::uint64_t sentences_read = 0;
  std::uint64_t sentences_generated = 0;
  std::uint64_t skipped_invalid = 0;
  ExpansionTally tally;

  std::string to_json() const;
};

// Writes every input line verbatim, each followed by its generated
// sentences (space-joined tokens). Random streams are per chunk of
// cfg.chunk_size lines, so output is independent of cfg.workers.
ExpansionStats expand_corpus(const std::filesystem::path& in_path, const MorphIndex& index,
                             const ExpansionConfig& cfg, const std::filesystem::path& out_path);

}  // namespace morphexp
