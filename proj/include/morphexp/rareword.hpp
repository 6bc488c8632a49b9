#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphexp/corpus.hpp"
#include "morphexp/embeddings.hpp"
#include "morphexp/morphology.hpp"

namespace morphexp {

struct RareConfig {
  std::uint64_t rare_threshold = 20;    // stored vectors are trusted at >= this
  std::uint64_t reliability_step = 50;  // level l needs frequency > l * step
  std::size_t max_levels = 3;
  std::uint64_t substring_min_freq = 50;  // strict
  std::size_t substring_min_len = 3;      // strict, code points
  std::size_t max_word_len = 64;          // longer words skip substring search

  void validate() const;
};

enum class Direction { forward, reverse };

// One rule application: forward rewrites with rule.transition, reverse with
// its mirror.
struct PathStep {
  std::size_t rule;  // index into the rule list
  Direction direction;
  bool operator==(const PathStep&) const = default;
};

using RulePath = std::vector<PathStep>;

// Reachable word -> first path found to it, ordered by word.
using Frontier = std::map<std::string, RulePath, std::less<>>;

// Applies every rule in both directions to every frontier word. Results
// that are in the vocabulary are kept; on duplicates the first path (in
// word order, then rule order, forward before reverse) wins.
Frontier explore_level(const Frontier& current, std::span<const TransformationRule> rules,
                       const Vocabulary& vocab);

struct BaseWord {
  std::string word;
  RulePath path;  // from the rare word toward `word`
  std::size_t level = 0;
};

// Level-order search for a frequent relative. Words already seen at an
// earlier level (including the rare word) are not revisited.
std::optional<BaseWord> find_reliable_base(std::string_view rare,
                                           std::span<const TransformationRule> rules,
                                           const Vocabulary& vocab, const RareConfig& cfg);

enum class SynthesisMethod { stored, rule_path, self_embedding, case_variant_path, substring, zero };

std::string_view to_string(SynthesisMethod m);

struct SynthesisResult {
  std::vector<float> vector;
  SynthesisMethod method = SynthesisMethod::zero;
  std::optional<std::string> base;  // word whose vector was used
  RulePath path;                    // rule_path / case_variant_path only
};

// Replays `path` on `word` with string rewrites; empty optional if a step
// does not apply.
std::optional<std::string> replay_path(std::string_view word, const RulePath& path,
                                       std::span<const TransformationRule> rules);

// Vector for any word. Fallback order:
//   stored (frequent and embedded) -> rule path from a reliable base ->
//   the word's own vector -> rule path from the Capitalized, then
//   lowercase form -> longest frequent substring (word, Capitalized,
//   lowercase) -> zeros.
// A rule path composes vec(base) - sum(sign * (vec(w2) - vec(w1))) with sign
// +1 for forward steps and -1 for reverse steps.
SynthesisResult synthesize(std::string_view word, const EmbeddingTable& emb,
                           std::span<const TransformationRule> rules, const Vocabulary& vocab,
                           const RareConfig& cfg);

// Holds the frozen inputs for repeated synthesis.
class RareWordSynthesizer {
 public:
  RareWordSynthesizer(const EmbeddingTable& emb, std::vector<TransformationRule> rules,
                      const Vocabulary& vocab, RareConfig cfg = {})
      : emb_(emb), rules_(std::move(rules)), vocab_(vocab), cfg_(cfg) {
    cfg_.validate();
  }

  SynthesisResult operator()(std::string_view word) const {
    return synthesize(word, emb_, rules_, vocab_, cfg_);
  }

  const std::vector<TransformationRule>& rules() const { return rules_; }
  const RareConfig& config() const { return cfg_; }

 private:
  const EmbeddingTable& emb_;
  std::vector<TransformationRule> rules_;
  const Vocabulary& vocab_;
  RareConfig cfg_;
};

// JSON object with word, method, base, path and vector.
std::string synthesis_to_json(std::string_view word, const SynthesisResult& r,
                              std::span<const TransformationRule> rules);

}  // namespace morphexp
