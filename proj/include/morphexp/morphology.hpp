#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphexp/corpus.hpp"
#include "morphexp/embeddings.hpp"
#include "morphexp/random.hpp"

namespace morphexp {

enum class AffixKind { prefix, suffix };

std::string_view to_string(AffixKind kind);
AffixKind parse_affix_kind(std::string_view s);

struct Affix {
  AffixKind kind;
  std::string text;  // non-empty
  auto operator<=>(const Affix&) const = default;
};

// A candidate affix and every stem it attaches to in the vocabulary.
struct RegularitiesSet {
  Affix affix;
  std::vector<std::string> stems;  // sorted, unique, non-empty
};

// Rewrite of a word's beginning (prefix) or ending (suffix). An empty side
// is the null affix: <"", "ed"> adds "ed", <"able", ""> strips "able".
struct Transition {
  AffixKind kind = AffixKind::suffix;
  std::string from;
  std::string to;

  bool is_null() const { return from.empty() || to.empty(); }
  Transition reversed() const { return {kind, to, from}; }
  auto operator<=>(const Transition&) const = default;
};

// "<from,to>" with "null" for the empty side, e.g. "<ed,ing>".
std::string to_string(const Transition& t);

struct TransitionSet {
  Transition transition;
  std::vector<std::string> source_words;  // each carries `from`
};

// A representative word pair; vec(w2) - vec(w1) is the rule's direction.
struct TransformationRule {
  Transition transition;
  std::string w1;
  std::string w2;
  std::size_t support = 0;
  double pair_cosine = 0;
  bool operator==(const TransformationRule&) const = default;
};

struct MorphSet {
  std::string head;
  std::vector<std::string> variants;  // sorted, excludes head
  bool operator==(const MorphSet&) const = default;
};

// Thresholds for rule induction and morph-set construction. Size and
// frequency bars marked "strict" compare with >, the rest with >=.
struct ScaleProfile {
  std::size_t cross_set_min_size = 500;
  std::uint64_t rule_word_min_freq = 500;
  std::uint64_t morph_head_min_freq = 100;  // strict
  std::uint64_t variant_min_freq = 5;
  double prefix_dir_threshold = 0.15;  // strict
  double suffix_dir_threshold = 0.25;  // strict
  double rule_pair_min_cos = 0.1;
  double variant_min_cos = 0.15;  // strict
  double probe_min_cos = 0.15;    // strict
  std::size_t affix_min_stems = 10;      // strict
  std::size_t transition_min_size = 10;  // strict
  std::size_t downsample_cap = 1000;
  std::size_t min_rule_support = 10;  // strict
  std::size_t min_word_len = 3;       // strict, in code points
  std::size_t max_morph_set = 6;
  std::size_t max_affix_len = 6;  // code points

  static ScaleProfile small();
  static ScaleProfile large();
  // Frequency bars scaled for corpora of a few million tokens.
  static ScaleProfile desk();

  double direction_threshold(AffixKind kind) const {
    return kind == AffixKind::prefix ? prefix_dir_threshold : suffix_dir_threshold;
  }
  void validate() const;
};

// Rewrites `word` under `t`. Empty optional when the word lacks t.from,
// or the result is empty or equal to the input.
std::optional<std::string> apply_transition(std::string_view word, const Transition& t);

// Prefix sets come from a trie over the vocabulary, suffix sets from a trie
// over reversed words. A trie node at depth 1..max_affix_len yields a set
// when more than affix_min_stems distinct words run strictly past it; the
// stems are those words' remainders. Output is sorted by (kind, affix).
std::vector<RegularitiesSet> extract_candidate_affixes(const Vocabulary& vocab,
                                                       const ScaleProfile& profile = {});

// <null, a> transitions: the stems of each set that are words themselves.
std::vector<TransitionSet> build_null_transitions(const std::vector<RegularitiesSet>& regsets,
                                                  const Vocabulary& vocab,
                                                  const ScaleProfile& profile = {});

// <a, b> transitions between same-kind sets that both have at least
// cross_set_min_size stems; from < to lexicographically. Sources are the
// `from`-affixed words over the shared stems.
std::vector<TransitionSet> build_cross_transitions(const std::vector<RegularitiesSet>& regsets,
                                                   const ScaleProfile& profile = {});

// Uniform subset of at most `cap` sources, original order kept.
TransitionSet downsample_transition_set(TransitionSet ts, std::size_t cap, Rng& rng);

// Greedy representative-pair extraction over one transition set.
std::vector<TransformationRule> extract_transformation_rules(const TransitionSet& ts,
                                                             const EmbeddingTable& emb,
                                                             const Vocabulary& vocab,
                                                             const ScaleProfile& profile);

// Drops rules with a short word or a dissimilar pair.
std::vector<TransformationRule> filter_rules(std::vector<TransformationRule> rules,
                                             const EmbeddingTable& emb,
                                             const ScaleProfile& profile);

std::optional<MorphSet> build_morph_set(std::string_view head,
                                        const std::vector<TransformationRule>& rules,
                                        const EmbeddingTable& emb, const Vocabulary& vocab,
                                        const ScaleProfile& profile);

// Homo-morph check: a random probe variant must be similar to every other
// member (head included). Oversized sets are rejected outright.
std::optional<MorphSet> validate_morph_set(const MorphSet& ms, const EmbeddingTable& emb,
                                           Rng& rng, const ScaleProfile& profile);

struct InductionStats {
  std::size_t regularities_sets = 0;
  std::size_t null_transitions = 0;
  std::size_t cross_transitions = 0;
  std::size_t raw_rules = 0;
  std::size_t rules = 0;
};

// Full induction: affixes -> transitions -> downsample -> rules -> filter.
// Transition sets are processed in sorted order, each with its own
// derived random stream, so the result does not depend on `workers`.
std::vector<TransformationRule> induce_rules(const Vocabulary& vocab, const EmbeddingTable& emb,
                                             const ScaleProfile& profile, std::uint64_t seed,
                                             std::size_t workers = 1,
                                             InductionStats* stats = nullptr);

struct MorphSetStats {
  std::size_t heads_considered = 0;
  std::size_t built = 0;
  std::size_t validated = 0;
};

// Builds and validates morph sets for every eligible head, in sorted order.
std::vector<MorphSet> build_morph_sets(const Vocabulary& vocab, const EmbeddingTable& emb,
                                       const std::vector<TransformationRule>& rules,
                                       const ScaleProfile& profile, std::uint64_t seed,
                                       MorphSetStats* stats = nullptr);

// JSON-lines persistence.
void save_rules(const std::vector<TransformationRule>& rules, const std::filesystem::path& path);
std::vector<TransformationRule> load_rules(const std::filesystem::path& path);
void save_morph_sets(const std::vector<MorphSet>& sets, const std::filesystem::path& path);
std::vector<MorphSet> load_morph_sets(const std::filesystem::path& path);

std::string rule_to_json(const TransformationRule& rule);
TransformationRule rule_from_json(std::string_view line);
std::string morph_set_to_json(const MorphSet& ms);
MorphSet morph_set_from_json(std::string_view line);

}  // namespace morphexp
