#include "morphexp/rareword.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "morphexp/utf8.hpp"

namespace morphexp {

void RareConfig::validate() const {
  if (rare_threshold == 0 || reliability_step == 0 || max_levels == 0 ||
      substring_min_freq == 0 || substring_min_len == 0 || max_word_len == 0) {
    throw std::invalid_argument("rare-word thresholds must be positive");
  }
}

std::string_view to_string(SynthesisMethod m) {
  switch (m) {
    case SynthesisMethod::stored: return "stored";
    case SynthesisMethod::rule_path: return "rule_path";
    case SynthesisMethod::self_embedding: return "self_embedding";
    case SynthesisMethod::case_variant_path: return "case_variant_path";
    case SynthesisMethod::substring: return "substring";
    case SynthesisMethod::zero: return "zero";
  }
  return "zero";
}

namespace {

Transition oriented(const TransformationRule& r, Direction d) {
  return d == Direction::forward ? r.transition : r.transition.reversed();
}

}  // namespace

Frontier explore_level(const Frontier& current, std::span<const TransformationRule> rules,
                       const Vocabulary& vocab) {
  Frontier next;
  for (const auto& [word, path] : current) {
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (Direction d : {Direction::forward, Direction::reverse}) {
        auto w = apply_transition(word, oriented(rules[r], d));
        if (!w || !vocab.contains(*w) || next.count(*w)) continue;
        RulePath extended = path;
        extended.push_back({r, d});
        next.emplace(std::move(*w), std::move(extended));
      }
    }
  }
  return next;
}

std::optional<BaseWord> find_reliable_base(std::string_view rare,
                                           std::span<const TransformationRule> rules,
                                           const Vocabulary& vocab, const RareConfig& cfg) {
  std::set<std::string, std::less<>> seen{std::string(rare)};
  Frontier frontier{{std::string(rare), {}}};
  for (std::size_t level = 1; level <= cfg.max_levels; ++level) {
    Frontier next = explore_level(frontier, rules, vocab);
    for (auto it = next.begin(); it != next.end();) {
      it = seen.count(it->first) ? next.erase(it) : std::next(it);
    }
    if (next.empty()) return std::nullopt;
    // Most frequent; the map order makes ties lexicographic.
    auto best = next.begin();
    for (auto it = next.begin(); it != next.end(); ++it) {
      if (vocab.freq(it->first) > vocab.freq(best->first)) best = it;
    }
    if (vocab.freq(best->first) > level * cfg.reliability_step) {
      return BaseWord{best->first, best->second, level};
    }
    for (const auto& [w, p] : next) seen.insert(w);
    frontier = std::move(next);
  }
  return std::nullopt;
}

std::optional<std::string> replay_path(std::string_view word, const RulePath& path,
                                       std::span<const TransformationRule> rules) {
  std::string cur(word);
  for (const auto& step : path) {
    if (step.rule >= rules.size()) return std::nullopt;
    auto next = apply_transition(cur, oriented(rules[step.rule], step.direction));
    if (!next) return std::nullopt;
    cur = std::move(*next);
  }
  return cur;
}

namespace {

std::vector<float> copy(std::span<const float> v) { return {v.begin(), v.end()}; }

// vec(base) minus the signed rule directions along the path. Empty when a
// needed vector is missing.
std::optional<std::vector<float>> compose(const BaseWord& base, const EmbeddingTable& emb,
                                          std::span<const TransformationRule> rules) {
  auto bv = emb.find(base.word);
  if (!bv) return std::nullopt;
  std::vector<double> acc(bv->begin(), bv->end());
  for (const auto& step : base.path) {
    const auto& r = rules[step.rule];
    auto v1 = emb.find(r.w1);
    auto v2 = emb.find(r.w2);
    if (!v1 || !v2) return std::nullopt;
    const double sign = step.direction == Direction::forward ? 1.0 : -1.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
      acc[i] -= sign * (double((*v2)[i]) - double((*v1)[i]));
    }
  }
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = static_cast<float>(acc[i]);
    if (!std::isfinite(out[i])) return std::nullopt;
  }
  return out;
}

std::optional<SynthesisResult> via_rules(std::string_view word, SynthesisMethod method,
                                         const EmbeddingTable& emb,
                                         std::span<const TransformationRule> rules,
                                         const Vocabulary& vocab, const RareConfig& cfg) {
  auto base = find_reliable_base(word, rules, vocab, cfg);
  if (!base) return std::nullopt;
  auto v = compose(*base, emb, rules);
  if (!v) return std::nullopt;
  return SynthesisResult{std::move(*v), method, base->word, base->path};
}

std::optional<SynthesisResult> via_substring(std::string_view word, const EmbeddingTable& emb,
                                             const Vocabulary& vocab, const RareConfig& cfg) {
  const std::u32string cps = utf8::decode(word);
  if (cps.size() > cfg.max_word_len) return std::nullopt;
  std::optional<std::string> best;
  std::uint64_t best_freq = 0;
  std::size_t best_len = 0;
  for (std::size_t len = cps.size(); len > cfg.substring_min_len; --len) {
    for (std::size_t start = 0; start + len <= cps.size(); ++start) {
      std::string cand = utf8::encode(std::u32string_view(cps).substr(start, len));
      const auto f = vocab.freq(cand);
      if (f <= cfg.substring_min_freq || !emb.contains(cand)) continue;
      if (!best || f > best_freq || (f == best_freq && cand < *best)) {
        best = std::move(cand);
        best_freq = f;
        best_len = len;
      }
    }
    if (best && best_len == len) break;
  }
  if (!best) return std::nullopt;
  return SynthesisResult{copy(*emb.find(*best)), SynthesisMethod::substring, *best, {}};
}

}  // namespace

SynthesisResult synthesize(std::string_view word, const EmbeddingTable& emb,
                           std::span<const TransformationRule> rules, const Vocabulary& vocab,
                           const RareConfig& cfg) {
  const auto own = emb.find(word);
  if (own && vocab.freq(word) >= cfg.rare_threshold) {
    return {copy(*own), SynthesisMethod::stored, std::nullopt, {}};
  }
  if (auto r = via_rules(word, SynthesisMethod::rule_path, emb, rules, vocab, cfg)) return *r;
  if (own) return {copy(*own), SynthesisMethod::self_embedding, std::nullopt, {}};

  std::vector<std::string> forms;
  for (std::string f : {utf8::capitalize(word), utf8::to_lower(word)}) {
    if (f != word && std::find(forms.begin(), forms.end(), f) == forms.end()) forms.push_back(f);
  }
  for (const auto& f : forms) {
    if (auto r = via_rules(f, SynthesisMethod::case_variant_path, emb, rules, vocab, cfg)) return *r;
  }
  if (auto r = via_substring(word, emb, vocab, cfg)) return *r;
  for (const auto& f : forms) {
    if (auto r = via_substring(f, emb, vocab, cfg)) return *r;
  }
  return {std::vector<float>(emb.dim(), 0.0f), SynthesisMethod::zero, std::nullopt, {}};
}

std::string synthesis_to_json(std::string_view word, const SynthesisResult& r,
                              std::span<const TransformationRule> rules) {
  nlohmann::json path = nlohmann::json::array();
  for (const auto& step : r.path) {
    const auto& rule = rules[step.rule];
    path.push_back({{"transition", to_string(rule.transition)},
                    {"kind", to_string(rule.transition.kind)},
                    {"w1", rule.w1},
                    {"w2", rule.w2},
                    {"direction", step.direction == Direction::forward ? "forward" : "reverse"}});
  }
  nlohmann::json j = {{"word", word},
                      {"method", to_string(r.method)},
                      {"base", r.base ? nlohmann::json(*r.base) : nlohmann::json(nullptr)},
                      {"path", path},
                      {"vector", r.vector}};
  return j.dump();
}

}  // namespace morphexp
