#include "morphexp/morphology.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "morphexp/error.hpp"
#include "morphexp/utf8.hpp"

namespace morphexp {

using json = nlohmann::json;

std::string_view to_string(AffixKind kind) {
  return kind == AffixKind::prefix ? "prefix" : "suffix";
}

AffixKind parse_affix_kind(std::string_view s) {
  if (s == "prefix") return AffixKind::prefix;
  if (s == "suffix") return AffixKind::suffix;
  throw std::invalid_argument("unknown affix kind '" + std::string(s) + "'");
}

std::string to_string(const Transition& t) {
  return "<" + (t.from.empty() ? std::string("null") : t.from) + "," +
         (t.to.empty() ? std::string("null") : t.to) + ">";
}

ScaleProfile ScaleProfile::small() { return ScaleProfile{}; }

ScaleProfile ScaleProfile::large() {
  ScaleProfile p;
  p.cross_set_min_size = 30000;
  p.rule_word_min_freq = 1000;
  p.morph_head_min_freq = 1000;
  return p;
}

ScaleProfile ScaleProfile::desk() {
  ScaleProfile p;
  p.cross_set_min_size = 20;
  p.rule_word_min_freq = 20;
  p.morph_head_min_freq = 10;
  p.variant_min_freq = 2;
  return p;
}

void ScaleProfile::validate() const {
  auto positive = [](auto v, const char* name) {
    if (!(v > 0)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  positive(cross_set_min_size, "cross_set_min_size");
  positive(rule_word_min_freq, "rule_word_min_freq");
  positive(morph_head_min_freq, "morph_head_min_freq");
  positive(variant_min_freq, "variant_min_freq");
  positive(prefix_dir_threshold, "prefix_dir_threshold");
  positive(suffix_dir_threshold, "suffix_dir_threshold");
  positive(rule_pair_min_cos, "rule_pair_min_cos");
  positive(variant_min_cos, "variant_min_cos");
  positive(probe_min_cos, "probe_min_cos");
  positive(affix_min_stems, "affix_min_stems");
  positive(transition_min_size, "transition_min_size");
  positive(downsample_cap, "downsample_cap");
  positive(min_rule_support, "min_rule_support");
  positive(min_word_len, "min_word_len");
  positive(max_morph_set, "max_morph_set");
  positive(max_affix_len, "max_affix_len");
}

std::optional<std::string> apply_transition(std::string_view word, const Transition& t) {
  std::string out;
  if (t.kind == AffixKind::suffix) {
    if (!word.ends_with(t.from)) return std::nullopt;
    out.reserve(word.size() - t.from.size() + t.to.size());
    out.append(word.substr(0, word.size() - t.from.size()));
    out.append(t.to);
  } else {
    if (!word.starts_with(t.from)) return std::nullopt;
    out.reserve(word.size() - t.from.size() + t.to.size());
    out.append(t.to);
    out.append(word.substr(t.from.size()));
  }
  if (out.empty() || out == word) return std::nullopt;
  return out;
}

namespace {

// Trie over code points. Each node lists the words that continue past it,
// so a node's list is exactly the stem-bearing words of its path.
class AffixTrie {
 public:
  AffixTrie() : nodes_(1) {}

  void insert(const std::u32string& key, std::uint32_t word, std::size_t max_depth) {
    if (key.size() < 2) return;
    const std::size_t limit = std::min(max_depth, key.size() - 1);
    std::uint32_t n = 0;
    for (std::size_t d = 0; d < limit; ++d) {
      n = child(n, key[d]);
      nodes_[n].words.push_back(word);
    }
  }

  // Calls fn(path, words) for every non-root node with more than
  // `min_words` words.
  template <typename Fn>
  void visit(std::size_t min_words, Fn&& fn) const {
    std::u32string path;
    walk(0, path, min_words, fn);
  }

 private:
  struct Node {
    std::vector<std::pair<char32_t, std::uint32_t>> children;
    std::vector<std::uint32_t> words;
  };

  std::uint32_t child(std::uint32_t n, char32_t c) {
    for (const auto& [label, next] : nodes_[n].children) {
      if (label == c) return next;
    }
    const auto next = static_cast<std::uint32_t>(nodes_.size());
    nodes_.emplace_back();
    nodes_[n].children.emplace_back(c, next);
    return next;
  }

  template <typename Fn>
  void walk(std::uint32_t n, std::u32string& path, std::size_t min_words, Fn& fn) const {
    if (n != 0 && nodes_[n].words.size() > min_words) fn(path, nodes_[n].words);
    for (const auto& [label, next] : nodes_[n].children) {
      // Subtrees can only shrink.
      if (nodes_[next].words.size() <= min_words) continue;
      path.push_back(label);
      walk(next, path, min_words, fn);
      path.pop_back();
    }
  }

  std::vector<Node> nodes_;
};

std::string attach(const Affix& affix, std::string_view stem) {
  return affix.kind == AffixKind::prefix ? affix.text + std::string(stem)
                                         : std::string(stem) + affix.text;
}

}  // namespace

std::vector<RegularitiesSet> extract_candidate_affixes(const Vocabulary& vocab,
                                                       const ScaleProfile& profile) {
  std::vector<std::string> words;
  words.reserve(vocab.size());
  for (const auto& [w, n] : vocab.counts()) words.push_back(w);
  std::sort(words.begin(), words.end());

  AffixTrie forward, backward;
  for (std::uint32_t i = 0; i < words.size(); ++i) {
    std::u32string cps = utf8::decode(words[i]);
    forward.insert(cps, i, profile.max_affix_len);
    std::reverse(cps.begin(), cps.end());
    backward.insert(cps, i, profile.max_affix_len);
  }

  std::vector<RegularitiesSet> out;
  forward.visit(profile.affix_min_stems, [&](const std::u32string& path, const auto& ids) {
    RegularitiesSet rs{{AffixKind::prefix, utf8::encode(path)}, {}};
    rs.stems.reserve(ids.size());
    for (auto id : ids) rs.stems.push_back(words[id].substr(rs.affix.text.size()));
    std::sort(rs.stems.begin(), rs.stems.end());
    out.push_back(std::move(rs));
  });
  backward.visit(profile.affix_min_stems, [&](const std::u32string& path, const auto& ids) {
    std::u32string affix(path.rbegin(), path.rend());
    RegularitiesSet rs{{AffixKind::suffix, utf8::encode(affix)}, {}};
    rs.stems.reserve(ids.size());
    for (auto id : ids) {
      const auto& w = words[id];
      rs.stems.push_back(w.substr(0, w.size() - rs.affix.text.size()));
    }
    std::sort(rs.stems.begin(), rs.stems.end());
    out.push_back(std::move(rs));
  });
  std::sort(out.begin(), out.end(),
            [](const RegularitiesSet& a, const RegularitiesSet& b) { return a.affix < b.affix; });
  return out;
}

std::vector<TransitionSet> build_null_transitions(const std::vector<RegularitiesSet>& regsets,
                                                  const Vocabulary& vocab,
                                                  const ScaleProfile& profile) {
  std::vector<TransitionSet> out;
  for (const auto& rs : regsets) {
    TransitionSet ts{{rs.affix.kind, "", rs.affix.text}, {}};
    for (const auto& s : rs.stems) {
      if (vocab.contains(s)) ts.source_words.push_back(s);
    }
    if (ts.source_words.size() > profile.transition_min_size) out.push_back(std::move(ts));
  }
  std::sort(out.begin(), out.end(), [](const TransitionSet& a, const TransitionSet& b) {
    return a.transition < b.transition;
  });
  return out;
}

std::vector<TransitionSet> build_cross_transitions(const std::vector<RegularitiesSet>& regsets,
                                                   const ScaleProfile& profile) {
  std::vector<const RegularitiesSet*> large;
  for (const auto& rs : regsets) {
    if (rs.stems.size() >= profile.cross_set_min_size) large.push_back(&rs);
  }
  std::vector<TransitionSet> out;
  std::vector<std::string> shared;
  for (std::size_t i = 0; i < large.size(); ++i) {
    for (std::size_t j = i + 1; j < large.size(); ++j) {
      const RegularitiesSet* a = large[i];
      const RegularitiesSet* b = large[j];
      if (a->affix.kind != b->affix.kind) continue;
      if (b->affix.text < a->affix.text) std::swap(a, b);
      shared.clear();
      std::set_intersection(a->stems.begin(), a->stems.end(), b->stems.begin(), b->stems.end(),
                            std::back_inserter(shared));
      if (shared.size() <= profile.transition_min_size) continue;
      TransitionSet ts{{a->affix.kind, a->affix.text, b->affix.text}, {}};
      ts.source_words.reserve(shared.size());
      for (const auto& s : shared) ts.source_words.push_back(attach(a->affix, s));
      std::sort(ts.source_words.begin(), ts.source_words.end());
      out.push_back(std::move(ts));
    }
  }
  std::sort(out.begin(), out.end(), [](const TransitionSet& a, const TransitionSet& b) {
    return a.transition < b.transition;
  });
  return out;
}

TransitionSet downsample_transition_set(TransitionSet ts, std::size_t cap, Rng& rng) {
  if (cap == 0) throw std::invalid_argument("downsample cap must be positive");
  const std::size_t n = ts.source_words.size();
  if (n <= cap) return ts;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < cap; ++i) {
    const std::size_t j = i + rng.below(n - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  std::vector<std::string> kept;
  kept.reserve(cap);
  for (auto i : idx) kept.push_back(std::move(ts.source_words[i]));
  ts.source_words = std::move(kept);
  return ts;
}

std::vector<TransformationRule> extract_transformation_rules(const TransitionSet& ts,
                                                             const EmbeddingTable& emb,
                                                             const Vocabulary& vocab,
                                                             const ScaleProfile& profile) {
  struct Pair {
    std::string w1, w2;
    std::span<const float> v1, v2;
    std::uint64_t freq_sum;
    bool candidate;
  };
  std::vector<Pair> pairs;
  for (const auto& w : ts.source_words) {
    auto w2 = apply_transition(w, ts.transition);
    if (!w2) continue;
    auto v1 = emb.find(w);
    auto v2 = emb.find(*w2);
    if (!v1 || !v2) continue;
    const auto f1 = vocab.freq(w), f2 = vocab.freq(*w2);
    const bool candidate = f1 >= profile.rule_word_min_freq && f2 >= profile.rule_word_min_freq;
    pairs.push_back({w, std::move(*w2), *v1, *v2, f1 + f2, candidate});
  }
  const std::size_t n = pairs.size();
  if (n <= profile.min_rule_support) return {};

  // Unit direction vectors; a zero difference stays zero (cosine 0).
  const std::size_t dim = emb.dim();
  std::vector<double> dirs(n * dim);
  for (std::size_t p = 0; p < n; ++p) {
    double norm = 0;
    for (std::size_t i = 0; i < dim; ++i) {
      const double d = double(pairs[p].v2[i]) - double(pairs[p].v1[i]);
      dirs[p * dim + i] = d;
      norm += d * d;
    }
    if (norm > 0) {
      norm = std::sqrt(norm);
      for (std::size_t i = 0; i < dim; ++i) dirs[p * dim + i] /= norm;
    }
  }

  const double theta = profile.direction_threshold(ts.transition.kind);
  std::vector<std::size_t> candidates;
  std::vector<std::vector<std::uint32_t>> represents;
  for (std::size_t c = 0; c < n; ++c) {
    if (!pairs[c].candidate) continue;
    candidates.push_back(c);
    auto& rep = represents.emplace_back();
    const double* dc = dirs.data() + c * dim;
    for (std::size_t q = 0; q < n; ++q) {
      const double* dq = dirs.data() + q * dim;
      double dot = 0;
      for (std::size_t i = 0; i < dim; ++i) dot += dc[i] * dq[i];
      if (dot > theta) rep.push_back(static_cast<std::uint32_t>(q));
    }
  }

  std::vector<TransformationRule> rules;
  std::vector<char> active(n, 1);
  while (true) {
    std::size_t best = SIZE_MAX;
    std::size_t best_support = 0;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
      const std::size_t c = candidates[k];
      if (!active[c]) continue;
      std::size_t support = 0;
      for (auto q : represents[k]) support += active[q];
      bool better = false;
      if (best == SIZE_MAX || support > best_support) {
        better = true;
      } else if (support == best_support) {
        const Pair& cur = pairs[candidates[best]];
        if (pairs[c].freq_sum != cur.freq_sum) {
          better = pairs[c].freq_sum > cur.freq_sum;
        } else {
          better = pairs[c].w1 < cur.w1;
        }
      }
      if (better) {
        best = k;
        best_support = support;
      }
    }
    if (best == SIZE_MAX || best_support <= profile.min_rule_support) break;
    const Pair& p = pairs[candidates[best]];
    rules.push_back({ts.transition, p.w1, p.w2, best_support, cosine(p.v1, p.v2)});
    active[candidates[best]] = 0;
    for (auto q : represents[best]) active[q] = 0;
  }
  return rules;
}

std::vector<TransformationRule> filter_rules(std::vector<TransformationRule> rules,
                                             const EmbeddingTable& emb,
                                             const ScaleProfile& profile) {
  std::vector<TransformationRule> kept;
  for (auto& r : rules) {
    if (utf8::length(r.w1) <= profile.min_word_len) continue;
    if (utf8::length(r.w2) <= profile.min_word_len) continue;
    auto v1 = emb.find(r.w1);
    auto v2 = emb.find(r.w2);
    if (!v1 || !v2) continue;
    r.pair_cosine = cosine(*v1, *v2);
    if (r.pair_cosine < profile.rule_pair_min_cos) continue;
    kept.push_back(std::move(r));
  }
  return kept;
}

std::optional<MorphSet> build_morph_set(std::string_view head,
                                        const std::vector<TransformationRule>& rules,
                                        const EmbeddingTable& emb, const Vocabulary& vocab,
                                        const ScaleProfile& profile) {
  if (vocab.freq(head) <= profile.morph_head_min_freq) return std::nullopt;
  if (utf8::length(head) <= profile.min_word_len) return std::nullopt;
  auto hv = emb.find(head);
  if (!hv) return std::nullopt;
  std::set<std::string> variants;
  for (const auto& r : rules) {
    auto w = apply_transition(head, r.transition);
    if (!w || variants.count(*w)) continue;
    if (vocab.freq(*w) < profile.variant_min_freq) continue;
    auto wv = emb.find(*w);
    if (!wv || cosine(*hv, *wv) <= profile.variant_min_cos) continue;
    variants.insert(std::move(*w));
  }
  if (variants.empty()) return std::nullopt;
  return MorphSet{std::string(head), {variants.begin(), variants.end()}};
}

std::optional<MorphSet> validate_morph_set(const MorphSet& ms, const EmbeddingTable& emb,
                                           Rng& rng, const ScaleProfile& profile) {
  if (ms.variants.empty() || ms.variants.size() > profile.max_morph_set) return std::nullopt;
  const std::string& probe = ms.variants[rng.below(ms.variants.size())];
  auto pv = emb.find(probe);
  if (!pv) return std::nullopt;
  auto similar = [&](const std::string& other) {
    auto ov = emb.find(other);
    return ov && cosine(*pv, *ov) > profile.probe_min_cos;
  };
  if (!similar(ms.head)) return std::nullopt;
  for (const auto& v : ms.variants) {
    if (v != probe && !similar(v)) return std::nullopt;
  }
  return ms;
}

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < std::min(workers, n); ++t) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) fn(i);
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace

std::vector<TransformationRule> induce_rules(const Vocabulary& vocab, const EmbeddingTable& emb,
                                             const ScaleProfile& profile, std::uint64_t seed,
                                             std::size_t workers, InductionStats* stats) {
  profile.validate();
  const auto regsets = extract_candidate_affixes(vocab, profile);
  auto sets = build_null_transitions(regsets, vocab, profile);
  const std::size_t null_count = sets.size();
  auto cross = build_cross_transitions(regsets, profile);
  const std::size_t cross_count = cross.size();
  sets.insert(sets.end(), std::make_move_iterator(cross.begin()),
              std::make_move_iterator(cross.end()));
  std::sort(sets.begin(), sets.end(), [](const TransitionSet& a, const TransitionSet& b) {
    return a.transition < b.transition;
  });

  std::vector<std::vector<TransformationRule>> per_set(sets.size());
  parallel_for(sets.size(), workers, [&](std::size_t i) {
    Rng rng(Rng::derive(seed, i));
    auto ds = downsample_transition_set(sets[i], profile.downsample_cap, rng);
    per_set[i] = extract_transformation_rules(ds, emb, vocab, profile);
  });

  std::vector<TransformationRule> raw;
  for (auto& rs : per_set) {
    raw.insert(raw.end(), std::make_move_iterator(rs.begin()), std::make_move_iterator(rs.end()));
  }
  const std::size_t raw_count = raw.size();
  auto rules = filter_rules(std::move(raw), emb, profile);
  if (stats) {
    stats->regularities_sets = regsets.size();
    stats->null_transitions = null_count;
    stats->cross_transitions = cross_count;
    stats->raw_rules = raw_count;
    stats->rules = rules.size();
  }
  return rules;
}

std::vector<MorphSet> build_morph_sets(const Vocabulary& vocab, const EmbeddingTable& emb,
                                       const std::vector<TransformationRule>& rules,
                                       const ScaleProfile& profile, std::uint64_t seed,
                                       MorphSetStats* stats) {
  profile.validate();
  std::vector<std::string> heads;
  for (const auto& [w, n] : vocab.counts()) {
    if (n > profile.morph_head_min_freq && utf8::length(w) > profile.min_word_len) {
      heads.push_back(w);
    }
  }
  std::sort(heads.begin(), heads.end());
  MorphSetStats local;
  local.heads_considered = heads.size();
  std::vector<MorphSet> out;
  for (std::size_t i = 0; i < heads.size(); ++i) {
    auto ms = build_morph_set(heads[i], rules, emb, vocab, profile);
    if (!ms) continue;
    ++local.built;
    Rng rng(Rng::derive(seed, i));
    auto valid = validate_morph_set(*ms, emb, rng, profile);
    if (!valid) continue;
    ++local.validated;
    out.push_back(std::move(*valid));
  }
  if (stats) *stats = local;
  return out;
}

std::string rule_to_json(const TransformationRule& r) {
  json j = {{"kind", to_string(r.transition.kind)},
            {"from", r.transition.from},
            {"to", r.transition.to},
            {"w1", r.w1},
            {"w2", r.w2},
            {"support", r.support},
            {"pair_cosine", r.pair_cosine}};
  return j.dump();
}

TransformationRule rule_from_json(std::string_view line) {
  const json j = json::parse(line);
  TransformationRule r;
  r.transition.kind = parse_affix_kind(j.at("kind").get<std::string>());
  r.transition.from = j.at("from").get<std::string>();
  r.transition.to = j.at("to").get<std::string>();
  if (r.transition.from == r.transition.to) throw std::invalid_argument("from equals to");
  r.w1 = j.at("w1").get<std::string>();
  r.w2 = j.at("w2").get<std::string>();
  r.support = j.at("support").get<std::size_t>();
  r.pair_cosine = j.at("pair_cosine").get<double>();
  return r;
}

std::string morph_set_to_json(const MorphSet& ms) {
  return json{{"head", ms.head}, {"variants", ms.variants}}.dump();
}

MorphSet morph_set_from_json(std::string_view line) {
  const json j = json::parse(line);
  MorphSet ms;
  ms.head = j.at("head").get<std::string>();
  ms.variants = j.at("variants").get<std::vector<std::string>>();
  return ms;
}

namespace {

template <typename T, typename Encode>
void save_lines(const std::vector<T>& items, const std::filesystem::path& path, Encode encode) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& item : items) out << encode(item) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

template <typename T, typename Decode>
std::vector<T> load_lines(const std::filesystem::path& path, Decode decode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::vector<T> items;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      items.push_back(decode(line));
    } catch (const std::exception& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return items;
}

}  // namespace

void save_rules(const std::vector<TransformationRule>& rules, const std::filesystem::path& path) {
  save_lines(rules, path, rule_to_json);
}

std::vector<TransformationRule> load_rules(const std::filesystem::path& path) {
  return load_lines<TransformationRule>(path, rule_from_json);
}

void save_morph_sets(const std::vector<MorphSet>& sets, const std::filesystem::path& path) {
  save_lines(sets, path, morph_set_to_json);
}

std::vector<MorphSet> load_morph_sets(const std::filesystem::path& path) {
  return load_lines<MorphSet>(path, morph_set_from_json);
}

}  // namespace morphexp
