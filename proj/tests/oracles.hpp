#pragma once

// Independent reference implementations and fixture generators. These are
// deliberately naive: quadratic scans and std::set algebra instead of tries
// and indices, so that agreement with the library means something.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "morphexp/corpus.hpp"
#include "morphexp/embeddings.hpp"
#include "morphexp/morphology.hpp"
#include "morphexp/random.hpp"
#include "morphexp/utf8.hpp"
#include "test_util.hpp"

namespace morphexp::oracle {

// ---------------------------------------------------------------- affixes

using AffixMap = std::map<std::pair<AffixKind, std::string>, std::set<std::string>>;

// For every code-point prefix and suffix (length 1..max_len, shorter than
// the word) of every word, scan the whole vocabulary for words carrying it
// with a non-empty remainder. Keep candidates with more than min_stems.
inline AffixMap brute_force_affixes(const Vocabulary& vocab, std::size_t max_len,
                                    std::size_t min_stems) {
  std::vector<std::string> words;
  for (const auto& [w, n] : vocab.counts()) words.push_back(w);
  std::set<std::pair<AffixKind, std::string>> candidates;
  for (const auto& w : words) {
    const std::u32string cps = utf8::decode(w);
    for (std::size_t len = 1; len <= max_len && len < cps.size(); ++len) {
      candidates.insert({AffixKind::prefix, utf8::encode(cps.substr(0, len))});
      candidates.insert({AffixKind::suffix, utf8::encode(cps.substr(cps.size() - len))});
    }
  }
  AffixMap out;
  for (const auto& [kind, a] : candidates) {
    std::set<std::string> stems;
    for (const auto& w : words) {
      if (w.size() <= a.size()) continue;
      if (kind == AffixKind::prefix && w.compare(0, a.size(), a) == 0) {
        stems.insert(w.substr(a.size()));
      } else if (kind == AffixKind::suffix && w.compare(w.size() - a.size(), a.size(), a) == 0) {
        stems.insert(w.substr(0, w.size() - a.size()));
      }
    }
    if (stems.size() > min_stems) out[{kind, a}] = std::move(stems);
  }
  return out;
}

inline AffixMap as_affix_map(const std::vector<RegularitiesSet>& sets) {
  AffixMap out;
  for (const auto& rs : sets) {
    out[{rs.affix.kind, rs.affix.text}] = std::set<std::string>(rs.stems.begin(), rs.stems.end());
  }
  return out;
}

// Vocabulary with planted affixes over a small alphabet (plus a few
// multi-byte letters) so that many candidates sit near the >10 bar.
inline Vocabulary random_affix_vocab(Rng& rng, std::size_t max_words) {
  static const std::vector<std::string> letters = {"a", "b", "c", "d", "e", "o", "r", "s", "é", "ß"};
  static const std::vector<std::string> prefixes = {"un", "re", "a", "pré", "over"};
  static const std::vector<std::string> suffixes = {"ed", "ing", "s", "e", "ßen", "ly"};
  Vocabulary v;
  const std::size_t target = 50 + rng.below(max_words - 49);
  std::size_t guard = 0;
  while (v.size() < target && guard++ < target * 20) {
    std::string w;
    const auto len = 1 + rng.below(6);
    for (std::uint64_t i = 0; i < len; ++i) w += letters[rng.below(letters.size())];
    if (rng.bernoulli(0.3)) w = prefixes[rng.below(prefixes.size())] + w;
    if (rng.bernoulli(0.4)) w += suffixes[rng.below(suffixes.size())];
    v.add(w, 1 + rng.below(100));
  }
  return v;
}

// ------------------------------------------------------------ transitions

using TransitionMap = std::map<Transition, std::set<std::string>>;

inline TransitionMap as_transition_map(const std::vector<TransitionSet>& sets) {
  TransitionMap out;
  for (const auto& ts : sets) {
    out[ts.transition] = std::set<std::string>(ts.source_words.begin(), ts.source_words.end());
  }
  return out;
}

inline TransitionMap null_oracle(const std::vector<RegularitiesSet>& regsets, const Vocabulary& vocab,
                                 std::size_t min_size) {
  std::set<std::string> words;
  for (const auto& [w, n] : vocab.counts()) words.insert(w);
  TransitionMap out;
  for (const auto& rs : regsets) {
    const std::set<std::string> stems(rs.stems.begin(), rs.stems.end());
    std::set<std::string> both;
    std::set_intersection(stems.begin(), stems.end(), words.begin(), words.end(),
                          std::inserter(both, both.end()));
    if (both.size() > min_size) out[Transition{rs.affix.kind, "", rs.affix.text}] = both;
  }
  return out;
}

inline TransitionMap cross_oracle(const std::vector<RegularitiesSet>& regsets, std::size_t min_set,
                                  std::size_t min_size) {
  TransitionMap out;
  for (const auto& a : regsets) {
    for (const auto& b : regsets) {
      if (a.affix.kind != b.affix.kind || !(a.affix.text < b.affix.text)) continue;
      if (a.stems.size() < min_set || b.stems.size() < min_set) continue;
      const std::set<std::string> sa(a.stems.begin(), a.stems.end());
      const std::set<std::string> sb(b.stems.begin(), b.stems.end());
      std::set<std::string> shared;
      std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                            std::inserter(shared, shared.end()));
      if (shared.size() <= min_size) continue;
      std::set<std::string> sources;
      for (const auto& s : shared) {
        sources.insert(a.affix.kind == AffixKind::prefix ? a.affix.text + s : s + a.affix.text);
      }
      out[Transition{a.affix.kind, a.affix.text, b.affix.text}] = sources;
    }
  }
  return out;
}

// Random regularities sets over a shared stem pool, plus a vocabulary
// holding a random subset of the stems.
struct RegsetFixture {
  std::vector<RegularitiesSet> regsets;
  Vocabulary vocab;
};

inline RegsetFixture random_regsets(Rng& rng) {
  RegsetFixture f;
  const std::size_t pool_size = 40 + rng.below(60);
  std::vector<std::string> pool;
  for (std::size_t i = 0; i < pool_size; ++i) pool.push_back("st" + std::to_string(i));
  for (const auto& s : pool) {
    if (rng.bernoulli(0.5)) f.vocab.add(s, 1 + rng.below(9));
  }
  f.vocab.add("unrelated", 3);
  static const std::vector<std::string> texts = {"ed", "ing", "s", "er", "un", "re", "ly", "able"};
  for (auto kind : {AffixKind::prefix, AffixKind::suffix}) {
    for (const auto& t : texts) {
      if (!rng.bernoulli(0.7)) continue;
      RegularitiesSet rs{{kind, t}, {}};
      const double keep = rng.uniform(0.05, 0.9);
      for (const auto& s : pool) {
        if (rng.bernoulli(keep)) rs.stems.push_back(s);
      }
      std::sort(rs.stems.begin(), rs.stems.end());
      f.regsets.push_back(std::move(rs));
    }
  }
  std::sort(f.regsets.begin(), f.regsets.end(),
            [](const RegularitiesSet& a, const RegularitiesSet& b) { return a.affix < b.affix; });
  return f;
}

// ------------------------------------------------------------------ rules

// Naive greedy: recompute every candidate's support from the full cosine
// matrix on every round.
inline std::vector<TransformationRule> greedy_rules(const TransitionSet& ts, const EmbeddingTable& emb,
                                                    const Vocabulary& vocab, const ScaleProfile& profile) {
  struct P {
    std::string w1, w2;
    std::vector<double> d;
    std::uint64_t fsum;
    bool cand;
  };
  std::vector<P> ps;
  for (const auto& w : ts.source_words) {
    const auto w2 = apply_transition(w, ts.transition);
    if (!w2 || !emb.contains(w) || !emb.contains(*w2)) continue;
    const auto a = *emb.find(w), b = *emb.find(*w2);
    P p{w, *w2, {}, vocab.freq(w) + vocab.freq(*w2),
        vocab.freq(w) >= profile.rule_word_min_freq && vocab.freq(*w2) >= profile.rule_word_min_freq};
    for (std::size_t i = 0; i < a.size(); ++i) p.d.push_back(double(b[i]) - double(a[i]));
    ps.push_back(std::move(p));
  }
  const double theta = profile.direction_threshold(ts.transition.kind);
  auto cos = [](const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0, nx = 0, ny = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      d += x[i] * y[i];
      nx += x[i] * x[i];
      ny += y[i] * y[i];
    }
    return nx == 0 || ny == 0 ? 0.0 : d / std::sqrt(nx * ny);
  };
  std::vector<bool> alive(ps.size(), true);
  std::vector<TransformationRule> out;
  if (ps.size() <= profile.min_rule_support) return out;
  while (true) {
    long best = -1;
    std::size_t best_support = 0;
    for (std::size_t c = 0; c < ps.size(); ++c) {
      if (!alive[c] || !ps[c].cand) continue;
      std::size_t support = 0;
      for (std::size_t q = 0; q < ps.size(); ++q) {
        if (alive[q] && cos(ps[c].d, ps[q].d) > theta) ++support;
      }
      const auto better = [&] {
        if (best < 0 || support > best_support) return true;
        if (support < best_support) return false;
        if (ps[c].fsum != ps[best].fsum) return ps[c].fsum > ps[best].fsum;
        return ps[c].w1 < ps[best].w1;
      }();
      if (better) {
        best = static_cast<long>(c);
        best_support = support;
      }
    }
    if (best < 0 || best_support <= profile.min_rule_support) break;
    const auto b = static_cast<std::size_t>(best);
    out.push_back({ts.transition, ps[b].w1, ps[b].w2, best_support, cosine(*emb.find(ps[b].w1), *emb.find(ps[b].w2))});
    const auto dir = ps[b].d;
    for (std::size_t q = 0; q < ps.size(); ++q) {
      if (q == b || cos(dir, ps[q].d) > theta) alive[q] = false;
    }
  }
  return out;
}

struct PlantedRuleFixture {
  TransitionSet ts;
  EmbeddingTable emb{50};
  Vocabulary vocab;
  std::vector<std::string> planted;      // w1 of the 15 aligned pairs
  std::vector<std::string> distractors;  // w1 of the 5 orthogonal pairs
  double min_planted_cos = 1;            // over all pairs of planted directions
  double max_cross_cos = -1;             // any pair involving a distractor
};

// 15 pairs whose differences share one direction (plus Gaussian noise) and
// 5 pairs whose differences are mutually orthogonal and orthogonal to it.
inline PlantedRuleFixture planted_rule_fixture(std::uint64_t seed, double sigma = 0.02) {
  PlantedRuleFixture f;
  Rng rng(seed);
  const std::size_t dim = f.emb.dim();
  auto gaussian = [&] {
    std::vector<double> v(dim);
    for (auto& x : v) x = rng.normal();
    return v;
  };
  auto normalize = [](std::vector<double>& v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
  };
  std::vector<std::vector<double>> basis;
  for (int i = 0; i < 6; ++i) {
    auto v = gaussian();
    for (const auto& b : basis) {
      double d = 0;
      for (std::size_t k = 0; k < dim; ++k) d += v[k] * b[k];
      for (std::size_t k = 0; k < dim; ++k) v[k] -= d * b[k];
    }
    normalize(v);
    basis.push_back(v);
  }
  f.ts.transition = Transition{AffixKind::suffix, "", "ed"};
  std::vector<std::vector<double>> dirs;
  auto add_pair = [&](const std::string& stem, std::vector<double> dir) {
    auto base = gaussian();
    std::vector<float> v1(dim), v2(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      v1[k] = static_cast<float>(base[k]);
      v2[k] = static_cast<float>(base[k] + dir[k]);
    }
    f.emb.add(stem, v1);
    f.emb.add(stem + "ed", v2);
    f.vocab.add(stem, 100 + rng.below(50));
    f.vocab.add(stem + "ed", 100 + rng.below(50));
    f.ts.source_words.push_back(stem);
    std::vector<double> actual(dim);
    for (std::size_t k = 0; k < dim; ++k) actual[k] = double(v2[k]) - double(v1[k]);
    dirs.push_back(actual);
  };
  for (int i = 0; i < 15; ++i) {
    auto d = basis[0];
    for (auto& x : d) x += sigma * rng.normal();
    const std::string stem = "plant" + std::string(1, char('a' + i));
    add_pair(stem, d);
    f.planted.push_back(stem);
  }
  for (int i = 0; i < 5; ++i) {
    const std::string stem = "decoy" + std::string(1, char('a' + i));
    add_pair(stem, basis[1 + i]);
    f.distractors.push_back(stem);
  }
  std::sort(f.ts.source_words.begin(), f.ts.source_words.end());
  auto cos = [&](const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0, nx = 0, ny = 0;
    for (std::size_t k = 0; k < dim; ++k) {
      d += x[k] * y[k];
      nx += x[k] * x[k];
      ny += y[k] * y[k];
    }
    return d / std::sqrt(nx * ny);
  };
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    for (std::size_t j = i + 1; j < dirs.size(); ++j) {
      const double c = cos(dirs[i], dirs[j]);
      if (i < 15 && j < 15) {
        f.min_planted_cos = std::min(f.min_planted_cos, c);
      } else {
        f.max_cross_cos = std::max(f.max_cross_cos, c);
      }
    }
  }
  return f;
}

// ------------------------------------------------------------------- ranks

// O(n^2) rank: 1 + (#strictly smaller) + (#equal others) / 2.
inline std::vector<double> quadratic_ranks(const std::vector<double>& xs) {
  std::vector<double> r(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (xs[j] < xs[i]) ++less;
      else if (xs[j] == xs[i] && j != i) ++equal;
    }
    r[i] = 1 + less + equal / 2;
  }
  return r;
}

inline double pearson_x100(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return 100 * sab / std::sqrt(saa * sbb);
}

// ------------------------------------------------------------ expansion

// Sentences over a fixed lexicon where a known subset of tokens head morph
// sets of 1-3 variants. Each sentence ends in a unique id token that heads
// nothing, so generated siblings can be traced back to their source.
struct ExpansionFixture {
  std::vector<Sentence> sentences;
  std::vector<MorphSet> sets;
};

inline ExpansionFixture expansion_fixture(std::size_t n_sentences, std::uint64_t seed) {
  ExpansionFixture f;
  Rng rng(seed);
  std::vector<std::string> lexicon;
  for (int i = 0; i < 60; ++i) lexicon.push_back("w" + testing::alpha_id(i));
  for (int i = 0; i < 20; ++i) {
    MorphSet ms{lexicon[i], {}};
    const auto nv = 1 + rng.below(3);
    for (std::uint64_t v = 0; v < nv; ++v) ms.variants.push_back(lexicon[i] + "v" + testing::alpha_id(v));
    f.sets.push_back(ms);
  }
  for (std::size_t s = 0; s < n_sentences; ++s) {
    Sentence sent;
    const auto len = 1 + rng.below(15);
    for (std::uint64_t t = 0; t < len; ++t) sent.push_back(lexicon[rng.below(lexicon.size())]);
    sent.push_back("id" + testing::alpha_id(s));
    f.sentences.push_back(sent);
  }
  return f;
}

}  // namespace morphexp::oracle
