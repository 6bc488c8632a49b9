// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails or runs past its time budget.
//
//   morphexp_acceptance            run all ten
//   morphexp_acceptance 3 7        run a subset
//
// MORPHEXP_CORPUS overrides the path of the end-to-end corpus.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "morphexp/eval.hpp"
#include "morphexp/expansion.hpp"
#include "morphexp/morphology.hpp"
#include "morphexp/pipeline.hpp"
#include "morphexp/rareword.hpp"
#include "morphexp/sgns.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace fs = std::filesystem;
using namespace morphexp;
using morphexp::testing::read_file;
using morphexp::testing::TempDir;
using morphexp::testing::write_file;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ------------------------------------------------------------------ 1

Outcome affix_oracle() {
  Rng rng(0xa11ce);
  std::size_t sets = 0, words = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto vocab = oracle::random_affix_vocab(rng, 2000);
    words += vocab.size();
    const auto got = oracle::as_affix_map(extract_candidate_affixes(vocab));
    const auto want = oracle::brute_force_affixes(vocab, 6, 10);
    if (got != want) {
      return {false, fmt("vocabulary %d (%zu words): %zu sets vs oracle %zu", trial, vocab.size(),
                         got.size(), want.size())};
    }
    sets += got.size();
  }
  return {true, fmt("20 vocabularies, %zu words, %zu regularities sets identical", words, sets)};
}

// ------------------------------------------------------------------ 2

Outcome transition_oracle() {
  Rng rng(0x7a5e);
  std::size_t nulls = 0, crosses = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto f = oracle::random_regsets(rng);
    ScaleProfile p = ScaleProfile::desk();
    p.cross_set_min_size = 10 + rng.below(40);
    const auto n = oracle::as_transition_map(build_null_transitions(f.regsets, f.vocab, p));
    const auto c = oracle::as_transition_map(build_cross_transitions(f.regsets, p));
    if (n != oracle::null_oracle(f.regsets, f.vocab, p.transition_min_size)) {
      return {false, fmt("fixture %d: null transitions differ", trial)};
    }
    if (c != oracle::cross_oracle(f.regsets, p.cross_set_min_size, p.transition_min_size)) {
      return {false, fmt("fixture %d: cross transitions differ", trial)};
    }
    nulls += n.size();
    crosses += c.size();
  }
  if (nulls == 0 || crosses == 0) return {false, "fixtures produced no transitions to compare"};
  return {true, fmt("20 fixtures, %zu null and %zu cross sets identical", nulls, crosses)};
}

// ------------------------------------------------------------------ 3

Outcome planted_rule() {
  const auto f = oracle::planted_rule_fixture(3);
  const auto profile = ScaleProfile::desk();
  const double theta = profile.suffix_dir_threshold;
  if (!(f.min_planted_cos > theta) || !(f.max_cross_cos <= theta)) {
    return {false, fmt("fixture invalid: min planted cos %.3f, max cross cos %.3f", f.min_planted_cos,
                       f.max_cross_cos)};
  }
  const auto rules = extract_transformation_rules(f.ts, f.emb, f.vocab, profile);
  if (rules.size() != 1) return {false, fmt("%zu rules, expected 1", rules.size())};
  if (rules[0].support != 15) return {false, fmt("support %zu, expected 15", rules[0].support)};
  if (std::find(f.planted.begin(), f.planted.end(), rules[0].w1) == f.planted.end()) {
    return {false, "representative is not one of the planted pairs"};
  }
  if (rules != oracle::greedy_rules(f.ts, f.emb, f.vocab, profile)) {
    return {false, "disagrees with the all-pairs greedy oracle"};
  }
  return {true, fmt("one rule <%s,%s> support 15 (planted cos >= %.3f, distractor cos <= %.3f)",
                    rules[0].w1.c_str(), rules[0].w2.c_str(), f.min_planted_cos, f.max_cross_cos)};
}

// ------------------------------------------------------------------ 4

Outcome gradient_check() {
  constexpr double kStep = 1e-5;
  constexpr double kTolerance = 1e-4;
  Rng rng(0x9e3779b9);
  double worst = 0;
  std::size_t components = 0;
  const int draws = 200;
  for (int draw = 0; draw < draws; ++draw) {
    const std::size_t dim = 2 + rng.below(30), k = 1 + rng.below(10);
    std::vector<double> c(dim), o(dim), n(dim * k);
    for (auto* v : {&c, &o, &n}) {
      for (auto& x : *v) x = rng.normal() * 0.5;
    }
    std::vector<double> gc(dim), go(dim), gn(dim * k);
    sgns::pair_gradient<double>(c, o, n, gc, go, gn);
    auto check = [&](std::vector<double>& p, const std::vector<double>& g) {
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + kStep;
        const double up = sgns::pair_loss<double>(c, o, n);
        p[i] = keep - kStep;
        const double down = sgns::pair_loss<double>(c, o, n);
        p[i] = keep;
        const double fd = (up - down) / (2 * kStep);
        const double denom = std::max(std::abs(fd) + std::abs(g[i]), 1e-6);
        worst = std::max(worst, std::abs(fd - g[i]) / denom);
        ++components;
      }
    };
    check(c, gc);
    check(o, go);
    check(n, gn);
  }
  return {worst < kTolerance, fmt("%d draws, %zu components, worst relative error %.2e", draws, components, worst)};
}

// ------------------------------------------------------------------ 5

Outcome sgns_clusters() {
  const int runs = 100;
  const std::size_t sentences = 50000;
  int good = 0;
  double margin_sum = 0;
  auto cfg_base = PipelineConfig::for_profile(ProfileName::desk);
  for (int run = 0; run < runs; ++run) {
    Rng rng(Rng::derive(0xc1u, run));
    std::vector<Sentence> corpus;
    corpus.reserve(sentences);
    for (std::size_t s = 0; s < sentences; ++s) {
      const char cluster = rng.bernoulli(0.5) ? 'x' : 'y';
      Sentence sent;
      for (int t = 0; t < 2; ++t) sent.push_back(std::string(1, cluster) + std::to_string(1 + rng.below(5)));
      corpus.push_back(std::move(sent));
    }
    TrainConfig cfg = cfg_base.train;
    cfg.seed = run + 1;
    const auto emb = train_sgns(MemorySentences(std::move(corpus)), cfg);
    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < emb.size(); ++i) {
      for (std::size_t j = i + 1; j < emb.size(); ++j) {
        const double c = cosine(emb.row(i), emb.row(j));
        if (emb.word(i)[0] == emb.word(j)[0]) {
          intra += c;
          ++n_intra;
        } else {
          inter += c;
          ++n_inter;
        }
      }
    }
    if (emb.size() != 10 || n_intra == 0 || n_inter == 0) return {false, "unexpected vocabulary"};
    const double margin = intra / n_intra - inter / n_inter;
    margin_sum += margin;
    if (margin > 0) ++good;
  }
  return {good >= 95, fmt("%d/%d runs with intra > inter (mean margin %.3f)", good, runs, margin_sum / runs)};
}

// ------------------------------------------------------------------ 6

Outcome spearman_reference() {
  if (spearman_rho(std::vector<double>{1, 2, 3}, std::vector<double>{10, 20, 30}) != 100.0) {
    return {false, "monotone endpoint is not exactly +100"};
  }
  if (spearman_rho(std::vector<double>{1, 2, 3}, std::vector<double>{3, 2, 1}) != -100.0) {
    return {false, "reversed endpoint is not exactly -100"};
  }
  std::ifstream in(MORPHEXP_TEST_DATA "/spearman_reference.txt");
  if (!in) return {false, "reference file missing"};
  std::string line;
  int count = 0, tied = 0;
  double worst = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::size_t n = 0;
    ls >> n;
    std::vector<double> xs(n), ys(n);
    for (auto& x : xs) ls >> x;
    for (auto& y : ys) ls >> y;
    double want = 0;
    ls >> want;
    if (!ls) return {false, fmt("malformed reference line %d", count + 1)};
    worst = std::max(worst, std::abs(spearman_rho(xs, ys) - want));
    if (std::set<double>(xs.begin(), xs.end()).size() < n || std::set<double>(ys.begin(), ys.end()).size() < n) ++tied;
    ++count;
  }
  if (count != 1000) return {false, fmt("%d reference instances, expected 1000", count)};
  return {worst < 1e-9, fmt("1000 instances (%d with ties), max |diff| %.2e; endpoints exact", tied, worst)};
}

// ------------------------------------------------------------------ 7

Outcome expansion_contract() {
  TempDir dir("morphexp-acc7");
  const auto f = oracle::expansion_fixture(10000, 0xe4);
  std::string text;
  for (const auto& s : f.sentences) text += join(s) + "\n";
  write_file(dir / "in.txt", text);
  const auto index = index_morph_sets(f.sets);
  std::map<std::string, std::set<std::string>> allowed;
  for (const auto& ms : f.sets) allowed[ms.head].insert(ms.variants.begin(), ms.variants.end());

  std::uint64_t positions = 0, replacements = 0, generated_total = 0;
  for (std::size_t k : {1, 2, 3}) {
    ExpansionConfig cfg;
    cfg.k = k;
    cfg.seed = 100 + k;
    const auto stats = expand_corpus(dir / "in.txt", index, cfg, dir / "out.txt");
    positions += stats.tally.replaceable_positions;
    replacements += stats.tally.replacements;

    // Independent re-read: group output lines by their trailing id token.
    std::map<std::string, std::size_t> source_of;
    for (std::size_t i = 0; i < f.sentences.size(); ++i) source_of[f.sentences[i].back()] = i;
    std::ifstream out(dir / "out.txt");
    std::string line;
    std::size_t lines = 0, generated = 0;
    std::vector<bool> seen_source(f.sentences.size(), false);
    while (std::getline(out, line)) {
      ++lines;
      const Sentence g = normalize_line(line);
      if (g.empty()) return {false, "empty output line"};
      const auto it = source_of.find(g.back());
      if (it == source_of.end()) return {false, "output line with unknown id: " + line};
      const Sentence& src = f.sentences[it->second];
      if (!seen_source[it->second]) {
        if (g != src) return {false, "source line altered or out of order: " + line};
        seen_source[it->second] = true;
        continue;
      }
      ++generated;
      if (g == src) return {false, "generated sentence equals its source"};
      if (g.size() != src.size()) return {false, "token count changed"};
      for (std::size_t t = 0; t < g.size(); ++t) {
        if (g[t] == src[t]) continue;
        const auto a = allowed.find(src[t]);
        if (a == allowed.end() || !a->second.count(g[t])) {
          return {false, "altered a non-head position or used a foreign variant: " + line};
        }
      }
    }
    if (lines > (k + 1) * f.sentences.size()) return {false, fmt("k=%zu: %zu lines exceeds bound", k, lines)};
    if (generated != stats.sentences_generated) return {false, "generated count disagrees with stats"};
    generated_total += generated;
  }
  const double rate = double(replacements) / double(positions);
  const double sigma = std::sqrt(0.25 / double(positions));
  const bool ok = positions >= 10000 && std::abs(rate - 0.5) <= 3 * sigma;
  return {ok, fmt("k=1..3: %llu generated sentences verified; rate %.4f over %llu positions (3 sigma = %.4f)",
                  (unsigned long long)generated_total, rate, (unsigned long long)positions, 3 * sigma)};
}

// ------------------------------------------------------------------ 8

Outcome algorithm_fixtures() {
  auto rule = [](std::string from, std::string to, std::string w1, std::string w2) {
    return TransformationRule{Transition{AffixKind::suffix, std::move(from), std::move(to)}, std::move(w1),
                              std::move(w2), 20, 0.5};
  };
  const RareConfig cfg;
  std::vector<std::string> failures;
  auto expect = [&](bool cond, const std::string& what) {
    if (!cond) failures.push_back(what);
  };

  const std::vector<TransformationRule> strip_ed = {rule("ed", "", "walked", "walk")};
  auto b1 = find_reliable_base("zorped", strip_ed, morphexp::testing::vocab_of({{"zorp", 60}}), cfg);
  expect(b1 && b1->word == "zorp" && b1->level == 1 && b1->path.size() == 1, "level-1 accept");

  const std::vector<TransformationRule> two = {rule("ed", "", "walked", "walk"), rule("", "s", "walk", "walks")};
  auto b2 = find_reliable_base("zorped", two, morphexp::testing::vocab_of({{"zorp", 40}, {"zorps", 110}}), cfg);
  expect(b2 && b2->word == "zorps" && b2->level == 2 && b2->path.size() == 2, "level-2 accept");

  const std::vector<TransformationRule> strip_ly = {rule("ly", "", "quickly", "quick")};
  auto b3 = find_reliable_base("zorped", strip_ly,
                               morphexp::testing::vocab_of({{"zorp", 1000}}), cfg);
  expect(!b3, "exhaustion gives none");

  const auto emb = morphexp::testing::table_of(3, {{"frequent", {1, 2, 3}},
                                                   {"zorp", {1, 0, 0}},
                                                   {"walked", {0, 1, 1}},
                                                   {"walk", {0, 1, 0}},
                                                   {"scarce", {0.5f, 0.5f, 0.5f}},
                                                   {"Glorb", {0, 0, 2}},
                                                   {"blether", {3, 1, 0}}});
  const auto vocab = morphexp::testing::vocab_of(
      {{"frequent", 500}, {"zorp", 60}, {"walked", 90}, {"walk", 90}, {"scarce", 3}, {"Glorb", 80}, {"blether", 70}});
  struct Case {
    const char* word;
    SynthesisMethod method;
    std::vector<float> vector;
  };
  const std::vector<Case> cases = {
      {"frequent", SynthesisMethod::stored, {1, 2, 3}},
      {"zorped", SynthesisMethod::rule_path, {1, 0, 1}},  // zorp + (walked - walk)
      {"scarce", SynthesisMethod::self_embedding, {0.5f, 0.5f, 0.5f}},
      {"glorbed", SynthesisMethod::case_variant_path, {0, 0, 3}},
      {"unblethering", SynthesisMethod::substring, {3, 1, 0}},
      {"qqqq", SynthesisMethod::zero, {0, 0, 0}},
  };
  std::set<SynthesisMethod> covered;
  for (const auto& c : cases) {
    const auto r = synthesize(c.word, emb, strip_ed, vocab, cfg);
    expect(r.method == c.method && r.vector == c.vector,
           std::string(c.word) + " -> " + std::string(to_string(r.method)));
    covered.insert(r.method);
  }
  expect(covered.size() == 6, "all six branches reached");
  if (!failures.empty()) {
    std::string all;
    for (const auto& f : failures) all += (all.empty() ? "" : "; ") + f;
    return {false, all};
  }
  return {true, "3 base-word cases exact; stored, rule_path, self_embedding, case_variant_path, substring, zero"};
}

// ---------------------------------------------------------------- 9/10

fs::path corpus_path() {
  if (const char* env = std::getenv("MORPHEXP_CORPUS")) return env;
  return MORPHEXP_CORPUS;
}

std::map<std::string, std::string> digest_tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = sha256_file(e.path());
  }
  return out;
}

StageContext desk_context(std::uint64_t seed) {
  StageContext ctx;
  ctx.config = PipelineConfig::for_profile(ProfileName::desk);
  ctx.config.set("seed", std::to_string(seed));
  ctx.config.set("workers", "1");
  return ctx;
}

Outcome determinism() {
  const auto full = corpus_path();
  if (!fs::exists(full)) return {false, "corpus not found: " + full.string()};
  TempDir dir("morphexp-acc9");
  // Desk fixture: the first 30k lines of the corpus.
  {
    std::ifstream in(full);
    std::ofstream out(dir / "desk.txt");
    std::string line;
    for (int i = 0; i < 30000 && std::getline(in, line); ++i) out << line << '\n';
  }
  const fs::path dataset = MORPHEXP_TEST_DATA "/sim50.tsv";
  const auto ctx = desk_context(7);
  const auto a = run_pipeline(ctx, dir / "desk.txt", {dataset}, dir / "run_a");
  const auto b = run_pipeline(ctx, dir / "desk.txt", {dataset}, dir / "run_b");
  const auto da = digest_tree(dir / "run_a");
  const auto db = digest_tree(dir / "run_b");
  if (da.size() < 10) return {false, fmt("only %zu artifacts written", da.size())};
  for (const auto& [name, digest] : da) {
    const auto it = db.find(name);
    if (it == db.end()) return {false, "artifact missing from second run: " + name};
    if (it->second != digest) return {false, "artifact differs between runs: " + name};
  }
  if (da.size() != db.size()) return {false, "second run wrote extra artifacts"};
  return {true, fmt("%zu artifacts byte-identical (%zu rules, %zu morph sets)", da.size(), a.rules, a.morph_sets)};
}

Outcome end_to_end() {
  const auto corpus = corpus_path();
  if (!fs::exists(corpus)) return {false, "corpus not found: " + corpus.string()};
  TempDir dir("morphexp-acc10");
  const fs::path dataset = MORPHEXP_TEST_DATA "/sim50.tsv";
  auto ctx = desk_context(1);
  ctx.log = [](const std::string& msg) { std::cerr << "  [10] " << msg << '\n'; };
  const auto r = run_pipeline(ctx, corpus, {dataset}, dir.path());
  const auto in_size = fs::file_size(corpus);
  const auto out_size = fs::file_size(dir / "expanded.txt");
  std::vector<std::string> problems;
  if (r.rules < 1) problems.push_back("no transformation rules");
  if (r.morph_sets < 1) problems.push_back("no validated morph sets");
  if (!(out_size > in_size) || r.expansion.sentences_generated == 0) problems.push_back("expanded corpus not larger");
  if (r.rows.size() != 1) problems.push_back("missing comparison row");
  for (const auto& row : r.rows) {
    for (double v : {row.sg, row.sg_morph, row.sg_exp, row.sg_exp_morph}) {
      if (!std::isfinite(v)) problems.push_back("non-finite score");
    }
  }
  std::string scores;
  if (!r.rows.empty()) {
    const auto& row = r.rows[0];
    scores = fmt("SG %.2f (oov %zu), SG+Morph %.2f, SG+Exp %.2f (oov %zu), SG+Exp+Morph %.2f", row.sg, row.sg_oov,
                 row.sg_morph, row.sg_exp, row.sg_exp_oov, row.sg_exp_morph);
  }
  const std::string detail = fmt("%zu rules, %zu morph sets, %llu -> %llu bytes; ", r.rules, r.morph_sets,
                                 (unsigned long long)in_size, (unsigned long long)out_size) + scores;
  if (!problems.empty()) return {false, problems.front() + "; " + detail};
  return {true, detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {1, "affix extraction = brute-force oracle", 5, affix_oracle},
      {2, "transitions = set-intersection oracles", 1, transition_oracle},
      {3, "planted rule recovered", 1, planted_rule},
      {4, "SGNS gradient = finite differences", 10, gradient_check},
      {5, "SGNS two-cluster sanity", 60, sgns_clusters},
      {6, "Spearman = reference implementation", 5, spearman_reference},
      {7, "expansion contract", 10, expansion_contract},
      {8, "base-word search and fallback chain", 1, algorithm_fixtures},
      {9, "pipeline determinism", 120, determinism},
      {10, "end-to-end desk run", 900, end_to_end},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << "  " << c.name << "  ["
              << fmt("%.2fs / %.0fs", secs, c.budget_s) << (in_time ? "" : ", over budget") << "]  " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
