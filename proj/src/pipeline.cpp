#include "morphexp/pipeline.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "morphexp/error.hpp"

namespace morphexp {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string_view to_string(ProfileName p) {
  switch (p) {
    case ProfileName::small: return "small";
    case ProfileName::large: return "large";
    case ProfileName::desk: return "desk";
  }
  return "desk";
}

ProfileName parse_profile(std::string_view s) {
  if (s == "small") return ProfileName::small;
  if (s == "large") return ProfileName::large;
  if (s == "desk") return ProfileName::desk;
  throw std::invalid_argument("unknown profile '" + std::string(s) + "' (small, large, desk)");
}

PipelineConfig PipelineConfig::for_profile(ProfileName p) {
  PipelineConfig c;
  c.profile = p;
  switch (p) {
    case ProfileName::small:
      c.scale = ScaleProfile::small();
      c.train.dim = 500;
      c.train.min_count = 5;
      break;
    case ProfileName::large:
      c.scale = ScaleProfile::large();
      c.train.dim = 500;
      c.train.min_count = 5;
      break;
    case ProfileName::desk:
      c.scale = ScaleProfile::desk();
      c.train.dim = 50;
      c.train.min_count = 2;
      c.rare.rare_threshold = 5;
      c.rare.reliability_step = 5;
      c.rare.substring_min_freq = 5;
      break;
  }
  c.propagate();
  return c;
}

void PipelineConfig::propagate() {
  train.seed = seed;
  train.workers = workers;
  expansion.seed = seed;
  expansion.workers = workers;
}

void PipelineConfig::validate() const {
  if (workers == 0) throw std::invalid_argument("workers must be positive");
  train.validate();
  scale.validate();
  rare.validate();
  expansion.validate();
}

namespace {

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_value(std::string_view key, std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad value '" + std::string(s) + "' for " + std::string(key));
  }
  return v;
}

struct Field {
  const char* key;
  std::function<std::string()> get;
  std::function<void(std::string_view)> set;
};

template <typename T>
Field field(const char* key, T& ref) {
  Field f{key, {}, {}};
  if constexpr (std::is_floating_point_v<T>) {
    f.get = [&ref] { return format_double(ref); };
  } else {
    f.get = [&ref] { return std::to_string(ref); };
  }
  f.set = [&ref, key](std::string_view s) { ref = parse_value<T>(key, s); };
  return f;
}

std::vector<Field> fields(PipelineConfig& c) {
  return {
      field("seed", c.seed),
      field("workers", c.workers),
      field("dim", c.train.dim),
      field("min_count", c.train.min_count),
      field("negative_samples", c.train.negative_samples),
      field("window", c.train.window),
      field("epochs", c.train.epochs),
      field("learning_rate", c.train.learning_rate),
      field("cross_set_min_size", c.scale.cross_set_min_size),
      field("rule_word_min_freq", c.scale.rule_word_min_freq),
      field("morph_head_min_freq", c.scale.morph_head_min_freq),
      field("variant_min_freq", c.scale.variant_min_freq),
      field("prefix_dir_threshold", c.scale.prefix_dir_threshold),
      field("suffix_dir_threshold", c.scale.suffix_dir_threshold),
      field("rule_pair_min_cos", c.scale.rule_pair_min_cos),
      field("variant_min_cos", c.scale.variant_min_cos),
      field("probe_min_cos", c.scale.probe_min_cos),
      field("affix_min_stems", c.scale.affix_min_stems),
      field("transition_min_size", c.scale.transition_min_size),
      field("downsample_cap", c.scale.downsample_cap),
      field("min_rule_support", c.scale.min_rule_support),
      field("min_word_len", c.scale.min_word_len),
      field("max_morph_set", c.scale.max_morph_set),
      field("max_affix_len", c.scale.max_affix_len),
      field("rare_threshold", c.rare.rare_threshold),
      field("reliability_step", c.rare.reliability_step),
      field("max_levels", c.rare.max_levels),
      field("substring_min_freq", c.rare.substring_min_freq),
      field("substring_min_len", c.rare.substring_min_len),
      field("max_word_len", c.rare.max_word_len),
      field("k", c.expansion.k),
      field("replace_probability", c.expansion.replace_probability),
      field("chunk_size", c.expansion.chunk_size),
  };
}

}  // namespace

std::vector<std::string> PipelineConfig::keys() {
  PipelineConfig c;
  std::vector<std::string> out{"profile"};
  for (const auto& f : fields(c)) out.emplace_back(f.key);
  return out;
}

std::vector<std::pair<std::string, std::string>> PipelineConfig::entries() const {
  PipelineConfig c = *this;
  c.propagate();
  std::vector<std::pair<std::string, std::string>> out{{"profile", std::string(to_string(profile))}};
  for (const auto& f : fields(c)) out.emplace_back(f.key, f.get());
  return out;
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  if (key == "profile") {
    const auto keep_seed = seed;
    const auto keep_workers = workers;
    *this = for_profile(parse_profile(value));
    seed = keep_seed;
    workers = keep_workers;
    propagate();
    return;
  }
  for (auto& f : fields(*this)) {
    if (key == f.key) {
      f.set(value);
      propagate();
      return;
    }
  }
  throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
}

std::string PipelineConfig::hash() const {
  std::string text;
  for (const auto& [k, v] : entries()) text += k + "=" + v + "\n";
  return sha256_hex(text).substr(0, 16);
}

std::vector<std::pair<std::string, std::string>> read_config_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open config");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected key = value");
    auto key = trim(line.substr(0, eq));
    auto value = trim(line.substr(eq + 1));
    if (key.empty()) throw ParseError(lineno, "empty key");
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      throw Error("sha256: cannot initialise digest");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, std::size_t n) { EVP_DigestUpdate(ctx_, data, n); }

  std::string hex() {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx_, md, &len);
    std::ostringstream os;
    for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data.data(), data.size());
  return h.hex();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for hashing");
  Sha256 h;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    h.update(buf.data(), std::size_t(in.gcount()));
  }
  return h.hex();
}

fs::path manifest_path(const fs::path& artifact) {
  fs::path p = artifact;
  p += ".manifest.json";
  return p;
}

void write_manifest(const fs::path& artifact, const Manifest& m) {
  json config = json::object();
  for (const auto& [k, v] : m.config) config[k] = v;
  json inputs = json::array();
  for (const auto& [name, digest] : m.inputs) inputs.push_back({{"name", name}, {"sha256", digest}});
  json counts = json::object();
  for (const auto& [k, v] : m.counts) counts[k] = v;
  json j = {{"stage", m.stage},     {"config_hash", m.config_hash},     {"seed", m.seed},
            {"config", config},     {"inputs", inputs},                 {"output", artifact.filename().string()},
            {"output_sha256", m.output_sha256}, {"counts", counts}};
  const auto path = manifest_path(artifact);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << j.dump(2) << '\n';
}

std::optional<Manifest> read_manifest(const fs::path& artifact) {
  const auto path = manifest_path(artifact);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  Manifest m;
  m.stage = j.value("stage", "");
  m.config_hash = j.value("config_hash", "");
  m.seed = j.value("seed", std::uint64_t{0});
  // Bind before iterating: items() does not own the json it walks.
  const json config = j.value("config", json::object());
  const json inputs = j.value("inputs", json::array());
  const json counts = j.value("counts", json::object());
  try {
    for (const auto& [k, v] : config.items()) m.config.emplace_back(k, v.get<std::string>());
    for (const auto& in_j : inputs) {
      m.inputs.emplace_back(in_j.at("name").get<std::string>(), in_j.at("sha256").get<std::string>());
    }
    for (const auto& [k, v] : counts.items()) m.counts[k] = v.get<double>();
  } catch (const json::exception& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  m.output_sha256 = j.value("output_sha256", "");
  return m;
}

namespace {

void log(const StageContext& ctx, const std::string& msg) {
  if (ctx.log) ctx.log(msg);
}

void require(const std::string& stage, const fs::path& path, const std::string& what,
             const std::string& producer) {
  if (fs::exists(path)) return;
  std::string msg = "missing " + what + " '" + path.string() + "'";
  if (!producer.empty()) msg += "; run `morphexp " + producer + "` first";
  throw PipelineError(stage, msg);
}

void check_hash(const StageContext& ctx, const std::string& stage, const fs::path& input) {
  auto m = read_manifest(input);
  if (!m || ctx.force) return;
  const auto expected = ctx.config.hash();
  if (m->config_hash != expected) {
    throw PipelineError(stage, "'" + input.string() + "' was produced with config " +
                                   m->config_hash + " but the current config is " + expected +
                                   "; rerun `morphexp " + m->stage + "` or pass --force");
  }
}

Manifest make_manifest(const StageContext& ctx, const std::string& stage,
                       const std::vector<fs::path>& inputs, const fs::path& output) {
  Manifest m;
  m.stage = stage;
  m.config_hash = ctx.config.hash();
  m.seed = ctx.config.seed;
  m.config = ctx.config.entries();
  for (const auto& p : inputs) m.inputs.emplace_back(p.filename().string(), sha256_file(p));
  m.output_sha256 = sha256_file(output);
  return m;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

}  // namespace

Vocabulary run_vocab(const StageContext& ctx, const fs::path& corpus, const fs::path& vocab_out) {
  const std::string stage = "vocab";
  require(stage, corpus, "corpus", "");
  ensure_parent(vocab_out);
  FileSentences source(corpus);
  Vocabulary vocab = build_vocabulary(source);
  vocab.save(vocab_out);
  auto m = make_manifest(ctx, stage, {corpus}, vocab_out);
  m.counts = {{"types", double(vocab.size())},
              {"tokens", double(vocab.total_tokens())},
              {"skipped_invalid", double(source.skipped_invalid())}};
  write_manifest(vocab_out, m);
  log(ctx, "vocab: " + std::to_string(vocab.size()) + " types, " +
               std::to_string(vocab.total_tokens()) + " tokens");
  return vocab;
}

EmbeddingTable run_train(const StageContext& ctx, const fs::path& corpus,
                         const fs::path& vectors_out, const fs::path& vocab_out) {
  const std::string stage = "train";
  require(stage, corpus, "corpus", "");
  ctx.config.validate();
  run_vocab(ctx, corpus, vocab_out);
  ensure_parent(vectors_out);
  FileSentences source(corpus);
  TrainStats stats;
  log(ctx, "train: dim=" + std::to_string(ctx.config.train.dim) +
               " epochs=" + std::to_string(ctx.config.train.epochs) + " on " + corpus.string());
  EmbeddingTable table = [&] {
    try {
      return train_sgns(source, ctx.config.train, &stats);
    } catch (const TrainingError& e) {
      throw PipelineError(stage, e.what());
    }
  }();
  save_vectors(table, vectors_out);
  auto m = make_manifest(ctx, stage, {corpus}, vectors_out);
  m.counts = {{"vocab_size", double(stats.vocab_size)},
              {"train_tokens", double(stats.train_tokens)},
              {"skipped_invalid", double(stats.skipped_invalid)}};
  write_manifest(vectors_out, m);
  log(ctx, "train: " + std::to_string(table.size()) + " vectors, final loss " +
               format_double(stats.final_loss));
  return table;
}

std::vector<TransformationRule> run_induce(const StageContext& ctx, const fs::path& vocab_path,
                                           const fs::path& vectors_path, const fs::path& rules_out) {
  const std::string stage = "induce";
  require(stage, vectors_path, "vectors", "train");
  require(stage, vocab_path, "vocabulary", "train");
  check_hash(ctx, stage, vectors_path);
  check_hash(ctx, stage, vocab_path);
  ctx.config.validate();
  const auto vocab = Vocabulary::load(vocab_path);
  const auto emb = load_vectors(vectors_path);
  InductionStats stats;
  auto rules = induce_rules(vocab, emb, ctx.config.scale, ctx.config.seed, ctx.config.workers, &stats);
  ensure_parent(rules_out);
  save_rules(rules, rules_out);
  auto m = make_manifest(ctx, stage, {vocab_path, vectors_path}, rules_out);
  m.counts = {{"regularities_sets", double(stats.regularities_sets)},
              {"null_transitions", double(stats.null_transitions)},
              {"cross_transitions", double(stats.cross_transitions)},
              {"raw_rules", double(stats.raw_rules)},
              {"rules", double(stats.rules)}};
  write_manifest(rules_out, m);
  log(ctx, "induce: " + std::to_string(stats.regularities_sets) + " regularities sets, " +
               std::to_string(stats.null_transitions) + " null + " +
               std::to_string(stats.cross_transitions) + " cross transitions, " +
               std::to_string(stats.rules) + " rules");
  return rules;
}

std::vector<MorphSet> run_morphsets(const StageContext& ctx, const fs::path& vocab_path,
                                    const fs::path& vectors_path, const fs::path& rules_path,
                                    const fs::path& morphsets_out) {
  const std::string stage = "morphsets";
  require(stage, vectors_path, "vectors", "train");
  require(stage, vocab_path, "vocabulary", "train");
  require(stage, rules_path, "rules", "induce");
  for (const auto& p : {vectors_path, vocab_path, rules_path}) check_hash(ctx, stage, p);
  ctx.config.validate();
  const auto vocab = Vocabulary::load(vocab_path);
  const auto emb = load_vectors(vectors_path);
  const auto rules = load_rules(rules_path);
  MorphSetStats stats;
  auto sets = build_morph_sets(vocab, emb, rules, ctx.config.scale, ctx.config.seed, &stats);
  ensure_parent(morphsets_out);
  save_morph_sets(sets, morphsets_out);
  auto m = make_manifest(ctx, stage, {vocab_path, vectors_path, rules_path}, morphsets_out);
  m.counts = {{"heads_considered", double(stats.heads_considered)},
              {"built", double(stats.built)},
              {"validated", double(stats.validated)}};
  write_manifest(morphsets_out, m);
  log(ctx, "morphsets: " + std::to_string(stats.built) + " built, " +
               std::to_string(stats.validated) + " validated");
  return sets;
}

ExpansionStats run_expand(const StageContext& ctx, const fs::path& corpus,
                          const fs::path& morphsets_path, const fs::path& expanded_out) {
  const std::string stage = "expand";
  require(stage, corpus, "corpus", "");
  require(stage, morphsets_path, "morph sets", "morphsets");
  check_hash(ctx, stage, morphsets_path);
  ctx.config.validate();
  const auto index = index_morph_sets(load_morph_sets(morphsets_path));
  ensure_parent(expanded_out);
  auto stats = expand_corpus(corpus, index, ctx.config.expansion, expanded_out);
  auto m = make_manifest(ctx, stage, {corpus, morphsets_path}, expanded_out);
  m.counts = {{"sentences_read", double(stats.sentences_read)},
              {"sentences_generated", double(stats.sentences_generated)},
              {"skipped_invalid", double(stats.skipped_invalid)},
              {"attempts", double(stats.tally.attempts)},
              {"replaceable_positions", double(stats.tally.replaceable_positions)},
              {"replacements", double(stats.tally.replacements)}};
  write_manifest(expanded_out, m);
  log(ctx, "expand: " + std::to_string(stats.sentences_read) + " sentences read, " +
               std::to_string(stats.sentences_generated) + " generated");
  return stats;
}

std::vector<EvalReport> run_eval(const StageContext& ctx, const fs::path& vectors_path,
                                 const std::vector<fs::path>& datasets,
                                 const std::optional<MorphInputs>& morph, const fs::path& report_dir,
                                 const std::string& label) {
  const std::string stage = "eval";
  require(stage, vectors_path, "vectors", "train");
  check_hash(ctx, stage, vectors_path);
  std::optional<Vocabulary> vocab;
  std::optional<RareWordSynthesizer> handler;
  const auto emb = load_vectors(vectors_path);
  if (morph) {
    require(stage, morph->vocab, "vocabulary", "train");
    require(stage, morph->rules, "rules", "induce");
    check_hash(ctx, stage, morph->rules);
    vocab = Vocabulary::load(morph->vocab);
    handler.emplace(emb, load_rules(morph->rules), *vocab, ctx.config.rare);
  }
  if (!report_dir.empty()) fs::create_directories(report_dir);
  std::vector<EvalReport> reports;
  for (const auto& d : datasets) {
    require(stage, d, "dataset", "");
    auto ds = load_similarity_dataset(d);
    auto report = evaluate(emb, ds, handler ? &*handler : nullptr);
    if (!report_dir.empty()) {
      const std::string base = ds.name + (label.empty() ? "" : "_" + label);
      std::ofstream out(report_dir / (base + ".json"), std::ios::binary);
      out << report.to_json() << '\n';
      report.write_audit(report_dir / (base + ".audit.tsv"));
    }
    log(ctx, "eval: " + ds.name + (label.empty() ? "" : " [" + label + "]") +
                 " rho=" + format_double(report.rho_x100) +
                 " oov=" + std::to_string(report.oov_count));
    reports.push_back(std::move(report));
  }
  return reports;
}

std::string format_comparison(const std::vector<ComparisonRow>& rows) {
  std::ostringstream os;
  os << "dataset\tpairs\tSG\tOOV\tSG+Morph\tSG+Exp\tOOV\tSG+Exp+Morph\n";
  os << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    os << r.dataset << '\t' << r.pairs << '\t' << r.sg << '\t' << r.sg_oov << '\t' << r.sg_morph
       << '\t' << r.sg_exp << '\t' << r.sg_exp_oov << '\t' << r.sg_exp_morph << '\n';
  }
  return os.str();
}

PipelineResult run_pipeline(const StageContext& ctx, const fs::path& corpus,
                            const std::vector<fs::path>& datasets, const fs::path& out_dir) {
  require("pipeline", corpus, "corpus", "");
  for (const auto& d : datasets) require("pipeline", d, "dataset", "");
  ctx.config.validate();
  fs::create_directories(out_dir);
  const auto vocab = out_dir / "vocab.tsv";
  const auto sg = out_dir / "sg.vec";
  const auto rules = out_dir / "rules.jsonl";
  const auto morphsets = out_dir / "morphsets.jsonl";
  const auto expanded = out_dir / "expanded.txt";
  const auto vocab_exp = out_dir / "vocab_exp.tsv";
  const auto sg_exp = out_dir / "sg_exp.vec";
  const auto eval_dir = out_dir / "eval";

  PipelineResult result;
  run_train(ctx, corpus, sg, vocab);
  result.rules = run_induce(ctx, vocab, sg, rules).size();
  result.morph_sets = run_morphsets(ctx, vocab, sg, rules, morphsets).size();
  result.expansion = run_expand(ctx, corpus, morphsets, expanded);
  run_train(ctx, expanded, sg_exp, vocab_exp);

  const auto r_sg = run_eval(ctx, sg, datasets, std::nullopt, eval_dir, "sg");
  const auto r_sg_m = run_eval(ctx, sg, datasets, MorphInputs{vocab, rules}, eval_dir, "sg_morph");
  const auto r_exp = run_eval(ctx, sg_exp, datasets, std::nullopt, eval_dir, "sg_exp");
  const auto r_exp_m =
      run_eval(ctx, sg_exp, datasets, MorphInputs{vocab_exp, rules}, eval_dir, "sg_exp_morph");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    result.rows.push_back({r_sg[i].dataset, r_sg[i].pair_count, r_sg[i].rho_x100,
                           r_sg[i].oov_count, r_sg_m[i].rho_x100, r_exp[i].rho_x100,
                           r_exp[i].oov_count, r_exp_m[i].rho_x100});
  }

  result.comparison_path = out_dir / "comparison.tsv";
  {
    std::ofstream out(result.comparison_path, std::ios::binary);
    if (!out) throw IoError(result.comparison_path.string(), "cannot open for writing");
    out << format_comparison(result.rows);
  }
  std::vector<fs::path> inputs{corpus};
  inputs.insert(inputs.end(), datasets.begin(), datasets.end());
  auto m = make_manifest(ctx, "pipeline", inputs, result.comparison_path);
  m.counts = {{"rules", double(result.rules)},
              {"morph_sets", double(result.morph_sets)},
              {"sentences_read", double(result.expansion.sentences_read)},
              {"sentences_generated", double(result.expansion.sentences_generated)}};
  write_manifest(result.comparison_path, m);
  return result;
}

}  // namespace morphexp
