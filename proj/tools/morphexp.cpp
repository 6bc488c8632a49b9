// morphexp: morphological rule induction, corpus expansion and rare-word
// synthesis from the command line. Run `morphexp --help` for usage.

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "morphexp/error.hpp"
#include "morphexp/pipeline.hpp"

namespace fs = std::filesystem;
using namespace morphexp;

namespace {

const std::vector<std::string> kPathKeys = {"corpus", "vocab",    "vectors", "rules", "morphsets",
                                            "expanded", "dataset", "out",     "reports"};

struct Paths {
  std::string corpus, vocab, vectors, rules, morphsets, expanded, out, reports;
  std::vector<std::string> datasets;

  void set(const std::string& key, const std::string& value) {
    if (key == "corpus") corpus = value;
    else if (key == "vocab") vocab = value;
    else if (key == "vectors") vectors = value;
    else if (key == "rules") rules = value;
    else if (key == "morphsets") morphsets = value;
    else if (key == "expanded") expanded = value;
    else if (key == "out") out = value;
    else if (key == "reports") reports = value;
    else if (key == "dataset") {
      std::size_t start = 0;
      while (start <= value.size()) {
        const auto comma = value.find(',', start);
        const auto item = value.substr(start, comma - start);
        if (!item.empty()) datasets.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    }
  }
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("morphexp");
  logger->set_pattern("[%H:%M:%S] %^%l%$ %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("MORPHEXP_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

void need(const std::string& stage, const std::string& value, const std::string& flag) {
  if (value.empty()) throw PipelineError(stage, "missing required option --" + flag);
}

int run_synth(const StageContext& ctx, const Paths& paths, std::vector<std::string> words,
              const std::string& batch) {
  const std::string stage = "synth";
  need(stage, paths.vectors, "vectors");
  need(stage, paths.vocab, "vocab");
  need(stage, paths.rules, "rules");
  if (!fs::exists(paths.vectors)) {
    throw PipelineError(stage, "missing vectors '" + paths.vectors + "'; run `morphexp train` first");
  }
  if (!fs::exists(paths.vocab)) {
    throw PipelineError(stage, "missing vocabulary '" + paths.vocab + "'; run `morphexp train` first");
  }
  if (!fs::exists(paths.rules)) {
    throw PipelineError(stage, "missing rules '" + paths.rules + "'; run `morphexp induce` first");
  }
  if (!batch.empty()) {
    std::ifstream in(batch, std::ios::binary);
    if (!in) throw IoError(batch, "cannot open word list");
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) words.push_back(line);
    }
  }
  const auto emb = load_vectors(paths.vectors);
  const auto vocab = Vocabulary::load(paths.vocab);
  RareWordSynthesizer synth(emb, load_rules(paths.rules), vocab, ctx.config.rare);
  for (const auto& w : words) std::cout << synthesis_to_json(w, synth(w), synth.rules()) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Unsupervised morphological rule induction, corpus expansion and rare-word synthesis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file;
  bool force = false;
  app.add_option("--config", config_file, "Flat key = value config file")->check(CLI::ExistingFile);
  app.add_flag("--force", force, "Accept inputs produced under a different config hash");

  std::map<std::string, std::string> overrides;
  std::map<std::string, CLI::Option*> key_opts;
  for (const auto& key : PipelineConfig::keys()) {
    key_opts[key] = app.add_option("--" + key, overrides[key], "Override config key " + key);
  }
  Paths paths;
  std::map<std::string, std::string> path_flags;
  std::vector<std::string> dataset_flags;
  std::map<std::string, CLI::Option*> path_opts;
  for (const auto& key : kPathKeys) {
    if (key == "dataset") {
      path_opts[key] = app.add_option("--dataset", dataset_flags, "Similarity dataset (repeatable)");
    } else {
      path_opts[key] = app.add_option("--" + key, path_flags[key], key + " path");
    }
  }

  auto* vocab_cmd = app.add_subcommand("vocab", "Count tokens of a corpus");
  auto* train_cmd = app.add_subcommand("train", "Train skip-gram vectors (also writes the vocabulary)");
  auto* induce_cmd = app.add_subcommand("induce", "Induce transformation rules");
  auto* morph_cmd = app.add_subcommand("morphsets", "Build and validate morphological sets");
  auto* expand_cmd = app.add_subcommand("expand", "Write the morphologically expanded corpus");
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize vectors for rare or unseen words");
  std::vector<std::string> synth_words;
  std::string synth_batch;
  synth_cmd->add_option("words", synth_words, "Words to synthesize");
  synth_cmd->add_option("--batch", synth_batch, "File with one word per line");
  auto* eval_cmd = app.add_subcommand("eval", "Spearman evaluation on word-similarity datasets");
  bool eval_morph = false;
  std::string eval_label;
  eval_cmd->add_flag("--morph", eval_morph, "Resolve words through rare-word synthesis");
  eval_cmd->add_option("--label", eval_label, "Suffix for report file names");
  auto* pipeline_cmd = app.add_subcommand("pipeline", "Run every stage and compare SG, SG+Exp and +Morph");

  CLI11_PARSE(app, argc, argv);

  std::string stage = app.get_subcommands().front()->get_name();
  try {
    StageContext ctx;
    ctx.force = force;
    ctx.log = [](const std::string& msg) { spdlog::info("{}", msg); };

    // Profile first, then file entries, then flags.
    std::vector<std::pair<std::string, std::string>> file_entries;
    if (!config_file.empty()) file_entries = read_config_file(config_file);
    std::string profile = "desk";
    for (const auto& [k, v] : file_entries) {
      if (k == "profile") profile = v;
    }
    if (key_opts["profile"]->count()) profile = overrides["profile"];
    PipelineConfig cfg = PipelineConfig::for_profile(parse_profile(profile));
    for (const auto& [k, v] : file_entries) {
      if (k == "profile") continue;
      if (std::find(kPathKeys.begin(), kPathKeys.end(), k) != kPathKeys.end()) {
        paths.set(k, v);
      } else {
        cfg.set(k, v);
      }
    }
    for (const auto& [k, opt] : key_opts) {
      if (k != "profile" && opt->count()) cfg.set(k, overrides[k]);
    }
    for (const auto& [k, opt] : path_opts) {
      if (!opt->count()) continue;
      if (k == "dataset") {
        paths.datasets.clear();
        for (const auto& d : dataset_flags) paths.set("dataset", d);
      } else {
        paths.set(k, path_flags[k]);
      }
    }
    cfg.validate();
    ctx.config = cfg;
    spdlog::debug("config {} ({} profile)", cfg.hash(), to_string(cfg.profile));

    if (*vocab_cmd) {
      need(stage, paths.corpus, "corpus");
      need(stage, paths.vocab, "vocab");
      run_vocab(ctx, paths.corpus, paths.vocab);
    } else if (*train_cmd) {
      need(stage, paths.corpus, "corpus");
      need(stage, paths.vectors, "vectors");
      need(stage, paths.vocab, "vocab");
      run_train(ctx, paths.corpus, paths.vectors, paths.vocab);
    } else if (*induce_cmd) {
      need(stage, paths.vectors, "vectors");
      need(stage, paths.vocab, "vocab");
      need(stage, paths.rules, "rules");
      run_induce(ctx, paths.vocab, paths.vectors, paths.rules);
    } else if (*morph_cmd) {
      need(stage, paths.vectors, "vectors");
      need(stage, paths.vocab, "vocab");
      need(stage, paths.rules, "rules");
      need(stage, paths.morphsets, "morphsets");
      run_morphsets(ctx, paths.vocab, paths.vectors, paths.rules, paths.morphsets);
    } else if (*expand_cmd) {
      need(stage, paths.corpus, "corpus");
      need(stage, paths.morphsets, "morphsets");
      need(stage, paths.expanded, "expanded");
      const auto stats = run_expand(ctx, paths.corpus, paths.morphsets, paths.expanded);
      std::cout << stats.to_json() << '\n';
    } else if (*synth_cmd) {
      return run_synth(ctx, paths, synth_words, synth_batch);
    } else if (*eval_cmd) {
      need(stage, paths.vectors, "vectors");
      if (paths.datasets.empty()) throw PipelineError(stage, "missing required option --dataset");
      std::optional<MorphInputs> morph;
      if (eval_morph) {
        need(stage, paths.vocab, "vocab");
        need(stage, paths.rules, "rules");
        morph = MorphInputs{paths.vocab, paths.rules};
      }
      std::vector<fs::path> ds(paths.datasets.begin(), paths.datasets.end());
      for (const auto& r : run_eval(ctx, paths.vectors, ds, morph, paths.reports, eval_label)) {
        std::cout << r.to_json() << '\n';
      }
    } else if (*pipeline_cmd) {
      need(stage, paths.corpus, "corpus");
      need(stage, paths.out, "out");
      if (paths.datasets.empty()) throw PipelineError(stage, "missing required option --dataset");
      std::vector<fs::path> ds(paths.datasets.begin(), paths.datasets.end());
      const auto result = run_pipeline(ctx, paths.corpus, ds, paths.out);
      std::cout << format_comparison(result.rows);
      spdlog::info("{} rules, {} morph sets; comparison written to {}", result.rules,
                   result.morph_sets, result.comparison_path.string());
    }
  } catch (const PipelineError& e) {
    std::cerr << "morphexp: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "morphexp: " << stage << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
