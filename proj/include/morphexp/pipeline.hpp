#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "morphexp/eval.hpp"
#include "morphexp/expansion.hpp"
#include "morphexp/morphology.hpp"
#include "morphexp/rareword.hpp"
#include "morphexp/sgns.hpp"

namespace morphexp {

enum class ProfileName { small, large, desk };

std::string_view to_string(ProfileName p);
ProfileName parse_profile(std::string_view s);

// Every threshold of every stage, resolved from a named profile and then
// overridden key by key.
struct PipelineConfig {
  ProfileName profile = ProfileName::desk;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  TrainConfig train;
  ScaleProfile scale;
  RareConfig rare;
  ExpansionConfig expansion;

  static PipelineConfig for_profile(ProfileName p);

  // Flat key/value view in a fixed order. Seed and workers are propagated
  // into the stage configs before listing.
  std::vector<std::pair<std::string, std::string>> entries() const;
  static std::vector<std::string> keys();

  // Throws std::invalid_argument on an unknown key or unparsable value.
  // Setting "profile" resets every threshold to that profile's defaults.
  void set(std::string_view key, std::string_view value);

  // Pushes seed and workers down into the stage configs.
  void propagate();
  void validate() const;

  // Hex SHA-256 prefix over entries().
  std::string hash() const;
};

// Flat "key = value" lines; '#' starts a comment.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// Sidecar metadata written next to every artifact as "<artifact>.manifest.json".
struct Manifest {
  std::string stage;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> config;  // entries()
  std::vector<std::pair<std::string, std::string>> inputs;  // file name -> sha256
  std::string output_sha256;
  std::map<std::string, double> counts;
};

std::filesystem::path manifest_path(const std::filesystem::path& artifact);
void write_manifest(const std::filesystem::path& artifact, const Manifest& m);
std::optional<Manifest> read_manifest(const std::filesystem::path& artifact);

struct StageContext {
  PipelineConfig config;
  bool force = false;  // accept inputs produced under a different config hash
  std::function<void(const std::string&)> log;
};

// Each stage checks its inputs exist (naming the producing subcommand when
// they do not), refuses inputs whose manifest carries a different config
// hash unless forced, writes its artifact and the artifact's manifest.
Vocabulary run_vocab(const StageContext& ctx, const std::filesystem::path& corpus,
                     const std::filesystem::path& vocab_out);
// Also writes the corpus vocabulary to `vocab_out`.
EmbeddingTable run_train(const StageContext& ctx, const std::filesystem::path& corpus,
                         const std::filesystem::path& vectors_out,
                         const std::filesystem::path& vocab_out);
std::vector<TransformationRule> run_induce(const StageContext& ctx,
                                           const std::filesystem::path& vocab,
                                           const std::filesystem::path& vectors,
                                           const std::filesystem::path& rules_out);
std::vector<MorphSet> run_morphsets(const StageContext& ctx, const std::filesystem::path& vocab,
                                    const std::filesystem::path& vectors,
                                    const std::filesystem::path& rules,
                                    const std::filesystem::path& morphsets_out);
ExpansionStats run_expand(const StageContext& ctx, const std::filesystem::path& corpus,
                          const std::filesystem::path& morphsets,
                          const std::filesystem::path& expanded_out);

struct MorphInputs {
  std::filesystem::path vocab;
  std::filesystem::path rules;
};

// Reports are written to `report_dir` as "<dataset>[_<label>].json" with a
// matching ".audit.tsv" when report_dir is non-empty.
std::vector<EvalReport> run_eval(const StageContext& ctx, const std::filesystem::path& vectors,
                                 const std::vector<std::filesystem::path>& datasets,
                                 const std::optional<MorphInputs>& morph,
                                 const std::filesystem::path& report_dir,
                                 const std::string& label = "");

struct ComparisonRow {
  std::string dataset;
  std::size_t pairs = 0;
  double sg = 0;
  std::size_t sg_oov = 0;
  double sg_morph = 0;
  double sg_exp = 0;
  std::size_t sg_exp_oov = 0;
  double sg_exp_morph = 0;
};

struct PipelineResult {
  std::size_t rules = 0;
  std::size_t morph_sets = 0;
  ExpansionStats expansion;
  std::vector<ComparisonRow> rows;
  std::filesystem::path comparison_path;
};

std::string format_comparison(const std::vector<ComparisonRow>& rows);

// SG -> induce -> morph sets -> expand -> SG+Exp -> evaluate SG, SG+Morph,
// SG+Exp and SG+Exp+Morph on every dataset. All artifacts go to out_dir.
PipelineResult run_pipeline(const StageContext& ctx, const std::filesystem::path& corpus,
                            const std::vector<std::filesystem::path>& datasets,
                            const std::filesystem::path& out_dir);

}  // namespace morphexp
