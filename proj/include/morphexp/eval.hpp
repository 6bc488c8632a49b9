#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "morphexp/embeddings.hpp"
#include "morphexp/rareword.hpp"

namespace morphexp {

struct SimilarityPair {
  std::string w1;
  std::string w2;
  double human = 0;
};

struct SimilarityDataset {
  std::string name;
  std::vector<SimilarityPair> pairs;
};

// Delimited "word1 word2 score" lines. Tab, comma or semicolon delimited,
// falling back to whitespace. Blank lines and '#' comments are skipped; a
// first line whose third field is not numeric is a header. Throws
// ParseError with the line number on anything else malformed or when no
// pairs are found.
SimilarityDataset parse_similarity_dataset(std::istream& in, std::string name);
SimilarityDataset load_similarity_dataset(const std::filesystem::path& path);

// 1-based ranks; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> xs);

// Spearman rank correlation times 100. Throws std::invalid_argument on a
// length mismatch, fewer than two items, or a constant input.
double spearman_rho(std::span<const double> xs, std::span<const double> ys);

struct PairAudit {
  std::string w1;
  std::string w2;
  double human = 0;
  double model = 0;
  double rank_human = 0;
  double rank_model = 0;
};

struct EvalReport {
  std::string dataset;
  double rho_x100 = 0;
  std::size_t oov_count = 0;  // word occurrences missing from the table
  std::size_t pair_count = 0;
  bool degenerate = false;  // model similarities constant; rho reported as 0
  std::vector<PairAudit> audit;

  std::string to_json() const;
  void write_audit(const std::filesystem::path& path) const;
};

// Scores `emb` on `ds`. Words resolve through `rare_handler` when given,
// else to their stored vector or zeros.
EvalReport evaluate(const EmbeddingTable& emb, const SimilarityDataset& ds,
                    const RareWordSynthesizer* rare_handler = nullptr);

}  // namespace morphexp
