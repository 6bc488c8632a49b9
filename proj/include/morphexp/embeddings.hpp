#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphexp/corpus.hpp"

namespace morphexp {

// Fixed-dimension float vectors keyed by token, in insertion order.
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  bool contains(std::string_view word) const { return index_.find(word) != index_.end(); }
  std::optional<std::size_t> index_of(std::string_view word) const;
  // Empty optional when the word has no vector.
  std::optional<std::span<const float>> find(std::string_view word) const;

  const std::string& word(std::size_t i) const { return words_[i]; }
  const std::vector<std::string>& words() const { return words_; }
  std::span<const float> row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }
  std::span<float> row(std::size_t i) { return {data_.data() + i * dim_, dim_}; }

  // Throws std::invalid_argument on duplicate word, wrong length or a
  // non-finite component.
  std::size_t add(std::string word, std::span<const float> values);

 private:
  std::size_t dim_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
  std::vector<float> data_;
};

// u.v / (|u||v|), clamped to [-1, 1]; 0 when either norm is zero.
// Throws std::invalid_argument on a length mismatch.
double cosine(std::span<const float> u, std::span<const float> v);
double cosine(std::span<const double> u, std::span<const double> v);

// word2vec text format: "<count> <dim>" header, then "<token> <f1> ... <fdim>".
// Floats are written in shortest round-trip form.
void save_vectors(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_vectors(const std::filesystem::path& path);

}  // namespace morphexp
