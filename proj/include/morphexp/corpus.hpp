#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace morphexp {

// Ordered, normalized tokens. Tokens are non-empty and contain no whitespace.
using Sentence = std::vector<std::string>;

struct StringHash {
  using is_transparent = void;
  std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};

// Tokenizes one line of text.
//
// Case is preserved. Decimal digits become '0'. Letters, marks, digits,
// hyphens and apostrophes form tokens; anything else separates them. A run
// of two or more hyphens ("--", a dash in many plain-text sources) also
// separates, and tokens holding no letter or digit are dropped.
Sentence normalize_line(std::string_view line);

// Token -> frequency counts with the running total.
class Vocabulary {
 public:
  using Counts = std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>>;

  void add(std::string_view token, std::uint64_t n = 1);
  void add(const Sentence& sentence);
  void merge(const Vocabulary& other);

  std::uint64_t freq(std::string_view token) const;
  bool contains(std::string_view token) const { return counts_.find(token) != counts_.end(); }
  std::size_t size() const { return counts_.size(); }
  bool empty() const { return counts_.empty(); }
  std::uint64_t total_tokens() const { return total_; }
  const Counts& counts() const { return counts_; }

  // Descending count, then lexicographic token.
  std::vector<std::pair<std::string, std::uint64_t>> sorted() const;

  // `token<TAB>count` per line in sorted() order.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

 private:
  Counts counts_;
  std::uint64_t total_ = 0;
};

// Streams normalized sentences from a one-sentence-per-line file.
// Lines that are not valid UTF-8 are skipped and counted.
class SentenceReader {
 public:
  explicit SentenceReader(const std::filesystem::path& path);

  // False at end of file.
  bool next(Sentence& out);

  std::uint64_t lines_read() const { return lines_; }
  std::uint64_t skipped_invalid() const { return skipped_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::string line_;
  std::uint64_t lines_ = 0;
  std::uint64_t skipped_ = 0;
};

// A re-iterable corpus. Training makes several passes over it.
class SentenceSource {
 public:
  virtual ~SentenceSource() = default;
  virtual void for_each(const std::function<void(const Sentence&)>& fn) const = 0;
};

class FileSentences final : public SentenceSource {
 public:
  explicit FileSentences(std::filesystem::path path) : path_(std::move(path)) {}
  void for_each(const std::function<void(const Sentence&)>& fn) const override;
  const std::filesystem::path& path() const { return path_; }
  // Invalid lines seen during the most recent pass.
  std::uint64_t skipped_invalid() const { return skipped_.load(); }

 private:
  std::filesystem::path path_;
  mutable std::atomic<std::uint64_t> skipped_{0};
};

class MemorySentences final : public SentenceSource {
 public:
  MemorySentences() = default;
  explicit MemorySentences(std::vector<Sentence> sentences) : sentences_(std::move(sentences)) {}
  void for_each(const std::function<void(const Sentence&)>& fn) const override;
  void push_back(Sentence s) { sentences_.push_back(std::move(s)); }
  const std::vector<Sentence>& sentences() const { return sentences_; }

 private:
  std::vector<Sentence> sentences_;
};

Vocabulary build_vocabulary(const SentenceSource& corpus);

std::string join(const Sentence& sentence, char sep = ' ');

}  // namespace morphexp
