#include "morphexp/corpus.hpp"

#include <algorithm>
#include <charconv>

#include "morphexp/error.hpp"
#include "morphexp/utf8.hpp"

namespace morphexp {
namespace {

void flush_token(std::string& token, bool has_alnum, Sentence& out) {
  if (!token.empty() && has_alnum) out.push_back(token);
  token.clear();
}

}  // namespace

Sentence normalize_line(std::string_view line) {
  Sentence out;
  std::string token;
  bool has_alnum = false;
  const std::u32string cps = utf8::decode(line);
  for (std::size_t i = 0; i < cps.size(); ++i) {
    const char32_t cp = cps[i];
    if (utf8::is_digit(cp)) {
      token.push_back('0');
      has_alnum = true;
    } else if (utf8::is_alnum(cp)) {
      utf8::append(token, cp);
      has_alnum = true;
    } else if (utf8::is_joiner(cp)) {
      const bool hyphen = cp != '\'' && cp != 0x2019;
      const bool next_hyphen = i + 1 < cps.size() && cps[i + 1] == cp;
      if (hyphen && next_hyphen) {
        while (i + 1 < cps.size() && cps[i + 1] == cp) ++i;
        flush_token(token, has_alnum, out);
        has_alnum = false;
      } else {
        utf8::append(token, cp);
      }
    } else {
      flush_token(token, has_alnum, out);
      has_alnum = false;
    }
  }
  flush_token(token, has_alnum, out);
  return out;
}

void Vocabulary::add(std::string_view token, std::uint64_t n) {
  if (n == 0) return;
  auto it = counts_.find(token);
  if (it == counts_.end()) {
    counts_.emplace(std::string(token), n);
  } else {
    it->second += n;
  }
  total_ += n;
}

void Vocabulary::add(const Sentence& sentence) {
  for (const auto& t : sentence) add(t);
}

void Vocabulary::merge(const Vocabulary& other) {
  for (const auto& [t, n] : other.counts_) add(t, n);
}

std::uint64_t Vocabulary::freq(std::string_view token) const {
  auto it = counts_.find(token);
  return it == counts_.end() ? 0 : it->second;
}

std::vector<std::pair<std::string, std::uint64_t>> Vocabulary::sorted() const {
  std::vector<std::pair<std::string, std::uint64_t>> entries(counts_.begin(), counts_.end());
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return entries;
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  for (const auto& [t, n] : sorted()) out << t << '\t' << n << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open vocabulary");
  Vocabulary vocab;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.rfind('\t');
    if (tab == std::string::npos || tab == 0) throw ParseError(lineno, "expected token<TAB>count");
    std::uint64_t n = 0;
    const char* first = line.data() + tab + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, n);
    if (ec != std::errc() || ptr != last || n == 0) throw ParseError(lineno, "bad count");
    const std::string_view token(line.data(), tab);
    if (vocab.contains(token)) throw ParseError(lineno, "duplicate token");
    vocab.add(token, n);
  }
  if (in.bad()) throw IoError(path.string(), "read failed");
  return vocab;
}

SentenceReader::SentenceReader(const std::filesystem::path& path)
    : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw IoError(path.string(), "cannot open corpus");
}

bool SentenceReader::next(Sentence& out) {
  while (std::getline(in_, line_)) {
    ++lines_;
    if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    if (!utf8::is_valid(line_)) {
      ++skipped_;
      continue;
    }
    out = normalize_line(line_);
    return true;
  }
  if (in_.bad()) throw IoError(path_.string(), "read failed");
  return false;
}

void FileSentences::for_each(const std::function<void(const Sentence&)>& fn) const {
  SentenceReader reader(path_);
  Sentence s;
  while (reader.next(s)) fn(s);
  skipped_ = reader.skipped_invalid();
}

void MemorySentences::for_each(const std::function<void(const Sentence&)>& fn) const {
  for (const auto& s : sentences_) fn(s);
}

Vocabulary build_vocabulary(const SentenceSource& corpus) {
  Vocabulary vocab;
  corpus.for_each([&](const Sentence& s) { vocab.add(s); });
  return vocab;
}

std::string join(const Sentence& sentence, char sep) {
  std::string out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    if (i) out.push_back(sep);
    out += sentence[i];
  }
  return out;
}

}  // namespace morphexp
