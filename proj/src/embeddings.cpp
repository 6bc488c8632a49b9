#include "morphexp/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "morphexp/error.hpp"

namespace morphexp {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {
  if (dim == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::optional<std::size_t> EmbeddingTable::index_of(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::span<const float>> EmbeddingTable::find(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return row(it->second);
}

std::size_t EmbeddingTable::add(std::string word, std::span<const float> values) {
  if (values.size() != dim_) throw std::invalid_argument("vector length mismatch for " + word);
  if (contains(word)) throw std::invalid_argument("duplicate word " + word);
  for (float x : values) {
    if (!std::isfinite(x)) throw std::invalid_argument("non-finite component for " + word);
  }
  const std::size_t i = words_.size();
  index_.emplace(word, i);
  words_.push_back(std::move(word));
  data_.insert(data_.end(), values.begin(), values.end());
  return i;
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> u, std::span<const T> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += double(u[i]) * double(v[i]);
    nu += double(u[i]) * double(u[i]);
    nv += double(v[i]) * double(v[i]);
  }
  if (nu == 0 || nv == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

// Splits on single spaces or tabs, ignoring repeated separators.
std::vector<std::string_view> fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

double cosine(std::span<const float> u, std::span<const float> v) { return cosine_impl(u, v); }
double cosine(std::span<const double> u, std::span<const double> v) { return cosine_impl(u, v); }

void save_vectors(const EmbeddingTable& table, const std::filesystem::path& path) {
  if (table.empty()) throw std::invalid_argument("save_vectors: empty table");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << table.size() << ' ' << table.dim() << '\n';
  char buf[64];
  std::string line;
  for (std::size_t i = 0; i < table.size(); ++i) {
    line = table.word(i);
    for (float x : table.row(i)) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
      line.push_back(' ');
      line.append(buf, ptr);
    }
    line.push_back('\n');
    out << line;
  }
  if (!out) throw IoError(path.string(), "write failed");
}

EmbeddingTable load_vectors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open vectors");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(1, "missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = fields(line);
  std::size_t count = 0, dim = 0;
  if (header.size() != 2 || !parse_number(header[0], count) || !parse_number(header[1], dim) ||
      dim == 0) {
    throw ParseError(1, "header must be '<vocab_size> <dim>'");
  }
  EmbeddingTable table(dim);
  std::vector<float> values(dim);
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t lineno = r + 2;
    if (!std::getline(in, line)) {
      throw ParseError(lineno, "expected " + std::to_string(count) + " rows, file ends after " +
                                   std::to_string(r));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto f = fields(line);
    if (f.size() != dim + 1) {
      throw ParseError(lineno, "expected token and " + std::to_string(dim) + " values, got " +
                                   std::to_string(f.empty() ? 0 : f.size() - 1));
    }
    for (std::size_t k = 0; k < dim; ++k) {
      if (!parse_number(f[k + 1], values[k]) || !std::isfinite(values[k])) {
        throw ParseError(lineno, "bad number '" + std::string(f[k + 1]) + "'");
      }
    }
    try {
      table.add(std::string(f[0]), values);
    } catch (const std::invalid_argument& e) {
      throw ParseError(lineno, e.what());
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") {
      throw ParseError(count + 2, "trailing data after " + std::to_string(count) + " rows");
    }
  }
  return table;
}

}  // namespace morphexp
