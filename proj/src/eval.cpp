#include "morphexp/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "morphexp/error.hpp"

namespace morphexp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  for (char delim : {'\t', ',', ';'}) {
    if (line.find(delim) == std::string_view::npos) continue;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(delim, start);
      out.push_back(trim(line.substr(start, pos - start)));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return out;
  }
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace

SimilarityDataset parse_similarity_dataset(std::istream& in, std::string name) {
  SimilarityDataset ds{std::move(name), {}};
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto f = split_fields(text);
    double score = 0;
    const bool numeric = f.size() >= 3 && parse_double(f[2], score);
    if (first && f.size() >= 3 && !numeric) {
      first = false;
      continue;
    }
    first = false;
    if (f.size() < 3) throw ParseError(lineno, "expected word1, word2, score");
    if (!numeric) throw ParseError(lineno, "score '" + std::string(f[2]) + "' is not a number");
    if (f[0].empty() || f[1].empty()) throw ParseError(lineno, "empty word");
    ds.pairs.push_back({std::string(f[0]), std::string(f[1]), score});
  }
  if (in.bad()) throw ParseError(lineno, "read failed");
  if (ds.pairs.empty()) throw ParseError(std::max<std::size_t>(lineno, 1), "dataset has no pairs");
  return ds;
}

SimilarityDataset load_similarity_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open dataset");
  return parse_similarity_dataset(in, path.stem().string());
}

std::vector<double> average_ranks(std::span<const double> xs) {
  const std::size_t n = xs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && xs[order[j + 1]] == xs[order[i]]) ++j;
    // Positions i..j (0-based) share rank ((i+1) + (j+1)) / 2.
    const double r = 0.5 * double(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

double spearman_rho(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("spearman_rho: length mismatch");
  if (xs.size() < 2) throw std::invalid_argument("spearman_rho: need at least two items");
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  const double n = double(xs.size());
  const double mean = (n + 1) / 2;  // same for both rank vectors
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const double dx = rx[i] - mean, dy = ry[i] - mean;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0 || syy == 0) throw std::invalid_argument("spearman_rho: constant input");
  return 100.0 * std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

EvalReport evaluate(const EmbeddingTable& emb, const SimilarityDataset& ds,
                    const RareWordSynthesizer* rare_handler) {
  EvalReport report;
  report.dataset = ds.name;
  report.pair_count = ds.pairs.size();
  const std::vector<float> zeros(emb.dim(), 0.0f);
  auto resolve = [&](const std::string& w) -> std::vector<float> {
    if (!emb.contains(w)) ++report.oov_count;
    if (rare_handler) return (*rare_handler)(w).vector;
    if (auto v = emb.find(w)) return {v->begin(), v->end()};
    return zeros;
  };
  std::vector<double> human, model;
  for (const auto& p : ds.pairs) {
    const auto v1 = resolve(p.w1);
    const auto v2 = resolve(p.w2);
    human.push_back(p.human);
    model.push_back(cosine(v1, v2));
  }
  const auto rh = average_ranks(human);
  const auto rm = average_ranks(model);
  for (std::size_t i = 0; i < ds.pairs.size(); ++i) {
    const auto& p = ds.pairs[i];
    report.audit.push_back({p.w1, p.w2, p.human, model[i], rh[i], rm[i]});
  }
  const bool constant_model = std::adjacent_find(model.begin(), model.end(),
                                                 std::not_equal_to<>()) == model.end();
  const bool constant_human = std::adjacent_find(human.begin(), human.end(),
                                                 std::not_equal_to<>()) == human.end();
  if (ds.pairs.size() < 2 || constant_human) {
    throw std::invalid_argument("dataset " + ds.name + " needs two or more distinct human scores");
  }
  if (constant_model) {
    report.degenerate = true;
    report.rho_x100 = 0;
  } else {
    report.rho_x100 = spearman_rho(human, model);
  }
  return report;
}

std::string EvalReport::to_json() const {
  nlohmann::json j = {{"dataset", dataset},
                      {"rho_x100", rho_x100},
                      {"oov_count", oov_count},
                      {"pair_count", pair_count},
                      {"degenerate", degenerate}};
  return j.dump(2);
}

void EvalReport::write_audit(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "word1\tword2\thuman\tmodel\trank_h\trank_m\n";
  out << std::setprecision(9);
  for (const auto& a : audit) {
    out << a.w1 << '\t' << a.w2 << '\t' << a.human << '\t' << a.model << '\t' << a.rank_human
        << '\t' << a.rank_model << '\n';
  }
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace morphexp
