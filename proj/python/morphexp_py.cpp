#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "morphexp/corpus.hpp"
#include "morphexp/embeddings.hpp"
#include "morphexp/error.hpp"
#include "morphexp/eval.hpp"
#include "morphexp/expansion.hpp"
#include "morphexp/morphology.hpp"
#include "morphexp/pipeline.hpp"
#include "morphexp/random.hpp"
#include "morphexp/rareword.hpp"
#include "morphexp/sgns.hpp"

namespace py = pybind11;
using namespace morphexp;

namespace {

using Overrides = std::map<std::string, std::string>;

PipelineConfig make_config(const std::string& profile, const Overrides& overrides) {
  auto cfg = PipelineConfig::for_profile(parse_profile(profile));
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  cfg.propagate();
  cfg.validate();
  return cfg;
}

MemorySentences as_corpus(const std::vector<Sentence>& sentences) { return MemorySentences(sentences); }

py::dict eval_to_dict(const EvalReport& r) {
  py::dict d;
  d["dataset"] = r.dataset;
  d["rho_x100"] = r.rho_x100;
  d["oov_count"] = r.oov_count;
  d["pair_count"] = r.pair_count;
  d["degenerate"] = r.degenerate;
  return d;
}

py::dict synthesis_to_dict(const SynthesisResult& r, const std::vector<TransformationRule>& rules) {
  py::dict d;
  d["vector"] = r.vector;
  d["method"] = std::string(to_string(r.method));
  d["base"] = r.base;
  py::list path;
  for (const auto& step : r.path) {
    path.append(py::make_tuple(to_string(rules.at(step.rule).transition),
                               step.direction == Direction::forward ? "forward" : "reverse"));
  }
  d["path"] = path;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Morphological rule induction, corpus expansion and rare-word synthesis";

  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<PipelineError>(m, "PipelineError", PyExc_RuntimeError);
  py::register_exception<TrainingError>(m, "TrainingError", PyExc_RuntimeError);

  m.def("normalize_line", [](const std::string& line) { return normalize_line(line); }, py::arg("line"),
        "Tokens of one line: punctuation dropped, digits folded to 0.");

  m.def("config_entries",
        [](const std::string& profile, const Overrides& overrides) {
          return make_config(profile, overrides).entries();
        },
        py::arg("profile") = "desk", py::arg("overrides") = Overrides{},
        "Resolved (key, value) configuration for a profile.");

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<>())
      .def_static("from_sentences",
                  [](const std::vector<Sentence>& sentences) { return build_vocabulary(as_corpus(sentences)); },
                  py::arg("sentences"))
      .def_static("from_file", [](const std::filesystem::path& p) { return build_vocabulary(FileSentences(p)); },
                  py::arg("path"), "Counts a raw text corpus, normalizing each line.")
      .def_static("load", &Vocabulary::load, py::arg("path"))
      .def("save", &Vocabulary::save, py::arg("path"))
      .def("add", py::overload_cast<std::string_view, std::uint64_t>(&Vocabulary::add), py::arg("token"),
           py::arg("n") = 1)
      .def("freq", &Vocabulary::freq, py::arg("token"))
      .def("items", &Vocabulary::sorted, "(token, count) pairs by descending count.")
      .def_property_readonly("total_tokens", &Vocabulary::total_tokens)
      .def("__len__", &Vocabulary::size)
      .def("__contains__", [](const Vocabulary& v, const std::string& w) { return v.contains(w); });

  py::class_<EmbeddingTable>(m, "EmbeddingTable")
      .def(py::init<std::size_t>(), py::arg("dim"))
      .def_static("load", &load_vectors, py::arg("path"))
      .def("save", [](const EmbeddingTable& t, const std::filesystem::path& p) { save_vectors(t, p); },
           py::arg("path"))
      .def("add",
           [](EmbeddingTable& t, std::string word, const std::vector<float>& values) {
             return t.add(std::move(word), values);
           },
           py::arg("word"), py::arg("vector"))
      .def("vector",
           [](const EmbeddingTable& t, const std::string& w) -> std::optional<std::vector<float>> {
             auto row = t.find(w);
             if (!row) return std::nullopt;
             return std::vector<float>(row->begin(), row->end());
           },
           py::arg("word"))
      .def("cosine",
           [](const EmbeddingTable& t, const std::string& a, const std::string& b) -> std::optional<double> {
             auto ra = t.find(a), rb = t.find(b);
             if (!ra || !rb) return std::nullopt;
             return cosine(*ra, *rb);
           },
           py::arg("a"), py::arg("b"))
      .def_property_readonly("dim", &EmbeddingTable::dim)
      .def_property_readonly("words", &EmbeddingTable::words)
      .def("__len__", &EmbeddingTable::size)
      .def("__contains__", [](const EmbeddingTable& t, const std::string& w) { return t.contains(w); });

  m.def("train_sgns",
        [](const std::vector<Sentence>& sentences, const std::string& profile, const Overrides& overrides) {
          const auto cfg = make_config(profile, overrides);
          py::gil_scoped_release release;
          return train_sgns(as_corpus(sentences), cfg.train);
        },
        py::arg("sentences"), py::arg("profile") = "desk", py::arg("overrides") = Overrides{},
        "Skip-gram vectors for tokenized sentences.");

  py::class_<TransformationRule>(m, "TransformationRule")
      .def_property_readonly("transition", [](const TransformationRule& r) { return to_string(r.transition); })
      .def_property_readonly("kind", [](const TransformationRule& r) { return to_string(r.transition.kind); })
      .def_property_readonly("source", [](const TransformationRule& r) { return r.transition.from; })
      .def_property_readonly("target", [](const TransformationRule& r) { return r.transition.to; })
      .def_readonly("w1", &TransformationRule::w1)
      .def_readonly("w2", &TransformationRule::w2)
      .def_readonly("support", &TransformationRule::support)
      .def_readonly("pair_cosine", &TransformationRule::pair_cosine)
      .def("to_json", &rule_to_json)
      .def_static("from_json", &rule_from_json, py::arg("line"))
      .def("__repr__", [](const TransformationRule& r) { return "TransformationRule(" + rule_to_json(r) + ")"; });

  py::class_<MorphSet>(m, "MorphSet")
      .def(py::init([](std::string head, std::vector<std::string> variants) {
             return MorphSet{std::move(head), std::move(variants)};
           }),
           py::arg("head"), py::arg("variants"))
      .def_readonly("head", &MorphSet::head)
      .def_readonly("variants", &MorphSet::variants)
      .def("__repr__", [](const MorphSet& s) { return "MorphSet(" + morph_set_to_json(s) + ")"; });

  m.def("induce_rules",
        [](const Vocabulary& vocab, const EmbeddingTable& emb, const std::string& profile,
           const Overrides& overrides) {
          const auto cfg = make_config(profile, overrides);
          py::gil_scoped_release release;
          return induce_rules(vocab, emb, cfg.scale, cfg.seed, cfg.workers);
        },
        py::arg("vocab"), py::arg("emb"), py::arg("profile") = "desk", py::arg("overrides") = Overrides{});

  m.def("build_morph_sets",
        [](const Vocabulary& vocab, const EmbeddingTable& emb, const std::vector<TransformationRule>& rules,
           const std::string& profile, const Overrides& overrides) {
          const auto cfg = make_config(profile, overrides);
          py::gil_scoped_release release;
          return build_morph_sets(vocab, emb, rules, cfg.scale, cfg.seed);
        },
        py::arg("vocab"), py::arg("emb"), py::arg("rules"), py::arg("profile") = "desk",
        py::arg("overrides") = Overrides{});

  m.def("expand_sentence",
        [](const Sentence& sentence, const std::vector<MorphSet>& sets, std::size_t k, double p,
           std::uint64_t seed) {
          ExpansionConfig cfg;
          cfg.k = k;
          cfg.replace_probability = p;
          cfg.seed = seed;
          cfg.validate();
          Rng rng(seed);
          return expand_sentence(sentence, index_morph_sets(sets), cfg, rng);
        },
        py::arg("sentence"), py::arg("morph_sets"), py::arg("k") = 1, py::arg("p") = 0.5,
        py::arg("seed") = 1, "Up to k variants of a sentence with morph-set heads swapped.");

  py::class_<RareWordSynthesizer>(m, "RareWordSynthesizer")
      .def(py::init([](const EmbeddingTable& emb, std::vector<TransformationRule> rules, const Vocabulary& vocab,
                       const std::string& profile, const Overrides& overrides) {
             return std::make_unique<RareWordSynthesizer>(emb, std::move(rules), vocab,
                                                          make_config(profile, overrides).rare);
           }),
           py::arg("emb"), py::arg("rules"), py::arg("vocab"), py::arg("profile") = "desk",
           py::arg("overrides") = Overrides{}, py::keep_alive<1, 2>(), py::keep_alive<1, 4>())
      .def("__call__",
           [](const RareWordSynthesizer& s, const std::string& word) { return synthesis_to_dict(s(word), s.rules()); },
           py::arg("word"), "Dict with vector, method, base and path.");

  m.def("spearman_rho",
        [](const std::vector<double>& xs, const std::vector<double>& ys) { return spearman_rho(xs, ys); },
        py::arg("xs"), py::arg("ys"), "Spearman rank correlation times 100.");

  m.def("evaluate",
        [](const EmbeddingTable& emb, const std::vector<std::tuple<std::string, std::string, double>>& pairs,
           const RareWordSynthesizer* handler, const std::string& name) {
          SimilarityDataset ds{name, {}};
          for (const auto& [a, b, h] : pairs) ds.pairs.push_back({a, b, h});
          return eval_to_dict(evaluate(emb, ds, handler));
        },
        py::arg("emb"), py::arg("pairs"), py::arg("rare_handler") = nullptr, py::arg("name") = "dataset");

  m.def("run_pipeline",
        [](const std::filesystem::path& corpus, const std::vector<std::filesystem::path>& datasets,
           const std::filesystem::path& out_dir, const std::string& profile, const Overrides& overrides) {
          StageContext ctx;
          ctx.config = make_config(profile, overrides);
          PipelineResult result;
          {
            py::gil_scoped_release release;
            result = run_pipeline(ctx, corpus, datasets, out_dir);
          }
          py::dict d;
          d["rules"] = result.rules;
          d["morph_sets"] = result.morph_sets;
          d["comparison_path"] = result.comparison_path;
          py::list rows;
          for (const auto& r : result.rows) {
            py::dict row;
            row["dataset"] = r.dataset;
            row["pairs"] = r.pairs;
            row["sg"] = r.sg;
            row["sg_oov"] = r.sg_oov;
            row["sg_morph"] = r.sg_morph;
            row["sg_exp"] = r.sg_exp;
            row["sg_exp_oov"] = r.sg_exp_oov;
            row["sg_exp_morph"] = r.sg_exp_morph;
            rows.append(row);
          }
          d["rows"] = rows;
          return d;
        },
        py::arg("corpus"), py::arg("datasets"), py::arg("out_dir"), py::arg("profile") = "desk",
        py::arg("overrides") = Overrides{}, "Every stage end to end; returns the comparison rows.");
}
