// Copyright 2026 The rnndag Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line entry point.
//
//   rnndag convert --to-graph --in docs.clauses --out docs.penman
//   rnndag extract --corpus docs.penman --out grammar.txt
//   rnndag stats grammar.txt
//   rnndag roundtrip --corpus docs.penman
//   rnndag sample --grammar grammar.txt --count 100
//   rnndag train --corpus train.txt --config config.json --out model.txt
//   rnndag parse --model model.txt --in test.txt --out pred.penman
//   rnndag eval --pred pred.penman --gold test.txt
//
// Results go to stdout as a short table followed by key=value lines. Logs go
// to stderr; RNNDAG_LOG=0|1|2 sets quiet, info (default) or debug.
// Exit codes: 0 success, 1 usage, 2 data error, 3 failed check.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnndag/corpus.h"
#include "rnndag/derive.h"
#include "rnndag/drs.h"
#include "rnndag/eval.h"
#include "rnndag/grammar.h"
#include "rnndag/penman.h"
#include "rnndag/scorer.h"

namespace rnndag {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitCheck = 3;

class CheckFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char *v = std::getenv("RNNDAG_LOG");
  return v ? std::atoi(v) : 1;
}

void log(int level, const std::string &msg) {
  if (log_level() >= level) std::cerr << msg << '\n';
}

std::string fixed(double x, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, x);
  return buf;
}

std::ifstream open_in(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read " + path);
  return in;
}

std::ofstream open_out(const std::string &path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

// PENMAN corpora start with "(var/"; anything else is a sentence corpus.
bool looks_like_penman(const std::string &path) {
  static const std::regex kGraphStart(R"(^\s*\(\s*[A-Za-z]+\d*\s*/)");
  std::ifstream in = open_in(path);
  std::string line;
  while (std::getline(in, line)) {
    size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    return std::regex_search(line, kGraphStart);
  }
  return true;
}

std::vector<Graph> load_graphs(const std::string &path) {
  std::ifstream in = open_in(path);
  if (looks_like_penman(path)) return read_penman_corpus(in);
  std::vector<Graph> graphs;
  std::vector<Sentence> sentences = read_sentence_corpus(in);
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (!sentences[i].graph) {
      throw DataError(path + ": sentence " + std::to_string(i + 1) +
                      " has no graph");
    }
    graphs.push_back(*sentences[i].graph);
  }
  return graphs;
}

std::vector<Sentence> load_sentences(const std::string &path) {
  std::ifstream in = open_in(path);
  return read_sentence_corpus(in);
}

void print_kv(const std::vector<std::pair<std::string, std::string>> &kv) {
  for (const auto &[k, v] : kv) std::cout << k << '=' << v << '\n';
}

// convert ------------------------------------------------------------------

struct ConvertArgs {
  bool to_graph = false;
  bool to_boxes = false;
  std::string in, out, tokens, sentences;
  bool score = false;
};

int run_convert(const ConvertArgs &a) {
  if (a.to_graph == a.to_boxes) {
    throw CLI::ValidationError("convert", "give exactly one of --to-graph, --to-boxes");
  }
  if (a.to_boxes) {
    std::vector<Graph> graphs = load_graphs(a.in);
    std::vector<BoxStructure> docs;
    for (const Graph &g : graphs) docs.push_back(graph_to_boxes(g));
    std::ofstream out = open_out(a.out);
    write_clause_corpus(out, docs);
    print_kv({{"documents", std::to_string(docs.size())}});
    return 0;
  }
  std::ifstream in = open_in(a.in);
  std::vector<BoxStructure> docs = read_clause_corpus(in);
  std::vector<Graph> graphs;
  std::vector<size_t> kept;
  size_t failed = 0;
  for (size_t i = 0; i < docs.size(); ++i) {
    try {
      graphs.push_back(boxes_to_graph(docs[i]));
      kept.push_back(i);
    } catch (const ConversionError &e) {
      ++failed;
      log(1, "document " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_penman_corpus(out, graphs);
  }
  if (!a.tokens.empty()) {
    std::vector<Sentence> sentences = load_sentences(a.tokens);
    if (sentences.size() != docs.size()) {
      throw DataError(a.tokens + " has " + std::to_string(sentences.size()) +
                      " sentences for " + std::to_string(docs.size()) +
                      " documents");
    }
    std::vector<Sentence> joined;
    for (size_t k = 0; k < kept.size(); ++k) {
      Sentence s = sentences[kept[k]];
      s.graph = graphs[k];
      joined.push_back(std::move(s));
    }
    std::ofstream out = open_out(a.sentences);
    write_sentence_corpus(out, joined);
  }
  std::vector<std::pair<std::string, std::string>> kv = {
      {"documents", std::to_string(docs.size())},
      {"converted", std::to_string(graphs.size())},
      {"failed", std::to_string(failed)}};
  if (a.score) {
    ConversionScore s = conversion_score(docs);
    std::cout << "document\tF1\n";
    for (const auto &f : s.failures) {
      std::cout << f.index + 1 << "\tfailed: " << f.reason << '\n';
    }
    for (const auto &[i, f1] : s.imperfect) {
      std::cout << i + 1 << '\t' << fixed(f1, 4) << '\n';
    }
    kv.push_back({"precision", fixed(s.total.precision, 4)});
    kv.push_back({"recall", fixed(s.total.recall, 4)});
    kv.push_back({"f1", fixed(s.total.f1, 4)});
    kv.push_back({"imperfect", std::to_string(s.imperfect.size())});
  }
  print_kv(kv);
  return 0;
}

// extract / stats / roundtrip / sample -------------------------------------

int run_extract(const std::string &corpus, const std::string &out_path) {
  std::vector<Graph> graphs = load_graphs(corpus);
  Grammar g = build_grammar(graphs);
  for (const ExtractionFailure &f : g.failures()) {
    log(1, "graph " + std::to_string(f.index + 1) + ": " + f.reason);
  }
  std::ofstream out = open_out(out_path);
  g.write(out);
  std::cout << format_stats(g.stats());
  print_kv({{"graphs", std::to_string(graphs.size())},
            {"failures", std::to_string(g.failures().size())},
            {"fragments", std::to_string(g.stats().fragments)},
            {"labels", std::to_string(g.stats().labels)}});
  return 0;
}

Grammar load_grammar(const std::string &path) {
  std::ifstream in = open_in(path);
  return Grammar::read(in);
}

int run_stats(const std::string &path, bool per_token) {
  GrammarStats s = load_grammar(path).stats();
  std::cout << format_stats(s, per_token);
  print_kv({{"fragments", std::to_string(s.fragments)},
            {"avg_rank", fixed(s.average_rank, 4)},
            {"avg_rank_tokens", fixed(s.average_rank_tokens, 4)},
            {"labels", std::to_string(s.labels)}});
  return 0;
}

int run_roundtrip(const std::string &corpus, int restarts, uint64_t seed) {
  auto start = std::chrono::steady_clock::now();
  std::vector<Graph> golds = load_graphs(corpus);
  std::vector<Graph> preds;
  size_t failures = 0;
  for (size_t i = 0; i < golds.size(); ++i) {
    try {
      Replay r = replay(derivation_actions(extract_derivation(golds[i])));
      preds.push_back(finish(r.state));
    } catch (const std::exception &e) {
      ++failures;
      log(1, "graph " + std::to_string(i + 1) + ": " + e.what());
      preds.push_back(Graph());
    }
  }
  CorpusResult r = corpus_eval(preds, golds, restarts, seed);
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  std::cout << "graphs\tF1\n" << golds.size() << '\t' << fixed(r.total.f1) << '\n';
  print_kv({{"graphs", std::to_string(golds.size())},
            {"failures", std::to_string(failures)},
            {"F1", fixed(r.total.f1)},
            {"seconds", fixed(secs, 2)}});
  if (failures > 0 || r.total.matched != r.total.gold_total ||
      r.total.matched != r.total.pred_total) {
    throw CheckFailure("round trip is not the identity");
  }
  return 0;
}

struct SampleArgs {
  std::string grammar, out;
  int count = 10;
  uint64_t seed = kDefaultSeed;
  int depth_cap = 20;
};

int run_sample(const SampleArgs &a) {
  Grammar g = load_grammar(a.grammar);
  std::vector<Graph> graphs;
  size_t ill_formed = 0, failed = 0, nodes = 0;
  for (int i = 0; i < a.count; ++i) {
    try {
      Graph s = sample(g, a.seed + i, a.depth_cap);
      if (!validate(s).ok()) ++ill_formed;
      nodes += s.size();
      graphs.push_back(std::move(s));
    } catch (const SampleError &e) {
      ++failed;
      log(2, "seed " + std::to_string(a.seed + i) + ": " + e.what());
    }
  }
  if (!a.out.empty()) {
    std::ofstream out = open_out(a.out);
    write_penman_corpus(out, graphs);
  } else {
    write_penman_corpus(std::cout, graphs);
  }
  print_kv({{"samples", std::to_string(graphs.size())},
            {"failed", std::to_string(failed)},
            {"ill_formed", std::to_string(ill_formed)},
            {"mean_nodes",
             fixed(graphs.empty() ? 0.0 : double(nodes) / graphs.size(), 2)}});
  if (ill_formed > 0) throw CheckFailure("sampled an ill-formed graph");
  return 0;
}

// train / parse -------------------------------------------------------------

TrainConfig read_config(const std::string &path) {
  TrainConfig c;
  if (path.empty()) return c;
  std::ifstream in = open_in(path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path + ": " + e.what());
  }
  static const std::set<std::string> kKeys = {
      "learning_rate", "decay", "decay_every", "epochs", "seed", "restrict",
      "feature_gates", "stop_accuracy", "dims"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!kKeys.count(it.key())) throw DataError(path + ": unknown key " + it.key());
  }
  try {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.decay = j.value("decay", c.decay);
    c.decay_every = j.value("decay_every", c.decay_every);
    c.epochs = j.value("epochs", c.epochs);
    c.seed = j.value("seed", c.seed);
    c.restrict = j.value("restrict", c.restrict);
    c.feature_gates = j.value("feature_gates", c.feature_gates);
    c.stop_accuracy = j.value("stop_accuracy", c.stop_accuracy);
    if (j.contains("dims")) {
      const auto &d = j["dims"];
      c.dims.word = d.value("word", c.dims.word);
      c.dims.pretrained = d.value("pretrained", c.dims.pretrained);
      c.dims.feature = d.value("feature", c.dims.feature);
      c.dims.hidden = d.value("hidden", c.dims.hidden);
      c.dims.fragment = d.value("fragment", c.dims.fragment);
    }
  } catch (const nlohmann::json::exception &e) {
    throw DataError(path + ": " + e.what());
  }
  if (c.learning_rate <= 0 || c.epochs < 0) {
    throw DataError(path + ": learning_rate must be positive, epochs >= 0");
  }
  return c;
}

struct TrainArgs {
  std::string corpus, config, out, pretrained;
  int epochs = -1;
  long long seed = -1;
};

int run_train(const TrainArgs &a) {
  TrainConfig c = read_config(a.config);
  if (a.epochs >= 0) c.epochs = a.epochs;
  if (a.seed >= 0) c.seed = static_cast<uint64_t>(a.seed);
  std::vector<Sentence> corpus = load_sentences(a.corpus);
  std::vector<Graph> graphs;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].graph) {
      throw DataError("sentence " + std::to_string(i + 1) + " has no graph");
    }
    graphs.push_back(*corpus[i].graph);
  }
  Model m(build_grammar(graphs), Vocabularies::build(corpus), c.dims, c.seed,
          c.feature_gates);
  if (!a.pretrained.empty()) {
    std::ifstream in = open_in(a.pretrained);
    log(1, "pretrained vectors loaded: " + std::to_string(m.load_pretrained(in)));
  }
  auto start = std::chrono::steady_clock::now();
  std::vector<EpochStats> history;
  std::cout << "epoch\tlr\tloss\taccuracy\n";
  train_model(m, corpus, c, &history, [](const EpochStats &s) {
    std::cout << s.epoch << '\t' << s.learning_rate << '\t'
              << fixed(s.mean_loss, 4) << '\t' << fixed(s.accuracy, 4) << '\n';
  });
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start).count();
  std::ofstream out = open_out(a.out);
  m.save(out);
  print_kv({{"sentences", std::to_string(corpus.size())},
            {"epochs", std::to_string(history.size())},
            {"loss", history.empty() ? "nan" : fixed(history.back().mean_loss, 4)},
            {"accuracy",
             history.empty() ? "nan" : fixed(history.back().accuracy, 4)},
            {"seconds", fixed(secs, 2)}});
  return 0;
}

struct ParseArgs {
  std::string model, train, in, out;
  bool unrestricted = false;
  int depth_cap = 20;
};

int run_parse(const ParseArgs &a) {
  if (a.model.empty() == a.train.empty()) {
    throw CLI::ValidationError("parse", "give exactly one of --model, --baseline-train");
  }
  std::vector<Sentence> input = load_sentences(a.in);
  ParseOptions options{!a.unrestricted, a.depth_cap};
  ParseStats stats;
  std::vector<Graph> preds;
  if (!a.model.empty()) {
    std::ifstream in = open_in(a.model);
    Model m = Model::load(in);
    NeuralScorer scorer(m);
    for (const Sentence &s : input) {
      preds.push_back(parse(s.tokens, m.grammar(), scorer, options, &stats));
    }
  } else {
    std::vector<Sentence> train = load_sentences(a.train);
    std::vector<Graph> graphs;
    for (const Sentence &s : train) {
      if (s.graph) graphs.push_back(*s.graph);
    }
    Grammar g = build_grammar(graphs);
    CountScorer scorer(g);
    scorer.fit(train);
    for (const Sentence &s : input) {
      preds.push_back(parse(s.tokens, g, scorer, options, &stats));
    }
  }
  size_t ill_formed = 0;
  for (const Graph &g : preds) {
    if (!validate(g).ok()) ++ill_formed;
  }
  std::ofstream out = open_out(a.out);
  write_penman_corpus(out, preds);
  print_kv({{"sentences", std::to_string(stats.sentences)},
            {"ill_formed", std::to_string(ill_formed)},
            {"rank_rejections", std::to_string(stats.rank_rejections)},
            {"fallbacks", std::to_string(stats.fallbacks)}});
  if (ill_formed > 0) throw CheckFailure("parser produced an ill-formed graph");
  return 0;
}

// eval ----------------------------------------------------------------------

// Unparsable predictions become empty graphs, which score as ill-formed.
std::vector<Graph> load_predictions(const std::string &path) {
  std::ifstream in = open_in(path);
  std::vector<Graph> out;
  for (const std::string &block : read_blocks(in)) {
    try {
      out.push_back(parse_penman(block));
    } catch (const DataError &) {
      out.push_back(Graph());
    }
  }
  return out;
}

struct EvalArgs {
  std::string pred, gold;
  int restarts = kDefaultRestarts;
  uint64_t seed = kDefaultSeed;
  bool fine = false;
};

int run_eval(const EvalArgs &a) {
  std::vector<Graph> preds = load_predictions(a.pred);
  std::vector<Graph> golds = load_graphs(a.gold);
  if (preds.size() != golds.size()) {
    throw DataError("prediction and gold counts differ: " +
                    std::to_string(preds.size()) + " vs " +
                    std::to_string(golds.size()));
  }
  CorpusResult r = corpus_eval(preds, golds, a.restarts, a.seed);
  const MatchResult &t = r.total;
  std::cout << "P\tR\tF1\till-formed\n"
            << fixed(t.precision * 100, 2) << '\t' << fixed(t.recall * 100, 2)
            << '\t' << fixed(t.f1 * 100, 2) << '\t'
            << fixed(r.ill_formed_rate, 2) << '\n';
  std::vector<std::pair<std::string, std::string>> kv = {
      {"pairs", std::to_string(golds.size())},
      {"matched", std::to_string(t.matched)},
      {"pred_triples", std::to_string(t.pred_total)},
      {"gold_triples", std::to_string(t.gold_total)},
      {"precision", fixed(t.precision)},
      {"recall", fixed(t.recall)},
      {"F1", fixed(t.f1)},
      {"ill_formed", std::to_string(r.ill_formed)},
      {"ill_formed_rate", fixed(r.ill_formed_rate, 2)}};
  if (a.fine) {
    std::vector<std::string> order;
    std::map<std::string, CategoryScore> sums;
    for (size_t i = 0; i < golds.size(); ++i) {
      if (r.pairs[i].ill_formed) {
        // Gold triples still count against recall.
        for (const CategoryScore &c :
             fine_grained(golds[i], golds[i],
                          std::vector<int>(golds[i].size(), -1))) {
          if (!sums.count(c.name)) order.push_back(c.name);
          sums[c.name].name = c.name;
          sums[c.name].gold += c.gold;
        }
        continue;
      }
      for (const CategoryScore &c :
           fine_grained(preds[i], golds[i], r.pairs[i].mapping)) {
        if (!sums.count(c.name)) order.push_back(c.name);
        CategoryScore &s = sums[c.name];
        s.name = c.name;
        s.matched += c.matched;
        s.pred += c.pred;
        s.gold += c.gold;
      }
    }
    std::cout << "\ncategory\tF1\tmatched\tpred\tgold\n";
    for (const std::string &name : order) {
      CategoryScore &s = sums[name];
      double f1 = s.pred + s.gold ? 2.0 * s.matched / (s.pred + s.gold) : 0.0;
      std::cout << name << '\t' << fixed(f1 * 100, 2) << '\t' << s.matched
                << '\t' << s.pred << '\t' << s.gold << '\n';
      std::string key = "fine." + name;
      for (char &ch : key) {
        if (ch == ' ') ch = '_';
      }
      kv.push_back({key, fixed(f1)});
    }
  }
  print_kv(kv);
  return 0;
}

int run(int argc, char **argv) {
  CLI::App app{"DAG grammar parsing for discourse representation structures"};
  app.require_subcommand(1);

  ConvertArgs convert;
  auto *c = app.add_subcommand("convert", "convert between clauses and graphs");
  c->add_flag("--to-graph", convert.to_graph, "clause file to PENMAN corpus");
  c->add_flag("--to-boxes", convert.to_boxes, "PENMAN corpus to clause file");
  c->add_option("--in", convert.in, "input file")->required();
  c->add_option("--out", convert.out, "output file");
  c->add_option("--tokens", convert.tokens,
                "token file aligned with the clause documents");
  c->add_option("--sentences", convert.sentences,
                "sentence corpus to write from --tokens and the graphs")
      ->needs(c->get_option("--tokens"));
  c->add_flag("--score", convert.score,
              "score the clause -> graph -> clause round trip");

  std::string corpus, out;
  auto *e = app.add_subcommand("extract", "extract a grammar from graphs");
  e->add_option("--corpus", corpus, "PENMAN or sentence corpus")->required();
  e->add_option("--out", out, "grammar file")->required();

  std::string grammar_path;
  bool per_token = false;
  auto *st = app.add_subcommand("stats", "grammar statistics");
  st->add_option("grammar", grammar_path, "grammar file")->required();
  st->add_flag("--per-token", per_token, "average rank over occurrences");

  int restarts = kDefaultRestarts;
  uint64_t seed = kDefaultSeed;
  auto *rt = app.add_subcommand("roundtrip", "extract, replay and match");
  rt->add_option("--corpus", corpus, "PENMAN or sentence corpus")->required();
  rt->add_option("--restarts", restarts, "matcher restarts");
  rt->add_option("--seed", seed, "matcher seed");

  SampleArgs sample_args;
  auto *sa = app.add_subcommand("sample", "random derivations from a grammar");
  sa->add_option("--grammar", sample_args.grammar, "grammar file")->required();
  sa->add_option("--count", sample_args.count, "number of samples");
  sa->add_option("--seed", sample_args.seed, "first seed");
  sa->add_option("--depth-cap", sample_args.depth_cap, "soft depth limit");
  sa->add_option("--out", sample_args.out, "output file (default stdout)");

  TrainArgs train_args;
  auto *tr = app.add_subcommand("train", "train the neural scorer");
  tr->add_option("--corpus", train_args.corpus, "sentence corpus")->required();
  tr->add_option("--config", train_args.config, "JSON training config");
  tr->add_option("--out", train_args.out, "model checkpoint")->required();
  tr->add_option("--epochs", train_args.epochs, "override epochs");
  tr->add_option("--seed", train_args.seed, "override seed");
  tr->add_option("--pretrained", train_args.pretrained,
                 "word vectors, one `word v1 ... vn` per line");

  ParseArgs parse_args;
  auto *pa = app.add_subcommand("parse", "parse sentences into graphs");
  pa->add_option("--model", parse_args.model, "model checkpoint");
  pa->add_option("--baseline-train", parse_args.train,
                 "use the count baseline trained on this corpus");
  pa->add_option("--in", parse_args.in, "sentence corpus")->required();
  pa->add_option("--out", parse_args.out, "PENMAN output")->required();
  pa->add_flag("--unrestricted", parse_args.unrestricted,
               "score all productions, not only those of the right rank");
  pa->add_option("--depth-cap", parse_args.depth_cap, "soft depth limit");

  EvalArgs eval_args;
  auto *ev = app.add_subcommand("eval", "match predicted against gold graphs");
  ev->add_option("--pred", eval_args.pred, "PENMAN predictions")->required();
  ev->add_option("--gold", eval_args.gold, "PENMAN or sentence corpus")
      ->required();
  ev->add_option("--restarts", eval_args.restarts, "matcher restarts");
  ev->add_option("--seed", eval_args.seed, "matcher seed");
  ev->add_flag("--fine-grained", eval_args.fine, "per-category scores");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (c->parsed()) return run_convert(convert);
    if (e->parsed()) return run_extract(corpus, out);
    if (st->parsed()) return run_stats(grammar_path, per_token);
    if (rt->parsed()) return run_roundtrip(corpus, restarts, seed);
    if (sa->parsed()) return run_sample(sample_args);
    if (tr->parsed()) return run_train(train_args);
    if (pa->parsed()) return run_parse(parse_args);
    if (ev->parsed()) return run_eval(eval_args);
  } catch (const CLI::ValidationError &err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitUsage;
  } catch (const CheckFailure &err) {
    std::cerr << "check failed: " << err.what() << '\n';
    return kExitCheck;
  } catch (const std::exception &err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace
}  // namespace rnndag

int main(int argc, char **argv) { return rnndag::run(argc, argv); }
