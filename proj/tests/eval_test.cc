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

#include <map>
#include <random>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "random_graphs.h"
#include "rnndag/eval.h"
#include "rnndag/penman.h"

namespace rnndag {
namespace {

using testing::ship_graph;

std::map<std::string, CategoryScore> by_name(
    const std::vector<CategoryScore> &rows) {
  std::map<std::string, CategoryScore> out;
  for (const CategoryScore &r : rows) out[r.name] = r;
  return out;
}

TEST(Match, Identity) {
  MatchResult r = match(ship_graph(), ship_graph());
  EXPECT_EQ(r.matched, 18u);
  EXPECT_EQ(r.f1, 1.0);
  EXPECT_FALSE(r.ill_formed);
  std::mt19937_64 rng(1);
  for (int i = 0; i < 300; ++i) {
    Graph g = testing::random_dag(rng);
    EXPECT_EQ(match(g, g).f1, 1.0) << print_penman(g);
    EXPECT_EQ(match(g, canonical_rename(g)).f1, 1.0);
  }
}

TEST(Match, SingleConceptChange) {
  Graph gold = ship_graph();
  Graph pred = gold;
  pred.find("x1")->label.lemma = "boat";
  const double total = static_cast<double>(to_triples(gold).size());
  MatchResult r = match(pred, gold);
  EXPECT_DOUBLE_EQ(r.recall, (total - 1) / total);
  EXPECT_DOUBLE_EQ(r.precision, (total - 1) / total);
}

TEST(Match, ReportedCountAgreesWithMapping) {
  std::mt19937_64 rng(2);
  testing::RandomGraphOptions opt;
  opt.max_nodes = 10;
  for (int i = 0; i < 200; ++i) {
    Graph a = testing::random_dag(rng, opt), b = testing::random_dag(rng, opt);
    TripleSet ta = to_triples(a), tb = to_triples(b);
    MatchResult r = match(ta, tb);
    EXPECT_EQ(count_matches(ta, tb, r.mapping), r.matched);
    EXPECT_LE(r.matched, std::min(ta.size(), tb.size()));
  }
}

TEST(BruteForce, Identity) {
  MatchResult r = brute_force_match(ship_graph(), ship_graph());
  EXPECT_EQ(r.f1, 1.0);
}

TEST(BruteForce, SingleNodeAgainstTwo) {
  Graph pred = parse_penman("(x1/ship)");
  Graph gold = parse_penman("(x1/ship :A (x2/ship))");
  // x1 -> x1 matches instance and top; x1 -> x2 only the instance.
  MatchResult r = brute_force_match(pred, gold);
  EXPECT_EQ(r.matched, 2u);
  EXPECT_EQ(r.pred_total, 2u);
  EXPECT_EQ(r.gold_total, 4u);
  EXPECT_DOUBLE_EQ(r.precision, 1.0);
  EXPECT_DOUBLE_EQ(r.recall, 0.5);
  EXPECT_EQ(r.mapping, std::vector<int>{0});
}

TEST(BruteForce, SizeGuard) {
  std::string text = "(x1/a";
  for (int i = 2; i <= 9; ++i) text += " :R (x" + std::to_string(i) + "/a)";
  text += ")";
  Graph big = parse_penman(text);
  EXPECT_THROW(brute_force_match(big, big), std::length_error);
  EXPECT_NO_THROW(brute_force_match(parse_penman("(x1/a)"), big));
}

// Random pairs with at most six variables each; half are perturbed copies.
std::pair<Graph, Graph> random_pair(std::mt19937_64 &rng) {
  testing::RandomGraphOptions opt;
  opt.max_nodes = 6;
  opt.extra_edge_rate = 0.3;
  Graph a = testing::random_dag(rng, opt);
  if (rng() % 2) return {a, testing::random_dag(rng, opt)};
  Graph b = a;
  for (Node &n : b.mutable_nodes()) {
    if (rng() % 3 == 0 && !n.label.is_box()) n.label.lemma = "cat";
    if (rng() % 4 == 0 && !n.outgoing.empty()) n.outgoing[0].label = "Theme";
  }
  return {b, a};
}

TEST(Match, AgreesWithBruteForce) {
  std::mt19937_64 rng(2024);
  int equal = 0;
  for (int i = 0; i < 100; ++i) {
    auto [pred, gold] = random_pair(rng);
    MatchResult hill = match(pred, gold, 20, 1234);
    MatchResult exact = brute_force_match(pred, gold);
    ASSERT_LE(hill.matched, exact.matched);
    equal += hill.matched == exact.matched;
  }
  EXPECT_GE(equal, 95);
}

TEST(Match, Deterministic) {
  std::mt19937_64 rng(8);
  testing::RandomGraphOptions opt;
  opt.max_nodes = 12;
  for (int i = 0; i < 50; ++i) {
    Graph a = testing::random_dag(rng, opt), b = testing::random_dag(rng, opt);
    MatchResult r1 = match(a, b, 10, 99), r2 = match(a, b, 10, 99);
    EXPECT_EQ(r1.matched, r2.matched);
    EXPECT_EQ(r1.mapping, r2.mapping);
  }
}

TEST(Match, MonotoneInRestarts) {
  std::mt19937_64 rng(12);
  testing::RandomGraphOptions opt;
  opt.max_nodes = 14;
  for (int i = 0; i < 30; ++i) {
    Graph a = testing::random_dag(rng, opt), b = testing::random_dag(rng, opt);
    size_t last = 0;
    for (int restarts = 1; restarts <= 25; ++restarts) {
      size_t m = match(a, b, restarts, 5).matched;
      EXPECT_GE(m, last);
      last = m;
    }
  }
}

TEST(Match, IllFormedPredictionScoresZero) {
  Graph pred = parse_penman("(x1/a :R (x2/b))");
  pred.add_edge("x2", "Back", "x1");
  MatchResult r = match(pred, ship_graph());
  EXPECT_TRUE(r.ill_formed);
  EXPECT_EQ(r.matched, 0u);
  EXPECT_EQ(r.f1, 0.0);
  EXPECT_EQ(r.gold_total, 18u);
}

TEST(FineGrained, IdenticalGraphs) {
  Graph g = parse_penman(testing::kShipSensed);
  MatchResult m = match(g, g);
  for (const CategoryScore &c : fine_grained(g, g, m.mapping)) {
    if (c.gold == 0 && c.pred == 0) continue;  // category absent
    EXPECT_EQ(c.f1, 1.0) << c.name;
  }
}

TEST(FineGrained, SenseChangeOnlyHitsNouns) {
  Graph gold = parse_penman(testing::kShipSensed);
  Graph pred = gold;
  pred.find("x2")->label.sense = "n.02";
  MatchResult m = match(pred, gold);
  auto rows = by_name(fine_grained(pred, gold, m.mapping));
  EXPECT_LT(rows["Nouns"].f1, 1.0);
  EXPECT_LT(rows["Synsets"].f1, 1.0);
  EXPECT_LT(rows["all clauses"].f1, 1.0);
  for (const char *name : {"DRS operators", "Roles", "Concepts",
                           "Presuppositions", "Verbs", "Adjectives",
                           "-sense"}) {
    EXPECT_EQ(rows[name].f1, 1.0) << name;
  }
  EXPECT_EQ(rows["Nouns"].matched, 2u);
  EXPECT_EQ(rows["Nouns"].gold, 3u);
}

TEST(FineGrained, CategoriesPartitionTriples) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 300; ++i) {
    Graph g = testing::random_dag(rng);
    auto rows = by_name(fine_grained(g, g, match(g, g).mapping));
    size_t parts = 0;
    for (const char *name : {"DRS operators", "Roles", "Concepts",
                             "Presuppositions", "Nouns", "Verbs", "Adverbs",
                             "Adjectives", "Other senses"}) {
      parts += rows[name].gold;
    }
    TripleSet t = to_triples(g);
    EXPECT_EQ(parts, t.size() - 1);
    EXPECT_EQ(rows["all clauses"].gold, t.size() - 1);
    EXPECT_EQ(rows["Synsets"].gold, rows["Nouns"].gold + rows["Verbs"].gold +
                                        rows["Adverbs"].gold +
                                        rows["Adjectives"].gold +
                                        rows["Other senses"].gold);
    EXPECT_EQ(rows["-sense"].gold,
              rows["all clauses"].gold - rows["Synsets"].gold);
  }
}

TEST(FineGrained, SenseCategories) {
  EXPECT_EQ(sense_category("n.01"), "Nouns");
  EXPECT_EQ(sense_category("v"), "Verbs");
  EXPECT_EQ(sense_category("a.01"), "Adjectives");
  EXPECT_EQ(sense_category("s.01"), "Adjectives");
  EXPECT_EQ(sense_category("r.02"), "Adverbs");
  EXPECT_EQ(sense_category("x.01"), "Other senses");
}

TEST(CorpusEval, IdenticalCorpora) {
  std::mt19937_64 rng(6);
  std::vector<Graph> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(testing::random_dag(rng));
  CorpusResult r = corpus_eval(corpus, corpus);
  EXPECT_EQ(r.total.f1, 1.0);
  EXPECT_EQ(r.ill_formed, 0u);
  EXPECT_EQ(r.ill_formed_rate, 0.0);
  EXPECT_EQ(r.pairs.size(), 50u);
}

TEST(CorpusEval, IllFormedRateAndMismatch) {
  Graph bad = parse_penman("(x1/a :R (x2/b))");
  bad.add_edge("x2", "Back", "x1");
  std::vector<Graph> gold = {ship_graph(), ship_graph(), ship_graph(),
                             ship_graph()};
  std::vector<Graph> pred = {ship_graph(), bad, ship_graph(), ship_graph()};
  CorpusResult r = corpus_eval(pred, gold);
  EXPECT_EQ(r.ill_formed, 1u);
  EXPECT_DOUBLE_EQ(r.ill_formed_rate, 25.0);
  EXPECT_EQ(r.total.matched, 54u);
  EXPECT_EQ(r.total.gold_total, 72u);
  EXPECT_DOUBLE_EQ(r.total.precision, 1.0);
  pred.pop_back();
  EXPECT_THROW(corpus_eval(pred, gold), std::invalid_argument);
}

}  // namespace
}  // namespace rnndag
