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
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "random_graphs.h"
#include "rnndag/graph.h"
#include "rnndag/penman.h"
#include "rnndag/triples.h"

namespace rnndag {
namespace {

using testing::kShipString;
using testing::ship_graph;

TEST(Penman, ParsesShipString) {
  Graph g = ship_graph();
  EXPECT_EQ(g.size(), 8u);
  EXPECT_EQ(g.edge_count(), 8u);
  EXPECT_EQ(g.root(), "b1");
  const Node *e1 = g.find("e1");
  ASSERT_NE(e1, nullptr);
  ASSERT_EQ(e1->outgoing.size(), 2u);
  EXPECT_EQ(e1->outgoing[0].label, "Pivot");
  EXPECT_EQ(e1->outgoing[0].target, "x1");
  EXPECT_TRUE(e1->outgoing[0].reentrant);
  EXPECT_FALSE(e1->outgoing[1].reentrant);
  const Node *x2 = g.find("x2");
  EXPECT_EQ(x2->label.lemma, "dock");
  EXPECT_TRUE(x2->label.presupposed);
  EXPECT_TRUE(g.find("b2")->label.is_box());
  EXPECT_EQ(g.find("s1")->sort, 's');
}

TEST(Penman, PrintsShipStringBack) {
  EXPECT_EQ(print_penman(ship_graph()), kShipString);
}

TEST(Penman, WhitespaceInsensitive) {
  Graph g = parse_penman(
      "(b1/□\n  :Imp1 (b2/□\n    :Drs (x1/ship\n      :PartOf (x2/dock^p)))\n"
      "  :Imp2 (b3/□ :Drs (e1/ need :Pivot x1\n :Theme (x3/ anchor "
      ":TopicOf (s1/ big)))))");
  EXPECT_EQ(print_penman(g), kShipString);
}

TEST(Penman, SingleNode) {
  Graph g = parse_penman("(x1/ship)");
  EXPECT_EQ(g.size(), 1u);
  EXPECT_EQ(g.root(), "x1");
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_EQ(print_penman(g), "(x1/ship)");
}

TEST(Penman, LabelMarkers) {
  Graph g = parse_penman("(x1/dock~n.01^p)");
  const NodeLabel &l = g.nodes()[0].label;
  EXPECT_EQ(l.lemma, "dock");
  EXPECT_EQ(l.sense, "n.01");
  EXPECT_TRUE(l.presupposed);
  EXPECT_EQ(l.to_string(), "dock~n.01^p");
}

TEST(Penman, Errors) {
  EXPECT_THROW(parse_penman("(b1/□ :Drs (x1/cat) :Agent x2)"), DataError);
  EXPECT_THROW(parse_penman("(x1/ship"), DataError);
  EXPECT_THROW(parse_penman("(x1/ship))"), DataError);
  EXPECT_THROW(parse_penman("(x1/ship :A (x1/dock))"), DataError);
  EXPECT_THROW(parse_penman("(x1/ship : (x2/dock))"), DataError);
  EXPECT_THROW(parse_penman("(q1/ship)"), DataError);
  EXPECT_NO_THROW(parse_penman("(q1/ship)", SortSet("q")));
}

TEST(Penman, UnboundMessageNamesVariable) {
  try {
    parse_penman("(b1/□ :Drs (x1/cat) :Agent x2)");
    FAIL();
  } catch (const DataError &e) {
    EXPECT_NE(std::string(e.what()).find("unbound variable"),
              std::string::npos);
    EXPECT_NE(std::string(e.what()).find("x2"), std::string::npos);
  }
}

TEST(Penman, CorpusBlocksAndComments) {
  std::istringstream in("# a comment\n(x1/ship)\n\n\n# c\n(b1/□ :Drs "
                        "(x1/cat))\n");
  std::vector<Graph> graphs = read_penman_corpus(in);
  ASSERT_EQ(graphs.size(), 2u);
  std::ostringstream out;
  write_penman_corpus(out, graphs);
  std::istringstream again(out.str());
  EXPECT_EQ(read_penman_corpus(again).size(), 2u);
}

// Tokenizes printed output and checks each variable is defined once.
void expect_single_definitions(const std::string &text, const Graph &g) {
  std::map<std::string, int> defs;
  std::regex def(R"(\(([a-z][0-9]+)/)");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), def);
       it != std::sregex_iterator(); ++it) {
    ++defs[(*it)[1]];
  }
  ASSERT_EQ(defs.size(), g.size());
  for (const auto &[var, n] : defs) EXPECT_EQ(n, 1) << var;
}

TEST(Penman, ParsePrintFixpointOnRandomGraphs) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    Graph g = testing::random_dag(rng);
    ASSERT_TRUE(validate(g).ok()) << validate(g).to_string();
    std::string text = print_penman(g);
    expect_single_definitions(text, g);
    Graph back = parse_penman(text);
    EXPECT_TRUE(isomorphic(back, g)) << text;
    EXPECT_EQ(print_penman(back), text);
  }
}

TEST(Penman, DiamondHasOneSubtree) {
  Graph g;
  g.add_node("x1", NodeLabel{"a", {}, false});
  g.add_node("x2", NodeLabel{"b", {}, false});
  g.add_node("x3", NodeLabel{"c", {}, false});
  g.add_node("x4", NodeLabel{"d", {}, false});
  g.add_edge("x1", "L", "x2");
  g.add_edge("x1", "R", "x3");
  g.add_edge("x2", "D", "x4");
  g.add_edge("x3", "D", "x4");
  g.set_root("x1");
  std::string text = print_penman(g);
  EXPECT_EQ(text, "(x1/a :L (x2/b :D (x4/d)) :R (x3/c :D x4))");
  expect_single_definitions(text, g);
}

TEST(Validate, ShipGraphIsWellFormed) {
  EXPECT_TRUE(validate(ship_graph()).ok());
}

TEST(Validate, TwoCycle) {
  Graph g = parse_penman("(b1/□ :Drs (s1/big :Attr (x3/anchor)))");
  g.add_edge("x3", "Back", "s1");
  EXPECT_TRUE(validate(g).has(Violation::kCycle));
}

TEST(Validate, TwoIsolatedNodes) {
  Graph g;
  g.add_node("x1", NodeLabel{"a", {}, false});
  g.add_node("x2", NodeLabel{"b", {}, false});
  g.set_root("x1");
  auto r = validate(g);
  EXPECT_TRUE(r.has(Violation::kDisconnected));
  EXPECT_TRUE(r.has(Violation::kMultipleRoots));
}

TEST(Validate, UnlabeledAndDuplicate) {
  Graph g;
  g.add_node("x1", NodeLabel{"", {}, false});
  g.add_node("x1", NodeLabel{"a", {}, false});
  g.set_root("x1");
  auto r = validate(g);
  EXPECT_TRUE(r.has(Violation::kUnlabeledNode));
  EXPECT_TRUE(r.has(Violation::kDuplicateId));
}

TEST(Validate, DanglingEdge) {
  Graph g = parse_penman("(x1/a)");
  g.add_edge("x1", "A", "x9");
  EXPECT_TRUE(validate(g).has(Violation::kDanglingEdge));
}

TEST(Validate, EmptyGraph) { EXPECT_FALSE(validate(Graph()).ok()); }

// Transitive-closure oracle over an adjacency matrix, with node 0 as the
// declared root.
struct Oracle {
  bool acyclic = true;
  bool ok = true;
};

Oracle closure_oracle(int n, const std::vector<std::pair<int, int>> &edges) {
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (auto [a, b] : edges) reach[a][b] = true;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        if (reach[i][k] && reach[k][j]) reach[i][j] = true;
  Oracle o;
  for (int i = 0; i < n; ++i) {
    if (reach[i][i]) o.acyclic = false;
  }
  bool root_free = true;
  for (auto [a, b] : edges) {
    if (b == 0) root_free = false;
  }
  bool all_reached = true;
  for (int j = 1; j < n; ++j) {
    if (!reach[0][j]) all_reached = false;
  }
  o.ok = o.acyclic && root_free && all_reached;
  return o;
}

Graph numbered_graph(int n, const std::vector<std::pair<int, int>> &edges) {
  Graph g;
  for (int i = 0; i < n; ++i) {
    g.add_node("x" + std::to_string(i + 1), NodeLabel{"n", {}, false});
  }
  for (auto [a, b] : edges) {
    g.add_edge("x" + std::to_string(a + 1), "E", "x" + std::to_string(b + 1));
  }
  g.set_root("x1");
  return g;
}

void check_against_oracle(int n,
                          const std::vector<std::pair<int, int>> &edges) {
  Graph g = numbered_graph(n, edges);
  Oracle o = closure_oracle(n, edges);
  WellFormednessReport r = validate(g);
  ASSERT_EQ(r.ok(), o.ok) << r.to_string();
  ASSERT_EQ(r.has(Violation::kCycle), !o.acyclic);
}

TEST(Validate, ExhaustiveEdgeSubsetsUpToFourNodes) {
  for (int n = 1; n <= 4; ++n) {
    std::vector<std::pair<int, int>> pairs;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) pairs.push_back({a, b});
    const uint64_t subsets = uint64_t{1} << pairs.size();
    for (uint64_t mask = 0; mask < subsets; ++mask) {
      std::vector<std::pair<int, int>> edges;
      for (size_t k = 0; k < pairs.size(); ++k) {
        if (mask >> k & 1) edges.push_back(pairs[k]);
      }
      check_against_oracle(n, edges);
    }
  }
}

// Beyond four nodes the subset space is too large to enumerate; sample it.
TEST(Validate, SampledEdgeSubsetsUpToEightNodes) {
  std::mt19937_64 rng(11);
  for (int n = 5; n <= 8; ++n) {
    for (int trial = 0; trial < 5000; ++trial) {
      double density = (trial % 10 + 1) / 20.0;
      std::bernoulli_distribution keep(density);
      std::vector<std::pair<int, int>> edges;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
          if (keep(rng)) edges.push_back({a, b});
      check_against_oracle(n, edges);
    }
  }
}

TEST(Graph, CanonicalRenameAndIsomorphism) {
  Graph g = parse_penman("(x7/a :R (e3/b :S (x4/c)) :T x4)");
  Graph c = canonical_rename(g);
  EXPECT_EQ(print_penman(c), "(x1/a :R (e1/b :S (x2/c)) :T x2)");
  EXPECT_TRUE(isomorphic(g, c));
  EXPECT_FALSE(
      isomorphic(g, parse_penman("(x1/a :R (e1/b :S (x2/d)) :T x2)")));
}

TEST(Triples, ShipCounts) {
  TripleSet t = to_triples(ship_graph());
  EXPECT_EQ(t.count(TripleKind::kInstance), 8u);
  EXPECT_EQ(t.count(TripleKind::kRelation), 8u);
  EXPECT_EQ(t.count(TripleKind::kTop), 1u);
  EXPECT_EQ(t.count(TripleKind::kAttribute), 1u);
  EXPECT_EQ(t.size(), 18u);
  bool found = false;
  for (const Triple &tr : t.triples) {
    if (tr.kind == TripleKind::kAttribute) {
      EXPECT_EQ(tr.source, "x2");
      EXPECT_EQ(tr.relation, kPresupposedRelation);
      found = true;
    }
  }
  EXPECT_TRUE(found);
}

TEST(Triples, SingleNode) {
  TripleSet t = to_triples(parse_penman("(x1/ship)"));
  EXPECT_EQ(t.size(), 2u);
  EXPECT_EQ(t.count(TripleKind::kTop), 1u);
}

TEST(Triples, CountingOracleOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    Graph g = testing::random_dag(rng);
    size_t attributes = 0;
    for (const Node &n : g.nodes()) {
      attributes += n.label.sense.has_value() + n.label.presupposed;
    }
    EXPECT_EQ(to_triples(g).size(), g.size() + g.edge_count() + 1 + attributes);
  }
}

}  // namespace
}  // namespace rnndag
