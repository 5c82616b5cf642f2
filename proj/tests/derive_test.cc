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

#include <random>
#include <regex>
#include <set>

#include <gtest/gtest.h>

#include "fixtures.h"
#include "random_graphs.h"
#include "rnndag/derive.h"
#include "rnndag/penman.h"

namespace rnndag {
namespace {

using testing::ship_grammar;
using testing::ship_productions;

std::set<std::string> texts(const std::vector<Action> &actions) {
  std::set<std::string> out;
  for (const Action &a : actions) out.insert(a.production.to_string());
  return out;
}

std::set<std::string> production_texts(std::initializer_list<int> idx) {
  std::vector<Production> r = ship_productions();
  std::set<std::string> out;
  for (int i : idx) out.insert(r[i].to_string());
  return out;
}

Action frag(int i) { return Action::frag(ship_productions()[i]); }
Action label(const char *text) {
  return Action::gen_label(NodeLabel::from_string(text));
}

// GEN-FRAG/GEN-LABEL actions of the running example, r1..r7 as 0..6.
std::vector<Action> ship_actions() {
  return {frag(0), frag(4), frag(6), label("ship"),   frag(1),
          label("dock^p"), frag(4), frag(5), label("need"), frag(3),
          label("anchor"), frag(2), label("big")};
}

TEST(Derive, Start) {
  DerivationState s = DerivationState::start();
  EXPECT_FALSE(s.complete());
  EXPECT_EQ(s.pending(), 1u);
  EXPECT_EQ(s.partial_string(), "T0");
  EXPECT_EQ(s.graph().size(), 0u);
  EXPECT_EQ(texts(applicable_actions(s, ship_grammar(), true)),
            production_texts({0, 1, 2, 3}));
}

TEST(Derive, RestrictMasksByRank) {
  DerivationState s = DerivationState::start().apply(frag(0));
  EXPECT_EQ(s.top().rank, 1);
  EXPECT_EQ(texts(applicable_actions(s, ship_grammar(), true)),
            production_texts({4, 5, 6}));
  EXPECT_EQ(applicable_actions(s, ship_grammar(), false).size(), 7u);
}

TEST(Derive, LabelFrameOffersLabels) {
  DerivationState s = DerivationState::start().apply(frag(1));
  std::vector<Action> a = applicable_actions(
      s, ship_grammar(), true, {NodeLabel::from_string("boat")});
  ASSERT_EQ(a.size(), 6u);
  for (const Action &x : a) EXPECT_EQ(x.kind, Action::kGenLabel);
}

TEST(Derive, ApplyErrors) {
  DerivationState s = DerivationState::start().apply(frag(0));
  // Rank-0 production on the T1 frame.
  EXPECT_THROW(s.apply(frag(1)), BindingError);
  // $1 is referenced before anything binds it.
  EXPECT_THROW(s.apply(frag(5)), BindingError);
  EXPECT_FALSE(s.can_apply(ship_productions()[5]));
  EXPECT_THROW(s.apply(label("ship")), BindingError);
  DerivationState t = s.apply(frag(6));
  EXPECT_THROW(t.apply(frag(1)), BindingError);  // L frame on top
  EXPECT_THROW(DerivationState::start().apply(Action::reduce()),
               std::logic_error);
  // After x1 is bound the second T1(x1) may not bind again.
  DerivationState u = DerivationState::start();
  for (int i = 0; i < 6; ++i) u = u.apply(ship_actions()[i]);
  EXPECT_EQ(u.top().rank, 1);
  EXPECT_THROW(u.apply(frag(6)), BindingError);
  EXPECT_FALSE(u.can_apply(ship_productions()[6]));
  EXPECT_TRUE(u.can_apply(ship_productions()[5]));
}

TEST(Derive, SmallestDerivation) {
  DerivationState s = DerivationState::start().apply(frag(1));
  EXPECT_THROW(finish(s), std::logic_error);
  s = s.apply(label("ship"));
  ASSERT_TRUE(s.complete());
  EXPECT_EQ(print_penman(finish(s)), "(x1/ship)");
  EXPECT_EQ(s.reduce_count(), 1u);
  EXPECT_THROW(applicable_actions(s, ship_grammar(), true), std::logic_error);
}

TEST(Derive, PartialStringsOfRunningExample) {
  Replay r = replay(ship_actions(), true);
  auto expected = testing::ship_partial_strings();
  ASSERT_GE(r.trace.size(), expected.size());
  for (size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(r.trace[i].to_string(), expected[i].first) << i;
    EXPECT_EQ(r.partial_strings[i], expected[i].second) << i;
  }
  Graph g = finish(r.state);
  EXPECT_EQ(print_penman(g), testing::kShipString);
  size_t reduces = 0, frags = 0;
  for (const Action &a : r.trace) {
    reduces += a.kind == Action::kReduce;
    frags += a.kind == Action::kGenFrag;
  }
  EXPECT_EQ(frags, 8u);
  EXPECT_EQ(reduces, frags);
}

TEST(Derive, ReplayChecksExplicitReduces) {
  Derivation d = extract_derivation(testing::ship_graph());
  std::vector<Action> actions = derivation_actions(d);
  EXPECT_NO_THROW(replay(actions));
  std::vector<Action> early = actions;
  early.insert(early.begin() + 1, Action::reduce());
  EXPECT_THROW(replay(early), std::logic_error);
  std::vector<Action> missing = actions;
  missing.pop_back();
  EXPECT_THROW(replay(missing), std::logic_error);
}

TEST(Derive, ActionTextRoundTrip) {
  for (const Action &a : ship_actions()) {
    EXPECT_EQ(Action::from_string(a.to_string()), a);
  }
  EXPECT_EQ(Action::from_string("REDUCE").kind, Action::kReduce);
  EXPECT_THROW(Action::from_string("SHIFT"), DataError);
}

// Kind of the leftmost nonterminal in a partial string.
std::string leftmost_function(const std::string &s) {
  static const std::regex fn(R"((/L)[ )]|\b(T\d+))");
  std::smatch m;
  if (!std::regex_search(s, m, fn)) return "";
  return m[1].matched ? "L" : m[2].str();
}

void check_leftmost(const DerivationState &s) {
  const auto &top = s.top();
  std::string want = top.kind == DerivationState::FrameKind::kLabel
                         ? "L"
                         : "T" + std::to_string(top.rank);
  ASSERT_EQ(leftmost_function(s.partial_string()), want)
      << s.partial_string();
}

TEST(Derive, LeftmostDisciplineAlongReplay) {
  DerivationState s = DerivationState::start();
  for (const Action &a : ship_actions()) {
    check_leftmost(s);
    s = s.apply(a);
  }
  EXPECT_TRUE(s.complete());
}

TEST(Sample, ShipGrammar) {
  Graph g = sample(ship_grammar(), 1, 10);
  EXPECT_TRUE(validate(g).ok());
  EXPECT_EQ(print_penman(sample(ship_grammar(), 1, 10)), print_penman(g));
}

TEST(Sample, SingleProductionGrammar) {
  Grammar g;
  g.add(Production::from_string("T0 -> (x/L)"));
  for (uint64_t seed = 0; seed < 20; ++seed) {
    EXPECT_EQ(print_penman(sample(g, seed, 5)), "(x1/entity)");
  }
  g.add_label(NodeLabel::from_string("ship"));
  EXPECT_EQ(print_penman(sample(g, 3, 5)), "(x1/ship)");
}

TEST(Sample, NonTerminatingGrammar) {
  Grammar g;
  g.add(Production::from_string("T0 -> (x/L :A T0)"));
  EXPECT_THROW(sample(g, 1, 5), SampleError);
  Grammar h;
  h.add(Production::from_string("T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))"));
  h.add(Production::from_string("T1($1) -> (b/□ :Drs T1($1))"));
  EXPECT_THROW(sample(h, 1, 5), SampleError);
}

void sweep(const Grammar &g, int seeds, int depth_cap) {
  int ill = 0;
  for (int seed = 0; seed < seeds; ++seed) {
    std::vector<Action> trace;
    Graph out = sample(g, seed, depth_cap, &trace);
    if (!validate(out).ok()) ++ill;
    size_t frags = 0, reduces = 0;
    for (const Action &a : trace) {
      frags += a.kind == Action::kGenFrag;
      reduces += a.kind == Action::kReduce;
    }
    ASSERT_EQ(frags, reduces);
    ASSERT_EQ(frags, out.size());
    // The trace replays to the same graph.
    ASSERT_EQ(print_penman(finish(replay(trace).state)), print_penman(out));
  }
  EXPECT_EQ(ill, 0);
}

TEST(Sample, WellFormednessSweepShipGrammar) { sweep(ship_grammar(), 10000, 20); }

TEST(Sample, WellFormednessSweepExtractedGrammar) {
  std::mt19937_64 rng(21);
  std::vector<Graph> corpus;
  for (int i = 0; i < 200; ++i) corpus.push_back(testing::random_dag(rng));
  Grammar g = build_grammar(corpus);
  sweep(g, 1000, 8);
}

TEST(Sample, LeftmostDisciplineWhileSampling) {
  Grammar g = ship_grammar();
  std::vector<Action> trace;
  for (int seed = 0; seed < 200; ++seed) {
    sample(g, seed, 8, &trace);
    DerivationState s = DerivationState::start();
    for (const Action &a : trace) {
      if (a.kind == Action::kReduce) continue;
      check_leftmost(s);
      s = s.apply(a);
    }
  }
}

}  // namespace
}  // namespace rnndag
