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

// Shared test data: the running example "Every ship in the dock needs a big
// anchor" and the seven productions that derive it.

#ifndef RNNDAG_TESTS_FIXTURES_H_
#define RNNDAG_TESTS_FIXTURES_H_

#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "rnndag/corpus.h"
#include "rnndag/grammar.h"
#include "rnndag/graph.h"
#include "rnndag/penman.h"

namespace rnndag::testing {

inline const char kShipString[] =
    "(b1/□ :Imp1 (b2/□ :Drs (x1/ship :PartOf (x2/dock^p))) "
    ":Imp2 (b3/□ :Drs (e1/need :Pivot x1 :Theme (x3/anchor "
    ":TopicOf (s1/big)))))";

inline const char kShipSensed[] =
    "(b1/□ :Imp1 (b2/□ :Drs (x1/ship~n.01 :PartOf (x2/dock~n.01^p))) "
    ":Imp2 (b3/□ :Drs (e1/need~v.01 :Pivot x1 :Theme (x3/anchor~n.01 "
    ":TopicOf (s1/big~a.01)))))";

inline const char kShipClauses[] =
    "b2 REF x1\n"
    "b2 COND ship x1\n"
    "b2 COND PartOf x1 x2\n"
    "b3 REF e1 s1 x3\n"
    "b3 COND need e1\n"
    "b3 COND Pivot e1 x1\n"
    "b3 COND Theme e1 x3\n"
    "b3 COND anchor x3\n"
    "b3 COND big s1\n"
    "b3 COND Topic s1 x3\n"
    "b4 REF x2\n"
    "b4 COND dock x2\n"
    "b1 OP IMP b2 b3\n"
    "b4 PRESUP b2\n";

inline Graph ship_graph() { return parse_penman(kShipString); }

inline const char kShipSentence[] =
    "Every every DT AND det\n"
    "ship ship NN CON nsubj\n"
    "in in IN REL case\n"
    "the the DT DEF det\n"
    "dock dock NN CON nmod\n"
    "needs need VBZ ENS root\n"
    "a a DT DIS det\n"
    "big big JJ IST amod\n"
    "anchor anchor NN CON obj\n"
    ". . . NIL punct\n";

// The example sentence with its gold graph.
inline Sentence ship_sentence() {
  std::istringstream in(kShipSentence);
  Sentence s = read_sentence_corpus(in).front();
  s.graph = ship_graph();
  return s;
}

// r1..r7 in order.
inline std::vector<std::string> ship_production_texts() {
  return {
      "T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))",
      "T0 -> (x/L)",
      "T0 -> (s/L)",
      "T0 -> (x/L :TopicOf T0)",
      "T1($1) -> (b/□ :Drs T1($1))",
      "T1($1) -> (e/L :Pivot $1 :Theme T0)",
      "T1(x) -> (x/L :PartOf T0)",
  };
}

// Each action of the running example with the partial string
// after it, up to the label of e1.
inline std::vector<std::pair<std::string, std::string>>
ship_partial_strings() {
  const std::string b2 = "(b2/□ :Drs (x1/ship :PartOf (x2/dock^p)))";
  return {
      {"FRAG T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))",
       "(b1/□ :Imp1 T1($1) :Imp2 T1($1))"},
      {"FRAG T1($1) -> (b/□ :Drs T1($1))",
       "(b1/□ :Imp1 (b2/□ :Drs T1($1)) :Imp2 T1($1))"},
      {"FRAG T1(x) -> (x/L :PartOf T0)",
       "(b1/□ :Imp1 (b2/□ :Drs (x1/L :PartOf T0)) :Imp2 T1(x1))"},
      {"LABEL ship",
       "(b1/□ :Imp1 (b2/□ :Drs (x1/ship :PartOf T0)) :Imp2 T1(x1))"},
      {"FRAG T0 -> (x/L)",
       "(b1/□ :Imp1 (b2/□ :Drs (x1/ship :PartOf (x2/L))) :Imp2 T1(x1))"},
      {"LABEL dock^p", "(b1/□ :Imp1 " + b2 + " :Imp2 T1(x1))"},
      {"REDUCE", "(b1/□ :Imp1 " + b2 + " :Imp2 T1(x1))"},
      {"REDUCE", "(b1/□ :Imp1 " + b2 + " :Imp2 T1(x1))"},
      {"REDUCE", "(b1/□ :Imp1 " + b2 + " :Imp2 T1(x1))"},
      {"FRAG T1($1) -> (b/□ :Drs T1($1))",
       "(b1/□ :Imp1 " + b2 + " :Imp2 (b3/□ :Drs T1(x1)))"},
      {"FRAG T1($1) -> (e/L :Pivot $1 :Theme T0)",
       "(b1/□ :Imp1 " + b2 + " :Imp2 (b3/□ :Drs (e1/L :Pivot x1 :Theme T0)))"},
      {"LABEL need", "(b1/□ :Imp1 " + b2 +
                         " :Imp2 (b3/□ :Drs (e1/need :Pivot x1 :Theme T0)))"},
  };
}

inline std::vector<Production> ship_productions() {
  std::vector<Production> out;
  for (const std::string &text : ship_production_texts()) {
    out.push_back(Production::from_string(text));
  }
  return out;
}

inline Grammar ship_grammar() {
  Grammar g;
  for (const Production &p : ship_productions()) g.add(p);
  for (const char *label : {"ship", "dock^p", "need", "anchor", "big"}) {
    g.add_label(NodeLabel::from_string(label));
  }
  return g;
}

}  // namespace rnndag::testing

#endif  // RNNDAG_TESTS_FIXTURES_H_
