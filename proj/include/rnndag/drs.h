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

// Discourse representation structures and their conversion to DAGs.
//
// Clause files hold one clause per line:
//
//   b2 REF x1              discourse referent x1 of box b2
//   b2 COND ship~n.01 x1   unary condition, optional sense
//   b2 COND PartOf x1 x2   binary condition
//   b1 OP IMP b2 b3        operator or discourse relation over boxes
//   b4 PRESUP b2           b4 is presupposed by (anchored in) b2
//
// Documents are separated by blank lines; '#' starts a comment line.

#ifndef RNNDAG_DRS_H_
#define RNNDAG_DRS_H_

#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "rnndag/eval.h"
#include "rnndag/graph.h"
#include "rnndag/triples.h"

namespace rnndag {

struct Condition {
  enum Kind { kUnary, kBinary };
  Kind kind = kUnary;
  std::string predicate;
  std::vector<std::string> args;
  std::optional<std::string> sense;

  friend bool operator==(const Condition &, const Condition &) = default;
};

struct Box {
  std::string id;
  std::vector<std::string> referents;
  std::vector<Condition> conditions;
};

struct Operator {
  std::string box;
  std::string name;               // e.g. IMP, NOT, RESULT
  std::vector<std::string> args;  // one or two boxes
};

struct Presupposition {
  std::string box;     // the presupposed box
  std::string anchor;  // the box that presupposes it
};

struct BoxStructure {
  // In order of first mention.
  std::vector<Box> boxes;
  std::vector<Operator> operators;
  std::vector<Presupposition> presuppositions;

  const Box *find(std::string_view id) const;
  bool presuppositional(std::string_view id) const;
  size_t clause_count() const;
};

// Throws DataError on an unknown keyword, a wrong number of arguments, an
// operator or presupposition naming an undeclared box, or a condition over
// a variable that no box introduces.
BoxStructure parse_clauses(std::string_view text);
std::string print_clauses(const BoxStructure &bs);

std::vector<BoxStructure> read_clause_corpus(std::istream &in);
void write_clause_corpus(std::ostream &out,
                         const std::vector<BoxStructure> &docs);

// Lemma of a referent that has no unary condition.
inline constexpr char kUntypedLemma[] = "*";

struct ConversionConfig {
  // Predicates whose names end in "Of" without having been reversed.
  std::set<std::string> inherent_of = {"PartOf"};
};

class ConversionError : public DataError {
 public:
  using DataError::DataError;
};

// Boxes and referents become nodes, conditions and operators edges. Extra
// roots are removed by reversing edges and suffixing "Of". Throws
// ConversionError when the result would not be a well-formed graph.
Graph boxes_to_graph(const BoxStructure &bs,
                     const ConversionConfig &config = {});

// Inverse of boxes_to_graph up to condition order and box names of
// presuppositional boxes. Throws DataError unless g validates and has a
// box-sorted root.
BoxStructure graph_to_boxes(const Graph &g,
                            const ConversionConfig &config = {});

// Original predicate of an edge label and whether the edge was reversed.
std::pair<std::string, bool> unreverse(const std::string &label,
                                       const ConversionConfig &config = {});

// Clause-level triples used to score conversions: one per box, referent
// and clause, with conditions tied to the box that holds them.
TripleSet box_triples(const BoxStructure &bs);

struct ConversionFailure {
  size_t index;
  std::string reason;
};

struct ConversionScore {
  MatchResult total;  // micro-averaged over documents
  size_t documents = 0;
  std::vector<ConversionFailure> failures;
  // Documents whose round trip did not score 1.0, with their F1.
  std::vector<std::pair<size_t, double>> imperfect;
};

// Runs graph_to_boxes(boxes_to_graph(doc)) on each document and matches
// the result against the original. Failed conversions match nothing.
ConversionScore conversion_score(const std::vector<BoxStructure> &docs,
                                 const ConversionConfig &config = {},
                                 int restarts = kDefaultRestarts,
                                 uint64_t seed = kDefaultSeed);

}  // namespace rnndag

#endif  // RNNDAG_DRS_H_
