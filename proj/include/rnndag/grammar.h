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

// Restricted DAG grammar written as string rewriting.
//
// A production rewrites a ranked nonterminal T_i($1, ..., $i) into a single
// node and its outgoing edges:
//
//   T0 -> (b/□ :Imp1 T1($1) :Imp2 T1($1))
//   T1($1) -> (e/L :Pivot $1 :Theme T0)
//   T1(x) -> (x/L :PartOf T0)
//
// Each edge points either at a nonterminal call, which derives a subgraph,
// or at a variable reference $k. When the left-hand side names the node
// variable (T1(x)), the reference it replaces is bound to the new node.
// Every reference occurs at least twice counting the left-hand side.

#ifndef RNNDAG_GRAMMAR_H_
#define RNNDAG_GRAMMAR_H_

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "rnndag/graph.h"

namespace rnndag {

struct LabelSlot {
  enum Kind { kOpen, kBox, kConstant };
  Kind kind = kOpen;
  std::string constant;

  static LabelSlot open() { return {kOpen, {}}; }
  static LabelSlot box() { return {kBox, {}}; }
  static LabelSlot of(std::string c) { return {kConstant, std::move(c)}; }

  friend bool operator==(const LabelSlot &, const LabelSlot &) = default;
};

struct NonterminalCall {
  // Reference indices passed positionally; the rank is refs.size().
  std::vector<int> refs;

  int rank() const { return static_cast<int>(refs.size()); }
  friend bool operator==(const NonterminalCall &,
                         const NonterminalCall &) = default;
};

struct Reference {
  int index = 0;
  friend bool operator==(const Reference &, const Reference &) = default;
};

struct EdgeItem {
  std::string edge_label;
  std::variant<NonterminalCall, Reference> target;

  bool is_call() const {
    return std::holds_alternative<NonterminalCall>(target);
  }
  const NonterminalCall &call() const {
    return std::get<NonterminalCall>(target);
  }
  int reference() const { return std::get<Reference>(target).index; }

  friend bool operator==(const EdgeItem &, const EdgeItem &) = default;
};

struct Production {
  int lhs_rank = 0;
  char root_sort = 'x';
  LabelSlot label;
  // 1-based reference index the new node binds, if any.
  std::optional<int> root_binds;
  std::vector<EdgeItem> items;

  int call_count() const;
  bool has_open_label() const { return label.kind == LabelSlot::kOpen; }
  // Number of derivation-tree children: calls plus the label leaf.
  int arity() const { return call_count() + (has_open_label() ? 1 : 0); }
  // Highest reference index used anywhere.
  int reference_count() const;

  // Throws DataError when an invariant of the rule format is violated.
  void check() const;

  std::string to_string() const;
  static Production from_string(std::string_view text);

  friend bool operator==(const Production &, const Production &) = default;
};

// One node of a derivation: the production that created it and the label
// its L nonterminal was rewritten to (absent for box and constant labels).
struct Application {
  Production production;
  std::optional<NodeLabel> label;
};

struct DerivationTree {
  int application = 0;  // index into Derivation::applications
  std::optional<NodeLabel> label;
  std::vector<DerivationTree> children;

  size_t size() const;
};

struct Derivation {
  // One application per graph node, in depth-first pre-order.
  std::vector<Application> applications;
  DerivationTree tree;
};

class ExtractionError : public DataError {
 public:
  using DataError::DataError;
};

// Decomposes a well-formed graph into its unique production sequence.
// Throws ExtractionError if the graph does not validate.
Derivation extract_derivation(const Graph &g);

// Computes, for each node index of `g`, the variables it shares with the
// rest of the graph, i.e. the arguments of the nonterminal deriving the
// node's subtree. Order is unspecified. Exposed for property tests.
std::vector<std::vector<std::string>> shared_variables(const Graph &g);

struct ExtractionFailure {
  size_t index;
  std::string reason;
};

struct GrammarStats {
  size_t fragments = 0;
  double average_rank = 0.0;         // over production types
  double average_rank_tokens = 0.0;  // over production occurrences
  size_t labels = 0;
};

class Grammar {
 public:
  // Returns the production's index.
  int add(const Production &p, long count = 1);
  void add_label(const NodeLabel &label, long count = 1);

  const std::vector<Production> &productions() const { return productions_; }
  long count(int index) const { return counts_[index]; }
  // -1 when absent.
  int index_of(const Production &p) const;
  bool empty() const { return productions_.empty(); }
  size_t size() const { return productions_.size(); }

  const std::vector<NodeLabel> &labels() const { return labels_; }
  long label_count(int index) const { return label_counts_[index]; }
  int label_index(const NodeLabel &label) const;

  GrammarStats stats() const;

  const std::vector<ExtractionFailure> &failures() const { return failures_; }
  void add_failure(ExtractionFailure f) { failures_.push_back(std::move(f)); }

  // Line format: "<count>\t<production>" and "<count>\tL -> <label>".
  void write(std::ostream &out) const;
  static Grammar read(std::istream &in);

 private:
  std::vector<Production> productions_;
  std::vector<long> counts_;
  std::unordered_map<std::string, int> index_;
  std::vector<NodeLabel> labels_;
  std::vector<long> label_counts_;
  std::unordered_map<std::string, int> label_index_;
  std::vector<ExtractionFailure> failures_;
};

Grammar build_grammar(const std::vector<Graph> &corpus);

// Table-style rendering: "#frags  avg. rank" header and one value row.
std::string format_stats(const GrammarStats &stats, bool per_token = false);

}  // namespace rnndag

#endif  // RNNDAG_GRAMMAR_H_
