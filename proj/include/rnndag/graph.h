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

#ifndef RNNDAG_GRAPH_H_
#define RNNDAG_GRAPH_H_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rnndag {

// Label carried by box-sorted nodes.
inline constexpr std::string_view kBoxLabel = "□";

// Raised for malformed input data (files, text, structures).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The set of admissible variable sort letters. Defaults to the PMB sorts.
class SortSet {
 public:
  SortSet() : letters_("bxest") {}
  explicit SortSet(std::string letters) : letters_(std::move(letters)) {}

  bool contains(char c) const {
    return letters_.find(c) != std::string::npos;
  }
  const std::string &letters() const { return letters_; }

 private:
  std::string letters_;
};

struct NodeLabel {
  std::string lemma;
  std::optional<std::string> sense;
  bool presupposed = false;

  bool is_box() const { return lemma == kBoxLabel; }

  // Text form: lemma[~sense][^p].
  std::string to_string() const;
  static NodeLabel from_string(std::string_view text);

  friend bool operator==(const NodeLabel &, const NodeLabel &) = default;
};

NodeLabel box_label();

struct Edge {
  std::string label;
  std::string target;
  // True iff this occurrence is written as a reference, not a subtree.
  bool reentrant = false;

  friend bool operator==(const Edge &, const Edge &) = default;
};

struct Node {
  std::string id;
  char sort = 'x';
  NodeLabel label;
  std::vector<Edge> outgoing;
};

// Splits a variable name such as "x12" into sort letter and index.
// Returns nullopt when the text is not a variable name.
struct VariableName {
  char sort;
  int index;
};
std::optional<VariableName> split_variable(std::string_view text);

// Node-labelled, edge-labelled, edge-ordered DAG. Edges are owned by their
// source node. A Graph may be ill-formed; validate() reports how.
class Graph {
 public:
  Graph() = default;

  // Appends a node; the sort is taken from the id's first letter.
  Node &add_node(std::string id, NodeLabel label);
  // Appends an outgoing edge to `source`. Throws DataError if the source
  // does not exist. The target is not checked, so forward references are
  // allowed while building.
  void add_edge(std::string_view source, std::string label,
                std::string target);

  const std::vector<Node> &nodes() const { return nodes_; }
  std::vector<Node> &mutable_nodes() { return nodes_; }
  size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  size_t edge_count() const;

  const std::string &root() const { return root_; }
  void set_root(std::string id) { root_ = std::move(id); }

  // First node with the given id, or nullptr.
  const Node *find(std::string_view id) const;
  Node *find(std::string_view id);
  // Index of the first node with the given id, or -1.
  int index_of(std::string_view id) const;

  // Recomputes Edge::reentrant from a depth-first walk from the root that
  // follows edge order: the first occurrence of a target is its definition.
  void mark_reentrancies();

  // Reorders nodes into depth-first pre-order from the root. Unreachable
  // nodes keep their relative order after the reachable ones.
  void sort_nodes_preorder();

 private:
  std::vector<Node> nodes_;
  std::string root_;
};

// Depth-first pre-order of node indices reachable from the root, following
// outgoing edges in order. Each node appears once.
std::vector<int> preorder(const Graph &g);

// Renames variables to <sort><n> with per-sort counters in pre-order, so
// isomorphic graphs become identical.
Graph canonical_rename(const Graph &g);

// Structural identity after canonical renaming.
bool isomorphic(const Graph &a, const Graph &b);

// Well-formedness criteria.
enum class Violation {
  kMultipleRoots,
  kCycle,
  kDisconnected,
  kUnlabeledNode,
  kDuplicateId,
  kDanglingEdge,
};

std::string_view violation_name(Violation v);

struct WellFormednessReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(Violation v) const;
  std::string to_string() const;
};

WellFormednessReport validate(const Graph &g);

}  // namespace rnndag

#endif  // RNNDAG_GRAPH_H_
