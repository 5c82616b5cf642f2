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

#include "rnndag/graph.h"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

namespace rnndag {

std::string NodeLabel::to_string() const {
  std::string out = lemma;
  if (sense) out += "~" + *sense;
  if (presupposed) out += "^p";
  return out;
}

NodeLabel NodeLabel::from_string(std::string_view text) {
  NodeLabel label;
  if (text.size() > 2 && text.substr(text.size() - 2) == "^p") {
    label.presupposed = true;
    text.remove_suffix(2);
  }
  size_t tilde = text.rfind('~');
  if (tilde != std::string_view::npos && tilde > 0 &&
      tilde + 1 < text.size()) {
    label.sense = std::string(text.substr(tilde + 1));
    text = text.substr(0, tilde);
  }
  label.lemma = std::string(text);
  return label;
}

NodeLabel box_label() { return NodeLabel{std::string(kBoxLabel), {}, false}; }

std::optional<VariableName> split_variable(std::string_view text) {
  if (text.size() < 2) return std::nullopt;
  char sort = text[0];
  if (sort < 'a' || sort > 'z') return std::nullopt;
  int index = 0;
  for (size_t i = 1; i < text.size(); ++i) {
    char c = text[i];
    if (c < '0' || c > '9') return std::nullopt;
    if (index > 100000000) return std::nullopt;
    index = index * 10 + (c - '0');
  }
  return VariableName{sort, index};
}

Node &Graph::add_node(std::string id, NodeLabel label) {
  Node node;
  node.sort = id.empty() ? '?' : id[0];
  node.id = std::move(id);
  node.label = std::move(label);
  if (nodes_.empty() && root_.empty()) root_ = node.id;
  nodes_.push_back(std::move(node));
  return nodes_.back();
}

void Graph::add_edge(std::string_view source, std::string label,
                     std::string target) {
  Node *node = find(source);
  if (node == nullptr) {
    throw DataError("edge source " + std::string(source) + " does not exist");
  }
  node->outgoing.push_back(Edge{std::move(label), std::move(target), false});
}

size_t Graph::edge_count() const {
  size_t n = 0;
  for (const Node &node : nodes_) n += node.outgoing.size();
  return n;
}

const Node *Graph::find(std::string_view id) const {
  int i = index_of(id);
  return i < 0 ? nullptr : &nodes_[i];
}

Node *Graph::find(std::string_view id) {
  int i = index_of(id);
  return i < 0 ? nullptr : &nodes_[i];
}

int Graph::index_of(std::string_view id) const {
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

namespace {

std::unordered_map<std::string, int> id_index(const Graph &g) {
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < g.nodes().size(); ++i) {
    index.emplace(g.nodes()[i].id, static_cast<int>(i));
  }
  return index;
}

}  // namespace

std::vector<int> preorder(const Graph &g) {
  std::vector<int> order;
  auto index = id_index(g);
  auto root = index.find(g.root());
  if (root == index.end()) return order;
  std::vector<bool> seen(g.size(), false);
  // Explicit stack of (node, next edge) keeps deep graphs off the call stack.
  std::vector<std::pair<int, size_t>> stack;
  seen[root->second] = true;
  order.push_back(root->second);
  stack.emplace_back(root->second, 0);
  while (!stack.empty()) {
    auto &[node, next] = stack.back();
    const auto &edges = g.nodes()[node].outgoing;
    if (next >= edges.size()) {
      stack.pop_back();
      continue;
    }
    auto it = index.find(edges[next++].target);
    if (it == index.end() || seen[it->second]) continue;
    seen[it->second] = true;
    order.push_back(it->second);
    stack.emplace_back(it->second, 0);
  }
  return order;
}

void Graph::mark_reentrancies() {
  auto index = id_index(*this);
  std::vector<bool> seen(nodes_.size(), false);
  for (Node &node : nodes_) {
    for (Edge &edge : node.outgoing) edge.reentrant = true;
  }
  auto root = index.find(root_);
  if (root == index.end()) return;
  std::vector<std::pair<int, size_t>> stack;
  seen[root->second] = true;
  stack.emplace_back(root->second, 0);
  while (!stack.empty()) {
    auto [node, next] = stack.back();
    auto &edges = nodes_[node].outgoing;
    if (next >= edges.size()) {
      stack.pop_back();
      continue;
    }
    ++stack.back().second;
    auto it = index.find(edges[next].target);
    if (it == index.end() || seen[it->second]) continue;
    edges[next].reentrant = false;
    seen[it->second] = true;
    stack.emplace_back(it->second, 0);
  }
}

void Graph::sort_nodes_preorder() {
  std::vector<int> order = preorder(*this);
  std::vector<bool> placed(nodes_.size(), false);
  for (int i : order) placed[i] = true;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!placed[i]) order.push_back(static_cast<int>(i));
  }
  std::vector<Node> sorted;
  sorted.reserve(nodes_.size());
  for (int i : order) sorted.push_back(std::move(nodes_[i]));
  nodes_ = std::move(sorted);
}

Graph canonical_rename(const Graph &g) {
  std::map<char, int> counters;
  std::unordered_map<std::string, std::string> rename;
  std::vector<int> order = preorder(g);
  for (int i : order) {
    const Node &node = g.nodes()[i];
    rename.emplace(node.id,
                   std::string(1, node.sort) +
                       std::to_string(++counters[node.sort]));
  }
  Graph out;
  for (int i : order) {
    const Node &node = g.nodes()[i];
    Node &copy = out.add_node(rename.at(node.id), node.label);
    for (const Edge &edge : node.outgoing) {
      auto it = rename.find(edge.target);
      copy.outgoing.push_back(Edge{
          edge.label, it == rename.end() ? edge.target : it->second, false});
    }
  }
  if (!order.empty()) out.set_root(rename.at(g.root()));
  out.mark_reentrancies();
  return out;
}

bool isomorphic(const Graph &a, const Graph &b) {
  if (a.size() != b.size()) return false;
  Graph ca = canonical_rename(a);
  Graph cb = canonical_rename(b);
  if (ca.size() != a.size() || cb.size() != b.size()) return false;
  if (ca.root() != cb.root() || ca.size() != cb.size()) return false;
  for (size_t i = 0; i < ca.size(); ++i) {
    const Node &x = ca.nodes()[i];
    const Node &y = cb.nodes()[i];
    if (x.id != y.id || x.label != y.label || x.outgoing != y.outgoing) {
      return false;
    }
  }
  return true;
}

std::string_view violation_name(Violation v) {
  switch (v) {
    case Violation::kMultipleRoots: return "multiple-roots";
    case Violation::kCycle: return "cycle";
    case Violation::kDisconnected: return "disconnected";
    case Violation::kUnlabeledNode: return "unlabeled-node";
    case Violation::kDuplicateId: return "duplicate-id";
    case Violation::kDanglingEdge: return "dangling-edge";
  }
  return "unknown";
}

bool WellFormednessReport::has(Violation v) const {
  return std::find(violations.begin(), violations.end(), v) !=
         violations.end();
}

std::string WellFormednessReport::to_string() const {
  std::string out;
  for (Violation v : violations) {
    if (!out.empty()) out += ",";
    out += violation_name(v);
  }
  return out;
}

WellFormednessReport validate(const Graph &g) {
  WellFormednessReport report;
  auto add = [&](Violation v) {
    if (!report.has(v)) report.violations.push_back(v);
  };

  std::set<std::string> ids;
  for (const Node &node : g.nodes()) {
    if (!ids.insert(node.id).second) add(Violation::kDuplicateId);
    if (node.label.lemma.empty()) add(Violation::kUnlabeledNode);
  }

  auto index = id_index(g);
  const size_t n = g.size();
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<int>> succ(n);
  for (size_t i = 0; i < n; ++i) {
    for (const Edge &edge : g.nodes()[i].outgoing) {
      auto it = index.find(edge.target);
      if (it == index.end()) {
        add(Violation::kDanglingEdge);
        continue;
      }
      succ[i].push_back(it->second);
      ++indegree[it->second];
    }
  }

  int roots = 0;
  for (size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ++roots;
  }
  if (roots != 1) add(Violation::kMultipleRoots);

  // Kahn's algorithm: anything left over sits on or behind a cycle.
  std::vector<int> remaining = indegree;
  std::vector<int> queue;
  for (size_t i = 0; i < n; ++i) {
    if (remaining[i] == 0) queue.push_back(static_cast<int>(i));
  }
  size_t removed = 0;
  while (!queue.empty()) {
    int v = queue.back();
    queue.pop_back();
    ++removed;
    for (int w : succ[v]) {
      if (--remaining[w] == 0) queue.push_back(w);
    }
  }
  if (removed != n) add(Violation::kCycle);

  auto root = index.find(g.root());
  if (root == index.end()) {
    if (n > 0) add(Violation::kDisconnected);
  } else {
    std::vector<bool> seen(n, false);
    std::vector<int> stack{root->second};
    seen[root->second] = true;
    size_t reached = 1;
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (int w : succ[v]) {
        if (!seen[w]) {
          seen[w] = true;
          ++reached;
          stack.push_back(w);
        }
      }
    }
    if (reached != n) add(Violation::kDisconnected);
    if (indegree[root->second] != 0 && roots == 1) {
      add(Violation::kMultipleRoots);
    }
  }
  return report;
}

}  // namespace rnndag
