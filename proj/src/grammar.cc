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

#include "rnndag/grammar.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <unordered_map>

namespace rnndag {

// ---------------------------------------------------------------------------
// Production

int Production::call_count() const {
  int n = 0;
  for (const EdgeItem &item : items) n += item.is_call();
  return n;
}

int Production::reference_count() const {
  int top = lhs_rank;
  if (root_binds) top = std::max(top, *root_binds);
  for (const EdgeItem &item : items) {
    if (item.is_call()) {
      for (int r : item.call().refs) top = std::max(top, r);
    } else {
      top = std::max(top, item.reference());
    }
  }
  return top;
}

void Production::check() const {
  auto fail = [&](const std::string &why) {
    throw DataError("invalid production " + to_string() + ": " + why);
  };
  if (lhs_rank < 0) fail("negative rank");
  if (root_binds && (*root_binds < 1 || *root_binds > lhs_rank)) {
    fail("bound reference outside the left-hand side");
  }
  const int total = reference_count();
  std::vector<int> uses(total + 1, 0);
  // Left-to-right walk: root binding first, then the items.
  std::vector<int> walk;
  if (root_binds) walk.push_back(*root_binds);
  for (const EdgeItem &item : items) {
    if (item.edge_label.empty()) fail("empty edge label");
    if (item.is_call()) {
      std::set<int> seen;
      for (int r : item.call().refs) {
        if (r < 1) fail("reference index below 1");
        if (!seen.insert(r).second) fail("duplicate reference in a call");
        if (root_binds && r == *root_binds) {
          fail("bound reference passed below its own node");
        }
        walk.push_back(r);
      }
    } else {
      int r = item.reference();
      if (r < 1) fail("reference index below 1");
      if (root_binds && r == *root_binds) fail("self reference");
      walk.push_back(r);
    }
  }
  for (int r : walk) ++uses[r];
  for (int r = 1; r <= total; ++r) {
    int occurrences = uses[r] + (r <= lhs_rank ? 1 : 0);
    if (occurrences < 2) {
      fail("reference $" + std::to_string(r) + " occurs fewer than twice");
    }
  }
  // Canonical numbering: first occurrences ascend within the left-hand-side
  // block and within the local block.
  int next_lhs = 1, next_local = lhs_rank + 1;
  std::vector<bool> seen(total + 1, false);
  for (int r : walk) {
    if (seen[r]) continue;
    seen[r] = true;
    if (r <= lhs_rank) {
      if (r != next_lhs++) fail("references not in first-occurrence order");
    } else {
      if (r != next_local++) fail("references not in first-occurrence order");
    }
  }
}

namespace {

std::string call_text(const NonterminalCall &call) {
  std::string out = "T" + std::to_string(call.rank());
  if (call.rank() == 0) return out;
  out += '(';
  for (size_t i = 0; i < call.refs.size(); ++i) {
    if (i > 0) out += ", ";
    out += '$' + std::to_string(call.refs[i]);
  }
  out += ')';
  return out;
}

std::string label_text(const LabelSlot &slot) {
  switch (slot.kind) {
    case LabelSlot::kOpen: return "L";
    case LabelSlot::kBox: return std::string(kBoxLabel);
    case LabelSlot::kConstant: return '"' + slot.constant + '"';
  }
  return "L";
}

class ProductionReader {
 public:
  explicit ProductionReader(std::string_view text) : text_(text) {}

  Production read() {
    Production p;
    expect('T');
    p.lhs_rank = read_int();
    std::vector<std::string> lhs;
    if (p.lhs_rank > 0) {
      expect('(');
      for (int i = 0; i < p.lhs_rank; ++i) {
        if (i > 0) expect(',');
        lhs.push_back(read_token());
      }
      expect(')');
    }
    skip();
    if (text_.substr(pos_, 2) != "->") error("expected '->'");
    pos_ += 2;
    expect('(');
    std::string sort = read_token();
    if (sort.size() != 1) error("expected a single sort letter");
    p.root_sort = sort[0];
    expect('/');
    skip();
    if (peek() == '"') {
      size_t end = text_.find('"', pos_ + 1);
      if (end == std::string_view::npos) error("unterminated constant");
      p.label = LabelSlot::of(std::string(text_.substr(pos_ + 1, end - pos_ - 1)));
      pos_ = end + 1;
    } else {
      std::string label = read_token();
      if (label == "L") {
        p.label = LabelSlot::open();
      } else if (label == kBoxLabel) {
        p.label = LabelSlot::box();
      } else if (!label.empty()) {
        p.label = LabelSlot::of(label);
      } else {
        error("missing label");
      }
    }
    for (int i = 0; i < p.lhs_rank; ++i) {
      const std::string &arg = lhs[i];
      if (arg == sort) {
        if (p.root_binds) error("node variable bound twice");
        p.root_binds = i + 1;
      } else if (arg != "$" + std::to_string(i + 1)) {
        error("left-hand side arguments must be $1..$i in order");
      }
    }
    for (;;) {
      skip();
      if (peek() == ')') {
        ++pos_;
        break;
      }
      expect(':');
      EdgeItem item;
      item.edge_label = read_token();
      if (item.edge_label.empty()) error("empty edge label");
      skip();
      if (peek() == '$') {
        ++pos_;
        item.target = Reference{read_int()};
      } else {
        expect('T');
        NonterminalCall call;
        int rank = read_int();
        if (rank > 0) {
          expect('(');
          for (int i = 0; i < rank; ++i) {
            if (i > 0) expect(',');
            expect('$');
            call.refs.push_back(read_int());
          }
          expect(')');
        }
        item.target = std::move(call);
      }
      p.items.push_back(std::move(item));
    }
    skip();
    if (pos_ != text_.size()) error("trailing text");
    p.check();
    return p;
  }

 private:
  [[noreturn]] void error(const std::string &why) {
    throw DataError("cannot parse production '" + std::string(text_) +
                    "': " + why);
  }
  void skip() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t'))
      ++pos_;
  }
  char peek() {
    if (pos_ >= text_.size()) error("unexpected end");
    return text_[pos_];
  }
  void expect(char c) {
    skip();
    if (peek() != c) error(std::string("expected '") + c + "'");
    ++pos_;
  }
  int read_int() {
    skip();
    size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9')
      ++pos_;
    if (start == pos_ || pos_ - start > 6) error("expected a number");
    return std::stoi(std::string(text_.substr(start, pos_ - start)));
  }
  std::string read_token() {
    skip();
    size_t start = pos_;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == ' ' || c == '\t' || c == '(' || c == ')' || c == ',' ||
          c == '/' || c == ':')
        break;
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

std::string Production::to_string() const {
  std::string out = "T" + std::to_string(lhs_rank);
  if (lhs_rank > 0) {
    out += '(';
    for (int i = 1; i <= lhs_rank; ++i) {
      if (i > 1) out += ", ";
      if (root_binds && *root_binds == i) {
        out += root_sort;
      } else {
        out += '$' + std::to_string(i);
      }
    }
    out += ')';
  }
  out += " -> (";
  out += root_sort;
  out += '/';
  out += label_text(label);
  for (const EdgeItem &item : items) {
    out += " :" + item.edge_label + ' ';
    if (item.is_call()) {
      out += call_text(item.call());
    } else {
      out += '$' + std::to_string(item.reference());
    }
  }
  out += ')';
  return out;
}

Production Production::from_string(std::string_view text) {
  return ProductionReader(text).read();
}

size_t DerivationTree::size() const {
  size_t n = 1;
  for (const DerivationTree &child : children) n += child.size();
  return n;
}

// ---------------------------------------------------------------------------
// Extraction

namespace {

// Depth-first spanning tree of a well-formed graph, following edge order.
struct SpanningTree {
  std::vector<int> order;        // pre-order of node indices
  std::vector<int> position;     // node index -> pre-order position
  std::vector<int> subtree_end;  // node index -> one past last position
  // For each node and each of its edges: target node index and whether the
  // edge is the target's defining (tree) edge.
  std::vector<std::vector<std::pair<int, bool>>> edges;
  // For each node: incoming edges as (source node, is tree edge).
  std::vector<std::vector<std::pair<int, bool>>> incoming;

  bool inside(int root, int node) const {
    return position[node] >= position[root] &&
           position[node] < subtree_end[root];
  }
};

SpanningTree build_tree(const Graph &g) {
  const int n = static_cast<int>(g.size());
  SpanningTree t;
  t.position.assign(n, -1);
  t.subtree_end.assign(n, -1);
  t.edges.resize(n);
  t.incoming.resize(n);
  std::unordered_map<std::string, int> index;
  for (int i = 0; i < n; ++i) index.emplace(g.nodes()[i].id, i);

  std::function<void(int)> visit = [&](int v) {
    t.position[v] = static_cast<int>(t.order.size());
    t.order.push_back(v);
    for (const Edge &edge : g.nodes()[v].outgoing) {
      int w = index.at(edge.target);
      bool tree = t.position[w] < 0;
      t.edges[v].emplace_back(w, tree);
      t.incoming[w].emplace_back(v, tree);
      if (tree) visit(w);
    }
    t.subtree_end[v] = static_cast<int>(t.order.size());
  };
  visit(index.at(g.root()));
  return t;
}

// Unordered argument sets, as node indices.
std::vector<std::vector<int>> argument_sets(const SpanningTree &t) {
  const int n = static_cast<int>(t.position.size());
  std::vector<std::vector<int>> args(n);
  for (int x = 0; x < n; ++x) {
    if (t.incoming[x].size() < 2) continue;
    for (int u = 0; u < n; ++u) {
      bool touched_inside = (u == x);
      bool touched_outside = false;
      for (auto [source, tree] : t.incoming[x]) {
        if (u == x && tree) continue;  // the edge that places u itself
        if (t.inside(u, source)) {
          touched_inside = true;
        } else {
          touched_outside = true;
        }
      }
      if (touched_inside && touched_outside) args[u].push_back(x);
    }
  }
  return args;
}

}  // namespace

std::vector<std::vector<std::string>> shared_variables(const Graph &g) {
  SpanningTree t = build_tree(g);
  auto sets = argument_sets(t);
  std::vector<std::vector<std::string>> out(g.size());
  for (size_t u = 0; u < g.size(); ++u) {
    for (int x : sets[u]) out[u].push_back(g.nodes()[x].id);
  }
  return out;
}

Derivation extract_derivation(const Graph &g) {
  WellFormednessReport report = validate(g);
  if (!report.ok()) {
    throw ExtractionError("graph is not well-formed: " + report.to_string());
  }
  SpanningTree t = build_tree(g);
  const int n = static_cast<int>(g.size());
  std::vector<std::vector<int>> arg_sets = argument_sets(t);

  // Ordered arguments, computed bottom-up so each parent sees its children's
  // canonical order.
  std::vector<std::vector<int>> args(n);
  std::vector<Production> productions(n);
  for (auto it = t.order.rbegin(); it != t.order.rend(); ++it) {
    const int u = *it;
    const Node &node = g.nodes()[u];
    auto is_arg = [&](int x) {
      return std::find(arg_sets[u].begin(), arg_sets[u].end(), x) !=
             arg_sets[u].end();
    };
    std::vector<int> walk;
    if (is_arg(u)) walk.push_back(u);
    for (auto [w, tree] : t.edges[u]) {
      if (tree) {
        walk.insert(walk.end(), args[w].begin(), args[w].end());
      } else {
        walk.push_back(w);
      }
    }
    std::vector<int> first;
    for (int x : walk) {
      if (std::find(first.begin(), first.end(), x) == first.end()) {
        first.push_back(x);
      }
    }
    std::vector<int> locals;
    for (int x : first) {
      if (is_arg(x)) {
        args[u].push_back(x);
      } else {
        locals.push_back(x);
      }
    }
    std::unordered_map<int, int> number;
    for (size_t i = 0; i < args[u].size(); ++i) {
      number[args[u][i]] = static_cast<int>(i) + 1;
    }
    for (size_t i = 0; i < locals.size(); ++i) {
      number[locals[i]] = static_cast<int>(args[u].size() + i) + 1;
    }

    Production &p = productions[u];
    p.lhs_rank = static_cast<int>(args[u].size());
    p.root_sort = node.sort;
    p.label = node.label.is_box() ? LabelSlot::box() : LabelSlot::open();
    if (is_arg(u)) p.root_binds = number.at(u);
    for (size_t k = 0; k < t.edges[u].size(); ++k) {
      auto [w, tree] = t.edges[u][k];
      EdgeItem item;
      item.edge_label = node.outgoing[k].label;
      if (tree) {
        NonterminalCall call;
        for (int x : args[w]) call.refs.push_back(number.at(x));
        item.target = std::move(call);
      } else {
        item.target = Reference{number.at(w)};
      }
      p.items.push_back(std::move(item));
    }
    p.check();
  }

  Derivation derivation;
  std::vector<int> application_of(n, -1);
  for (int u : t.order) {
    application_of[u] = static_cast<int>(derivation.applications.size());
    Application app;
    app.production = productions[u];
    if (app.production.has_open_label()) app.label = g.nodes()[u].label;
    derivation.applications.push_back(std::move(app));
  }
  std::function<DerivationTree(int)> tree_of = [&](int u) {
    DerivationTree node;
    node.application = application_of[u];
    node.label = derivation.applications[node.application].label;
    for (auto [w, tree] : t.edges[u]) {
      if (tree) node.children.push_back(tree_of(w));
    }
    return node;
  };
  derivation.tree = tree_of(t.order.front());
  return derivation;
}

// ---------------------------------------------------------------------------
// Grammar

int Grammar::add(const Production &p, long count) {
  std::string key = p.to_string();
  auto it = index_.find(key);
  if (it != index_.end()) {
    counts_[it->second] += count;
    return it->second;
  }
  int index = static_cast<int>(productions_.size());
  productions_.push_back(p);
  counts_.push_back(count);
  index_.emplace(std::move(key), index);
  return index;
}

int Grammar::index_of(const Production &p) const {
  auto it = index_.find(p.to_string());
  return it == index_.end() ? -1 : it->second;
}

void Grammar::add_label(const NodeLabel &label, long count) {
  std::string key = label.to_string();
  auto it = label_index_.find(key);
  if (it != label_index_.end()) {
    label_counts_[it->second] += count;
    return;
  }
  label_index_.emplace(std::move(key), static_cast<int>(labels_.size()));
  labels_.push_back(label);
  label_counts_.push_back(count);
}

int Grammar::label_index(const NodeLabel &label) const {
  auto it = label_index_.find(label.to_string());
  return it == label_index_.end() ? -1 : it->second;
}

GrammarStats Grammar::stats() const {
  GrammarStats s;
  s.fragments = productions_.size();
  s.labels = labels_.size();
  if (productions_.empty()) return s;
  double type_sum = 0, token_sum = 0, tokens = 0;
  for (size_t i = 0; i < productions_.size(); ++i) {
    type_sum += productions_[i].lhs_rank;
    token_sum += static_cast<double>(productions_[i].lhs_rank) * counts_[i];
    tokens += counts_[i];
  }
  s.average_rank = type_sum / productions_.size();
  s.average_rank_tokens = tokens > 0 ? token_sum / tokens : 0.0;
  return s;
}

void Grammar::write(std::ostream &out) const {
  for (size_t i = 0; i < productions_.size(); ++i) {
    out << counts_[i] << '\t' << productions_[i].to_string() << '\n';
  }
  for (size_t i = 0; i < labels_.size(); ++i) {
    out << label_counts_[i] << "\tL -> " << labels_[i].to_string() << '\n';
  }
}

Grammar Grammar::read(std::istream &in) {
  Grammar g;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw DataError("grammar line " + std::to_string(number) +
                      ": expected '<count>\\t<rule>'");
    }
    long count = 0;
    try {
      count = std::stol(line.substr(0, tab));
    } catch (const std::exception &) {
      throw DataError("grammar line " + std::to_string(number) +
                      ": bad count");
    }
    if (count <= 0) {
      throw DataError("grammar line " + std::to_string(number) +
                      ": count must be positive");
    }
    std::string rule = line.substr(tab + 1);
    if (rule.rfind("L -> ", 0) == 0) {
      std::string label = rule.substr(5);
      if (label.empty()) {
        throw DataError("grammar line " + std::to_string(number) +
                        ": empty label");
      }
      g.add_label(NodeLabel::from_string(label), count);
    } else {
      try {
        g.add(Production::from_string(rule), count);
      } catch (const DataError &e) {
        throw DataError("grammar line " + std::to_string(number) + ": " +
                        e.what());
      }
    }
  }
  return g;
}

Grammar build_grammar(const std::vector<Graph> &corpus) {
  Grammar grammar;
  for (size_t i = 0; i < corpus.size(); ++i) {
    Derivation d;
    try {
      d = extract_derivation(corpus[i]);
    } catch (const ExtractionError &e) {
      grammar.add_failure({i, e.what()});
      continue;
    }
    for (const Application &app : d.applications) {
      grammar.add(app.production);
      if (app.label) grammar.add_label(*app.label);
    }
  }
  return grammar;
}

namespace {

std::string with_thousands(size_t value) {
  std::string digits = std::to_string(value);
  std::string out;
  for (size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) out += ',';
    out += digits[i];
  }
  return out;
}

}  // namespace

std::string format_stats(const GrammarStats &stats, bool per_token) {
  char rank[32];
  std::snprintf(rank, sizeof(rank), "%.2f",
                per_token ? stats.average_rank_tokens : stats.average_rank);
  std::ostringstream out;
  out << "#frags\tavg. rank\n"
      << with_thousands(stats.fragments) << '\t' << rank << '\n';
  return out.str();
}

}  // namespace rnndag
