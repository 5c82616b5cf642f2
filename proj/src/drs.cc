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

#include "rnndag/drs.h"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "rnndag/penman.h"

namespace rnndag {

const Box *BoxStructure::find(std::string_view id) const {
  for (const Box &b : boxes) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

bool BoxStructure::presuppositional(std::string_view id) const {
  for (const Presupposition &p : presuppositions) {
    if (p.box == id) return true;
  }
  return false;
}

size_t BoxStructure::clause_count() const {
  size_t n = operators.size() + presuppositions.size();
  for (const Box &b : boxes) {
    n += (b.referents.empty() ? 0 : 1) + b.conditions.size();
  }
  return n;
}

// ---------------------------------------------------------------------------
// Clause text

namespace {

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::istringstream in{std::string(line)};
  std::string field;
  while (in >> field) out.push_back(field);
  return out;
}

}  // namespace

BoxStructure parse_clauses(std::string_view text) {
  BoxStructure bs;
  std::unordered_map<std::string, size_t> box_index;
  auto box = [&](const std::string &id) -> Box & {
    auto [it, fresh] = box_index.emplace(id, bs.boxes.size());
    if (fresh) bs.boxes.push_back(Box{id, {}, {}});
    return bs.boxes[it->second];
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string &why) {
    throw DataError("clause line " + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> f = split_fields(line);
    if (f.empty() || f[0][0] == '#') continue;
    if (f.size() < 2) fail("missing keyword");
    const std::string &keyword = f[1];
    const size_t args = f.size() - 2;
    if (keyword == "REF") {
      if (args < 1) fail("REF needs at least one referent");
      Box &b = box(f[0]);
      for (size_t i = 2; i < f.size(); ++i) b.referents.push_back(f[i]);
    } else if (keyword == "COND") {
      if (args != 2 && args != 3) {
        fail("COND needs a predicate and one or two variables");
      }
      Condition c;
      c.kind = args == 2 ? Condition::kUnary : Condition::kBinary;
      std::string pred = f[2];
      if (auto tilde = pred.find('~'); tilde != std::string::npos) {
        c.sense = pred.substr(tilde + 1);
        pred.resize(tilde);
      }
      if (pred.empty()) fail("empty predicate");
      c.predicate = pred;
      c.args.assign(f.begin() + 3, f.end());
      box(f[0]).conditions.push_back(std::move(c));
    } else if (keyword == "OP") {
      if (args != 2 && args != 3) {
        fail("OP needs a name and one or two boxes");
      }
      box(f[0]);
      bs.operators.push_back(
          Operator{f[0], f[2], std::vector<std::string>(f.begin() + 3, f.end())});
    } else if (keyword == "PRESUP") {
      if (args != 1) fail("PRESUP needs exactly one anchor box");
      box(f[0]);
      bs.presuppositions.push_back(Presupposition{f[0], f[2]});
    } else {
      fail("unknown keyword '" + keyword + "'");
    }
  }

  for (const Operator &op : bs.operators) {
    for (const std::string &arg : op.args) {
      if (!box_index.count(arg)) {
        throw DataError("operator " + op.name + " of " + op.box +
                        " names undeclared box " + arg);
      }
    }
  }
  for (const Presupposition &p : bs.presuppositions) {
    if (!box_index.count(p.anchor)) {
      throw DataError("presupposition " + p.box + " names undeclared box " +
                      p.anchor);
    }
  }
  std::unordered_set<std::string> referents;
  for (const Box &b : bs.boxes) {
    referents.insert(b.referents.begin(), b.referents.end());
  }
  for (const Box &b : bs.boxes) {
    for (const Condition &c : b.conditions) {
      for (const std::string &v : c.args) {
        if (!referents.count(v)) {
          throw DataError("condition " + c.predicate + " in " + b.id +
                          " uses undeclared variable " + v);
        }
      }
    }
  }
  return bs;
}

std::string print_clauses(const BoxStructure &bs) {
  std::string out;
  for (const Box &b : bs.boxes) {
    if (!b.referents.empty()) {
      out += b.id + " REF";
      for (const std::string &r : b.referents) out += ' ' + r;
      out += '\n';
    }
    for (const Condition &c : b.conditions) {
      out += b.id + " COND " + c.predicate;
      if (c.sense) out += '~' + *c.sense;
      for (const std::string &a : c.args) out += ' ' + a;
      out += '\n';
    }
  }
  for (const Operator &op : bs.operators) {
    out += op.box + " OP " + op.name;
    for (const std::string &a : op.args) out += ' ' + a;
    out += '\n';
  }
  for (const Presupposition &p : bs.presuppositions) {
    out += p.box + " PRESUP " + p.anchor + '\n';
  }
  return out;
}

std::vector<BoxStructure> read_clause_corpus(std::istream &in) {
  std::vector<BoxStructure> docs;
  size_t index = 0;
  for (const std::string &block : read_blocks(in)) {
    try {
      docs.push_back(parse_clauses(block));
    } catch (const DataError &e) {
      throw DataError("document " + std::to_string(index) + ": " + e.what());
    }
    ++index;
  }
  return docs;
}

void write_clause_corpus(std::ostream &out,
                         const std::vector<BoxStructure> &docs) {
  for (size_t i = 0; i < docs.size(); ++i) {
    if (i > 0) out << '\n';
    out << print_clauses(docs[i]);
  }
}

// ---------------------------------------------------------------------------
// Boxes to graph

namespace {

std::string titlecase(const std::string &name) {
  std::string out = name;
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = i == 0 ? std::toupper(static_cast<unsigned char>(out[i]))
                    : std::tolower(static_cast<unsigned char>(out[i]));
  }
  return out;
}

std::string uppercase(const std::string &name) {
  std::string out = name;
  for (char &c : out) c = std::toupper(static_cast<unsigned char>(c));
  return out;
}

bool ends_with_of(const std::string &label) {
  return label.size() > 2 && label.compare(label.size() - 2, 2, "Of") == 0;
}

std::string reverse_label(const std::string &label,
                          const ConversionConfig &config) {
  auto [original, reversed] = unreverse(label, config);
  return reversed ? original : label + "Of";
}

}  // namespace

std::pair<std::string, bool> unreverse(const std::string &label,
                                       const ConversionConfig &config) {
  if (config.inherent_of.count(label) || !ends_with_of(label)) {
    return {label, false};
  }
  return {label.substr(0, label.size() - 2), true};
}

Graph boxes_to_graph(const BoxStructure &bs, const ConversionConfig &config) {
  Graph g;
  std::unordered_set<std::string> main_boxes;
  for (const Box &b : bs.boxes) {
    if (bs.presuppositional(b.id)) continue;
    g.add_node(b.id, box_label());
    main_boxes.insert(b.id);
  }
  if (main_boxes.empty()) throw ConversionError("no main box");

  // Referent labels: the first unary condition over the variable.
  std::map<std::string, NodeLabel> labels;
  for (const Box &b : bs.boxes) {
    for (const Condition &c : b.conditions) {
      if (c.kind != Condition::kUnary || labels.count(c.args[0])) continue;
      labels[c.args[0]] = NodeLabel{c.predicate, c.sense, false};
    }
  }
  std::unordered_set<std::string> variables;
  for (const Box &b : bs.boxes) {
    for (const std::string &r : b.referents) {
      if (!variables.insert(r).second) continue;
      if (main_boxes.count(r)) {
        throw ConversionError("referent " + r + " clashes with a box name");
      }
      NodeLabel label = labels.count(r) ? labels[r]
                                        : NodeLabel{kUntypedLemma, {}, false};
      label.presupposed = bs.presuppositional(b.id);
      g.add_node(r, label);
    }
  }

  // Each main box points at its head: the first argument of its first
  // binary condition, else its first referent.
  for (const Box &b : bs.boxes) {
    if (!main_boxes.count(b.id)) continue;
    std::string head;
    for (const Condition &c : b.conditions) {
      if (c.kind == Condition::kBinary) {
        head = c.args[0];
        break;
      }
    }
    if (head.empty() && !b.referents.empty()) head = b.referents[0];
    if (head.empty() && !b.conditions.empty()) head = b.conditions[0].args[0];
    if (!head.empty()) g.add_edge(b.id, "Drs", head);
  }
  std::unordered_set<std::string> operands;
  for (const Operator &op : bs.operators) {
    if (!main_boxes.count(op.box)) {
      throw ConversionError("operator " + op.name +
                            " on presuppositional box " + op.box);
    }
    for (size_t i = 0; i < op.args.size(); ++i) {
      if (!main_boxes.count(op.args[i])) {
        throw ConversionError("operator " + op.name +
                              " over presuppositional box " + op.args[i]);
      }
      std::string label = titlecase(op.name);
      if (op.args.size() > 1) label += std::to_string(i + 1);
      g.add_edge(op.box, label, op.args[i]);
      operands.insert(op.args[i]);
    }
  }
  for (const Box &b : bs.boxes) {
    for (const Condition &c : b.conditions) {
      if (c.kind == Condition::kBinary) {
        g.add_edge(c.args[0], c.predicate, c.args[1]);
      }
    }
  }

  std::vector<std::string> roots;
  for (const Box &b : bs.boxes) {
    if (main_boxes.count(b.id) && !operands.count(b.id)) roots.push_back(b.id);
  }
  if (roots.size() != 1) {
    throw ConversionError(std::to_string(roots.size()) +
                          " candidate root boxes");
  }
  g.set_root(roots[0]);

  // Remove extra roots by reversing their first outgoing edge.
  const size_t budget = g.edge_count() + 1;
  for (size_t step = 0;; ++step) {
    std::unordered_map<std::string, int> indegree;
    for (const Node &n : g.nodes()) {
      for (const Edge &e : n.outgoing) ++indegree[e.target];
    }
    const Node *extra = nullptr;
    for (const Node &n : g.nodes()) {
      if (n.id == g.root() || n.label.is_box() || indegree[n.id] > 0) continue;
      if (extra == nullptr || n.id < extra->id) extra = &n;
    }
    if (extra == nullptr) break;
    if (extra->outgoing.empty()) {
      throw ConversionError("referent " + extra->id + " is not connected");
    }
    if (step == budget) {
      throw ConversionError("root repair did not converge");
    }
    Node *source = g.find(extra->id);
    Edge edge = source->outgoing.front();
    source->outgoing.erase(source->outgoing.begin());
    g.add_edge(edge.target, reverse_label(edge.label, config), source->id);
  }

  WellFormednessReport report = validate(g);
  if (!report.ok()) throw ConversionError(report.to_string());
  g.sort_nodes_preorder();
  g.mark_reentrancies();
  return g;
}

// ---------------------------------------------------------------------------
// Graph to boxes

BoxStructure graph_to_boxes(const Graph &g, const ConversionConfig &config) {
  WellFormednessReport report = validate(g);
  if (!report.ok()) throw DataError("ill-formed graph: " + report.to_string());
  const Node *root = g.find(g.root());
  if (!root->label.is_box()) {
    throw DataError("graph root " + g.root() + " is not a box");
  }

  BoxStructure bs;
  std::vector<int> order = preorder(g);
  std::vector<int> box_nodes;
  std::unordered_map<int, size_t> box_of_node;  // node index -> boxes index
  int next_box = 0;
  for (int i : order) {
    const Node &n = g.nodes()[i];
    if (!n.label.is_box()) continue;
    box_of_node[i] = bs.boxes.size();
    bs.boxes.push_back(Box{n.id, {}, {}});
    box_nodes.push_back(i);
    if (auto v = split_variable(n.id); v && v->sort == 'b') {
      next_box = std::max(next_box, v->index);
    }
  }

  // Operators: non-Drs edges between boxes, grouped by label stem.
  for (int i : box_nodes) {
    const Node &n = g.nodes()[i];
    std::vector<std::string> stems;
    std::map<std::string, std::map<int, std::string>> args;
    for (const Edge &e : n.outgoing) {
      if (e.label == "Drs" || !g.find(e.target)->label.is_box()) continue;
      size_t cut = e.label.size();
      while (cut > 0 && std::isdigit(static_cast<unsigned char>(e.label[cut - 1]))) {
        --cut;
      }
      std::string stem = e.label.substr(0, cut);
      int position = cut < e.label.size() ? std::stoi(e.label.substr(cut)) : 0;
      if (!args.count(stem)) stems.push_back(stem);
      args[stem][position] = e.target;
    }
    for (const std::string &stem : stems) {
      Operator op{n.id, uppercase(stem), {}};
      for (const auto &[position, target] : args[stem]) op.args.push_back(target);
      bs.operators.push_back(std::move(op));
    }
  }

  // Each box claims the referents reachable from its head.
  const int n = static_cast<int>(g.size());
  std::vector<int> claim(n, -1);
  std::vector<int> claim_order;
  auto expand = [&](int start, int owner) {
    std::vector<int> stack{start};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      if (claim[v] >= 0 || g.nodes()[v].label.is_box()) continue;
      claim[v] = owner;
      claim_order.push_back(v);
      const auto &out = g.nodes()[v].outgoing;
      for (auto it = out.rbegin(); it != out.rend(); ++it) {
        stack.push_back(g.index_of(it->target));
      }
    }
  };
  for (int i : box_nodes) {
    for (const Edge &e : g.nodes()[i].outgoing) {
      if (e.label == "Drs") expand(g.index_of(e.target), i);
    }
  }
  for (int i : order) {
    if (claim[i] < 0 && !g.nodes()[i].label.is_box()) expand(i, box_nodes[0]);
  }

  // Presupposed referents go to one presuppositional box per anchor.
  std::unordered_map<int, size_t> presup_box;
  std::vector<size_t> home(n, 0);  // boxes index holding each referent
  for (int v : claim_order) {
    const Node &node = g.nodes()[v];
    size_t target = box_of_node[claim[v]];
    if (node.label.presupposed) {
      auto it = presup_box.find(claim[v]);
      if (it == presup_box.end()) {
        std::string id = "b" + std::to_string(++next_box);
        it = presup_box.emplace(claim[v], bs.boxes.size()).first;
        bs.boxes.push_back(Box{id, {}, {}});
        bs.presuppositions.push_back(
            Presupposition{id, g.nodes()[claim[v]].id});
      }
      target = it->second;
    }
    home[v] = target;
    Box &b = bs.boxes[target];
    b.referents.push_back(node.id);
    if (node.label.lemma != kUntypedLemma) {
      b.conditions.push_back(Condition{Condition::kUnary, node.label.lemma,
                                       {node.id}, node.label.sense});
    }
  }
  for (int v : order) {
    const Node &node = g.nodes()[v];
    if (node.label.is_box()) continue;
    for (const Edge &e : node.outgoing) {
      int w = g.index_of(e.target);
      if (g.nodes()[w].label.is_box()) continue;
      auto [predicate, reversed] = unreverse(e.label, config);
      if (reversed) {
        bs.boxes[home[w]].conditions.push_back(Condition{
            Condition::kBinary, predicate, {e.target, node.id}, std::nullopt});
      } else {
        bs.boxes[home[v]].conditions.push_back(Condition{
            Condition::kBinary, predicate, {node.id, e.target}, std::nullopt});
      }
    }
  }
  return bs;
}

// ---------------------------------------------------------------------------
// Scoring

TripleSet box_triples(const BoxStructure &bs) {
  TripleSet t;
  std::unordered_set<std::string> seen;
  auto variable = [&](const std::string &v) {
    if (seen.insert(v).second) t.variables.push_back(v);
  };
  auto relation = [&](const std::string &a, std::string r,
                      const std::string &b) {
    t.triples.push_back({TripleKind::kRelation, a, std::move(r), b});
  };
  for (const Box &b : bs.boxes) {
    variable(b.id);
    t.triples.push_back({TripleKind::kInstance, b.id, kInstanceRelation, "box"});
  }
  for (const Box &b : bs.boxes) {
    for (const std::string &r : b.referents) {
      if (!seen.count(r)) {
        variable(r);
        t.triples.push_back({TripleKind::kInstance, r, kInstanceRelation, "ref"});
      }
      relation(b.id, "REF", r);
    }
  }
  for (const Box &b : bs.boxes) {
    for (const Condition &c : b.conditions) {
      for (const std::string &a : c.args) variable(a);
      std::string name = c.predicate;
      if (c.sense) name += '~' + *c.sense;
      if (c.kind == Condition::kUnary) {
        relation(b.id, "COND:" + name, c.args[0]);
      } else {
        relation(c.args[0], name, c.args[1]);
        relation(b.id, "COND:" + name, c.args[0]);
      }
    }
  }
  for (const Operator &op : bs.operators) {
    for (size_t i = 0; i < op.args.size(); ++i) {
      std::string label = "OP:" + op.name;
      if (op.args.size() > 1) label += std::to_string(i + 1);
      relation(op.box, label, op.args[i]);
    }
  }
  for (const Presupposition &p : bs.presuppositions) {
    relation(p.box, "PRESUP", p.anchor);
  }
  return t;
}

ConversionScore conversion_score(const std::vector<BoxStructure> &docs,
                                 const ConversionConfig &config, int restarts,
                                 uint64_t seed) {
  ConversionScore out;
  out.documents = docs.size();
  for (size_t i = 0; i < docs.size(); ++i) {
    TripleSet gold = box_triples(docs[i]);
    MatchResult r;
    try {
      BoxStructure back = graph_to_boxes(boxes_to_graph(docs[i], config), config);
      r = match(box_triples(back), gold, restarts, seed);
    } catch (const DataError &e) {
      out.failures.push_back({i, e.what()});
      r.gold_total = gold.size();
    }
    if (r.matched != r.gold_total || r.matched != r.pred_total) {
      score(r);
      out.imperfect.push_back({i, r.f1});
    }
    out.total.matched += r.matched;
    out.total.pred_total += r.pred_total;
    out.total.gold_total += r.gold_total;
  }
  score(out.total);
  return out;
}

}  // namespace rnndag
