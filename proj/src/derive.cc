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

#include "rnndag/derive.h"

#include <algorithm>
#include <functional>
#include <random>
#include <set>
#include <stdexcept>

namespace rnndag {

// ---------------------------------------------------------------------------
// Action

Action Action::frag(Production p) {
  Action a;
  a.kind = kGenFrag;
  a.production = std::move(p);
  return a;
}

Action Action::gen_label(NodeLabel label) {
  Action a;
  a.kind = kGenLabel;
  a.label = std::move(label);
  return a;
}

Action Action::reduce() { return Action{}; }

std::string Action::to_string() const {
  switch (kind) {
    case kGenFrag: return "FRAG " + production.to_string();
    case kGenLabel: return "LABEL " + label.to_string();
    case kReduce: return "REDUCE";
  }
  return "REDUCE";
}

Action Action::from_string(std::string_view line) {
  while (!line.empty() && (line.back() == ' ' || line.back() == '\r'))
    line.remove_suffix(1);
  if (line == "REDUCE") return reduce();
  if (line.rfind("FRAG ", 0) == 0) {
    return frag(Production::from_string(line.substr(5)));
  }
  if (line.rfind("LABEL ", 0) == 0 && line.size() > 6) {
    return gen_label(NodeLabel::from_string(line.substr(6)));
  }
  throw DataError("cannot parse action '" + std::string(line) + "'");
}

// ---------------------------------------------------------------------------
// DerivationState

namespace {

// A reference may precede its binding only when an earlier call in the same
// fragment carries it, so that call's subtree binds it first.
bool carried_before(const Production &p, size_t item) {
  const int r = p.items[item].reference();
  for (size_t j = 0; j < item; ++j) {
    if (!p.items[j].is_call()) continue;
    for (int k : p.items[j].call().refs) {
      if (k == r) return true;
    }
  }
  return false;
}

}  // namespace

DerivationState DerivationState::start() {
  DerivationState s;
  s.frames_.push_back(Frame{});
  s.stack_.push_back(0);
  return s;
}

const DerivationState::Frame &DerivationState::top() const {
  if (stack_.empty()) throw std::logic_error("derivation is complete");
  return frames_[stack_.back()];
}

DerivationState::FragCheck DerivationState::check_frag(
    const Production &p) const {
  if (stack_.empty()) return FragCheck::kComplete;
  const Frame &f = frames_[stack_.back()];
  if (f.kind != FrameKind::kTerm) return FragCheck::kKind;
  if (p.lhs_rank != f.rank) return FragCheck::kRank;
  if (p.root_binds && slots_[f.slots[*p.root_binds - 1]] >= 0) {
    return FragCheck::kRebind;
  }
  for (size_t j = 0; j < p.items.size(); ++j) {
    if (p.items[j].is_call()) continue;
    int r = p.items[j].reference();
    bool bound = r <= f.rank && slots_[f.slots[r - 1]] >= 0;
    if (!bound && !carried_before(p, j)) return FragCheck::kUnbound;
  }
  return FragCheck::kOk;
}

bool DerivationState::can_apply(const Production &p) const {
  return check_frag(p) == FragCheck::kOk;
}

void DerivationState::complete_child(int app, std::vector<int> &events) {
  while (app >= 0 && --applications_[app].remaining == 0) {
    for (const Item &item : nodes_[applications_[app].node].items) {
      if (item.kind == Item::kRef && slots_[item.value] < 0) {
        throw std::logic_error("reference left unbound by its subtrees");
      }
    }
    events.push_back(app);
    ++reduce_count_;
    app = applications_[app].parent;
  }
}

DerivationState DerivationState::apply(const Action &a) const {
  DerivationState s = *this;
  s.advance(a);
  return s;
}

void DerivationState::advance(const Action &a) {
  if (a.kind == Action::kReduce) {
    throw std::logic_error("REDUCE is applied automatically");
  }
  if (stack_.empty()) throw std::logic_error("derivation is complete");
  DerivationState &s = *this;
  const Frame frame = s.frames_[s.stack_.back()];

  if (a.kind == Action::kGenLabel) {
    if (frame.kind != FrameKind::kLabel) {
      throw BindingError("GEN-LABEL applied to a T frame");
    }
    if (a.label.lemma.empty()) throw BindingError("empty label");
    s.last_reduces_.clear();
    s.stack_.pop_back();
    s.nodes_[frame.owner].label = a.label;
    s.complete_child(frame.parent_application, s.last_reduces_);
    return;
  }

  const Production &p = a.production;
  switch (check_frag(p)) {
    case FragCheck::kOk: break;
    case FragCheck::kComplete:
      throw std::logic_error("derivation is complete");
    case FragCheck::kKind:
      throw BindingError("GEN-FRAG applied to an L frame");
    case FragCheck::kRank:
      throw BindingError("rank mismatch: T" + std::to_string(p.lhs_rank) +
                         " production on a T" + std::to_string(frame.rank) +
                         " frame");
    case FragCheck::kRebind:
      throw BindingError("reference $" + std::to_string(*p.root_binds) +
                         " is already bound");
    case FragCheck::kUnbound:
      throw BindingError("unbound reference in " + p.to_string());
  }
  s.last_reduces_.clear();
  s.stack_.pop_back();
  // Reference index -> binding cell.
  std::vector<int> cell(p.reference_count() + 1, -1);
  for (int i = 0; i < frame.rank; ++i) cell[i + 1] = frame.slots[i];
  for (int r = frame.rank + 1; r < static_cast<int>(cell.size()); ++r) {
    cell[r] = static_cast<int>(s.slots_.size());
    s.slots_.push_back(-1);
  }

  const int node_index = static_cast<int>(s.nodes_.size());
  const int app_index = static_cast<int>(s.applications_.size());
  DNode node;
  node.sort = p.root_sort;
  node.id = std::string(1, p.root_sort) +
            std::to_string(++s.counters_[p.root_sort]);
  switch (p.label.kind) {
    case LabelSlot::kBox: node.label = box_label(); break;
    case LabelSlot::kConstant: node.label = NodeLabel{p.label.constant, {}, false}; break;
    case LabelSlot::kOpen: break;
  }
  if (p.root_binds) s.slots_[cell[*p.root_binds]] = node_index;

  std::vector<int> new_frames;
  if (p.has_open_label()) {
    Frame label_frame;
    label_frame.kind = FrameKind::kLabel;
    label_frame.incoming_edge = frame.incoming_edge;
    label_frame.depth = frame.depth + 1;
    label_frame.owner = node_index;
    label_frame.parent_application = app_index;
    node.label_frame = static_cast<int>(s.frames_.size());
    new_frames.push_back(node.label_frame);
    s.frames_.push_back(std::move(label_frame));
  }
  for (const EdgeItem &item : p.items) {
    Item out;
    out.edge_label = item.edge_label;
    if (item.is_call()) {
      Frame child;
      child.rank = item.call().rank();
      for (int r : item.call().refs) child.slots.push_back(cell[r]);
      child.incoming_edge = item.edge_label;
      child.depth = frame.depth + 1;
      child.owner = node_index;
      child.owner_item = static_cast<int>(node.items.size());
      child.parent_application = app_index;
      out.kind = Item::kPending;
      out.value = static_cast<int>(s.frames_.size());
      new_frames.push_back(out.value);
      s.frames_.push_back(std::move(child));
    } else {
      out.kind = Item::kRef;
      out.value = cell[item.reference()];
    }
    node.items.push_back(std::move(out));
  }
  s.nodes_.push_back(std::move(node));
  if (frame.owner >= 0) {
    Item &slot = s.nodes_[frame.owner].items[frame.owner_item];
    slot.kind = Item::kChild;
    slot.value = node_index;
  }
  for (auto it = new_frames.rbegin(); it != new_frames.rend(); ++it) {
    s.stack_.push_back(*it);
  }

  App app;
  app.production = p;
  app.node = node_index;
  app.parent = frame.parent_application;
  app.remaining = p.arity();
  if (p.has_open_label()) app.children.push_back(-1);
  s.applications_.push_back(std::move(app));
  if (frame.parent_application >= 0) {
    s.applications_[frame.parent_application].children.push_back(app_index);
  }
  if (p.arity() == 0) {
    s.applications_[app_index].remaining = 1;
    s.complete_child(app_index, s.last_reduces_);
  }
}

std::string DerivationState::render_frame(int frame,
                                          std::map<int, int> &unbound) const {
  const Frame &f = frames_[frame];
  if (f.kind == FrameKind::kLabel) return "L";
  std::string out = "T" + std::to_string(f.rank);
  if (f.rank == 0) return out;
  out += '(';
  for (size_t i = 0; i < f.slots.size(); ++i) {
    if (i > 0) out += ", ";
    int bound = slots_[f.slots[i]];
    if (bound >= 0) {
      out += nodes_[bound].id;
    } else {
      auto [it, fresh] = unbound.emplace(f.slots[i], 0);
      if (fresh) it->second = static_cast<int>(unbound.size());
      out += '$' + std::to_string(it->second);
    }
  }
  out += ')';
  return out;
}

void DerivationState::render(int node, std::map<int, int> &unbound,
                             std::string &out) const {
  const DNode &n = nodes_[node];
  out += '(';
  out += n.id;
  out += '/';
  out += n.label ? n.label->to_string() : std::string("L");
  for (const Item &item : n.items) {
    out += " :";
    out += item.edge_label;
    out += ' ';
    switch (item.kind) {
      case Item::kChild: render(item.value, unbound, out); break;
      case Item::kPending: out += render_frame(item.value, unbound); break;
      case Item::kRef: {
        int bound = slots_[item.value];
        if (bound >= 0) {
          out += nodes_[bound].id;
        } else {
          auto [it, fresh] = unbound.emplace(item.value, 0);
          if (fresh) it->second = static_cast<int>(unbound.size());
          out += '$' + std::to_string(it->second);
        }
        break;
      }
    }
  }
  out += ')';
}

std::string DerivationState::partial_string() const {
  std::map<int, int> unbound;
  if (nodes_.empty()) return stack_.empty() ? "" : render_frame(0, unbound);
  std::string out;
  render(0, unbound, out);
  return out;
}

Graph DerivationState::graph() const {
  Graph g;
  for (const DNode &n : nodes_) {
    Node &node = g.add_node(n.id, n.label.value_or(NodeLabel{}));
    node.sort = n.sort;
  }
  for (size_t i = 0; i < nodes_.size(); ++i) {
    Node &node = g.mutable_nodes()[i];
    for (const Item &item : nodes_[i].items) {
      if (item.kind == Item::kChild) {
        node.outgoing.push_back({item.edge_label, nodes_[item.value].id, false});
      } else if (item.kind == Item::kRef && slots_[item.value] >= 0) {
        node.outgoing.push_back(
            {item.edge_label, nodes_[slots_[item.value]].id, true});
      }
    }
  }
  if (!nodes_.empty()) g.set_root(nodes_[0].id);
  g.mark_reentrancies();
  return g;
}

// ---------------------------------------------------------------------------
// Free functions

std::vector<Action> applicable_actions(
    const DerivationState &s, const Grammar &g, bool restrict,
    const std::vector<NodeLabel> &extra_labels) {
  const auto &frame = s.top();
  std::vector<Action> actions;
  if (frame.kind == DerivationState::FrameKind::kLabel) {
    std::set<std::string> seen;
    for (const NodeLabel &label : g.labels()) {
      if (seen.insert(label.to_string()).second) {
        actions.push_back(Action::gen_label(label));
      }
    }
    for (const NodeLabel &label : extra_labels) {
      if (seen.insert(label.to_string()).second) {
        actions.push_back(Action::gen_label(label));
      }
    }
    return actions;
  }
  for (const Production &p : g.productions()) {
    if (!restrict || p.lhs_rank == frame.rank) {
      actions.push_back(Action::frag(p));
    }
  }
  return actions;
}

Graph finish(const DerivationState &s) {
  if (!s.complete()) throw std::logic_error("derivation is incomplete");
  return s.graph();
}

ProductionHeights::ProductionHeights(const Grammar &g)
    : production_(g.size(), kInfinite) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t i = 0; i < g.size(); ++i) {
      const Production &p = g.productions()[i];
      int h = 1;
      for (const EdgeItem &item : p.items) {
        if (item.is_call()) h = std::max(h, 1 + rank(item.call().rank()));
      }
      h = std::min(h, kInfinite);
      if (h < production_[i]) {
        production_[i] = h;
        auto it = rank_.find(p.lhs_rank);
        if (it == rank_.end() || h < it->second) rank_[p.lhs_rank] = h;
        changed = true;
      }
    }
  }
  std::set<int> seen{0};
  std::vector<int> queue{0};
  while (!queue.empty()) {
    int r = queue.back();
    queue.pop_back();
    reachable_.push_back(r);
    for (size_t i = 0; i < g.size(); ++i) {
      const Production &p = g.productions()[i];
      if (p.lhs_rank != r || production_[i] >= kInfinite) continue;
      for (const EdgeItem &item : p.items) {
        if (item.is_call() && seen.insert(item.call().rank()).second) {
          queue.push_back(item.call().rank());
        }
      }
    }
  }
  std::sort(reachable_.begin(), reachable_.end());
}

int ProductionHeights::rank(int r) const {
  auto it = rank_.find(r);
  return it == rank_.end() ? kInfinite : it->second;
}

std::vector<int> decodable_productions(const DerivationState &s,
                                       const Grammar &g,
                                       const ProductionHeights &heights,
                                       int depth_cap) {
  const int depth = s.top().depth;
  std::vector<int> applicable, fitting;
  int shortest = ProductionHeights::kInfinite;
  for (size_t i = 0; i < g.size(); ++i) {
    if (!s.can_apply(g.productions()[i])) continue;
    const int h = heights.production(static_cast<int>(i));
    if (h >= ProductionHeights::kInfinite) continue;
    applicable.push_back(static_cast<int>(i));
    shortest = std::min(shortest, h);
    if (depth + h <= depth_cap) fitting.push_back(static_cast<int>(i));
  }
  if (!fitting.empty()) return fitting;
  std::vector<int> out;
  for (int i : applicable) {
    if (heights.production(i) == shortest) out.push_back(i);
  }
  return out;
}

std::vector<Action> derivation_actions(const Derivation &d) {
  std::vector<Action> actions;
  std::function<void(const DerivationTree &)> walk =
      [&](const DerivationTree &node) {
        const Application &app = d.applications[node.application];
        actions.push_back(Action::frag(app.production));
        if (app.label) actions.push_back(Action::gen_label(*app.label));
        for (const DerivationTree &child : node.children) walk(child);
        actions.push_back(Action::reduce());
      };
  walk(d.tree);
  return actions;
}

Replay replay(const std::vector<Action> &actions, bool keep_strings) {
  Replay out{DerivationState::start(), {}, {}};
  // Traces that list REDUCE explicitly must match the automatic events;
  // traces without any REDUCE lines are accepted as well.
  const bool explicit_reduces =
      std::any_of(actions.begin(), actions.end(),
                  [](const Action &x) { return x.kind == Action::kReduce; });
  size_t pending_reduces = 0;
  for (const Action &a : actions) {
    if (a.kind == Action::kReduce) {
      if (pending_reduces == 0) {
        throw std::logic_error("REDUCE where none is due");
      }
      --pending_reduces;
      continue;
    }
    if (pending_reduces != 0) {
      throw std::logic_error("missing REDUCE before " + a.to_string());
    }
    out.state.advance(a);
    out.trace.push_back(a);
    if (keep_strings) out.partial_strings.push_back(out.state.partial_string());
    for (size_t i = 0; i < out.state.last_reduces().size(); ++i) {
      out.trace.push_back(Action::reduce());
      if (keep_strings) {
        out.partial_strings.push_back(out.state.partial_string());
      }
    }
    if (explicit_reduces) pending_reduces = out.state.last_reduces().size();
  }
  if (pending_reduces != 0) throw std::logic_error("missing final REDUCE");
  return out;
}

Graph sample(const Grammar &g, uint64_t seed, int depth_cap,
             std::vector<Action> *trace) {
  ProductionHeights heights(g);
  for (int r : heights.reachable_ranks()) {
    if (heights.rank(r) >= ProductionHeights::kInfinite) {
      throw SampleError("no terminating production for rank " +
                        std::to_string(r));
    }
  }
  if (heights.rank(0) >= ProductionHeights::kInfinite) {
    throw SampleError("no terminating production for rank 0");
  }
  std::vector<NodeLabel> labels = g.labels();
  if (labels.empty()) labels.push_back(NodeLabel{"entity", {}, false});

  std::mt19937_64 rng(seed);
  auto pick = [&](size_t n) {
    return std::uniform_int_distribution<size_t>(0, n - 1)(rng);
  };
  constexpr int kAttempts = 100;
  const int hard_depth = depth_cap + 64;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    DerivationState s = DerivationState::start();
    std::vector<Action> actions;
    bool dead_end = false;
    while (!s.complete()) {
      const auto &frame = s.top();
      Action a;
      if (frame.kind == DerivationState::FrameKind::kLabel) {
        a = Action::gen_label(labels[pick(labels.size())]);
      } else {
        std::vector<int> options =
            decodable_productions(s, g, heights, depth_cap);
        if (options.empty() || frame.depth > hard_depth) {
          dead_end = true;
          break;
        }
        a = Action::frag(g.productions()[options[pick(options.size())]]);
      }
      s.advance(a);
      if (!trace) continue;
      actions.push_back(std::move(a));
      for (size_t i = 0; i < s.last_reduces().size(); ++i) {
        actions.push_back(Action::reduce());
      }
    }
    if (dead_end) continue;
    if (trace) *trace = std::move(actions);
    return finish(s);
  }
  throw SampleError("no complete derivation found after " +
                    std::to_string(kAttempts) + " attempts");
}

}  // namespace rnndag
