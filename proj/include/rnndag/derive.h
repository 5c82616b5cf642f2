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

// Leftmost string-rewriting derivations.
//
// A DerivationState holds the partially derived string as the graph emitted
// so far plus a stack of pending functions (T_i frames and L frames), the
// leftmost of which is on top. GEN-FRAG rewrites a T_i frame with a
// production, GEN-LABEL rewrites an L frame, and REDUCE fires by itself each
// time a production's subtree is complete. Any complete derivation is a
// single-rooted, connected, acyclic and fully labelled graph.

#ifndef RNNDAG_DERIVE_H_
#define RNNDAG_DERIVE_H_

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rnndag/grammar.h"
#include "rnndag/graph.h"

namespace rnndag {

class BindingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Action {
  enum Kind { kGenFrag, kGenLabel, kReduce };

  Kind kind = kReduce;
  Production production;  // kGenFrag
  NodeLabel label;        // kGenLabel

  static Action frag(Production p);
  static Action gen_label(NodeLabel label);
  static Action reduce();

  // Trace line: "FRAG <production>", "LABEL <label>" or "REDUCE".
  std::string to_string() const;
  static Action from_string(std::string_view line);

  friend bool operator==(const Action &, const Action &) = default;
};

class DerivationState {
 public:
  enum class FrameKind { kTerm, kLabel };

  struct Frame {
    FrameKind kind = FrameKind::kTerm;
    int rank = 0;
    // Binding cells for the frame's reference arguments.
    std::vector<int> slots;
    // Label of the edge that leads to the node this frame derives; empty for
    // the start symbol.
    std::string incoming_edge;
    int depth = 0;
    // Node whose item (or label, for L frames) this frame fills; -1 for the
    // start symbol.
    int owner = -1;
    int owner_item = -1;
    // Production application this frame belongs to; -1 for the start symbol.
    int parent_application = -1;
  };

  static DerivationState start();

  bool complete() const { return stack_.empty(); }
  const Frame &top() const;
  // Pending frames, leftmost last.
  size_t pending() const { return stack_.size(); }

  // Applies GEN-FRAG or GEN-LABEL to the top frame. Throws BindingError on
  // a rank mismatch, an unbound reference, a rebinding, or a frame/action
  // kind mismatch. REDUCE is never applied explicitly.
  DerivationState apply(const Action &a) const;
  // In-place variant of apply; leaves the state unchanged when it throws a
  // BindingError.
  void advance(const Action &a);

  // True iff apply(Action::frag(p)) would succeed on the top frame.
  bool can_apply(const Production &p) const;

  // Applications completed (REDUCE events, innermost first) by the most
  // recent apply.
  const std::vector<int> &last_reduces() const { return last_reduces_; }
  size_t frag_count() const { return applications_.size(); }
  size_t reduce_count() const { return reduce_count_; }

  // Children of an application in derivation-tree order: a label leaf is
  // reported as -1, child applications by index.
  const std::vector<int> &application_children(int app) const {
    return applications_[app].children;
  }
  const Production &application_production(int app) const {
    return applications_[app].production;
  }

  // The partially derived string, e.g. "(b1/□ :Imp1 T1($1) :Imp2 T1($1))".
  // Unbound references are numbered by first appearance.
  std::string partial_string() const;

  // Graph emitted so far. Pending items are omitted.
  Graph graph() const;

 private:
  enum class FragCheck { kOk, kComplete, kKind, kRank, kRebind, kUnbound };
  FragCheck check_frag(const Production &p) const;

  struct Item {
    enum Kind { kChild, kPending, kRef };
    std::string edge_label;
    Kind kind = kPending;
    int value = -1;  // node, frame or slot index
  };
  struct DNode {
    std::string id;
    char sort = 'x';
    std::optional<NodeLabel> label;  // nullopt while L is pending
    int label_frame = -1;
    std::vector<Item> items;
  };
  struct App {
    Production production;
    int node = -1;
    int parent = -1;
    int remaining = 0;
    std::vector<int> children;
  };

  void complete_child(int app, std::vector<int> &events);
  void render(int node, std::map<int, int> &unbound, std::string &out) const;
  std::string render_frame(int frame, std::map<int, int> &unbound) const;

  std::vector<DNode> nodes_;
  std::vector<Frame> frames_;
  std::vector<int> stack_;
  std::vector<int> slots_;  // node index or -1
  std::vector<App> applications_;
  std::map<char, int> counters_;
  std::vector<int> last_reduces_;
  size_t reduce_count_ = 0;
};

// Actions applicable to a non-complete state. On an L frame: every grammar
// label plus `extra_labels`. On a T_i frame: productions of rank i when
// `restrict` is set, otherwise all productions. Throws std::logic_error on
// a complete state.
std::vector<Action> applicable_actions(
    const DerivationState &s, const Grammar &g, bool restrict,
    const std::vector<NodeLabel> &extra_labels = {});

// Throws std::logic_error if the state is incomplete.
Graph finish(const DerivationState &s);

// Minimum derivation height of each production and each rank.
class ProductionHeights {
 public:
  static constexpr int kInfinite = std::numeric_limits<int>::max() / 4;

  explicit ProductionHeights(const Grammar &g);

  int production(int index) const { return production_[index]; }
  int rank(int r) const;
  // Ranks reachable from T0 through productions of finite height.
  const std::vector<int> &reachable_ranks() const { return reachable_; }

 private:
  std::vector<int> production_;
  std::map<int, int> rank_;
  std::vector<int> reachable_;
};

// Productions that apply to the top T frame and fit below `depth_cap`;
// falls back to the shortest applicable ones when none fit. When `restrict`
// is false rank-mismatched productions are still excluded, since they
// cannot apply.
std::vector<int> decodable_productions(const DerivationState &s,
                                       const Grammar &g,
                                       const ProductionHeights &heights,
                                       int depth_cap);

// Expands a derivation into the action sequence (GEN-FRAG, GEN-LABEL and the
// automatic REDUCE events) in leftmost order.
std::vector<Action> derivation_actions(const Derivation &d);

struct Replay {
  DerivationState state;
  std::vector<Action> trace;  // including REDUCE events
  std::vector<std::string> partial_strings;  // after each trace entry
};

// Applies GEN-FRAG/GEN-LABEL actions in order; REDUCE entries in `actions`
// are checked against the automatic events. Throws BindingError or
// std::logic_error on mismatch.
Replay replay(const std::vector<Action> &actions, bool keep_strings = false);

// Random derivation: uniform choice among applicable productions and
// grammar labels, deterministic given the seed.
class SampleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Graph sample(const Grammar &g, uint64_t seed, int depth_cap,
             std::vector<Action> *trace = nullptr);

}  // namespace rnndag

#endif  // RNNDAG_DERIVE_H_
