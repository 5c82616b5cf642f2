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

#include "rnndag/triples.h"

namespace rnndag {

size_t TripleSet::count(TripleKind kind) const {
  size_t n = 0;
  for (const Triple &t : triples) n += t.kind == kind;
  return n;
}

TripleSet to_triples(const Graph &g) {
  TripleSet set;
  for (const Node &node : g.nodes()) {
    set.variables.push_back(node.id);
    set.triples.push_back(
        {TripleKind::kInstance, node.id, kInstanceRelation, node.label.lemma});
    if (node.label.sense) {
      set.triples.push_back(
          {TripleKind::kAttribute, node.id, kSenseRelation, *node.label.sense});
    }
    if (node.label.presupposed) {
      set.triples.push_back(
          {TripleKind::kAttribute, node.id, kPresupposedRelation, "true"});
    }
  }
  for (const Node &node : g.nodes()) {
    for (const Edge &edge : node.outgoing) {
      set.triples.push_back(
          {TripleKind::kRelation, node.id, edge.label, edge.target});
    }
  }
  if (!g.empty()) {
    set.triples.push_back({TripleKind::kTop, kTopSource, kTopRelation, g.root()});
  }
  return set;
}

}  // namespace rnndag
