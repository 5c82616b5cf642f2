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

#ifndef RNNDAG_TRIPLES_H_
#define RNNDAG_TRIPLES_H_

#include <string>
#include <vector>

#include "rnndag/graph.h"

namespace rnndag {

inline constexpr char kTopSource[] = "TOP";
inline constexpr char kInstanceRelation[] = "instance";
inline constexpr char kSenseRelation[] = "sense";
inline constexpr char kPresupposedRelation[] = "presupposed";
inline constexpr char kTopRelation[] = "top";

enum class TripleKind { kInstance, kAttribute, kRelation, kTop };

// "source - relation - target". For instance and attribute triples the
// target is a constant; for relation triples it is a variable; for the top
// triple the source is the constant TOP.
struct Triple {
  TripleKind kind;
  std::string source;
  std::string relation;
  std::string target;

  friend bool operator==(const Triple &, const Triple &) = default;
};

struct TripleSet {
  // Variables in first-mention order.
  std::vector<std::string> variables;
  std::vector<Triple> triples;

  size_t size() const { return triples.size(); }
  size_t count(TripleKind kind) const;
};

TripleSet to_triples(const Graph &g);

}  // namespace rnndag

#endif  // RNNDAG_TRIPLES_H_
