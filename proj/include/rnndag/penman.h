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

// PENMAN-style text serialization of graphs.
//
//   (b1/□ :Imp1 (b2/□ :Drs (x1/ship :PartOf (x2/dock^p))) :Imp2 ...)
//
// Each variable is written as a bracketed subtree at its first occurrence
// and as a bare reference afterwards. Labels encode sense and
// presupposition as `lemma~sense^p`.

#ifndef RNNDAG_PENMAN_H_
#define RNNDAG_PENMAN_H_

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "rnndag/graph.h"

namespace rnndag {

// Parses a single graph. Throws DataError on unbalanced brackets, unbound
// or duplicate variables, empty relations and unknown sort letters.
Graph parse_penman(std::string_view text, const SortSet &sorts = SortSet());

// Canonical single-line rendering. Requires a graph that validates.
std::string print_penman(const Graph &g);

// Splits a file into blank-line separated blocks. Lines starting with '#'
// are dropped.
std::vector<std::string> read_blocks(std::istream &in);

std::vector<Graph> read_penman_corpus(std::istream &in,
                                      const SortSet &sorts = SortSet());
void write_penman_corpus(std::ostream &out, const std::vector<Graph> &graphs);

}  // namespace rnndag

#endif  // RNNDAG_PENMAN_H_
