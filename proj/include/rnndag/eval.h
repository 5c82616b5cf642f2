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

// Triple-matching evaluation in the style of Smatch/Counter: the best
// one-to-one variable alignment between a predicted and a gold triple set
// is searched by hill climbing, and precision, recall and F1 are computed
// over matched triples.

#ifndef RNNDAG_EVAL_H_
#define RNNDAG_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "rnndag/graph.h"
#include "rnndag/triples.h"

namespace rnndag {

inline constexpr int kDefaultRestarts = 20;
inline constexpr uint64_t kDefaultSeed = 1234;

struct MatchResult {
  size_t matched = 0;
  size_t pred_total = 0;
  size_t gold_total = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // mapping[i] = index of the gold variable aligned to pred variable i, or -1.
  std::vector<int> mapping;
  int restarts_used = 0;
  bool ill_formed = false;
};

// Fills precision, recall and F1 from the counts; 0/0 is 0.
void score(MatchResult &r);

// Number of pred triples that coincide with gold triples once pred
// variables are renamed through `mapping` (multiset intersection).
size_t count_matches(const TripleSet &pred, const TripleSet &gold,
                     const std::vector<int> &mapping);

MatchResult match(const TripleSet &pred, const TripleSet &gold,
                  int restarts = kDefaultRestarts,
                  uint64_t seed = kDefaultSeed);
// Ill-formed predictions score zero and are flagged.
MatchResult match(const Graph &pred, const Graph &gold,
                  int restarts = kDefaultRestarts,
                  uint64_t seed = kDefaultSeed);

inline constexpr size_t kBruteForceLimit = 8;

// Exact optimum over all injective partial alignments. Throws
// std::length_error if the smaller side has more than kBruteForceLimit
// variables.
MatchResult brute_force_match(const TripleSet &pred, const TripleSet &gold);
MatchResult brute_force_match(const Graph &pred, const Graph &gold);

struct CategoryScore {
  std::string name;
  size_t matched = 0;
  size_t pred = 0;
  size_t gold = 0;
  double f1 = 0.0;
};

// Per-category F1 under a fixed alignment: "all clauses", "DRS operators",
// "Roles", "Concepts", "Presuppositions", "Synsets" and its POS split
// ("Nouns", "Verbs", "Adverbs", "Adjectives", "Other senses") and "-sense".
std::vector<CategoryScore> fine_grained(const Graph &pred, const Graph &gold,
                                        const std::vector<int> &mapping);

// Category of a triple as used by fine_grained; empty for the top triple.
std::string triple_category(const Triple &t, const Graph &g);
// Sense tag part of speech: "n.01" -> "Nouns", "v" -> "Verbs", ...
std::string sense_category(const std::string &sense);

struct CorpusResult {
  MatchResult total;  // micro-averaged
  size_t ill_formed = 0;
  double ill_formed_rate = 0.0;  // percent
  std::vector<MatchResult> pairs;
};

// Throws std::invalid_argument on a length mismatch.
CorpusResult corpus_eval(const std::vector<Graph> &preds,
                         const std::vector<Graph> &golds,
                         int restarts = kDefaultRestarts,
                         uint64_t seed = kDefaultSeed);

}  // namespace rnndag

#endif  // RNNDAG_EVAL_H_
