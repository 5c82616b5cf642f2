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

// Annotated sentence corpora.
//
// One sentence per blank-line separated block: token lines
//
//   word lemma pos semtag dep
//
// optionally followed by the sentence's graph in PENMAN notation, starting
// on the first line that begins with '('. Missing trailing fields and "_"
// mean unknown; an unknown lemma defaults to the lowercased word.

#ifndef RNNDAG_CORPUS_H_
#define RNNDAG_CORPUS_H_

#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rnndag/graph.h"

namespace rnndag {

struct Token {
  std::string word;
  std::string lemma;
  std::string pos;
  std::string semtag;
  std::string dep;

  friend bool operator==(const Token &, const Token &) = default;
};

struct Sentence {
  std::vector<Token> tokens;
  std::optional<Graph> graph;
};

inline constexpr char kUnknownField[] = "_";

// Throws DataError on a block without tokens or with a malformed graph.
std::vector<Sentence> read_sentence_corpus(std::istream &in);
void write_sentence_corpus(std::ostream &out,
                           const std::vector<Sentence> &sentences);

std::string sentence_text(const Sentence &s);

}  // namespace rnndag

#endif  // RNNDAG_CORPUS_H_
