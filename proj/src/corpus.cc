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

#include "rnndag/corpus.h"

#include <cctype>
#include <regex>
#include <sstream>

#include "rnndag/penman.h"

namespace rnndag {

namespace {

std::string lowercase(std::string s) {
  for (char &c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

Token parse_token(const std::string &line) {
  std::istringstream fields(line);
  std::vector<std::string> f;
  std::string field;
  while (fields >> field) f.push_back(field);
  if (f.size() > 5) {
    throw DataError("token line has more than 5 fields: " + line);
  }
  f.resize(5, kUnknownField);
  Token t{f[0], f[1], f[2], f[3], f[4]};
  if (t.lemma == kUnknownField) t.lemma = lowercase(t.word);
  return t;
}

}  // namespace

std::vector<Sentence> read_sentence_corpus(std::istream &in) {
  // "(x1/..." rather than a bracket token such as "( ( -LRB- NIL punct".
  static const std::regex kGraphStart(R"(^\s*\(\s*[A-Za-z]+\d*\s*/)");
  std::vector<Sentence> out;
  std::vector<std::string> blocks = read_blocks(in);
  for (size_t b = 0; b < blocks.size(); ++b) {
    Sentence s;
    std::istringstream lines(blocks[b]);
    std::string line, graph;
    bool in_graph = false;
    while (std::getline(lines, line)) {
      if (!in_graph && std::regex_search(line, kGraphStart)) in_graph = true;
      if (in_graph) {
        graph += line;
        graph += '\n';
      } else {
        s.tokens.push_back(parse_token(line));
      }
    }
    std::string where = "sentence " + std::to_string(b + 1) + ": ";
    if (s.tokens.empty()) throw DataError(where + "no tokens");
    if (in_graph) {
      try {
        s.graph = parse_penman(graph);
      } catch (const DataError &e) {
        throw DataError(where + e.what());
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_sentence_corpus(std::ostream &out,
                           const std::vector<Sentence> &sentences) {
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (i > 0) out << '\n';
    for (const Token &t : sentences[i].tokens) {
      out << t.word << ' ' << t.lemma << ' ' << t.pos << ' ' << t.semtag
          << ' ' << t.dep << '\n';
    }
    if (sentences[i].graph) out << print_penman(*sentences[i].graph) << '\n';
  }
}

std::string sentence_text(const Sentence &s) {
  std::string text;
  for (const Token &t : s.tokens) {
    if (!text.empty()) text += ' ';
    text += t.word;
  }
  return text;
}

}  // namespace rnndag
