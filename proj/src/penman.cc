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

#include "rnndag/penman.h"

#include <cctype>
#include <sstream>
#include <unordered_set>

namespace rnndag {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r';
}

bool is_delimiter(char c) { return is_space(c) || c == '(' || c == ')'; }

class PenmanReader {
 public:
  PenmanReader(std::string_view text, const SortSet &sorts)
      : text_(text), sorts_(sorts) {}

  Graph read() {
    skip_space();
    if (at_end()) throw DataError("empty graph text");
    read_node();
    skip_space();
    if (!at_end()) {
      if (peek() == ')') throw DataError("unbalanced brackets: extra ')'");
      throw DataError("trailing text after graph at offset " +
                      std::to_string(pos_));
    }
    graph_.set_root(graph_.nodes().front().id);
    return std::move(graph_);
  }

 private:
  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void skip_space() {
    while (!at_end() && is_space(peek())) ++pos_;
  }

  void expect(char c) {
    skip_space();
    if (at_end()) {
      throw DataError(c == ')' ? "unbalanced brackets: missing ')'"
                               : std::string("unexpected end of text, "
                                             "expected '") + c + "'");
    }
    if (peek() != c) {
      throw DataError(std::string("expected '") + c + "' at offset " +
                      std::to_string(pos_));
    }
    ++pos_;
  }

  std::string_view read_symbol(bool stop_at_slash) {
    skip_space();
    size_t start = pos_;
    if (!at_end() && peek() == '"') {
      ++pos_;
      while (!at_end() && peek() != '"') ++pos_;
      if (at_end()) throw DataError("unterminated quoted label");
      ++pos_;
      // A quoted constant may still carry ~sense or ^p.
    }
    while (!at_end() && !is_delimiter(peek()) &&
           !(stop_at_slash && peek() == '/') && peek() != ':') {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  void check_variable(std::string_view var) {
    auto name = split_variable(var);
    if (!name) throw DataError("invalid variable name '" + std::string(var) +
                               "'");
    if (!sorts_.contains(name->sort)) {
      throw DataError("unknown sort letter in variable '" + std::string(var) +
                      "'");
    }
  }

  // Reads "(var/label :rel ...)" and returns the variable.
  std::string read_node() {
    expect('(');
    std::string var(read_symbol(true));
    if (var.empty()) throw DataError("missing variable after '('");
    check_variable(var);
    if (!defined_.insert(var).second) {
      throw DataError("duplicate definition of variable " + var);
    }
    expect('/');
    std::string_view label = read_symbol(false);
    if (label.empty()) throw DataError("missing label for variable " + var);
    graph_.add_node(var, NodeLabel::from_string(label));

    for (;;) {
      skip_space();
      if (at_end()) throw DataError("unbalanced brackets: missing ')'");
      if (peek() == ')') {
        ++pos_;
        return var;
      }
      if (peek() != ':') {
        throw DataError("expected relation or ')' at offset " +
                        std::to_string(pos_));
      }
      ++pos_;
      std::string relation(read_symbol(false));
      if (relation.empty()) throw DataError("empty relation name");
      skip_space();
      if (at_end() || peek() == ')' || peek() == ':') {
        throw DataError("empty relation :" + relation);
      }
      if (peek() == '(') {
        std::string target = read_node();
        graph_.add_edge(var, relation, target);
      } else {
        std::string target(read_symbol(false));
        if (target.empty()) throw DataError("empty relation :" + relation);
        if (defined_.count(target) == 0) {
          throw DataError("unbound variable " + target);
        }
        graph_.add_edge(var, relation, target);
        graph_.find(var)->outgoing.back().reentrant = true;
      }
    }
  }

  std::string_view text_;
  const SortSet &sorts_;
  size_t pos_ = 0;
  Graph graph_;
  std::unordered_set<std::string> defined_;
};

void print_node(const Graph &g, const Node &node,
                std::unordered_set<std::string> &printed, std::string &out) {
  printed.insert(node.id);
  out += '(';
  out += node.id;
  out += '/';
  out += node.label.to_string();
  for (const Edge &edge : node.outgoing) {
    out += " :";
    out += edge.label;
    out += ' ';
    const Node *target = g.find(edge.target);
    if (target == nullptr || printed.count(edge.target) != 0) {
      out += edge.target;
    } else {
      print_node(g, *target, printed, out);
    }
  }
  out += ')';
}

}  // namespace

Graph parse_penman(std::string_view text, const SortSet &sorts) {
  return PenmanReader(text, sorts).read();
}

std::string print_penman(const Graph &g) {
  std::string out;
  const Node *root = g.find(g.root());
  if (root == nullptr) return out;
  std::unordered_set<std::string> printed;
  print_node(g, *root, printed, out);
  return out;
}

std::vector<std::string> read_blocks(std::istream &in) {
  std::vector<std::string> blocks;
  std::string line, block;
  auto flush = [&] {
    if (!block.empty()) blocks.push_back(std::move(block));
    block.clear();
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos) {
      flush();
      continue;
    }
    if (line[first] == '#') continue;
    block += line;
    block += '\n';
  }
  flush();
  return blocks;
}

std::vector<Graph> read_penman_corpus(std::istream &in, const SortSet &sorts) {
  std::vector<Graph> graphs;
  std::vector<std::string> blocks = read_blocks(in);
  for (size_t i = 0; i < blocks.size(); ++i) {
    try {
      graphs.push_back(parse_penman(blocks[i], sorts));
    } catch (const DataError &e) {
      throw DataError("graph " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return graphs;
}

void write_penman_corpus(std::ostream &out, const std::vector<Graph> &graphs) {
  for (size_t i = 0; i < graphs.size(); ++i) {
    if (i > 0) out << '\n';
    out << print_penman(graphs[i]) << '\n';
  }
}

}  // namespace rnndag
