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

#include "rnndag/scorer.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "rnndag/penman.h"

namespace rnndag {

Vocabulary::Vocabulary(std::string reserved) { add(reserved); }

int Vocabulary::add(const std::string &s) {
  auto [it, inserted] = map_.emplace(s, static_cast<int>(items_.size()));
  if (inserted) items_.push_back(s);
  return it->second;
}

int Vocabulary::index(const std::string &s) const {
  auto it = map_.find(s);
  return it == map_.end() ? 0 : it->second;
}

Vocabularies::Vocabularies() { edges.add(kStartEdge); }

namespace {

std::string lowercase(std::string s) {
  for (char &c : s) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return s;
}

}  // namespace

Vocabularies Vocabularies::build(const std::vector<Sentence> &corpus) {
  Vocabularies v;
  for (const Sentence &s : corpus) {
    std::set<std::string> input_lemmas;
    for (const Token &t : s.tokens) {
      v.words.add(t.word);
      v.pretrained.add(lowercase(t.word));
      v.lemmas.add(t.lemma);
      v.pos.add(t.pos);
      v.semtags.add(t.semtag);
      v.deps.add(t.dep);
      input_lemmas.insert(t.lemma);
    }
    if (!s.graph) continue;
    for (const Node &n : s.graph->nodes()) {
      for (const Edge &e : n.outgoing) v.edges.add(e.label);
      if (n.label.is_box()) continue;
      v.terminals.add(n.label.lemma);
      if (n.label.sense) v.senses.add(*n.label.sense);
      if (!input_lemmas.count(n.label.lemma)) v.constants.add(n.label.lemma);
    }
  }
  return v;
}

std::vector<OracleStep> oracle_steps(const Graph &g, const Grammar &grammar,
                                     bool restrict) {
  std::vector<Action> actions = derivation_actions(extract_derivation(g));
  std::vector<OracleStep> steps;
  DerivationState state = DerivationState::start();
  for (const Action &a : actions) {
    if (a.kind == Action::kReduce) continue;
    OracleStep step;
    step.edge = state.top().incoming_edge;
    if (a.kind == Action::kGenFrag) {
      step.frag = true;
      step.production = grammar.index_of(a.production);
      if (step.production < 0) {
        throw DataError("production not in grammar: " +
                        a.production.to_string());
      }
      for (int i = 0; i < static_cast<int>(grammar.size()); ++i) {
        if (!restrict || state.can_apply(grammar.productions()[i])) {
          if (i == step.production) {
            step.target = static_cast<int>(step.mask.size());
          }
          step.mask.push_back(i);
        }
      }
    } else {
      step.frag = false;
      step.label = a.label;
    }
    state.advance(a);
    for (int app : state.last_reduces()) {
      step.reduces.push_back(state.application_production(app).arity());
    }
    steps.push_back(std::move(step));
  }
  return steps;
}

namespace {

Matrix zeros(int rows) { return Matrix::Zero(rows, 1); }

std::pair<Var, Var> lstm_step(Tape &t, LstmCell &cell, Var x, Var h, Var c) {
  int n = static_cast<int>(t.value(h).rows());
  Var z = t.add(t.matmul(t.param(cell.w), t.concat({x, h})), t.param(cell.b));
  Var i = t.sigmoid(t.rows(z, 0, n));
  Var f = t.sigmoid(t.rows(z, n, n));
  Var o = t.sigmoid(t.rows(z, 2 * n, n));
  Var g = t.tanh(t.rows(z, 3 * n, n));
  Var c2 = t.add(t.cmul(f, c), t.cmul(i, g));
  Var h2 = t.cmul(o, t.tanh(c2));
  return {h2, c2};
}

int argmax(const Matrix &v) {
  int best = 0;
  for (int i = 1; i < v.rows(); ++i) {
    if (v(i, 0) > v(best, 0)) best = i;
  }
  return best;
}

}  // namespace

Decoder::Decoder(Model &m, Tape &t, const std::vector<Token> &tokens)
    : m_(m), t_(t), tokens_(tokens) {
  if (tokens.empty()) throw std::invalid_argument("empty sentence");
  std::vector<TokenFeatures> feats = m.features(tokens);
  std::vector<Var> x;
  for (const TokenFeatures &f : feats) {
    std::vector<Var> parts = {
        t.column(m.emb_word, f.word), t.column(m.emb_pretrained, f.pretrained),
        t.column(m.emb_lemma, f.lemma), t.column(m.emb_pos, f.pos),
        t.column(m.emb_semtag, f.semtag), t.column(m.emb_dep, f.dep)};
    if (m.feature_gates_) {
      Var gates = t.param(m.gates);
      for (size_t k = 0; k < parts.size(); ++k) {
        parts[k] = t.scale_by(parts[k], t.pick(gates, static_cast<int>(k)));
      }
    }
    x.push_back(t.tanh(t.matmul(t.param(m.w1), t.concat(parts))));
  }
  int hidden = m.dims_.hidden;
  size_t n = x.size();
  std::vector<Var> fwd(n), bwd(n);
  Var h = t.constant(zeros(hidden)), c = h;
  for (size_t i = 0; i < n; ++i) {
    std::tie(h, c) = lstm_step(t, m.enc_fwd, x[i], h, c);
    fwd[i] = h;
  }
  h = t.constant(zeros(hidden));
  c = h;
  for (size_t i = n; i-- > 0;) {
    std::tie(h, c) = lstm_step(t, m.enc_bwd, x[i], h, c);
    bwd[i] = h;
  }
  for (size_t i = 0; i < n; ++i) encoded_.push_back(t.concat({fwd[i], bwd[i]}));
  encoded_matrix_ = t.hcat(encoded_);
  Var zero = t.constant(zeros(hidden));
  stack_.push_back({Var{}, zero, zero});
}

Var Decoder::attend(Parameter &w2, Var hd) {
  Var scores = t_.matmul_tn(encoded_matrix_, t_.matmul(t_.param(w2), hd));
  return t_.matmul(encoded_matrix_, t_.softmax(scores));
}

Var Decoder::edge_embedding(const std::string &edge) {
  const std::string &key = edge.empty() ? std::string(kStartEdge) : edge;
  return t_.column(m_.emb_edge, m_.vocab_.edges.index(key));
}

Var Decoder::frag_log_probs(const std::string &edge,
                            const std::vector<int> &mask) {
  if (mask.empty()) throw std::invalid_argument("empty production mask");
  Var hd = state();
  Var c = attend(m_.frag_w2, hd);
  Var y = t_.add(t_.matmul(t_.param(m_.frag_w3), c),
                 t_.matmul(t_.param(m_.frag_w4), edge_embedding(edge)));
  return t_.log_softmax(t_.gather(y, mask));
}

Decoder::LabelScores Decoder::label_log_probs(
    const std::string &edge, const std::vector<int> &copyable) {
  LabelScores out;
  out.generate = m_.vocab_.constants.size() - 1;
  out.copyable = copyable;
  if (out.generate == 0 && copyable.empty()) {
    throw std::invalid_argument("no constants and nothing to copy");
  }
  Var hd = state();
  Var gen, copy;
  if (out.generate > 0) {
    Var c = attend(m_.label_w2, hd);
    Var y = t_.add(t_.matmul(t_.param(m_.label_w3), c),
                   t_.matmul(t_.param(m_.label_w4), edge_embedding(edge)));
    gen = t_.log_softmax(y);
  }
  if (!copyable.empty()) {
    Var o = t_.matmul_tn(encoded_matrix_,
                         t_.matmul_tn(t_.param(m_.copy_w5), hd));
    copy = t_.log_softmax(t_.gather(o, copyable));
  }
  if (!gen.valid()) {
    out.log_probs = copy;
  } else if (!copy.valid()) {
    out.log_probs = gen;
  } else {
    Var z = t_.add(t_.matmul_tn(t_.param(m_.gate_w), hd), t_.param(m_.gate_b));
    out.log_probs = t_.concat({t_.add_scalar(gen, t_.log_sigmoid(z)),
                               t_.add_scalar(copy, t_.log_sigmoid(t_.neg(z)))});
  }
  return out;
}

std::vector<int> Decoder::label_targets(const LabelScores &s,
                                        const std::string &lemma) const {
  std::vector<int> targets;
  int k = m_.vocab_.constants.index(lemma);
  if (k > 0) targets.push_back(k - 1);
  for (size_t j = 0; j < s.copyable.size(); ++j) {
    if (tokens_[s.copyable[j]].lemma == lemma) {
      targets.push_back(s.generate + static_cast<int>(j));
    }
  }
  return targets;
}

namespace {

// Most probable lemma after summing the entries that produce it; ties go
// to the lemma reached first.
std::string best_lemma(const Vocabularies &v, const std::vector<Token> &tokens,
                       const Decoder::LabelScores &s, const Matrix &logp) {
  std::vector<std::string> order;
  std::map<std::string, double> mass;
  auto add = [&](const std::string &lemma, double lp) {
    if (!mass.count(lemma)) order.push_back(lemma);
    mass[lemma] += std::exp(lp);
  };
  for (int k = 0; k < s.generate; ++k) add(v.constants.at(k + 1), logp(k, 0));
  for (size_t j = 0; j < s.copyable.size(); ++j) {
    add(tokens[s.copyable[j]].lemma, logp(s.generate + j, 0));
  }
  std::string best = order.front();
  for (const std::string &l : order) {
    if (mass[l] > mass[best]) best = l;
  }
  return best;
}

}  // namespace

Var Decoder::sense_log_probs(const std::string &lemma) {
  Var in = t_.concat(
      {state(), t_.column(m_.emb_term, m_.vocab_.terminals.index(lemma))});
  return t_.log_softmax(t_.add(t_.matmul(t_.param(m_.sense_w), in),
                               t_.param(m_.sense_b)));
}

Var Decoder::presup_log_odds(const std::string &lemma) {
  Var in = t_.concat(
      {state(), t_.column(m_.emb_term, m_.vocab_.terminals.index(lemma))});
  return t_.add(t_.matmul_tn(t_.param(m_.presup_w), in),
                t_.param(m_.presup_b));
}

void Decoder::push(Var embedding) {
  auto [h, c] = lstm_step(t_, m_.stack, embedding, stack_.back().h,
                          stack_.back().c);
  stack_.push_back({embedding, h, c});
}

void Decoder::push_fragment(int production) {
  push(t_.column(m_.emb_frag, production));
}

void Decoder::push_terminal(const std::string &lemma) {
  push(t_.column(m_.emb_term, m_.vocab_.terminals.index(lemma)));
}

void Decoder::reduce(int arity) {
  if (arity < 0 || stack_.size() < static_cast<size_t>(arity) + 2) {
    throw std::logic_error("reduce below the stack bottom");
  }
  size_t parent = stack_.size() - arity - 1;
  std::vector<Var> inputs;
  for (size_t i = parent + 1; i < stack_.size(); ++i) {
    inputs.push_back(stack_[i].embedding);
  }
  inputs.push_back(stack_[parent].embedding);
  stack_.resize(parent);
  Var h = t_.constant(zeros(m_.dims_.fragment)), c = h;
  for (Var in : inputs) std::tie(h, c) = lstm_step(t_, m_.compose, in, h, c);
  push(h);
}

namespace {

Matrix uniform(std::mt19937_64 &rng, int rows, int cols, double a) {
  std::uniform_real_distribution<double> d(-a, a);
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) m(i, j) = d(rng);
  }
  return m;
}

Matrix glorot(std::mt19937_64 &rng, int rows, int cols) {
  return uniform(rng, rows, cols, std::sqrt(6.0 / (rows + cols)));
}

LstmCell make_cell(std::mt19937_64 &rng, const std::string &name, int input,
                   int n) {
  LstmCell cell;
  cell.w = Parameter(name + ".w", glorot(rng, 4 * n, input + n));
  Matrix b = Matrix::Zero(4 * n, 1);
  b.block(n, 0, n, 1).setOnes();  // forget gate
  cell.b = Parameter(name + ".b", b);
  return cell;
}

}  // namespace

Model::Model(Grammar grammar, Vocabularies vocab, ModelDims dims,
             uint64_t seed, bool feature_gates)
    : grammar_(std::move(grammar)),
      vocab_(std::move(vocab)),
      dims_(dims),
      feature_gates_(feature_gates) {
  for (int d : {dims.word, dims.pretrained, dims.feature, dims.hidden,
                dims.fragment}) {
    if (d <= 0) throw std::invalid_argument("model dimensions must be positive");
  }
  if (grammar_.empty()) throw std::invalid_argument("empty grammar");
  std::mt19937_64 rng(seed);
  const double e = 0.1;
  emb_word = Parameter("emb.word", uniform(rng, dims.word, vocab_.words.size(), e));
  emb_pretrained = Parameter(
      "emb.pretrained",
      uniform(rng, dims.pretrained, vocab_.pretrained.size(), e), false);
  emb_lemma = Parameter("emb.lemma",
                        uniform(rng, dims.feature, vocab_.lemmas.size(), e));
  emb_pos = Parameter("emb.pos", uniform(rng, dims.feature, vocab_.pos.size(), e));
  emb_semtag = Parameter("emb.semtag",
                         uniform(rng, dims.feature, vocab_.semtags.size(), e));
  emb_dep = Parameter("emb.dep", uniform(rng, dims.feature, vocab_.deps.size(), e));
  gates = Parameter("input.gates", Matrix::Ones(6, 1), feature_gates);
  int input = dims.word + dims.pretrained + 4 * dims.feature;
  int h = dims.hidden, f = dims.fragment;
  w1 = Parameter("input.w1", glorot(rng, h, input));
  enc_fwd = make_cell(rng, "encoder.fwd", h, h);
  enc_bwd = make_cell(rng, "encoder.bwd", h, h);
  stack = make_cell(rng, "decoder.stack", f, h);
  compose = make_cell(rng, "decoder.compose", f, f);
  int frags = static_cast<int>(grammar_.size());
  emb_frag = Parameter("emb.fragment", uniform(rng, f, frags, e));
  emb_term = Parameter("emb.terminal",
                       uniform(rng, f, vocab_.terminals.size(), e));
  emb_edge = Parameter("emb.edge", uniform(rng, f, vocab_.edges.size(), e));
  frag_w2 = Parameter("frag.w2", glorot(rng, 2 * h, h));
  frag_w3 = Parameter("frag.w3", glorot(rng, frags, 2 * h));
  frag_w4 = Parameter("frag.w4", glorot(rng, frags, f));
  int consts = std::max(vocab_.constants.size() - 1, 1);
  label_w2 = Parameter("label.w2", glorot(rng, 2 * h, h));
  label_w3 = Parameter("label.w3", glorot(rng, consts, 2 * h));
  label_w4 = Parameter("label.w4", glorot(rng, consts, f));
  copy_w5 = Parameter("copy.w5", glorot(rng, h, 2 * h));
  gate_w = Parameter("copy.gate.w", glorot(rng, h, 1));
  gate_b = Parameter("copy.gate.b", Matrix::Zero(1, 1));
  sense_w = Parameter("sense.w", glorot(rng, vocab_.senses.size(), h + f));
  sense_b = Parameter("sense.b", Matrix::Zero(vocab_.senses.size(), 1));
  presup_w = Parameter("presup.w", glorot(rng, h + f, 1));
  presup_b = Parameter("presup.b", Matrix::Zero(1, 1));
}

std::vector<TokenFeatures> Model::features(
    const std::vector<Token> &tokens) const {
  std::vector<TokenFeatures> out;
  for (const Token &t : tokens) {
    out.push_back({vocab_.words.index(t.word),
                   vocab_.pretrained.index(lowercase(t.word)),
                   vocab_.lemmas.index(t.lemma), vocab_.pos.index(t.pos),
                   vocab_.semtags.index(t.semtag), vocab_.deps.index(t.dep)});
  }
  return out;
}

std::vector<Parameter *> Model::parameters() {
  return {&emb_word, &emb_pretrained, &emb_lemma, &emb_pos, &emb_semtag,
          &emb_dep, &gates, &w1, &enc_fwd.w, &enc_fwd.b, &enc_bwd.w,
          &enc_bwd.b, &stack.w, &stack.b, &compose.w, &compose.b, &emb_frag,
          &emb_term, &emb_edge, &frag_w2, &frag_w3, &frag_w4, &label_w2,
          &label_w3, &label_w4, &copy_w5, &gate_w, &gate_b, &sense_w,
          &sense_b, &presup_w, &presup_b};
}

Parameter *Model::find(const std::string &name) {
  for (Parameter *p : parameters()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

void Model::fill(double value) {
  for (Parameter *p : parameters()) {
    if (p->trainable) p->value.setConstant(value);
  }
}

size_t Model::load_pretrained(std::istream &in) {
  size_t loaded = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    int col = vocab_.pretrained.index(lowercase(word));
    if (col == 0) continue;
    std::vector<double> values;
    double x;
    while (fields >> x) values.push_back(x);
    if (static_cast<int>(values.size()) != dims_.pretrained) {
      throw DataError("pretrained vector for '" + word + "' has " +
                      std::to_string(values.size()) + " values, expected " +
                      std::to_string(dims_.pretrained));
    }
    for (int i = 0; i < dims_.pretrained; ++i) {
      emb_pretrained.value(i, col) = values[i];
    }
    ++loaded;
  }
  return loaded;
}

namespace {

constexpr char kCheckpointMagic[] = "rnndag-model";
constexpr int kCheckpointVersion = 1;

void write_vocab(std::ostream &out, const std::string &name,
                 const Vocabulary &v) {
  out << "vocab " << name << ' ' << v.size() << '\n';
  for (const std::string &s : v.items()) out << s << '\n';
}

Vocabulary read_vocab(std::istream &in, const std::string &name) {
  std::string line, tag, got;
  int size = 0;
  std::getline(in, line);
  std::istringstream header(line);
  if (!(header >> tag >> got >> size) || tag != "vocab" || got != name ||
      size < 1) {
    throw DataError("checkpoint: expected vocabulary " + name);
  }
  std::getline(in, line);
  Vocabulary v(line);
  for (int i = 1; i < size; ++i) {
    if (!std::getline(in, line)) throw DataError("checkpoint: truncated " + name);
    v.add(line);
  }
  if (v.size() != size) throw DataError("checkpoint: duplicate entries in " + name);
  return v;
}

std::vector<std::pair<std::string, Vocabulary *>> vocab_fields(Vocabularies &v) {
  return {{"words", &v.words},         {"pretrained", &v.pretrained},
          {"lemmas", &v.lemmas},       {"pos", &v.pos},
          {"semtags", &v.semtags},     {"deps", &v.deps},
          {"terminals", &v.terminals}, {"constants", &v.constants},
          {"senses", &v.senses},       {"edges", &v.edges}};
}

}  // namespace

void Model::save(std::ostream &out) const {
  out << kCheckpointMagic << ' ' << kCheckpointVersion << '\n';
  out << "dims " << dims_.word << ' ' << dims_.pretrained << ' '
      << dims_.feature << ' ' << dims_.hidden << ' ' << dims_.fragment << '\n';
  out << "feature_gates " << (feature_gates_ ? 1 : 0) << '\n';
  Vocabularies v = vocab_;
  for (auto &[name, vocab] : vocab_fields(v)) write_vocab(out, name, *vocab);
  std::ostringstream g;
  grammar_.write(g);
  std::string text = g.str();
  out << "grammar " << std::count(text.begin(), text.end(), '\n') << '\n'
      << text;
  auto &self = const_cast<Model &>(*this);
  char buf[32];
  for (Parameter *p : self.parameters()) {
    out << "tensor " << p->name << ' ' << p->value.rows() << ' '
        << p->value.cols() << '\n';
    for (int i = 0; i < p->value.rows(); ++i) {
      for (int j = 0; j < p->value.cols(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", p->value(i, j));
        out << (j ? " " : "") << buf;
      }
      out << '\n';
    }
  }
  out << "end\n";
}

Model Model::load(std::istream &in) {
  std::string line, tag;
  int version = 0;
  std::getline(in, line);
  std::istringstream(line) >> tag >> version;
  if (tag != kCheckpointMagic) throw DataError("not a model checkpoint");
  if (version != kCheckpointVersion) {
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  }
  ModelDims dims;
  int gates = 0;
  std::getline(in, line);
  if (!(std::istringstream(line) >> tag >> dims.word >> dims.pretrained >>
        dims.feature >> dims.hidden >> dims.fragment) ||
      tag != "dims") {
    throw DataError("checkpoint: bad dims line");
  }
  std::getline(in, line);
  if (!(std::istringstream(line) >> tag >> gates) || tag != "feature_gates") {
    throw DataError("checkpoint: bad feature_gates line");
  }
  Vocabularies v;
  for (auto &[name, vocab] : vocab_fields(v)) *vocab = read_vocab(in, name);
  size_t lines = 0;
  std::getline(in, line);
  if (!(std::istringstream(line) >> tag >> lines) || tag != "grammar") {
    throw DataError("checkpoint: expected grammar");
  }
  std::string text;
  for (size_t i = 0; i < lines && std::getline(in, line); ++i) {
    text += line + '\n';
  }
  std::istringstream gin(text);
  Model m(Grammar::read(gin), std::move(v), dims, 0, gates != 0);
  std::set<std::string> seen;
  while (std::getline(in, line) && line != "end") {
    std::istringstream header(line);
    std::string name;
    long rows = 0, cols = 0;
    if (!(header >> tag >> name >> rows >> cols) || tag != "tensor") {
      throw DataError("checkpoint: bad tensor header: " + line);
    }
    Parameter *p = m.find(name);
    if (!p) throw DataError("checkpoint: unknown tensor " + name);
    if (p->value.rows() != rows || p->value.cols() != cols) {
      throw DataError("checkpoint: tensor " + name + " has shape " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (long i = 0; i < rows; ++i) {
      for (long j = 0; j < cols; ++j) {
        if (!(in >> p->value(i, j))) {
          throw DataError("checkpoint: truncated tensor " + name);
        }
      }
    }
    std::getline(in, line);
    seen.insert(name);
  }
  for (Parameter *p : m.parameters()) {
    if (!seen.count(p->name)) throw DataError("checkpoint: missing " + p->name);
    if (!p->value.allFinite()) throw DataError("checkpoint: non-finite " + p->name);
  }
  return m;
}

SentenceScore score_sentence(Model &m, const std::vector<Token> &tokens,
                             const std::vector<OracleStep> &steps,
                             bool backprop, Tape &tape) {
  tape.clear();
  Decoder d(m, tape, tokens);
  std::vector<int> positions(tokens.size());
  std::iota(positions.begin(), positions.end(), 0);
  std::vector<Var> terms;
  SentenceScore out;
  for (const OracleStep &step : steps) {
    bool correct;
    if (step.frag) {
      Var lp = d.frag_log_probs(step.edge, step.mask);
      terms.push_back(tape.pick(lp, step.target));
      correct = argmax(tape.value(lp)) == step.target;
      d.push_fragment(step.production);
    } else {
      const NodeLabel &gold = step.label;
      auto scores = d.label_log_probs(step.edge, positions);
      std::vector<int> targets = d.label_targets(scores, gold.lemma);
      if (targets.empty()) {
        throw DataError("label '" + gold.lemma +
                        "' is neither a constant nor an input lemma");
      }
      terms.push_back(tape.logsumexp(tape.gather(scores.log_probs, targets)));
      correct = best_lemma(m.vocab(), tokens, scores,
                           tape.value(scores.log_probs)) == gold.lemma;
      Var sense = d.sense_log_probs(gold.lemma);
      int sense_gold = m.vocab().senses.index(gold.sense.value_or(kNoSense));
      terms.push_back(tape.pick(sense, sense_gold));
      correct = correct && argmax(tape.value(sense)) == sense_gold;
      Var odds = d.presup_log_odds(gold.lemma);
      terms.push_back(tape.log_sigmoid(gold.presupposed ? odds : tape.neg(odds)));
      correct = correct && (tape.scalar_value(odds) > 0) == gold.presupposed;
      d.push_terminal(gold.lemma);
    }
    for (int arity : step.reduces) d.reduce(arity);
    ++out.actions;
    if (correct) ++out.correct;
  }
  Var loss = tape.neg(tape.sum(terms));
  out.loss = tape.scalar_value(loss);
  if (backprop) tape.backward(loss);
  return out;
}

namespace {

std::vector<std::vector<OracleStep>> oracles(const Model &m,
                                             const std::vector<Sentence> &corpus,
                                             bool restrict) {
  std::vector<std::vector<OracleStep>> out;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].graph) {
      throw DataError("sentence " + std::to_string(i + 1) + " has no graph");
    }
    try {
      out.push_back(oracle_steps(*corpus[i].graph, m.grammar(), restrict));
    } catch (const DataError &e) {
      throw DataError("sentence " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

void train_model(Model &m, const std::vector<Sentence> &corpus,
                 const TrainConfig &config, std::vector<EpochStats> *history,
                 const std::function<void(const EpochStats &)> &on_epoch) {
  if (config.learning_rate <= 0) {
    throw std::invalid_argument("learning rate must be positive");
  }
  std::vector<std::vector<OracleStep>> gold = oracles(m, corpus, config.restrict);
  std::vector<Parameter *> params = m.parameters();
  for (Parameter *p : params) p->zero_grad();
  Adam adam;
  Tape tape;
  std::mt19937_64 rng(config.seed);
  std::vector<size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    int decays = config.decay_every > 0 ? (epoch - 1) / config.decay_every : 0;
    adam.lr = config.learning_rate * std::pow(config.decay, decays);
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats{epoch, adam.lr, 0.0, 0.0};
    size_t actions = 0, correct = 0;
    for (size_t i : order) {
      SentenceScore s =
          score_sentence(m, corpus[i].tokens, gold[i], true, tape);
      adam.update(params);
      stats.mean_loss += s.loss;
      actions += s.actions;
      correct += s.correct;
    }
    stats.mean_loss /= std::max<size_t>(corpus.size(), 1);
    stats.accuracy = actions ? static_cast<double>(correct) / actions : 0.0;
    if (history) history->push_back(stats);
    if (on_epoch) on_epoch(stats);
    if (config.stop_accuracy > 0 && stats.accuracy >= config.stop_accuracy) {
      break;
    }
  }
}

Model train(const std::vector<Sentence> &corpus, const TrainConfig &config,
            std::vector<EpochStats> *history,
            const std::function<void(const EpochStats &)> &on_epoch) {
  std::vector<Graph> graphs;
  for (size_t i = 0; i < corpus.size(); ++i) {
    if (!corpus[i].graph) {
      throw DataError("sentence " + std::to_string(i + 1) + " has no graph");
    }
    graphs.push_back(*corpus[i].graph);
  }
  Model m(build_grammar(graphs), Vocabularies::build(corpus), config.dims,
          config.seed, config.feature_gates);
  train_model(m, corpus, config, history, on_epoch);
  return m;
}

SentenceScore evaluate_actions(Model &m, const std::vector<Sentence> &corpus,
                               bool restrict) {
  std::vector<std::vector<OracleStep>> gold = oracles(m, corpus, restrict);
  SentenceScore total;
  Tape tape;
  for (size_t i = 0; i < corpus.size(); ++i) {
    SentenceScore s = score_sentence(m, corpus[i].tokens, gold[i], false, tape);
    total.loss += s.loss;
    total.actions += s.actions;
    total.correct += s.correct;
  }
  return total;
}

std::vector<GradientCheck> check_gradients(Model &m, const Sentence &s,
                                           bool restrict, double step) {
  if (!s.graph) throw DataError("gradient check needs a graph");
  std::vector<OracleStep> gold = oracle_steps(*s.graph, m.grammar(), restrict);
  Tape tape;
  std::vector<Parameter *> params = m.parameters();
  for (Parameter *p : params) p->zero_grad();
  score_sentence(m, s.tokens, gold, true, tape);
  std::vector<GradientCheck> out;
  for (Parameter *p : params) {
    if (!p->trainable) continue;
    GradientCheck check{p->name, 0, 0.0};
    for (int j = 0; j < p->value.cols(); ++j) {
      for (int i = 0; i < p->value.rows(); ++i) {
        double saved = p->value(i, j);
        p->value(i, j) = saved + step;
        double up = score_sentence(m, s.tokens, gold, false, tape).loss;
        p->value(i, j) = saved - step;
        double down = score_sentence(m, s.tokens, gold, false, tape).loss;
        p->value(i, j) = saved;
        double numeric = (up - down) / (2 * step);
        double analytic = p->grad(i, j);
        // Entries whose gradient is below the floor are compared absolutely.
        double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-4});
        check.max_relative_error =
            std::max(check.max_relative_error,
                     std::abs(numeric - analytic) / scale);
        ++check.entries;
      }
    }
    out.push_back(check);
  }
  for (Parameter *p : params) p->zero_grad();
  return out;
}

void NeuralScorer::begin(const std::vector<Token> &tokens) {
  tape_.clear();
  tokens_ = tokens;
  decoder_ = std::make_unique<Decoder>(m_, tape_, tokens_);
}

std::vector<double> NeuralScorer::frag_log_probs(const DerivationState &s,
                                                 const std::vector<int> &mask) {
  Var lp = decoder_->frag_log_probs(s.top().incoming_edge, mask);
  const Matrix &v = tape_.value(lp);
  return std::vector<double>(v.data(), v.data() + v.size());
}

NodeLabel NeuralScorer::predict_label(const DerivationState &s) {
  std::vector<int> positions(tokens_.size());
  std::iota(positions.begin(), positions.end(), 0);
  auto scores = decoder_->label_log_probs(s.top().incoming_edge, positions);
  NodeLabel label;
  label.lemma = best_lemma(m_.vocab(), tokens_, scores,
                           tape_.value(scores.log_probs));
  int sense = argmax(tape_.value(decoder_->sense_log_probs(label.lemma)));
  if (sense > 0) label.sense = m_.vocab().senses.at(sense);
  label.presupposed =
      tape_.scalar_value(decoder_->presup_log_odds(label.lemma)) > 0;
  return label;
}

void NeuralScorer::observe(const Action &a, const DerivationState &after) {
  if (a.kind == Action::kGenFrag) {
    decoder_->push_fragment(m_.grammar().index_of(a.production));
  } else {
    decoder_->push_terminal(a.label.lemma);
  }
  for (int app : after.last_reduces()) {
    decoder_->reduce(after.application_production(app).arity());
  }
}

void CountScorer::fit(const std::vector<Sentence> &corpus) {
  for (const Sentence &s : corpus) {
    if (!s.graph) continue;
    for (const OracleStep &step : oracle_steps(*s.graph, grammar_, false)) {
      if (step.frag) {
        frag_counts_[step.edge][step.production] += 1;
      } else {
        std::string key = step.label.to_string();
        label_counts_[step.edge][key] += 1;
        label_forms_[key] = step.label;
      }
    }
  }
}

void CountScorer::begin(const std::vector<Token> &tokens) {
  lemmas_.clear();
  used_.clear();
  for (const Token &t : tokens) lemmas_.push_back(t.lemma);
}

std::vector<double> CountScorer::frag_log_probs(const DerivationState &s,
                                                const std::vector<int> &mask) {
  double total = 0;
  for (size_t i = 0; i < grammar_.size(); ++i) total += grammar_.count(i);
  const auto &by_edge = frag_counts_[s.top().incoming_edge];
  std::vector<double> weights;
  double z = 0;
  for (int p : mask) {
    auto it = by_edge.find(p);
    double w = (it == by_edge.end() ? 0.0 : it->second) +
               (grammar_.count(p) + 1e-3) / (total + 1e-3);
    weights.push_back(w);
    z += w;
  }
  for (double &w : weights) w = std::log(w / z);
  return weights;
}

NodeLabel CountScorer::predict_label(const DerivationState &s) {
  auto unused = [&](const std::string &lemma) {
    long available = std::count(lemmas_.begin(), lemmas_.end(), lemma);
    return available > used_[lemma];
  };
  const auto &counts = label_counts_[s.top().incoming_edge];
  const NodeLabel *best = nullptr;
  double best_count = -1;
  for (const auto &[key, c] : counts) {
    const NodeLabel &l = label_forms_[key];
    if (unused(l.lemma) && c > best_count) {
      best = &l;
      best_count = c;
    }
  }
  if (!best) {
    for (const auto &[key, c] : counts) {
      if (c > best_count) {
        best = &label_forms_[key];
        best_count = c;
      }
    }
  }
  NodeLabel out;
  if (best) {
    out = *best;
  } else if (!grammar_.labels().empty()) {
    out = grammar_.labels().front();
  } else {
    out.lemma = "entity";
  }
  ++used_[out.lemma];
  return out;
}

Graph parse(const std::vector<Token> &tokens, const Grammar &g,
            ActionScorer &scorer, const ParseOptions &options,
            ParseStats *stats) {
  if (stats) ++stats->sentences;
  try {
    ProductionHeights heights(g);
    scorer.begin(tokens);
    DerivationState s = DerivationState::start();
    const int hard_cap = options.depth_cap + 64;
    std::vector<int> all(g.size());
    std::iota(all.begin(), all.end(), 0);
    while (!s.complete()) {
      Action a;
      if (s.top().kind == DerivationState::FrameKind::kLabel) {
        a = Action::gen_label(scorer.predict_label(s));
      } else {
        if (s.top().depth > hard_cap) throw SampleError("depth limit");
        std::vector<int> candidates =
            decodable_productions(s, g, heights, options.depth_cap);
        if (candidates.empty()) throw SampleError("no applicable production");
        std::vector<int> mask;
        if (options.restrict) {
          for (int p : all) {
            if (s.can_apply(g.productions()[p])) mask.push_back(p);
          }
        } else {
          mask = all;
        }
        std::vector<double> lp = scorer.frag_log_probs(s, mask);
        std::map<int, double> score;
        for (size_t i = 0; i < mask.size(); ++i) score[mask[i]] = lp[i];
        int best = candidates.front();
        for (int p : candidates) {
          if (score[p] > score[best]) best = p;
        }
        if (stats && !options.restrict) {
          int top = mask[std::max_element(lp.begin(), lp.end()) - lp.begin()];
          if (!s.can_apply(g.productions()[top])) ++stats->rank_rejections;
        }
        a = Action::frag(g.productions()[best]);
      }
      s.advance(a);
      scorer.observe(a, s);
    }
    return finish(s);
  } catch (const SampleError &) {
  } catch (const BindingError &) {
  }
  if (stats) ++stats->fallbacks;
  return parse_penman("(b1/□)");
}

}  // namespace rnndag
