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

// Action scorers for derivations and grammar-constrained parsing.
//
// The neural model encodes the sentence with a BiLSTM over projected
// feature embeddings and scores actions from a stack LSTM over the partial
// derivation. GEN-FRAG attends over the encoder states; GEN-LABEL mixes
// generation of constants with copying of input lemmas through a gate;
// REDUCE composes the children and parent fragments with another LSTM.
// Sense and presupposition are predicted by separate classifiers that do
// not feed the stack.

#ifndef RNNDAG_SCORER_H_
#define RNNDAG_SCORER_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <unordered_map>
#include <vector>

#include "rnndag/autodiff.h"
#include "rnndag/corpus.h"
#include "rnndag/derive.h"
#include "rnndag/eval.h"
#include "rnndag/grammar.h"

namespace rnndag {

// String-to-index map with a reserved entry at index 0.
class Vocabulary {
 public:
  explicit Vocabulary(std::string reserved = "<unk>");

  int add(const std::string &s);
  // 0 when absent.
  int index(const std::string &s) const;
  bool contains(const std::string &s) const { return map_.count(s) > 0; }
  const std::string &at(int i) const { return items_[i]; }
  int size() const { return static_cast<int>(items_.size()); }
  const std::vector<std::string> &items() const { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, int> map_;
};

inline constexpr char kStartEdge[] = "<start>";
inline constexpr char kNoSense[] = "<none>";

struct TokenFeatures {
  int word = 0;
  int pretrained = 0;
  int lemma = 0;
  int pos = 0;
  int semtag = 0;
  int dep = 0;
};

struct Vocabularies {
  Vocabulary words;
  Vocabulary pretrained;
  Vocabulary lemmas;
  Vocabulary pos;
  Vocabulary semtags;
  Vocabulary deps;
  // Output side.
  Vocabulary terminals;   // lemmas embedded on the stack
  Vocabulary constants;   // lemmas produced by the generate branch
  Vocabulary senses{kNoSense};
  Vocabulary edges;       // incoming edge labels; kStartEdge is index 1

  Vocabularies();
  // Input vocabularies from tokens, output vocabularies from graphs.
  // Constants are the lemmas that occur at least once without a matching
  // input lemma.
  static Vocabularies build(const std::vector<Sentence> &corpus);
};

struct ModelDims {
  int word = 128;
  int pretrained = 100;
  int feature = 50;
  int hidden = 150;
  int fragment = 50;  // fragment, terminal and edge embeddings
};

struct TrainConfig {
  double learning_rate = 0.001;
  double decay = 0.1;
  int decay_every = 10;  // epochs; 0 disables decay
  int epochs = 30;
  ModelDims dims;
  uint64_t seed = kDefaultSeed;
  bool restrict = true;
  // Learned scalar weight per input feature class.
  bool feature_gates = false;
  // Stop once an epoch's teacher-forced action accuracy reaches this
  // value; 0 disables.
  double stop_accuracy = 0.0;
};

// Teacher-forcing record of one non-REDUCE gold action.
struct OracleStep {
  bool frag = true;
  std::string edge;
  // kGenFrag: production index and its position in the mask.
  int production = -1;
  std::vector<int> mask;
  int target = -1;
  // kGenLabel.
  NodeLabel label;
  // Arity of each application completed after this action.
  std::vector<int> reduces;
};

// The gold steps of a sentence's graph. Throws DataError when the graph's
// derivation uses a production the grammar lacks.
std::vector<OracleStep> oracle_steps(const Graph &g, const Grammar &grammar,
                                     bool restrict);

class Model;

// One decoding pass over a sentence on a tape.
class Decoder {
 public:
  Decoder(Model &m, Tape &t, const std::vector<Token> &tokens);

  Var state() const { return stack_.back().h; }
  size_t stack_size() const { return stack_.size(); }
  const std::vector<Var> &encoder_states() const { return encoded_; }

  // Log-probabilities over `mask` (production indices).
  Var frag_log_probs(const std::string &edge, const std::vector<int> &mask);

  // Log-probabilities of Generate(constant k) for every constant followed
  // by Copy(i) for each position in `copyable`.
  struct LabelScores {
    Var log_probs;
    int generate = 0;
    std::vector<int> copyable;
  };
  LabelScores label_log_probs(const std::string &edge,
                              const std::vector<int> &copyable);
  // Indices into LabelScores::log_probs that produce `lemma`.
  std::vector<int> label_targets(const LabelScores &s,
                                 const std::string &lemma) const;

  Var sense_log_probs(const std::string &lemma);
  Var presup_log_odds(const std::string &lemma);

  void push_fragment(int production);
  void push_terminal(const std::string &lemma);
  // Pops `arity` children and their parent and pushes their composition.
  void reduce(int arity);

 private:
  struct Entry {
    Var embedding;
    Var h;
    Var c;
  };
  void push(Var embedding);
  Var attend(Parameter &w2, Var hd);
  Var edge_embedding(const std::string &edge);

  Model &m_;
  Tape &t_;
  std::vector<Token> tokens_;
  std::vector<Var> encoded_;
  Var encoded_matrix_;
  std::vector<Entry> stack_;
};

struct LstmCell {
  Parameter w;  // 4n x (input + n), gate order i f o g
  Parameter b;
};

class Model {
 public:
  Model() = default;
  Model(Grammar grammar, Vocabularies vocab, ModelDims dims, uint64_t seed,
        bool feature_gates = false);

  const Grammar &grammar() const { return grammar_; }
  const Vocabularies &vocab() const { return vocab_; }
  const ModelDims &dims() const { return dims_; }
  bool feature_gates() const { return feature_gates_; }

  std::vector<TokenFeatures> features(const std::vector<Token> &tokens) const;

  std::vector<Parameter *> parameters();
  Parameter *find(const std::string &name);
  // Sets every trainable parameter to `value`.
  void fill(double value);

  // Loads `word v1 ... vn` lines into the frozen pretrained table. Words
  // missing from the file keep their initial vectors. Returns the number
  // of rows loaded.
  size_t load_pretrained(std::istream &in);

  void save(std::ostream &out) const;
  // Throws DataError on a malformed or incompatible checkpoint.
  static Model load(std::istream &in);

 private:
  friend class Decoder;

  Grammar grammar_;
  Vocabularies vocab_;
  ModelDims dims_;
  bool feature_gates_ = false;

  Parameter emb_word, emb_pretrained, emb_lemma, emb_pos, emb_semtag, emb_dep;
  Parameter gates;
  Parameter w1;
  LstmCell enc_fwd, enc_bwd, stack, compose;
  Parameter emb_frag, emb_term, emb_edge;
  Parameter frag_w2, frag_w3, frag_w4;
  Parameter label_w2, label_w3, label_w4;
  Parameter copy_w5, gate_w, gate_b;
  Parameter sense_w, sense_b, presup_w, presup_b;
};

struct SentenceScore {
  double loss = 0.0;
  size_t actions = 0;
  size_t correct = 0;  // argmax equals the gold action
};

// Cross-entropy of the gold steps; with `backprop` the gradients are added
// to the parameters' grads.
SentenceScore score_sentence(Model &m, const std::vector<Token> &tokens,
                             const std::vector<OracleStep> &steps,
                             bool backprop, Tape &tape);

struct EpochStats {
  int epoch = 0;
  double learning_rate = 0.0;
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

// Builds vocabularies and grammar from `corpus`, initializes a model and
// trains it with Adam on one sentence at a time. Throws DataError when a
// sentence lacks a graph.
Model train(const std::vector<Sentence> &corpus, const TrainConfig &config,
            std::vector<EpochStats> *history = nullptr,
            const std::function<void(const EpochStats &)> &on_epoch = {});

// Trains an existing model in place.
void train_model(Model &m, const std::vector<Sentence> &corpus,
                 const TrainConfig &config,
                 std::vector<EpochStats> *history = nullptr,
                 const std::function<void(const EpochStats &)> &on_epoch = {});

// Teacher-forced accuracy over sentences with graphs.
SentenceScore evaluate_actions(Model &m, const std::vector<Sentence> &corpus,
                               bool restrict);

// Largest relative error between backprop and central differences over
// the entries of one parameter block.
struct GradientCheck {
  std::string name;
  size_t entries = 0;
  double max_relative_error = 0.0;
};

// Checks every entry of every trainable block on one sentence.
std::vector<GradientCheck> check_gradients(Model &m, const Sentence &s,
                                           bool restrict, double step = 1e-5);

// Scores actions during greedy decoding.
class ActionScorer {
 public:
  virtual ~ActionScorer() = default;
  virtual void begin(const std::vector<Token> &tokens) = 0;
  // Log-probabilities over `mask` for the top T frame.
  virtual std::vector<double> frag_log_probs(
      const DerivationState &s, const std::vector<int> &mask) = 0;
  virtual NodeLabel predict_label(const DerivationState &s) = 0;
  // Called after each GEN-FRAG or GEN-LABEL with the resulting state.
  virtual void observe(const Action &a, const DerivationState &after) = 0;
};

class NeuralScorer : public ActionScorer {
 public:
  explicit NeuralScorer(Model &m) : m_(m) {}

  void begin(const std::vector<Token> &tokens) override;
  std::vector<double> frag_log_probs(const DerivationState &s,
                                     const std::vector<int> &mask) override;
  NodeLabel predict_label(const DerivationState &s) override;
  void observe(const Action &a, const DerivationState &after) override;

 private:
  Model &m_;
  Tape tape_;
  std::unique_ptr<Decoder> decoder_;
  std::vector<Token> tokens_;
};

// Relative-frequency baseline: productions by incoming edge label with
// back-off to their overall counts, and labels by incoming edge preferring
// unused input lemmas.
class CountScorer : public ActionScorer {
 public:
  explicit CountScorer(const Grammar &g) : grammar_(g) {}
  void fit(const std::vector<Sentence> &corpus);

  void begin(const std::vector<Token> &tokens) override;
  std::vector<double> frag_log_probs(const DerivationState &s,
                                     const std::vector<int> &mask) override;
  NodeLabel predict_label(const DerivationState &s) override;
  void observe(const Action &, const DerivationState &) override {}

 private:
  const Grammar &grammar_;
  std::map<std::string, std::map<int, double>> frag_counts_;
  std::map<std::string, std::map<std::string, double>> label_counts_;
  std::map<std::string, NodeLabel> label_forms_;
  std::vector<std::string> lemmas_;
  std::map<std::string, int> used_;
};

struct ParseOptions {
  bool restrict = true;
  int depth_cap = 20;
};

struct ParseStats {
  size_t sentences = 0;
  // Unrestricted decoding only: the best-scoring production could not
  // apply and the best applicable one was used instead.
  size_t rank_rejections = 0;
  // Decoding failed and a single box node was returned.
  size_t fallbacks = 0;
};

// Greedy decoding. The result always validates.
Graph parse(const std::vector<Token> &tokens, const Grammar &g,
            ActionScorer &scorer, const ParseOptions &options = {},
            ParseStats *stats = nullptr);

}  // namespace rnndag

#endif  // RNNDAG_SCORER_H_
