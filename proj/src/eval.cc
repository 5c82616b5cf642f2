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

#include "rnndag/eval.h"

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <tuple>
#include <unordered_map>

namespace rnndag {

void score(MatchResult &r) {
  r.precision = r.pred_total ? static_cast<double>(r.matched) / r.pred_total
                             : 0.0;
  r.recall =
      r.gold_total ? static_cast<double>(r.matched) / r.gold_total : 0.0;
  r.f1 = (r.precision + r.recall) > 0
             ? 2 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
}

namespace {

// A triple seen from the aligner: either unary (var, relation, constant)
// or binary (var, relation, var). Variables are indices.
struct Atom {
  bool binary = false;
  int first = -1;
  int second = -1;
  std::string relation;
  std::string constant;
};

std::vector<Atom> atoms(const TripleSet &set) {
  std::unordered_map<std::string, int> index;
  for (size_t i = 0; i < set.variables.size(); ++i) {
    index.emplace(set.variables[i], static_cast<int>(i));
  }
  auto var = [&](const std::string &name) {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  };
  std::vector<Atom> out;
  for (const Triple &t : set.triples) {
    Atom a;
    a.relation = t.relation;
    if (t.kind == TripleKind::kTop) {
      a.first = var(t.target);
      a.constant = t.source;
    } else if (t.kind == TripleKind::kRelation && var(t.target) >= 0) {
      a.binary = true;
      a.first = var(t.source);
      a.second = var(t.target);
    } else {
      a.first = var(t.source);
      a.constant = t.target;
    }
    if (a.first < 0) continue;  // constants only; cannot align
    out.push_back(std::move(a));
  }
  return out;
}

using Bag = std::map<std::string, int>;

int bag_overlap(const Bag &a, const Bag &b) {
  int n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->first < j->first) {
      ++i;
    } else if (j->first < i->first) {
      ++j;
    } else {
      n += std::min(i->second, j->second);
      ++i;
      ++j;
    }
  }
  return n;
}

// Incremental scoring tables for hill climbing.
class Aligner {
 public:
  Aligner(const TripleSet &pred, const TripleSet &gold)
      : pred_vars_(pred.variables.size()), gold_vars_(gold.variables.size()) {
    std::vector<Atom> p = atoms(pred), g = atoms(gold);
    std::vector<Bag> pred_unary(pred_vars_), gold_unary(gold_vars_);
    std::map<std::pair<int, int>, Bag> pred_pairs, gold_pairs;
    for (const Atom &a : p) {
      if (a.binary) {
        ++pred_pairs[{a.first, a.second}][a.relation];
      } else {
        ++pred_unary[a.first][a.relation + '\x1f' + a.constant];
      }
    }
    for (const Atom &a : g) {
      if (a.binary) {
        ++gold_pairs[{a.first, a.second}][a.relation];
      } else {
        ++gold_unary[a.first][a.relation + '\x1f' + a.constant];
      }
    }
    unary_.assign(pred_vars_, std::vector<int>(gold_vars_, 0));
    for (int i = 0; i < pred_vars_; ++i) {
      for (int j = 0; j < gold_vars_; ++j) {
        unary_[i][j] = bag_overlap(pred_unary[i], gold_unary[j]);
      }
    }
    terms_of_.resize(pred_vars_);
    for (const auto &[pair, bag] : pred_pairs) {
      Term term{pair.first, pair.second, {}};
      for (const auto &[gpair, gbag] : gold_pairs) {
        int w = bag_overlap(bag, gbag);
        if (w > 0) term.weights[key(gpair.first, gpair.second)] = w;
      }
      if (term.weights.empty()) continue;
      int t = static_cast<int>(terms_.size());
      terms_.push_back(std::move(term));
      terms_of_[pair.first].push_back(t);
      if (pair.second != pair.first) terms_of_[pair.second].push_back(t);
    }
    stamp_.assign(terms_.size(), 0);
  }

  int pred_vars() const { return pred_vars_; }
  int gold_vars() const { return gold_vars_; }
  int unary(int p, int g) const { return g < 0 ? 0 : unary_[p][g]; }

  int total(const std::vector<int> &m) const {
    int s = 0;
    for (int p = 0; p < pred_vars_; ++p) s += unary(p, m[p]);
    for (const Term &t : terms_) s += value(t, m);
    return s;
  }

  // Informed start: each pred variable takes the unused gold variable with
  // the largest unary overlap; ties prefer the same name, then gold order.
  std::vector<int> informed_start(const TripleSet &pred,
                                  const TripleSet &gold) const {
    std::vector<int> m(pred_vars_, -1);
    std::vector<bool> used(gold_vars_, false);
    for (int p = 0; p < pred_vars_; ++p) {
      int best = -1, best_w = 0;
      bool best_name = false;
      for (int g = 0; g < gold_vars_; ++g) {
        if (used[g] || unary_[p][g] == 0) continue;
        bool same = pred.variables[p] == gold.variables[g];
        if (unary_[p][g] > best_w || (unary_[p][g] == best_w && same &&
                                      !best_name)) {
          best = g;
          best_w = unary_[p][g];
          best_name = same;
        }
      }
      if (best >= 0) {
        m[p] = best;
        used[best] = true;
      }
    }
    return m;
  }

  std::vector<int> random_start(std::mt19937_64 &rng) const {
    std::vector<int> order(pred_vars_);
    for (int i = 0; i < pred_vars_; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> m(pred_vars_, -1);
    std::vector<bool> used(gold_vars_, false);
    for (int p : order) {
      std::vector<int> candidates, any;
      for (int g = 0; g < gold_vars_; ++g) {
        if (used[g]) continue;
        any.push_back(g);
        if (unary_[p][g] > 0) candidates.push_back(g);
      }
      const std::vector<int> &from = candidates.empty() ? any : candidates;
      if (from.empty()) continue;
      int g = from[std::uniform_int_distribution<size_t>(0, from.size() - 1)(rng)];
      m[p] = g;
      used[g] = true;
    }
    return m;
  }

  // Steepest-ascent hill climbing over single remaps and swaps. Among equal
  // gains the first move in scan order wins.
  int climb(std::vector<int> &m) {
    int current = total(m);
    std::vector<int> owner(gold_vars_, -1);
    for (int p = 0; p < pred_vars_; ++p) {
      if (m[p] >= 0) owner[m[p]] = p;
    }
    for (;;) {
      int best_gain = 0;
      int kind = 0, a = -1, b = -1;
      for (int p = 0; p < pred_vars_; ++p) {
        for (int g = -1; g < gold_vars_; ++g) {
          if (g == m[p] || (g >= 0 && owner[g] >= 0)) continue;
          int gain = remap_gain(m, p, g);
          if (gain > best_gain) {
            best_gain = gain;
            kind = 1;
            a = p;
            b = g;
          }
        }
      }
      for (int p = 0; p < pred_vars_; ++p) {
        for (int q = p + 1; q < pred_vars_; ++q) {
          if (m[p] == m[q]) continue;
          int gain = swap_gain(m, p, q);
          if (gain > best_gain) {
            best_gain = gain;
            kind = 2;
            a = p;
            b = q;
          }
        }
      }
      if (kind == 0) return current;
      if (kind == 1) {
        if (m[a] >= 0) owner[m[a]] = -1;
        m[a] = b;
        if (b >= 0) owner[b] = a;
      } else {
        std::swap(m[a], m[b]);
        if (m[a] >= 0) owner[m[a]] = a;
        if (m[b] >= 0) owner[m[b]] = b;
      }
      current += best_gain;
    }
  }

 private:
  struct Term {
    int first, second;
    std::unordered_map<int64_t, int> weights;
  };

  int64_t key(int g1, int g2) const {
    return static_cast<int64_t>(g1) * (gold_vars_ + 1) + g2;
  }

  int value(const Term &t, const std::vector<int> &m) const {
    int g1 = m[t.first], g2 = m[t.second];
    if (g1 < 0 || g2 < 0) return 0;
    auto it = t.weights.find(key(g1, g2));
    return it == t.weights.end() ? 0 : it->second;
  }

  int remap_gain(std::vector<int> &m, int p, int g) {
    int before = unary(p, m[p]), after = unary(p, g);
    int old = m[p];
    for (int t : terms_of_[p]) before += value(terms_[t], m);
    m[p] = g;
    for (int t : terms_of_[p]) after += value(terms_[t], m);
    m[p] = old;
    return after - before;
  }

  int swap_gain(std::vector<int> &m, int p, int q) {
    ++generation_;
    affected_.clear();
    for (int v : {p, q}) {
      for (int t : terms_of_[v]) {
        if (stamp_[t] != generation_) {
          stamp_[t] = generation_;
          affected_.push_back(t);
        }
      }
    }
    int before = unary(p, m[p]) + unary(q, m[q]);
    for (int t : affected_) before += value(terms_[t], m);
    std::swap(m[p], m[q]);
    int after = unary(p, m[p]) + unary(q, m[q]);
    for (int t : affected_) after += value(terms_[t], m);
    std::swap(m[p], m[q]);
    return after - before;
  }

  int pred_vars_, gold_vars_;
  std::vector<std::vector<int>> unary_;
  std::vector<Term> terms_;
  std::vector<std::vector<int>> terms_of_;
  std::vector<int> stamp_;
  std::vector<int> affected_;
  int generation_ = 0;
};

}  // namespace

namespace {

// Direct multiset intersection of renamed pred triples with gold triples,
// with strings interned so repeated counts are cheap.
class DirectCounter {
 public:
  DirectCounter(const TripleSet &pred, const TripleSet &gold) {
    for (const Atom &a : atoms(gold)) {
      gold_.push_back(encode(a, a.first, a.second));
    }
    std::sort(gold_.begin(), gold_.end());
    pred_ = atoms(pred);
    for (const Atom &a : pred_) {
      intern(a.relation);
      if (!a.binary) intern(a.constant);
    }
  }

  size_t count(const std::vector<int> &mapping) {
    keys_.clear();
    for (const Atom &a : pred_) {
      int first = mapping[a.first];
      int second = a.binary ? mapping[a.second] : 0;
      if (first < 0 || second < 0) continue;
      keys_.push_back(encode(a, first, second));
    }
    std::sort(keys_.begin(), keys_.end());
    size_t n = 0;
    auto i = keys_.begin();
    auto j = gold_.begin();
    while (i != keys_.end() && j != gold_.end()) {
      if (*i < *j) {
        ++i;
      } else if (*j < *i) {
        ++j;
      } else {
        ++n;
        ++i;
        ++j;
      }
    }
    return n;
  }

 private:
  using Key = std::tuple<bool, int, int, int>;

  int intern(const std::string &text) {
    auto [it, fresh] = ids_.emplace(text, static_cast<int>(ids_.size()));
    return it->second;
  }
  Key encode(const Atom &a, int first, int second) {
    return {a.binary, first, intern(a.relation),
            a.binary ? second : intern(a.constant)};
  }

  std::unordered_map<std::string, int> ids_;
  std::vector<Key> gold_;
  std::vector<Atom> pred_;
  std::vector<Key> keys_;
};

}  // namespace

size_t count_matches(const TripleSet &pred, const TripleSet &gold,
                     const std::vector<int> &mapping) {
  return DirectCounter(pred, gold).count(mapping);
}

MatchResult match(const TripleSet &pred, const TripleSet &gold, int restarts,
                  uint64_t seed) {
  MatchResult result;
  result.pred_total = pred.size();
  result.gold_total = gold.size();
  Aligner aligner(pred, gold);
  restarts = std::max(restarts, 1);
  int best = -1;
  for (int r = 0; r < restarts; ++r) {
    std::vector<int> m;
    if (r == 0) {
      m = aligner.informed_start(pred, gold);
    } else {
      std::seed_seq seq{static_cast<uint32_t>(seed),
                        static_cast<uint32_t>(seed >> 32),
                        static_cast<uint32_t>(r)};
      std::mt19937_64 rng(seq);
      m = aligner.random_start(rng);
    }
    int s = aligner.climb(m);
    ++result.restarts_used;
    if (s > best) {
      best = s;
      result.mapping = m;
    }
    if (static_cast<size_t>(best) == std::min(pred.size(), gold.size())) {
      break;  // cannot improve on a perfect match
    }
  }
  result.matched = static_cast<size_t>(std::max(best, 0));
  score(result);
  return result;
}

MatchResult match(const Graph &pred, const Graph &gold, int restarts,
                  uint64_t seed) {
  if (!validate(pred).ok()) {
    MatchResult r;
    r.ill_formed = true;
    r.gold_total = to_triples(gold).size();
    r.mapping.assign(pred.size(), -1);
    score(r);
    return r;
  }
  return match(to_triples(pred), to_triples(gold), restarts, seed);
}

MatchResult brute_force_match(const TripleSet &pred, const TripleSet &gold) {
  const int np = static_cast<int>(pred.variables.size());
  const int ng = static_cast<int>(gold.variables.size());
  if (static_cast<size_t>(std::min(np, ng)) > kBruteForceLimit) {
    throw std::length_error("brute-force matching is limited to " +
                            std::to_string(kBruteForceLimit) + " variables");
  }
  MatchResult result;
  result.pred_total = pred.size();
  result.gold_total = gold.size();
  // Enumerate injections from the smaller side into the larger one.
  const bool from_pred = np <= ng;
  const int small = from_pred ? np : ng, large = from_pred ? ng : np;
  std::vector<int> assign(small, -1);
  std::vector<bool> used(large, false);
  size_t best = 0;
  std::vector<int> best_mapping(np, -1);
  bool any = false;
  DirectCounter counter(pred, gold);
  std::function<void(int)> rec = [&](int i) {
    if (i == small) {
      std::vector<int> mapping(np, -1);
      if (from_pred) {
        mapping = assign;
      } else {
        for (int g = 0; g < ng; ++g) {
          if (assign[g] >= 0) mapping[assign[g]] = g;
        }
      }
      size_t s = counter.count(mapping);
      if (!any || s > best) {
        best = s;
        best_mapping = mapping;
        any = true;
      }
      return;
    }
    assign[i] = -1;
    rec(i + 1);
    for (int j = 0; j < large; ++j) {
      if (used[j]) continue;
      used[j] = true;
      assign[i] = j;
      rec(i + 1);
      assign[i] = -1;
      used[j] = false;
    }
  };
  rec(0);
  result.matched = best;
  result.mapping = best_mapping;
  score(result);
  return result;
}

MatchResult brute_force_match(const Graph &pred, const Graph &gold) {
  return brute_force_match(to_triples(pred), to_triples(gold));
}

std::string sense_category(const std::string &sense) {
  char pos = sense.empty() ? '?' : sense[0];
  switch (pos) {
    case 'n': return "Nouns";
    case 'v': return "Verbs";
    case 'a':
    case 's': return "Adjectives";
    case 'r': return "Adverbs";
    default: return "Other senses";
  }
}

std::string triple_category(const Triple &t, const Graph &g) {
  switch (t.kind) {
    case TripleKind::kTop: return "";
    case TripleKind::kInstance: return "Concepts";
    case TripleKind::kAttribute:
      if (t.relation == kSenseRelation) return sense_category(t.target);
      return "Presuppositions";
    case TripleKind::kRelation: {
      const Node *source = g.find(t.source);
      bool box = source != nullptr &&
                 (source->label.is_box() || source->sort == 'b');
      return box ? "DRS operators" : "Roles";
    }
  }
  return "";
}

std::vector<CategoryScore> fine_grained(const Graph &pred, const Graph &gold,
                                        const std::vector<int> &mapping) {
  const TripleSet pt = to_triples(pred), gt = to_triples(gold);
  auto filtered = [](const TripleSet &set, const Graph &g,
                     const std::function<bool(const Triple &,
                                              const std::string &)> &keep) {
    TripleSet out;
    out.variables = set.variables;
    for (const Triple &t : set.triples) {
      if (keep(t, triple_category(t, g))) out.triples.push_back(t);
    }
    return out;
  };
  auto row = [&](const std::string &name,
                 const std::function<bool(const Triple &,
                                          const std::string &)> &keep) {
    TripleSet p = filtered(pt, pred, keep), q = filtered(gt, gold, keep);
    MatchResult r;
    r.pred_total = p.size();
    r.gold_total = q.size();
    r.matched = count_matches(p, q, mapping);
    score(r);
    return CategoryScore{name, r.matched, r.pred_total, r.gold_total, r.f1};
  };
  auto is_sense = [](const std::string &c) {
    return c == "Nouns" || c == "Verbs" || c == "Adverbs" ||
           c == "Adjectives" || c == "Other senses";
  };
  std::vector<CategoryScore> rows;
  rows.push_back(row("all clauses",
                     [](const Triple &t, const std::string &) {
                       return t.kind != TripleKind::kTop;
                     }));
  for (const char *name : {"DRS operators", "Roles", "Concepts",
                           "Presuppositions"}) {
    std::string want = name;
    rows.push_back(row(want, [want](const Triple &, const std::string &c) {
      return c == want;
    }));
  }
  rows.push_back(row("Synsets", [&](const Triple &, const std::string &c) {
    return is_sense(c);
  }));
  for (const char *name :
       {"Nouns", "Verbs", "Adverbs", "Adjectives", "Other senses"}) {
    std::string want = name;
    rows.push_back(row(want, [want](const Triple &, const std::string &c) {
      return c == want;
    }));
  }
  rows.push_back(row("-sense", [&](const Triple &t, const std::string &c) {
    return t.kind != TripleKind::kTop && !is_sense(c);
  }));
  return rows;
}

CorpusResult corpus_eval(const std::vector<Graph> &preds,
                         const std::vector<Graph> &golds, int restarts,
                         uint64_t seed) {
  if (preds.size() != golds.size()) {
    throw std::invalid_argument("prediction and gold corpora differ in size: " +
                                std::to_string(preds.size()) + " vs " +
                                std::to_string(golds.size()));
  }
  CorpusResult out;
  for (size_t i = 0; i < preds.size(); ++i) {
    MatchResult r = match(preds[i], golds[i], restarts, seed);
    out.total.matched += r.matched;
    out.total.pred_total += r.pred_total;
    out.total.gold_total += r.gold_total;
    if (r.ill_formed) ++out.ill_formed;
    out.pairs.push_back(std::move(r));
  }
  score(out.total);
  out.ill_formed_rate =
      preds.empty() ? 0.0 : 100.0 * out.ill_formed / preds.size();
  return out;
}

}  // namespace rnndag
