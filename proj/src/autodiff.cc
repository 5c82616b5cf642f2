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

#include "rnndag/autodiff.h"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace rnndag {

namespace {

double stable_log_sigmoid(double x) {
  return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Parameter::Parameter(std::string n, Matrix init, bool train)
    : name(std::move(n)), value(std::move(init)), trainable(train) {
  zero_grad();
}

void Tape::clear() {
  nodes_.clear();
  param_nodes_.clear();
}

Var Tape::push(Matrix value,
               std::function<void(std::vector<Node> &, const Node &)> back) {
  Node n;
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::scalar(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Var Tape::param(Parameter &p) {
  auto it = param_nodes_.find(&p);
  if (it != param_nodes_.end()) return Var{it->second};
  Var v = push(p.value, nullptr);
  nodes_[v.id].param = &p;
  param_nodes_[&p] = v.id;
  return v;
}

Var Tape::column(Parameter &p, int index) {
  if (index < 0 || index >= p.value.cols()) {
    throw std::out_of_range("column " + std::to_string(index) + " of " +
                            p.name);
  }
  Parameter *pp = &p;
  return push(p.value.col(index), [pp, index](auto &, const Node &self) {
    pp->grad.col(index) += self.grad;
  });
}

Var Tape::matmul(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) * value(b), [ia, ib](auto &n, const Node &self) {
    n[ia].grad.noalias() += self.grad * n[ib].value.transpose();
    n[ib].grad.noalias() += n[ia].value.transpose() * self.grad;
  });
}

Var Tape::matmul_tn(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a).transpose() * value(b),
              [ia, ib](auto &n, const Node &self) {
                n[ia].grad.noalias() += n[ib].value * self.grad.transpose();
                n[ib].grad.noalias() += n[ia].value * self.grad;
              });
}

Var Tape::add(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) + value(b), [ia, ib](auto &n, const Node &self) {
    n[ia].grad += self.grad;
    n[ib].grad += self.grad;
  });
}

Var Tape::sub(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a) - value(b), [ia, ib](auto &n, const Node &self) {
    n[ia].grad += self.grad;
    n[ib].grad -= self.grad;
  });
}

Var Tape::cmul(Var a, Var b) {
  int ia = a.id, ib = b.id;
  return push(value(a).cwiseProduct(value(b)),
              [ia, ib](auto &n, const Node &self) {
                n[ia].grad += self.grad.cwiseProduct(n[ib].value);
                n[ib].grad += self.grad.cwiseProduct(n[ia].value);
              });
}

Var Tape::scale(Var a, double k) {
  int ia = a.id;
  return push(value(a) * k, [ia, k](auto &n, const Node &self) {
    n[ia].grad += self.grad * k;
  });
}

Var Tape::add_scalar(Var a, Var s) {
  int ia = a.id, is = s.id;
  return push((value(a).array() + scalar_value(s)).matrix(),
              [ia, is](auto &n, const Node &self) {
                n[ia].grad += self.grad;
                n[is].grad(0, 0) += self.grad.sum();
              });
}

Var Tape::scale_by(Var a, Var s) {
  int ia = a.id, is = s.id;
  return push(value(a) * scalar_value(s), [ia, is](auto &n, const Node &self) {
    n[ia].grad += self.grad * n[is].value(0, 0);
    n[is].grad(0, 0) += self.grad.cwiseProduct(n[ia].value).sum();
  });
}

Var Tape::sum(const std::vector<Var> &terms) {
  if (terms.empty()) throw std::invalid_argument("sum of no terms");
  Matrix total = value(terms[0]);
  for (size_t i = 1; i < terms.size(); ++i) total += value(terms[i]);
  std::vector<int> ids;
  for (Var t : terms) ids.push_back(t.id);
  return push(std::move(total), [ids](auto &n, const Node &self) {
    for (int id : ids) n[id].grad += self.grad;
  });
}

Var Tape::tanh(Var a) {
  int ia = a.id;
  return push(value(a).array().tanh().matrix(),
              [ia](auto &n, const Node &self) {
                n[ia].grad.array() +=
                    self.grad.array() * (1.0 - self.value.array().square());
              });
}

Var Tape::sigmoid(Var a) {
  int ia = a.id;
  return push(value(a).unaryExpr(&stable_sigmoid),
              [ia](auto &n, const Node &self) {
                n[ia].grad.array() += self.grad.array() * self.value.array() *
                                      (1.0 - self.value.array());
              });
}

Var Tape::log_sigmoid(Var a) {
  int ia = a.id;
  return push(value(a).unaryExpr(&stable_log_sigmoid),
              [ia](auto &n, const Node &self) {
                // d/dx log sigmoid(x) = sigmoid(-x).
                n[ia].grad.array() +=
                    self.grad.array() *
                    (-n[ia].value).unaryExpr(&stable_sigmoid).array();
              });
}

Var Tape::concat(const std::vector<Var> &parts) {
  Eigen::Index total = 0;
  for (Var p : parts) {
    assert(value(p).cols() == 1);
    total += value(p).rows();
  }
  Matrix out(total, 1);
  std::vector<std::pair<int, Eigen::Index>> spans;
  Eigen::Index at = 0;
  for (Var p : parts) {
    Eigen::Index r = value(p).rows();
    out.block(at, 0, r, 1) = value(p);
    spans.emplace_back(p.id, at);
    at += r;
  }
  return push(std::move(out), [spans](auto &n, const Node &self) {
    for (auto [id, start] : spans) {
      n[id].grad += self.grad.block(start, 0, n[id].value.rows(), 1);
    }
  });
}

Var Tape::hcat(const std::vector<Var> &columns) {
  if (columns.empty()) throw std::invalid_argument("hcat of no columns");
  Matrix out(value(columns[0]).rows(), columns.size());
  std::vector<int> ids;
  for (size_t i = 0; i < columns.size(); ++i) {
    out.col(i) = value(columns[i]);
    ids.push_back(columns[i].id);
  }
  return push(std::move(out), [ids](auto &n, const Node &self) {
    for (size_t i = 0; i < ids.size(); ++i) n[ids[i]].grad += self.grad.col(i);
  });
}

Var Tape::rows(Var a, int start, int count) {
  int ia = a.id;
  return push(value(a).block(start, 0, count, value(a).cols()),
              [ia, start, count](auto &n, const Node &self) {
                n[ia].grad.block(start, 0, count, self.grad.cols()) +=
                    self.grad;
              });
}

Var Tape::gather(Var a, const std::vector<int> &indices) {
  int ia = a.id;
  Matrix out(indices.size(), 1);
  for (size_t i = 0; i < indices.size(); ++i) out(i, 0) = value(a)(indices[i], 0);
  return push(std::move(out), [ia, indices](auto &n, const Node &self) {
    for (size_t i = 0; i < indices.size(); ++i) {
      n[ia].grad(indices[i], 0) += self.grad(i, 0);
    }
  });
}

Var Tape::pick(Var a, int index) { return gather(a, {index}); }

Var Tape::softmax(Var a) {
  int ia = a.id;
  Matrix e = (value(a).array() - value(a).maxCoeff()).exp().matrix();
  e /= e.sum();
  return push(std::move(e), [ia](auto &n, const Node &self) {
    double dot = self.grad.cwiseProduct(self.value).sum();
    n[ia].grad.array() +=
        self.value.array() * (self.grad.array() - dot);
  });
}

Var Tape::log_softmax(Var a) {
  int ia = a.id;
  double mx = value(a).maxCoeff();
  double lse = mx + std::log((value(a).array() - mx).exp().sum());
  return push((value(a).array() - lse).matrix(),
              [ia](auto &n, const Node &self) {
                n[ia].grad.array() +=
                    self.grad.array() -
                    self.value.array().exp() * self.grad.sum();
              });
}

Var Tape::logsumexp(Var a) {
  int ia = a.id;
  double mx = value(a).maxCoeff();
  double lse = mx + std::log((value(a).array() - mx).exp().sum());
  Matrix out(1, 1);
  out(0, 0) = lse;
  return push(std::move(out), [ia](auto &n, const Node &self) {
    n[ia].grad.array() +=
        (n[ia].value.array() - self.value(0, 0)).exp() * self.grad(0, 0);
  });
}

void Tape::backward(Var root) {
  for (Node &n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
  nodes_[root.id].grad.setOnes();
  for (int i = root.id; i >= 0; --i) {
    Node &n = nodes_[i];
    if (n.back) n.back(nodes_, n);
    if (n.param) n.param->grad += n.grad;
  }
}

void Adam::update(std::vector<Parameter *> &params) {
  ++step;
  double c1 = 1.0 - std::pow(beta1, step);
  double c2 = 1.0 - std::pow(beta2, step);
  for (Parameter *p : params) {
    if (!p->trainable) {
      p->zero_grad();
      continue;
    }
    if (p->m.size() == 0) {
      p->m.setZero(p->value.rows(), p->value.cols());
      p->v.setZero(p->value.rows(), p->value.cols());
    }
    p->m = beta1 * p->m + (1 - beta1) * p->grad;
    p->v = beta2 * p->v + (1 - beta2) * p->grad.cwiseAbs2();
    p->value.array() -= lr * (p->m.array() / c1) /
                        ((p->v.array() / c2).sqrt() + eps);
    p->zero_grad();
  }
}

}  // namespace rnndag
