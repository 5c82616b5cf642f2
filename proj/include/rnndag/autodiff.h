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

// Reverse-mode automatic differentiation over Eigen matrices.
//
// A Tape records operations as they are evaluated; backward() walks the
// records in reverse and accumulates gradients into the Parameters that
// were read. Vectors are column matrices and scalars are 1x1.

#ifndef RNNDAG_AUTODIFF_H_
#define RNNDAG_AUTODIFF_H_

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace rnndag {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  bool trainable = true;
  // Adam moments.
  Matrix m;
  Matrix v;

  Parameter() = default;
  Parameter(std::string n, Matrix init, bool train = true);
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

class Tape {
 public:
  void clear();
  size_t size() const { return nodes_.size(); }

  Var constant(Matrix value);
  Var scalar(double value);
  // The whole parameter; repeated calls return the same node.
  Var param(Parameter &p);
  // Column `index` of p as a vector; gradients go to that column only.
  Var column(Parameter &p, int index);

  Var matmul(Var a, Var b);
  // transpose(a) * b.
  Var matmul_tn(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var cmul(Var a, Var b);
  Var scale(Var a, double k);
  // Adds the 1x1 value of s to every entry of a.
  Var add_scalar(Var a, Var s);
  // a times the 1x1 value of s.
  Var scale_by(Var a, Var s);
  Var neg(Var a) { return scale(a, -1.0); }
  Var sum(const std::vector<Var> &terms);

  Var tanh(Var a);
  Var sigmoid(Var a);
  Var log_sigmoid(Var a);

  // Stacks column vectors vertically.
  Var concat(const std::vector<Var> &parts);
  // Places column vectors side by side.
  Var hcat(const std::vector<Var> &columns);
  Var rows(Var a, int start, int count);
  // Selected rows of a column vector, in the given order.
  Var gather(Var a, const std::vector<int> &indices);
  // 1x1 entry of a column vector.
  Var pick(Var a, int index);

  Var softmax(Var a);
  Var log_softmax(Var a);
  Var logsumexp(Var a);

  const Matrix &value(Var v) const { return nodes_[v.id].value; }
  double scalar_value(Var v) const { return nodes_[v.id].value(0, 0); }

  // Seeds d(root)/d(root) = 1 and propagates. Gradients are added to the
  // parameters' existing grad matrices.
  void backward(Var root);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(std::vector<Node> &, const Node &)> back;
    Parameter *param = nullptr;
  };

  Var push(Matrix value,
           std::function<void(std::vector<Node> &, const Node &)> back);

  std::vector<Node> nodes_;
  std::unordered_map<Parameter *, int> param_nodes_;
};

// Adam with bias correction.
struct Adam {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;

  // Updates trainable parameters from their grads and zeroes the grads.
  void update(std::vector<Parameter *> &params);
};

}  // namespace rnndag

#endif  // RNNDAG_AUTODIFF_H_
