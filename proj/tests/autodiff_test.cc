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

#include <cmath>
#include <functional>
#include <random>

#include <gtest/gtest.h>

namespace rnndag {
namespace {

Matrix random_matrix(std::mt19937_64 &rng, int rows, int cols) {
  std::normal_distribution<double> d(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = d(rng);
  }
  return m;
}

// Builds a scalar from the parameters; the tape must be cleared by the
// caller between evaluations.
using Build = std::function<Var(Tape &, std::vector<Parameter> &)>;

// Compares backprop against central differences for every entry.
double max_error(std::vector<Parameter> &params, const Build &build) {
  Tape t;
  for (Parameter &p : params) p.zero_grad();
  Var root = build(t, params);
  t.backward(root);
  double worst = 0.0;
  const double h = 1e-6;
  for (Parameter &p : params) {
    for (int i = 0; i < p.value.rows(); ++i) {
      for (int j = 0; j < p.value.cols(); ++j) {
        double saved = p.value(i, j);
        p.value(i, j) = saved + h;
        t.clear();
        double up = t.scalar_value(build(t, params));
        p.value(i, j) = saved - h;
        t.clear();
        double down = t.scalar_value(build(t, params));
        p.value(i, j) = saved;
        double numeric = (up - down) / (2 * h);
        double scale = std::max({std::abs(numeric), std::abs(p.grad(i, j)), 1e-6});
        worst = std::max(worst, std::abs(numeric - p.grad(i, j)) / scale);
      }
    }
  }
  return worst;
}

// Reduces a matrix to a scalar with fixed random weights so that every
// output entry receives a distinct upstream gradient.
Var project(Tape &t, Var v) {
  // Copies: pushing onto the tape invalidates references to its values.
  const int rows = t.value(v).rows(), cols = t.value(v).cols();
  Matrix w(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) w(i, j) = std::sin(1.0 + 3 * i + 7 * j);
  }
  Var prod = t.cmul(v, t.constant(w));
  Var col = t.matmul(prod, t.constant(Matrix::Ones(cols, 1)));
  return t.matmul_tn(t.constant(Matrix::Ones(rows, 1)), col);
}

class OpGradient : public ::testing::Test {
 protected:
  std::vector<Parameter> params(std::vector<std::pair<int, int>> shapes) {
    std::vector<Parameter> out;
    for (auto [r, c] : shapes) out.emplace_back("p", random_matrix(rng_, r, c));
    return out;
  }
  std::mt19937_64 rng_{42};
};

TEST_F(OpGradient, MatmulAndTranspose) {
  auto ps = params({{3, 4}, {4, 2}, {3, 2}});
  EXPECT_LT(max_error(ps, [](Tape &t, auto &p) {
              Var ab = t.matmul(t.param(p[0]), t.param(p[1]));
              Var atc = t.matmul_tn(t.param(p[0]), t.param(p[2]));
              return t.add(project(t, ab), project(t, atc));
            }),
            1e-6);
}

TEST_F(OpGradient, ElementwiseOps) {
  auto ps = params({{5, 1}, {5, 1}, {1, 1}});
  EXPECT_LT(max_error(ps, [](Tape &t, auto &p) {
              Var a = t.param(p[0]), b = t.param(p[1]), s = t.param(p[2]);
              Var x = t.add(t.cmul(t.tanh(a), t.sigmoid(b)), t.sub(a, b));
              x = t.add(t.scale(x, 0.7), t.log_sigmoid(t.scale_by(a, s)));
              return project(t, t.add_scalar(x, s));
            }),
            1e-6);
}

TEST_F(OpGradient, Reshaping) {
  auto ps = params({{3, 1}, {4, 1}});
  EXPECT_LT(max_error(ps, [](Tape &t, auto &p) {
              Var a = t.param(p[0]), b = t.param(p[1]);
              Var c = t.concat({a, b, a});
              Var g = t.gather(c, {9, 0, 4, 4});
              Var m = t.hcat({t.rows(b, 1, 3), a});
              return t.add(t.sum({project(t, g), project(t, m)}),
                           t.pick(c, 2));
            }),
            1e-6);
}

TEST_F(OpGradient, Normalizers) {
  auto ps = params({{6, 1}});
  EXPECT_LT(max_error(ps, [](Tape &t, auto &p) {
              Var a = t.param(p[0]);
              return t.sum({project(t, t.softmax(a)),
                            project(t, t.log_softmax(a)), t.logsumexp(a)});
            }),
            1e-6);
}

TEST_F(OpGradient, EmbeddingColumn) {
  auto ps = params({{3, 5}});
  EXPECT_LT(max_error(ps, [](Tape &t, auto &p) {
              Var a = t.column(p[0], 1), b = t.column(p[0], 3);
              return project(t, t.cmul(a, t.tanh(t.add(a, b))));
            }),
            1e-6);
}

TEST(Tape, ParameterNodeIsShared) {
  Parameter p("w", Matrix::Ones(2, 2));
  Tape t;
  EXPECT_EQ(t.param(p).id, t.param(p).id);
  EXPECT_THROW(t.column(p, 2), std::out_of_range);
}

TEST(Tape, NormalizersAreStable) {
  Tape t;
  Matrix big(3, 1);
  big << 1000.0, 1001.0, -1000.0;
  Var a = t.constant(big);
  Matrix sm = t.value(t.softmax(a));
  EXPECT_NEAR(sm.sum(), 1.0, 1e-12);
  EXPECT_NEAR(t.scalar_value(t.logsumexp(a)), 1001.0 + std::log1p(std::exp(-1.0)),
              1e-9);
  Matrix ls = t.value(t.log_sigmoid(t.constant(Matrix::Constant(1, 1, -800.0))));
  EXPECT_NEAR(ls(0, 0), -800.0, 1e-9);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  // With bias correction the first update is lr * sign(grad).
  Parameter p("w", Matrix::Zero(2, 1));
  p.grad << 3.0, -0.5;
  std::vector<Parameter *> ps = {&p};
  Adam adam;
  adam.lr = 0.01;
  adam.update(ps);
  EXPECT_NEAR(p.value(0, 0), -0.01, 1e-9);
  EXPECT_NEAR(p.value(1, 0), 0.01, 1e-9);
  EXPECT_EQ(p.grad.squaredNorm(), 0.0);
}

TEST(Adam, FrozenParametersStay) {
  Parameter p("w", Matrix::Ones(2, 1), false);
  p.grad.setOnes();
  std::vector<Parameter *> ps = {&p};
  Adam().update(ps);
  EXPECT_EQ(p.value, Matrix::Ones(2, 1));
}

}  // namespace
}  // namespace rnndag
