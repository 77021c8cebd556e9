// Copyright 2026 The lowres-tts authors
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

#include <doctest.h>

#include <cmath>
#include <functional>

#include "autograd.hpp"
#include "rng.hpp"

using namespace lrt;
using namespace lrt::ag;

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale = 0.5) {
  Tensor t(std::move(shape));
  for (auto& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

// Central finite differences on every input coordinate against the tape
// gradient. `build` must construct the graph from the given leaf tensors and
// return the scalar root.
void grad_check(std::vector<Tensor> inputs,
                const std::function<VarId(Graph&, const std::vector<VarId>&)>& build,
                double tol = 1e-7) {
  Graph g;
  std::vector<VarId> vars;
  for (auto& t : inputs) vars.push_back(g.leaf(t, true));
  const VarId root = build(g, vars);
  g.backward(root);

  const double h = 1e-5;
  for (std::size_t vi = 0; vi < inputs.size(); ++vi) {
    for (std::size_t i = 0; i < inputs[vi].numel(); ++i) {
      auto eval = [&](double delta) {
        Graph g2;
        std::vector<VarId> vars2;
        for (std::size_t k = 0; k < inputs.size(); ++k) {
          Tensor t = inputs[k];
          if (k == vi) t.data[i] += delta;
          vars2.push_back(g2.leaf(std::move(t), true));
        }
        return g2.value(build(g2, vars2)).data[0];
      };
      const double fd = (eval(h) - eval(-h)) / (2.0 * h);
      const double an = g.grad(vars[vi]).data.empty() ? 0.0 : g.grad(vars[vi]).data[i];
      CHECK(std::abs(fd - an) <= tol * std::max({1.0, std::abs(fd), std::abs(an)}));
    }
  }
}

}  // namespace

TEST_CASE("elementwise ops match finite differences") {
  Rng rng(11);
  const auto a = random_tensor({6}, rng);
  const auto b = random_tensor({6}, rng);

  grad_check({a, b}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.mul(g.add(v[0], v[1]), g.sub(v[0], v[1])));
  });
  grad_check({a}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum(g.tanh_op(g.scale(v[0], 1.7)));
  });
  grad_check({a}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum(g.sigmoid_op(v[0]));
  });
  grad_check({a}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum(g.exp_op(v[0]));
  });
}

TEST_CASE("slice, concat, stack and row route gradients correctly") {
  Rng rng(12);
  const auto a = random_tensor({8}, rng);
  const auto b = random_tensor({3}, rng);

  grad_check({a}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.slice(v[0], 2, 4));
  });
  grad_check({a, b}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.concat(v[0], v[1]));
  });
  grad_check({a, b}, [](Graph& g, const std::vector<VarId>& v) {
    const VarId m = g.stack_rows({g.slice(v[0], 0, 3), g.slice(v[0], 3, 3), v[1]});
    return g.sum_sq(g.row(m, 1));
  });
}

TEST_CASE("matvec and linear_rows match finite differences") {
  Rng rng(13);
  const auto w = random_tensor({4, 5}, rng);
  const auto x = random_tensor({5}, rng);
  const auto bias = random_tensor({4}, rng);

  grad_check({w, x, bias}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.linear(v[0], v[1], v[2]));
  });

  const auto rows = random_tensor({3, 5}, rng);
  grad_check({rows, w, bias}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.linear_rows(v[0], v[1], v[2]));
  });
}

TEST_CASE("broadcast add and weighted row sums match finite differences") {
  Rng rng(14);
  const auto m = random_tensor({4, 3}, rng);
  const auto v3 = random_tensor({3}, rng);
  const auto w4 = random_tensor({4}, rng);

  grad_check({m, v3}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.add_row_broadcast(v[0], v[1]));
  });
  grad_check({m, w4}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.weighted_sum_rows(v[0], v[1]));
  });
}

TEST_CASE("embedding gather accumulates repeated ids") {
  Rng rng(15);
  const auto table = random_tensor({5, 3}, rng);
  grad_check({table}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.embedding_rows(v[0], {1, 3, 1, 0}));
  });
}

TEST_CASE("conv1d matches finite differences") {
  Rng rng(16);
  const auto x = random_tensor({7, 2}, rng);
  const auto k = random_tensor({3, 2, 5}, rng);
  const auto bias = random_tensor({3}, rng);
  grad_check({x, k, bias}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum_sq(g.conv1d_same(v[0], v[1], v[2]));
  });
}

TEST_CASE("softmax gradient matches finite differences") {
  Rng rng(17);
  const auto a = random_tensor({6}, rng, 2.0);
  const auto weights = random_tensor({6}, rng);
  grad_check({a, weights}, [](Graph& g, const std::vector<VarId>& v) {
    return g.sum(g.mul(g.softmax_vec(v[0]), v[1]));
  });
}

TEST_CASE("loss ops match finite differences") {
  Rng rng(18);
  const auto a = random_tensor({2, 4}, rng);
  Rng rng2(19);
  const auto target = random_tensor({2, 4}, rng2);

  grad_check({a}, [&](Graph& g, const std::vector<VarId>& v) {
    return g.mean_sq_err(v[0], target);
  });

  const auto logits = random_tensor({5}, rng, 2.0);
  Tensor tgt({5}, {1.0, 0.0, 0.0, 1.0, 0.0});
  grad_check({logits}, [&](Graph& g, const std::vector<VarId>& v) {
    return g.bce_with_logits(v[0], tgt);
  });
}

TEST_CASE("logdet gradient is the inverse transpose") {
  Rng rng(20);
  Tensor w({3, 3});
  // Diagonally dominant, safely nonsingular.
  for (std::size_t r = 0; r < 3; ++r) {
    for (std::size_t c = 0; c < 3; ++c) w.at(r, c) = (r == c ? 2.0 : 0.0) + rng.uniform(-0.3, 0.3);
  }
  grad_check({w}, [](Graph& g, const std::vector<VarId>& v) {
    return g.logdet(v[0]);
  }, 1e-6);
}

TEST_CASE("softmax rows are probability vectors") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Graph g;
    const VarId a = g.leaf(random_tensor({1 + rng.next_below(12)}, rng, 4.0), false);
    const auto& y = g.value(g.softmax_vec(a));
    double sum = 0.0;
    for (double v : y.data) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}
