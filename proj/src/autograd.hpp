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

#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "tensor.hpp"

namespace lrt::ag {

// Reverse-mode tape over Tensor. Nodes are created in topological order, so
// the backward pass is a reverse walk. All math is double precision.
using VarId = int;
constexpr VarId kNoVar = -1;

class Graph {
 public:
  VarId leaf(Tensor value, bool requires_grad);
  VarId constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(VarId id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  const Tensor& grad(VarId id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  // Elementwise, same shape.
  VarId add(VarId a, VarId b);
  VarId sub(VarId a, VarId b);
  VarId mul(VarId a, VarId b);
  VarId scale(VarId a, double c);
  VarId mul_const(VarId a, Tensor mask);  // dropout and fixed gains
  VarId tanh_op(VarId a);
  VarId sigmoid_op(VarId a);
  VarId exp_op(VarId a);

  // Shape plumbing (1-D unless stated).
  VarId slice(VarId a, std::size_t offset, std::size_t len);
  VarId concat(VarId a, VarId b);
  VarId stack_rows(const std::vector<VarId>& rows);  // -> [T, D]
  VarId row(VarId matrix, std::size_t r);            // -> [D]
  VarId stack_cols2(VarId a, VarId b);               // [T], [T] -> [T, 2]

  // Linear algebra.
  VarId matvec(VarId w, VarId x);                    // [out,in] x [in] -> [out]
  VarId linear(VarId w, VarId x, VarId bias);        // matvec + optional bias
  VarId linear_rows(VarId x, VarId w, VarId bias);   // [T,in] x [out,in]^T -> [T,out]
  VarId add_row_broadcast(VarId m, VarId v);         // [T,D] + [D]
  VarId weighted_sum_rows(VarId m, VarId w);         // [T,D], [T] -> [D]
  VarId embedding_rows(VarId table, std::vector<uint32_t> ids);  // -> [T,E]
  VarId conv1d_same(VarId x, VarId kernel, VarId bias);  // [T,Cin], [Cout,Cin,K]

  VarId softmax_vec(VarId a);

  // Scalars.
  VarId sum(VarId a);
  VarId sum_sq(VarId a);
  VarId mean_sq_err(VarId a, Tensor target);
  VarId bce_with_logits(VarId logits, Tensor targets);
  VarId logdet(VarId w);  // log|det| of a square matrix

  // Accumulates d(root)/d(leaf) into grad() of every requires_grad node.
  void backward(VarId root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Graph&, Node&)> back;
  };

  Node& node(VarId id) { return nodes_[static_cast<std::size_t>(id)]; }
  VarId push(Tensor value, bool requires_grad,
             std::function<void(Graph&, Node&)> back);
  void add_grad(VarId id, const std::vector<double>& g);

  std::deque<Node> nodes_;
};

}  // namespace lrt::ag
