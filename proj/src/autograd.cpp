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

#include "autograd.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "error.hpp"
#include "linalg.hpp"

namespace lrt::ag {

VarId Graph::push(Tensor value, bool requires_grad,
                  std::function<void(Graph&, Node&)> back) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<VarId>(nodes_.size() - 1);
}

VarId Graph::leaf(Tensor value, bool requires_grad) {
  return push(std::move(value), requires_grad, nullptr);
}

void Graph::add_grad(VarId id, const std::vector<double>& g) {
  Node& n = node(id);
  if (n.grad.data.empty()) n.grad = Tensor(n.value.shape);
  for (std::size_t i = 0; i < g.size(); ++i) n.grad.data[i] += g[i];
}

VarId Graph::add(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), LRT_E_INTERNAL, "add: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, Node& self) {
    g.add_grad(a, self.grad.data);
    g.add_grad(b, self.grad.data);
  });
}

VarId Graph::sub(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), LRT_E_INTERNAL, "sub: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, Node& self) {
    g.add_grad(a, self.grad.data);
    std::vector<double> neg(self.grad.data.size());
    for (std::size_t i = 0; i < neg.size(); ++i) neg[i] = -self.grad.data[i];
    g.add_grad(b, neg);
  });
}

VarId Graph::mul(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require(ta.same_shape(tb), LRT_E_INTERNAL, "mul: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= tb.data[i];
  return push(std::move(out), true, [a, b](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size()), gb(self.grad.data.size());
    const auto& va = g.value(a).data;
    const auto& vb = g.value(b).data;
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] = self.grad.data[i] * vb[i];
      gb[i] = self.grad.data[i] * va[i];
    }
    g.add_grad(a, ga);
    g.add_grad(b, gb);
  });
}

VarId Graph::scale(VarId a, double c) {
  Tensor out = value(a);
  for (auto& v : out.data) v *= c;
  return push(std::move(out), true, [a, c](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = self.grad.data[i] * c;
    g.add_grad(a, ga);
  });
}

VarId Graph::mul_const(VarId a, Tensor mask) {
  const Tensor& ta = value(a);
  require(ta.same_shape(mask), LRT_E_INTERNAL, "mul_const: shape mismatch");
  Tensor out = ta;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= mask.data[i];
  auto shared = std::make_shared<Tensor>(std::move(mask));
  return push(std::move(out), true, [a, shared](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = self.grad.data[i] * shared->data[i];
    g.add_grad(a, ga);
  });
}

VarId Graph::tanh_op(VarId a) {
  Tensor out = value(a);
  for (auto& v : out.data) v = std::tanh(v);
  return push(std::move(out), true, [a](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double y = self.value.data[i];
      ga[i] = self.grad.data[i] * (1.0 - y * y);
    }
    g.add_grad(a, ga);
  });
}

VarId Graph::sigmoid_op(VarId a) {
  Tensor out = value(a);
  for (auto& v : out.data) v = 1.0 / (1.0 + std::exp(-v));
  return push(std::move(out), true, [a](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double y = self.value.data[i];
      ga[i] = self.grad.data[i] * y * (1.0 - y);
    }
    g.add_grad(a, ga);
  });
}

VarId Graph::exp_op(VarId a) {
  Tensor out = value(a);
  for (auto& v : out.data) v = std::exp(v);
  return push(std::move(out), true, [a](Graph& g, Node& self) {
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = self.grad.data[i] * self.value.data[i];
    g.add_grad(a, ga);
  });
}

VarId Graph::slice(VarId a, std::size_t offset, std::size_t len) {
  const Tensor& ta = value(a);
  require(offset + len <= ta.numel(), LRT_E_INTERNAL, "slice: out of range");
  Tensor out({len});
  std::copy(ta.data.begin() + static_cast<std::ptrdiff_t>(offset),
            ta.data.begin() + static_cast<std::ptrdiff_t>(offset + len), out.data.begin());
  return push(std::move(out), true, [a, offset, len](Graph& g, Node& self) {
    std::vector<double> ga(g.value(a).numel(), 0.0);
    for (std::size_t i = 0; i < len; ++i) ga[offset + i] = self.grad.data[i];
    g.add_grad(a, ga);
  });
}

VarId Graph::concat(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  Tensor out({ta.numel() + tb.numel()});
  std::copy(ta.data.begin(), ta.data.end(), out.data.begin());
  std::copy(tb.data.begin(), tb.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(ta.numel()));
  const std::size_t na = ta.numel();
  return push(std::move(out), true, [a, b, na](Graph& g, Node& self) {
    std::vector<double> ga(na), gb(self.grad.data.size() - na);
    std::copy(self.grad.data.begin(), self.grad.data.begin() + static_cast<std::ptrdiff_t>(na),
              ga.begin());
    std::copy(self.grad.data.begin() + static_cast<std::ptrdiff_t>(na), self.grad.data.end(),
              gb.begin());
    g.add_grad(a, ga);
    g.add_grad(b, gb);
  });
}

VarId Graph::stack_rows(const std::vector<VarId>& rows) {
  require(!rows.empty(), LRT_E_INTERNAL, "stack_rows: empty");
  const std::size_t d = value(rows[0]).numel();
  Tensor out({rows.size(), d});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor& tr = value(rows[r]);
    require(tr.numel() == d, LRT_E_INTERNAL, "stack_rows: ragged rows");
    std::copy(tr.data.begin(), tr.data.end(),
              out.data.begin() + static_cast<std::ptrdiff_t>(r * d));
  }
  auto rows_copy = rows;
  return push(std::move(out), true, [rows_copy, d](Graph& g, Node& self) {
    for (std::size_t r = 0; r < rows_copy.size(); ++r) {
      std::vector<double> gr(d);
      std::copy(self.grad.data.begin() + static_cast<std::ptrdiff_t>(r * d),
                self.grad.data.begin() + static_cast<std::ptrdiff_t>((r + 1) * d), gr.begin());
      g.add_grad(rows_copy[r], gr);
    }
  });
}

VarId Graph::stack_cols2(VarId a, VarId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  const std::size_t t_len = ta.numel();
  require(tb.numel() == t_len, LRT_E_INTERNAL, "stack_cols2: length mismatch");
  Tensor out({t_len, 2});
  for (std::size_t t = 0; t < t_len; ++t) {
    out.data[2 * t] = ta.data[t];
    out.data[2 * t + 1] = tb.data[t];
  }
  return push(std::move(out), true, [a, b, t_len](Graph& g, Node& self) {
    std::vector<double> ga(t_len), gb(t_len);
    for (std::size_t t = 0; t < t_len; ++t) {
      ga[t] = self.grad.data[2 * t];
      gb[t] = self.grad.data[2 * t + 1];
    }
    g.add_grad(a, ga);
    g.add_grad(b, gb);
  });
}

VarId Graph::row(VarId matrix, std::size_t r) {
  const Tensor& tm = value(matrix);
  const std::size_t d = tm.cols();
  require(r < tm.rows(), LRT_E_INTERNAL, "row: out of range");
  Tensor out({d});
  for (std::size_t c = 0; c < d; ++c) out.data[c] = tm.at(r, c);
  return push(std::move(out), true, [matrix, r, d](Graph& g, Node& self) {
    std::vector<double> gm(g.value(matrix).numel(), 0.0);
    for (std::size_t c = 0; c < d; ++c) gm[r * d + c] = self.grad.data[c];
    g.add_grad(matrix, gm);
  });
}

VarId Graph::matvec(VarId w, VarId x) {
  const Tensor& tw = value(w);
  const Tensor& tx = value(x);
  const std::size_t out_dim = tw.rows();
  const std::size_t in_dim = tw.cols();
  require(tx.numel() == in_dim, LRT_E_INTERNAL, "matvec: shape mismatch");
  Tensor out({out_dim});
  for (std::size_t r = 0; r < out_dim; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < in_dim; ++c) acc += tw.data[r * in_dim + c] * tx.data[c];
    out.data[r] = acc;
  }
  return push(std::move(out), true, [w, x, out_dim, in_dim](Graph& g, Node& self) {
    const auto& vw = g.value(w).data;
    const auto& vx = g.value(x).data;
    std::vector<double> gw(out_dim * in_dim), gx(in_dim, 0.0);
    for (std::size_t r = 0; r < out_dim; ++r) {
      const double gr = self.grad.data[r];
      for (std::size_t c = 0; c < in_dim; ++c) {
        gw[r * in_dim + c] = gr * vx[c];
        gx[c] += gr * vw[r * in_dim + c];
      }
    }
    g.add_grad(w, gw);
    g.add_grad(x, gx);
  });
}

VarId Graph::linear(VarId w, VarId x, VarId bias) {
  VarId y = matvec(w, x);
  if (bias != kNoVar) y = add(y, bias);
  return y;
}

VarId Graph::linear_rows(VarId x, VarId w, VarId bias) {
  const Tensor& tx = value(x);  // [T, in]
  const Tensor& tw = value(w);  // [out, in]
  const std::size_t t_len = tx.rows();
  const std::size_t in_dim = tx.cols();
  const std::size_t out_dim = tw.rows();
  require(tw.cols() == in_dim, LRT_E_INTERNAL, "linear_rows: shape mismatch");

  Tensor out({t_len, out_dim});
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t r = 0; r < out_dim; ++r) {
      double acc = 0.0;
      for (std::size_t c = 0; c < in_dim; ++c) acc += tw.data[r * in_dim + c] * tx.data[t * in_dim + c];
      out.data[t * out_dim + r] = acc;
    }
  }
  VarId y = push(std::move(out), true, [x, w, t_len, in_dim, out_dim](Graph& g, Node& self) {
    const auto& vx = g.value(x).data;
    const auto& vw = g.value(w).data;
    std::vector<double> gx(t_len * in_dim, 0.0), gw(out_dim * in_dim, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t r = 0; r < out_dim; ++r) {
        const double gr = self.grad.data[t * out_dim + r];
        for (std::size_t c = 0; c < in_dim; ++c) {
          gw[r * in_dim + c] += gr * vx[t * in_dim + c];
          gx[t * in_dim + c] += gr * vw[r * in_dim + c];
        }
      }
    }
    g.add_grad(x, gx);
    g.add_grad(w, gw);
  });
  if (bias != kNoVar) y = add_row_broadcast(y, bias);
  return y;
}

VarId Graph::add_row_broadcast(VarId m, VarId v) {
  const Tensor& tm = value(m);
  const Tensor& tv = value(v);
  const std::size_t t_len = tm.rows();
  const std::size_t d = tm.cols();
  require(tv.numel() == d, LRT_E_INTERNAL, "add_row_broadcast: shape mismatch");
  Tensor out = tm;
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t c = 0; c < d; ++c) out.data[t * d + c] += tv.data[c];
  }
  return push(std::move(out), true, [m, v, t_len, d](Graph& g, Node& self) {
    g.add_grad(m, self.grad.data);
    std::vector<double> gv(d, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t c = 0; c < d; ++c) gv[c] += self.grad.data[t * d + c];
    }
    g.add_grad(v, gv);
  });
}

VarId Graph::weighted_sum_rows(VarId m, VarId w) {
  const Tensor& tm = value(m);  // [T, D]
  const Tensor& tw = value(w);  // [T]
  const std::size_t t_len = tm.rows();
  const std::size_t d = tm.cols();
  require(tw.numel() == t_len, LRT_E_INTERNAL, "weighted_sum_rows: shape mismatch");
  Tensor out({d});
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t c = 0; c < d; ++c) out.data[c] += tw.data[t] * tm.data[t * d + c];
  }
  return push(std::move(out), true, [m, w, t_len, d](Graph& g, Node& self) {
    const auto& vm = g.value(m).data;
    const auto& vw = g.value(w).data;
    std::vector<double> gm(t_len * d), gw(t_len, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t c = 0; c < d; ++c) {
        gm[t * d + c] = vw[t] * self.grad.data[c];
        gw[t] += vm[t * d + c] * self.grad.data[c];
      }
    }
    g.add_grad(m, gm);
    g.add_grad(w, gw);
  });
}

VarId Graph::embedding_rows(VarId table, std::vector<uint32_t> ids) {
  const Tensor& tt = value(table);  // [V, E]
  const std::size_t e_dim = tt.cols();
  Tensor out({ids.size(), e_dim});
  for (std::size_t t = 0; t < ids.size(); ++t) {
    require(ids[t] < tt.rows(), LRT_E_UNKNOWN_SYMBOL,
            "symbol id " + std::to_string(ids[t]) + " out of embedding range");
    for (std::size_t c = 0; c < e_dim; ++c) out.data[t * e_dim + c] = tt.at(ids[t], c);
  }
  auto ids_shared = std::make_shared<std::vector<uint32_t>>(std::move(ids));
  return push(std::move(out), true, [table, ids_shared, e_dim](Graph& g, Node& self) {
    std::vector<double> gt(g.value(table).numel(), 0.0);
    for (std::size_t t = 0; t < ids_shared->size(); ++t) {
      const std::size_t base = static_cast<std::size_t>((*ids_shared)[t]) * e_dim;
      for (std::size_t c = 0; c < e_dim; ++c) gt[base + c] += self.grad.data[t * e_dim + c];
    }
    g.add_grad(table, gt);
  });
}

VarId Graph::conv1d_same(VarId x, VarId kernel, VarId bias) {
  const Tensor& tx = value(x);       // [T, Cin]
  const Tensor& tk = value(kernel);  // [Cout, Cin, K]
  require(tk.shape.size() == 3, LRT_E_INTERNAL, "conv1d: kernel must be 3-D");
  const std::size_t t_len = tx.rows();
  const std::size_t c_in = tx.cols();
  const std::size_t c_out = tk.shape[0];
  const std::size_t k_len = tk.shape[2];
  require(tk.shape[1] == c_in, LRT_E_INTERNAL, "conv1d: channel mismatch");
  const long long pad = static_cast<long long>(k_len) / 2;

  Tensor out({t_len, c_out});
  for (std::size_t t = 0; t < t_len; ++t) {
    for (std::size_t o = 0; o < c_out; ++o) {
      double acc = 0.0;
      for (std::size_t k = 0; k < k_len; ++k) {
        const long long s = static_cast<long long>(t) + static_cast<long long>(k) - pad;
        if (s < 0 || s >= static_cast<long long>(t_len)) continue;
        for (std::size_t c = 0; c < c_in; ++c) {
          acc += tk.data[(o * c_in + c) * k_len + k] *
                 tx.data[static_cast<std::size_t>(s) * c_in + c];
        }
      }
      out.data[t * c_out + o] = acc;
    }
  }
  VarId y = push(std::move(out), true,
                 [x, kernel, t_len, c_in, c_out, k_len, pad](Graph& g, Node& self) {
    const auto& vx = g.value(x).data;
    const auto& vk = g.value(kernel).data;
    std::vector<double> gx(t_len * c_in, 0.0), gk(c_out * c_in * k_len, 0.0);
    for (std::size_t t = 0; t < t_len; ++t) {
      for (std::size_t o = 0; o < c_out; ++o) {
        const double go = self.grad.data[t * c_out + o];
        if (go == 0.0) continue;
        for (std::size_t k = 0; k < k_len; ++k) {
          const long long s = static_cast<long long>(t) + static_cast<long long>(k) - pad;
          if (s < 0 || s >= static_cast<long long>(t_len)) continue;
          for (std::size_t c = 0; c < c_in; ++c) {
            gk[(o * c_in + c) * k_len + k] += go * vx[static_cast<std::size_t>(s) * c_in + c];
            gx[static_cast<std::size_t>(s) * c_in + c] += go * vk[(o * c_in + c) * k_len + k];
          }
        }
      }
    }
    g.add_grad(x, gx);
    g.add_grad(kernel, gk);
  });
  if (bias != kNoVar) y = add_row_broadcast(y, bias);
  return y;
}

VarId Graph::softmax_vec(VarId a) {
  Tensor out = value(a);
  double max_v = out.data[0];
  for (double v : out.data) max_v = std::max(max_v, v);
  double denom = 0.0;
  for (auto& v : out.data) {
    v = std::exp(v - max_v);
    denom += v;
  }
  for (auto& v : out.data) v /= denom;
  return push(std::move(out), true, [a](Graph& g, Node& self) {
    double dot = 0.0;
    for (std::size_t i = 0; i < self.grad.data.size(); ++i) {
      dot += self.grad.data[i] * self.value.data[i];
    }
    std::vector<double> ga(self.grad.data.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] = self.value.data[i] * (self.grad.data[i] - dot);
    }
    g.add_grad(a, ga);
  });
}

VarId Graph::sum(VarId a) {
  double acc = 0.0;
  for (double v : value(a).data) acc += v;
  return push(Tensor({1}, {acc}), true, [a](Graph& g, Node& self) {
    std::vector<double> ga(g.value(a).numel(), self.grad.data[0]);
    g.add_grad(a, ga);
  });
}

VarId Graph::sum_sq(VarId a) {
  double acc = 0.0;
  for (double v : value(a).data) acc += v * v;
  return push(Tensor({1}, {acc}), true, [a](Graph& g, Node& self) {
    const auto& va = g.value(a).data;
    std::vector<double> ga(va.size());
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] = 2.0 * va[i] * self.grad.data[0];
    g.add_grad(a, ga);
  });
}

VarId Graph::mean_sq_err(VarId a, Tensor target) {
  const Tensor& ta = value(a);
  require(ta.same_shape(target), LRT_E_INTERNAL, "mean_sq_err: shape mismatch");
  const double n = static_cast<double>(ta.numel());
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.numel(); ++i) {
    const double d = ta.data[i] - target.data[i];
    acc += d * d;
  }
  auto shared = std::make_shared<Tensor>(std::move(target));
  return push(Tensor({1}, {acc / n}), true, [a, shared, n](Graph& g, Node& self) {
    const auto& va = g.value(a).data;
    std::vector<double> ga(va.size());
    for (std::size_t i = 0; i < ga.size(); ++i) {
      ga[i] = 2.0 * (va[i] - shared->data[i]) / n * self.grad.data[0];
    }
    g.add_grad(a, ga);
  });
}

VarId Graph::bce_with_logits(VarId logits, Tensor targets) {
  const Tensor& tz = value(logits);
  require(tz.same_shape(targets), LRT_E_INTERNAL, "bce: shape mismatch");
  const double n = static_cast<double>(tz.numel());
  double acc = 0.0;
  for (std::size_t i = 0; i < tz.numel(); ++i) {
    const double z = tz.data[i];
    const double t = targets.data[i];
    // max(z,0) - z t + log(1 + exp(-|z|)), the stable form.
    acc += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  auto shared = std::make_shared<Tensor>(std::move(targets));
  return push(Tensor({1}, {acc / n}), true, [logits, shared, n](Graph& g, Node& self) {
    const auto& vz = g.value(logits).data;
    std::vector<double> gz(vz.size());
    for (std::size_t i = 0; i < gz.size(); ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-vz[i]));
      gz[i] = (sig - shared->data[i]) / n * self.grad.data[0];
    }
    g.add_grad(logits, gz);
  });
}

VarId Graph::logdet(VarId w) {
  const Tensor& tw = value(w);
  const std::size_t n = tw.rows();
  require(tw.cols() == n, LRT_E_INTERNAL, "logdet: square matrix required");
  const auto lu = lu_decompose(tw.data, n);
  const double ld = lu.log_abs_det();
  require(std::isfinite(ld) && ld > std::log(1e-8), LRT_E_SINGULAR_TRANSFORM,
          "mixing matrix is numerically singular (|det| <= 1e-8)");
  return push(Tensor({1}, {ld}), true, [w, n](Graph& g, Node& self) {
    // d log|det W| / dW = W^{-T}
    const auto inv = invert(g.value(w).data, n);
    std::vector<double> gw(n * n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) gw[r * n + c] = inv[c * n + r] * self.grad.data[0];
    }
    g.add_grad(w, gw);
  });
}

void Graph::backward(VarId root) {
  Node& r = node(root);
  require(r.value.numel() == 1, LRT_E_INTERNAL, "backward: root must be scalar");
  r.grad = Tensor(r.value.shape);
  r.grad.data[0] = 1.0;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (static_cast<VarId>(i) > root) continue;
    if (!n.back || n.grad.data.empty()) continue;
    n.back(*this, n);
  }
}

}  // namespace lrt::ag
