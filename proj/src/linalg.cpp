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

#include "linalg.hpp"

#include <cmath>

#include "error.hpp"

namespace lrt {

double LuDecomposition::log_abs_det() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::log(std::abs(lu[i * n + i]));
  return acc;
}

double LuDecomposition::det_sign() const {
  double s = sign;
  for (std::size_t i = 0; i < n; ++i) s *= lu[i * n + i] < 0 ? -1.0 : 1.0;
  return s;
}

void LuDecomposition::solve(std::vector<double>& b) const {
  for (std::size_t i = 0; i < n; ++i) std::swap(b[i], b[static_cast<std::size_t>(pivots[i])]);
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) b[i] -= lu[i * n + j] * b[j];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t j = ii + 1; j < n; ++j) b[ii] -= lu[ii * n + j] * b[j];
    b[ii] /= lu[ii * n + ii];
  }
}

LuDecomposition lu_decompose(const std::vector<double>& a, std::size_t n) {
  LuDecomposition d;
  d.n = n;
  d.lu = a;
  d.pivots.resize(n);

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    double best = std::abs(d.lu[col * n + col]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double v = std::abs(d.lu[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    require(best > 1e-300, LRT_E_SINGULAR_TRANSFORM, "matrix is numerically singular");
    d.pivots[col] = static_cast<int>(pivot);
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(d.lu[col * n + j], d.lu[pivot * n + j]);
      d.sign = -d.sign;
    }
    const double diag = d.lu[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = d.lu[r * n + col] / diag;
      d.lu[r * n + col] = f;
      for (std::size_t j = col + 1; j < n; ++j) d.lu[r * n + j] -= f * d.lu[col * n + j];
    }
  }
  return d;
}

std::vector<double> invert(const std::vector<double>& a, std::size_t n) {
  const auto d = lu_decompose(a, n);
  std::vector<double> inv(n * n, 0.0);
  std::vector<double> e(n);
  for (std::size_t c = 0; c < n; ++c) {
    std::fill(e.begin(), e.end(), 0.0);
    e[c] = 1.0;
    d.solve(e);
    for (std::size_t r = 0; r < n; ++r) inv[r * n + c] = e[r];
  }
  return inv;
}

std::vector<double> cholesky_solve(std::vector<double> a, std::size_t n,
                                   std::vector<double> b) {
  // In-place lower Cholesky.
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a[j * n + j];
    for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
    require(diag > 0.0, LRT_E_SINGULAR_TRANSFORM, "matrix is not positive definite");
    const double root = std::sqrt(diag);
    a[j * n + j] = root;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = a[i * n + j];
      for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = v / root;
    }
  }
  // Forward then backward substitution.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) b[i] -= a[i * n + k] * b[k];
    b[i] /= a[i * n + i];
  }
  for (std::size_t ii = n; ii-- > 0;) {
    for (std::size_t k = ii + 1; k < n; ++k) b[ii] -= a[k * n + ii] * b[k];
    b[ii] /= a[ii * n + ii];
  }
  return b;
}

std::vector<double> random_rotation(std::size_t n, Rng& rng) {
  // QR of a Gaussian matrix with the R diagonal sign fix gives a draw from
  // the orthogonal group; a final column flip forces det +1.
  std::vector<double> a(n * n);
  for (auto& v : a) v = rng.normal();

  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;

  for (std::size_t col = 0; col < n; ++col) {
    double norm_sq = 0.0;
    for (std::size_t r = col; r < n; ++r) norm_sq += a[r * n + col] * a[r * n + col];
    const double alpha = (a[col * n + col] >= 0 ? -1.0 : 1.0) * std::sqrt(norm_sq);
    if (std::abs(alpha) < 1e-300) continue;

    std::vector<double> v(n, 0.0);
    for (std::size_t r = col; r < n; ++r) v[r] = a[r * n + col];
    v[col] -= alpha;
    double v_norm_sq = 0.0;
    for (double x : v) v_norm_sq += x * x;
    if (v_norm_sq < 1e-300) continue;

    // Apply H = I - 2 v v^T / (v^T v) to A and accumulate into Q.
    for (std::size_t c = 0; c < n; ++c) {
      double dot = 0.0;
      for (std::size_t r = col; r < n; ++r) dot += v[r] * a[r * n + c];
      const double f = 2.0 * dot / v_norm_sq;
      for (std::size_t r = col; r < n; ++r) a[r * n + c] -= f * v[r];
    }
    for (std::size_t c = 0; c < n; ++c) {
      double dot = 0.0;
      for (std::size_t r = col; r < n; ++r) dot += v[r] * q[c * n + r];
      const double f = 2.0 * dot / v_norm_sq;
      for (std::size_t r = col; r < n; ++r) q[c * n + r] -= f * v[r];
    }
  }

  // q currently holds Q (accumulated transposed applications); fix signs so
  // the implied R has a positive diagonal.
  for (std::size_t col = 0; col < n; ++col) {
    if (a[col * n + col] < 0) {
      for (std::size_t r = 0; r < n; ++r) q[r * n + col] = -q[r * n + col];
    }
  }

  // det(Q) is +-1; flip one column if needed.
  const auto d = lu_decompose(q, n);
  if (d.det_sign() < 0) {
    for (std::size_t r = 0; r < n; ++r) q[r * n] = -q[r * n];
  }
  return q;
}

}  // namespace lrt
