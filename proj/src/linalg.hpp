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

#include <cstddef>
#include <vector>

#include "rng.hpp"

namespace lrt {

// Row-major square/rectangular helpers for the small dense problems in the
// vocoder (mel pseudo-inverse, flow mixing matrices).

// LU with partial pivoting. Throws SingularTransform when |det| underflows.
struct LuDecomposition {
  std::vector<double> lu;   // n x n, combined L\U
  std::vector<int> pivots;  // row exchanges
  std::size_t n = 0;
  int sign = 1;

  double log_abs_det() const;
  double det_sign() const;
  // Solves A x = b in place.
  void solve(std::vector<double>& b) const;
};

LuDecomposition lu_decompose(const std::vector<double>& a, std::size_t n);

// Inverse via LU; n x n row-major.
std::vector<double> invert(const std::vector<double>& a, std::size_t n);

// SPD solve via Cholesky: A (n x n) x = b.
std::vector<double> cholesky_solve(std::vector<double> a, std::size_t n,
                                   std::vector<double> b);

// Random rotation (orthonormal, det +1) via Householder QR of a Gaussian
// draw, used to initialize flow mixing matrices.
std::vector<double> random_rotation(std::size_t n, Rng& rng);

}  // namespace lrt
