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
#include <string>
#include <vector>

#include "tensor.hpp"
#include "trainer.hpp"

namespace lrt {

// ------------------------------------------------------------------------
// Alignment diagnostics
// ------------------------------------------------------------------------

// Mean over decoder steps of the attention mass within the normalized band
// |i/(N-1) - t/(T-1)| <= band. Degenerate axes (T or N equal to 1) count the
// whole row as in-band.
double diagonality(const Tensor& alignment, double band);

// Alignment matrices on disk: CSV (one decoder step per line) and 8-bit
// binary PGM (row = decoder step, globally scaled).
void save_alignment_csv(const Tensor& alignment, const std::string& path);
void save_alignment_pgm(const Tensor& alignment, const std::string& path);

// Loads either format by extension; PGM rows are renormalized to sum one.
Tensor load_alignment(const std::string& path);

// ------------------------------------------------------------------------
// MOS aggregation
// ------------------------------------------------------------------------

struct MosSample {
  std::string rater_id;
  std::string utterance_id;
  std::string dimension;  // "naturalness" or "pronunciation"
  int score = 0;          // 1..5
};

// CSV "rater_id,utterance_id,dimension,score" with a header line.
std::vector<MosSample> parse_mos_csv(const std::string& csv);

struct MosReport {
  std::string dimension;
  std::size_t n_raters = 0;
  double mean = 0.0;
  double half_width = 0.0;  // t-distribution CI half width
  bool zero_variance = false;
  std::vector<std::pair<std::string, double>> rater_means;
};

// Aggregates within rater first, then reports mean +- t * s / sqrt(n) at the
// given confidence across rater means.
MosReport mos_report(const std::vector<MosSample>& samples, const std::string& dimension,
                     double confidence);

// Solves half_width = t * s / sqrt(n) for s, the implied rater std-dev.
double mos_implied_stddev(std::size_t n_raters, double half_width, double confidence);

// Student-t quantile (numerically validated against table values).
double t_quantile(double p, double dof);

std::string format_mos_report(const std::vector<MosReport>& reports);

// ------------------------------------------------------------------------
// Loss curve export
// ------------------------------------------------------------------------

// Writes the CSV log plus an SVG line chart (train series, plus validation
// when present).
void export_loss_plot(const std::vector<LossRecord>& records, const std::string& csv_path,
                      const std::string& svg_path);

}  // namespace lrt
