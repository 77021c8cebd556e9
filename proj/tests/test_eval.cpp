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
#include <filesystem>

#include "error.hpp"
#include "evaluation.hpp"
#include "io_util.hpp"
#include "rng.hpp"

using namespace lrt;
namespace fs = std::filesystem;

namespace {

Tensor one_hot_diagonal(std::size_t n) {
  Tensor a({n, n});
  for (std::size_t t = 0; t < n; ++t) a.at(t, t) = 1.0;
  return a;
}

Tensor uniform_alignment(std::size_t t_len, std::size_t n_len) {
  Tensor a({t_len, n_len});
  for (auto& v : a.data) v = 1.0 / static_cast<double>(n_len);
  return a;
}

std::string mos_line(const char* rater, const char* utt, const char* dim, int score) {
  return std::string(rater) + "," + utt + "," + dim + "," + std::to_string(score) + "\n";
}

}  // namespace

TEST_CASE("a perfect diagonal scores 1.0 for any band") {
  for (double band : {0.01, 0.15, 0.5, 1.0}) {
    CHECK(diagonality(one_hot_diagonal(25), band) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("uniform 100x100 alignment matches the direct in-band count") {
  const double band = 0.1;
  const std::size_t n = 100;
  const auto a = uniform_alignment(n, n);
  // Oracle: count in-band cells directly.
  double expect = 0.0;
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t in_band = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(static_cast<double>(i) / (n - 1) - static_cast<double>(t) / (n - 1)) <= band) {
        ++in_band;
      }
    }
    expect += static_cast<double>(in_band) / static_cast<double>(n);
  }
  expect /= static_cast<double>(n);
  CHECK(diagonality(a, band) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect == doctest::Approx(0.19).epsilon(0.05));
}

TEST_CASE("all mass at encoder step 0 scores 3/50 at band 0.05") {
  const std::size_t n = 50;
  Tensor a({n, n});
  for (std::size_t t = 0; t < n; ++t) a.at(t, 0) = 1.0;
  // Rows with t/(T-1) <= 0.05: t in {0, 1, 2}.
  CHECK(diagonality(a, 0.05) == doctest::Approx(3.0 / 50.0).epsilon(1e-12));
}

TEST_CASE("degenerate axes count the whole band") {
  Tensor row({1, 7});
  for (auto& v : row.data) v = 1.0 / 7.0;
  CHECK(diagonality(row, 0.05) == doctest::Approx(1.0).epsilon(1e-12));

  Tensor col({5, 1});
  for (auto& v : col.data) v = 1.0;
  CHECK(diagonality(col, 0.05) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty alignment raises EmptyAlignment") {
  try {
    diagonality(Tensor{}, 0.15);
    FAIL("expected EmptyAlignment");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_EMPTY_ALIGNMENT);
  }
}

TEST_CASE("uniform attention always scores below the one-hot diagonal") {
  for (std::size_t n : {2u, 3u, 5u, 10u, 37u, 100u}) {
    for (double band : {0.05, 0.15, 0.5, 0.99}) {
      CHECK(diagonality(uniform_alignment(n, n), band) <
            diagonality(one_hot_diagonal(n), band));
    }
  }
}

TEST_CASE("appending a perfectly diagonal row never lowers the score") {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t t_len = 30 + rng.next_below(30);
    const std::size_t n_len = 10 + rng.next_below(30);
    Tensor a({t_len, n_len});
    for (std::size_t t = 0; t < t_len; ++t) {
      double sum = 0.0;
      for (std::size_t i = 0; i < n_len; ++i) {
        a.at(t, i) = rng.next_double();
        sum += a.at(t, i);
      }
      for (std::size_t i = 0; i < n_len; ++i) a.at(t, i) /= sum;
    }
    const double before = diagonality(a, 0.15);

    Tensor b({t_len + 1, n_len});
    std::copy(a.data.begin(), a.data.end(), b.data.begin());
    b.at(t_len, n_len - 1) = 1.0;  // final step attends the final symbol
    const double after = diagonality(b, 0.15);
    CHECK(after >= before - 1e-6);
  }
}

TEST_CASE("t quantiles match published table values to 4 decimals") {
  const struct {
    double dof;
    double expect;
  } table[] = {{1, 12.7062}, {4, 2.7764}, {10, 2.2281}, {36, 2.0281}, {100, 1.9840}};
  for (const auto& row : table) {
    CHECK(std::abs(t_quantile(0.975, row.dof) - row.expect) <= 5e-5);
  }
  // Symmetry and the median.
  CHECK(t_quantile(0.5, 7) == 0.0);
  CHECK(t_quantile(0.025, 10) == doctest::Approx(-t_quantile(0.975, 10)).epsilon(1e-12));
}

TEST_CASE("t quantile approaches the normal quantile for large n") {
  for (std::size_t n : {200u, 500u, 1000u}) {
    const double t = t_quantile(0.975, static_cast<double>(n - 1));
    CHECK(std::abs(t - 1.959964) / 1.959964 < 0.01);
  }
}

TEST_CASE("mos report reproduces the worked five-rater example") {
  std::string csv = "rater_id,utterance_id,dimension,score\n";
  const int scores[] = {3, 4, 5, 4, 3};
  for (int i = 0; i < 5; ++i) {
    csv += mos_line(("r" + std::to_string(i)).c_str(), "u0", "naturalness", scores[i]);
  }
  const auto report = mos_report(parse_mos_csv(csv), "naturalness", 0.95);
  CHECK(report.n_raters == 5);
  CHECK(report.mean == doctest::Approx(3.80).epsilon(1e-12));
  CHECK(std::abs(report.half_width - 1.0389) <= 5e-5);
  CHECK(!report.zero_variance);
}

TEST_CASE("raters are averaged before the report mean") {
  std::string csv = "rater_id,utterance_id,dimension,score\n";
  csv += mos_line("a", "u0", "naturalness", 5);
  csv += mos_line("a", "u1", "naturalness", 5);
  csv += mos_line("b", "u0", "naturalness", 1);
  const auto report = mos_report(parse_mos_csv(csv), "naturalness", 0.95);
  CHECK(report.n_raters == 2);
  CHECK(report.mean == doctest::Approx(3.0).epsilon(1e-12));  // not (5+5+1)/3
}

TEST_CASE("unanimous raters give a zero-variance report") {
  std::string csv = "rater_id,utterance_id,dimension,score\n";
  for (int i = 0; i < 4; ++i) {
    csv += mos_line(("r" + std::to_string(i)).c_str(), "u0", "pronunciation", 4);
  }
  const auto report = mos_report(parse_mos_csv(csv), "pronunciation", 0.95);
  CHECK(report.zero_variance);
  CHECK(report.half_width == 0.0);
  CHECK(report.mean == 4.0);
}

TEST_CASE("implied rater std-dev for the published 37-rater interval") {
  const double s = mos_implied_stddev(37, 0.33, 0.95);
  CHECK(std::abs(s - 0.99) <= 0.01);
}

TEST_CASE("fewer than two raters raises InsufficientRaters") {
  std::string csv = "rater_id,utterance_id,dimension,score\n";
  csv += mos_line("solo", "u0", "naturalness", 4);
  try {
    mos_report(parse_mos_csv(csv), "naturalness", 0.95);
    FAIL("expected InsufficientRaters");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_INSUFFICIENT_RATERS);
  }
}

TEST_CASE("invalid scores are rejected at parse time") {
  for (const char* bad : {"r,u,naturalness,0\n", "r,u,naturalness,6\n", "r,u,naturalness,x\n"}) {
    try {
      parse_mos_csv(std::string("rater_id,utterance_id,dimension,score\n") + bad);
      FAIL("expected a parse error for ", bad);
    } catch (const Error& e) {
      CHECK(e.code() == LRT_E_INVALID_ARGUMENT);
    }
  }
}

TEST_CASE("mos report formatting carries the overall row") {
  MosReport a;
  a.dimension = "naturalness";
  a.n_raters = 37;
  a.mean = 3.41;
  a.half_width = 0.33;
  MosReport b;
  b.dimension = "pronunciation";
  b.n_raters = 37;
  b.mean = 3.35;
  b.half_width = 0.29;
  const auto text = format_mos_report({a, b});
  CHECK(text.find("naturalness") != std::string::npos);
  CHECK(text.find("3.41") != std::string::npos);
  CHECK(text.find("Overall") != std::string::npos);
  CHECK(text.find("3.38") != std::string::npos);  // (3.41 + 3.35) / 2
  CHECK(text.find("naturalness.mean=") != std::string::npos);
}

TEST_CASE("loss plot export writes CSV and a two-series SVG") {
  std::vector<LossRecord> records;
  for (int i = 1; i <= 200; ++i) {
    LossRecord r;
    r.iteration = static_cast<uint64_t>(i);
    r.train_loss = 3.0 / i;
    r.lr = 1e-3;
    if (i % 20 == 0) {
      r.has_val = true;
      r.val_loss = 3.5 / i;
    }
    records.push_back(r);
  }
  const auto dir = fs::temp_directory_path();
  const auto csv_path = (dir / "lrt_loss.csv").string();
  const auto svg_path = (dir / "lrt_loss.svg").string();
  export_loss_plot(records, csv_path, svg_path);

  const auto parsed = parse_loss_log(read_text_file(csv_path));
  REQUIRE(parsed.size() == records.size());
  CHECK(parsed[0].train_loss == records[0].train_loss);
  CHECK(parsed[19].has_val);

  const auto svg = read_text_file(svg_path);
  std::size_t polylines = 0;
  for (std::size_t pos = 0; (pos = svg.find("<polyline", pos)) != std::string::npos; ++pos) {
    ++polylines;
  }
  CHECK(polylines == 2);
  CHECK(svg.find("</svg>") != std::string::npos);

  // Without validation entries there is a single series.
  for (auto& r : records) r.has_val = false;
  export_loss_plot(records, csv_path, svg_path);
  const auto svg2 = read_text_file(svg_path);
  polylines = 0;
  for (std::size_t pos = 0; (pos = svg2.find("<polyline", pos)) != std::string::npos; ++pos) {
    ++polylines;
  }
  CHECK(polylines == 1);
  fs::remove(csv_path);
  fs::remove(svg_path);

  try {
    export_loss_plot({}, csv_path, svg_path);
    FAIL("expected EmptyLog");
  } catch (const Error& e) {
    CHECK(e.code() == LRT_E_EMPTY_LOG);
  }
}

TEST_CASE("alignment CSV and PGM files load back for scoring") {
  Rng rng(41);
  Tensor a({12, 9});
  for (std::size_t t = 0; t < 12; ++t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < 9; ++i) {
      a.at(t, i) = rng.next_double() + (i == (t * 8) / 11 ? 3.0 : 0.0);
      sum += a.at(t, i);
    }
    for (std::size_t i = 0; i < 9; ++i) a.at(t, i) /= sum;
  }

  const auto dir = fs::temp_directory_path();
  const auto csv_path = (dir / "lrt_align.csv").string();
  const auto pgm_path = (dir / "lrt_align.pgm").string();
  save_alignment_csv(a, csv_path);
  save_alignment_pgm(a, pgm_path);

  const auto from_csv = load_alignment(csv_path);
  REQUIRE(from_csv.shape == a.shape);
  for (std::size_t i = 0; i < a.numel(); ++i) {
    CHECK(from_csv.data[i] == a.data[i]);  // full-precision round trip
  }

  const auto from_pgm = load_alignment(pgm_path);
  REQUIRE(from_pgm.shape == a.shape);
  // Quantized but close: the two scores agree to a few percent.
  CHECK(std::abs(diagonality(from_pgm, 0.15) - diagonality(a, 0.15)) <= 0.05);

  // PGM header sanity.
  const auto bytes = read_file(pgm_path);
  CHECK(bytes[0] == 'P');
  CHECK(bytes[1] == '5');
  fs::remove(csv_path);
  fs::remove(pgm_path);
}
