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

#include "evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "error.hpp"
#include "io_util.hpp"

namespace lrt {
namespace {

double log_gamma(double x) {
  // Lanczos approximation, g = 7.
  static const double coeffs[9] = {
      0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
      771.32342877765313,   -176.61502916214059, 12.507343278686905,
      -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
  }
  x -= 1.0;
  double a = coeffs[0];
  const double t = x + 7.5;
  for (int i = 1; i < 9; ++i) a += coeffs[i] / (x + i);
  return 0.5 * std::log(2.0 * M_PI) + (x + 0.5) * std::log(t) - t + std::log(a);
}

// Continued fraction for the regularized incomplete beta (Lentz).
double betacf(double a, double b, double x) {
  const double eps = 1e-15;
  const double fpmin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front =
      log_gamma(a + b) - log_gamma(a) - log_gamma(b) + a * std::log(x) + b * std::log(1.0 - x);
  const double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * betacf(a, b, x) / a;
  }
  return 1.0 - std::exp(log_gamma(a + b) - log_gamma(b) - log_gamma(a) +
                        b * std::log(1.0 - x) + a * std::log(x)) *
                   betacf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double dof) {
  if (t == 0.0) return 0.5;
  const double x = dof / (dof + t * t);
  const double p = 0.5 * incomplete_beta(dof / 2.0, 0.5, x);
  return t > 0.0 ? 1.0 - p : p;
}

}  // namespace

double t_quantile(double p, double dof) {
  require(p > 0.0 && p < 1.0, LRT_E_INVALID_ARGUMENT, "quantile level must lie in (0, 1)");
  require(dof > 0.0, LRT_E_INVALID_ARGUMENT, "degrees of freedom must be positive");
  if (p == 0.5) return 0.0;
  const bool upper = p > 0.5;
  const double target = upper ? p : 1.0 - p;

  double lo = 0.0;
  double hi = 1.0;
  while (t_cdf(hi, dof) < target) {
    hi *= 2.0;
    require(hi < 1e12, LRT_E_INTERNAL, "t quantile bracket failed");
  }
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (t_cdf(mid, dof) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = 0.5 * (lo + hi);
  return upper ? t : -t;
}

double diagonality(const Tensor& alignment, double band) {
  require(band > 0.0 && band <= 1.0, LRT_E_INVALID_ARGUMENT, "band must lie in (0, 1]");
  const std::size_t t_len = alignment.rows();
  const std::size_t n_len = alignment.cols();
  require(t_len >= 1 && n_len >= 1 && alignment.numel() > 0, LRT_E_EMPTY_ALIGNMENT,
          "empty alignment matrix");

  double total = 0.0;
  for (std::size_t t = 0; t < t_len; ++t) {
    const double t_pos = t_len == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(t_len - 1);
    double in_band = 0.0;
    for (std::size_t i = 0; i < n_len; ++i) {
      const double i_pos =
          n_len == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n_len - 1);
      const bool inside = (t_len == 1 || n_len == 1) || std::abs(i_pos - t_pos) <= band;
      if (inside) in_band += alignment.at(t, i);
    }
    total += in_band;
  }
  return total / static_cast<double>(t_len);
}

void save_alignment_csv(const Tensor& alignment, const std::string& path) {
  std::string out;
  char buf[40];
  for (std::size_t t = 0; t < alignment.rows(); ++t) {
    for (std::size_t i = 0; i < alignment.cols(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", alignment.at(t, i));
      if (i) out += ',';
      out += buf;
    }
    out += '\n';
  }
  write_file(path, out);
}

void save_alignment_pgm(const Tensor& alignment, const std::string& path) {
  double max_v = 0.0;
  for (double v : alignment.data) max_v = std::max(max_v, v);
  if (max_v <= 0.0) max_v = 1.0;

  std::string out = "P5\n" + std::to_string(alignment.cols()) + " " +
                    std::to_string(alignment.rows()) + "\n255\n";
  for (double v : alignment.data) {
    const int level = static_cast<int>(std::lround(255.0 * std::max(0.0, v) / max_v));
    out.push_back(static_cast<char>(std::clamp(level, 0, 255)));
  }
  write_file(path, out);
}

Tensor load_alignment(const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".pgm") {
    const auto bytes = read_file(path);
    require(bytes.size() > 2 && bytes[0] == 'P' && bytes[1] == '5', LRT_E_IO,
            path + ": not a binary PGM");
    // Header: P5, width, height, maxval, single whitespace, then pixels.
    std::size_t pos = 2;
    const auto next_int = [&]() {
      while (pos < bytes.size() && std::isspace(bytes[pos])) ++pos;
      std::size_t v = 0;
      bool any = false;
      while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') {
        v = v * 10 + (bytes[pos] - '0');
        ++pos;
        any = true;
      }
      require(any, LRT_E_IO, path + ": bad PGM header");
      return v;
    };
    const std::size_t width = next_int();
    const std::size_t height = next_int();
    const std::size_t maxval = next_int();
    ++pos;  // single whitespace after maxval
    require(maxval >= 1 && maxval <= 255, LRT_E_IO, path + ": unsupported PGM depth");
    require(bytes.size() >= pos + width * height, LRT_E_IO, path + ": truncated PGM");

    Tensor a({height, width});
    for (std::size_t i = 0; i < width * height; ++i) {
      a.data[i] = static_cast<double>(bytes[pos + i]) / static_cast<double>(maxval);
    }
    // Quantized rows are renormalized to probability vectors.
    for (std::size_t t = 0; t < height; ++t) {
      double row_sum = 0.0;
      for (std::size_t i = 0; i < width; ++i) row_sum += a.at(t, i);
      if (row_sum > 0.0) {
        for (std::size_t i = 0; i < width; ++i) a.at(t, i) /= row_sum;
      }
    }
    return a;
  }

  // CSV.
  const std::string text = read_text_file(path);
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      row.push_back(std::stod(line.substr(pos, comma - pos)));
      pos = comma + 1;
    }
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), LRT_E_EMPTY_ALIGNMENT, path + ": no alignment rows");
  Tensor a({rows.size(), rows[0].size()});
  for (std::size_t t = 0; t < rows.size(); ++t) {
    require(rows[t].size() == rows[0].size(), LRT_E_IO, path + ": ragged CSV");
    for (std::size_t i = 0; i < rows[t].size(); ++i) a.at(t, i) = rows[t][i];
  }
  return a;
}

std::vector<MosSample> parse_mos_csv(const std::string& csv) {
  std::vector<MosSample> samples;
  std::istringstream in(csv);
  std::string line;
  bool header = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto comma = line.find(',', pos);
      if (comma == std::string::npos) comma = line.size();
      cells.push_back(line.substr(pos, comma - pos));
      pos = comma + 1;
    }
    require(cells.size() == 4, LRT_E_INVALID_ARGUMENT,
            "MOS line " + std::to_string(line_no) + ": expected 4 fields");
    MosSample s;
    s.rater_id = cells[0];
    s.utterance_id = cells[1];
    s.dimension = cells[2];
    try {
      s.score = std::stoi(cells[3]);
    } catch (...) {
      fail(LRT_E_INVALID_ARGUMENT, "MOS line " + std::to_string(line_no) + ": bad score");
    }
    require(s.score >= 1 && s.score <= 5, LRT_E_INVALID_ARGUMENT,
            "MOS line " + std::to_string(line_no) + ": score must be 1..5");
    samples.push_back(std::move(s));
  }
  return samples;
}

MosReport mos_report(const std::vector<MosSample>& samples, const std::string& dimension,
                     double confidence) {
  require(confidence > 0.0 && confidence < 1.0, LRT_E_INVALID_ARGUMENT,
          "confidence must lie in (0, 1)");

  std::map<std::string, std::pair<double, std::size_t>> per_rater;
  for (const auto& s : samples) {
    if (s.dimension != dimension) continue;
    auto& [sum, count] = per_rater[s.rater_id];
    sum += s.score;
    count += 1;
  }
  require(per_rater.size() >= 2, LRT_E_INSUFFICIENT_RATERS,
          "need at least 2 raters for dimension " + dimension);

  MosReport report;
  report.dimension = dimension;
  report.n_raters = per_rater.size();
  for (const auto& [rater, acc] : per_rater) {
    report.rater_means.emplace_back(rater, acc.first / static_cast<double>(acc.second));
  }
  double mean = 0.0;
  for (const auto& [rater, m] : report.rater_means) mean += m;
  mean /= static_cast<double>(report.n_raters);
  report.mean = mean;

  double ss = 0.0;
  for (const auto& [rater, m] : report.rater_means) ss += (m - mean) * (m - mean);
  const double s = std::sqrt(ss / static_cast<double>(report.n_raters - 1));
  if (s == 0.0) {
    report.zero_variance = true;
    report.half_width = 0.0;
    return report;
  }
  const double t = t_quantile(0.5 * (1.0 + confidence),
                              static_cast<double>(report.n_raters - 1));
  report.half_width = t * s / std::sqrt(static_cast<double>(report.n_raters));
  return report;
}

double mos_implied_stddev(std::size_t n_raters, double half_width, double confidence) {
  require(n_raters >= 2, LRT_E_INSUFFICIENT_RATERS, "need at least 2 raters");
  require(half_width > 0.0, LRT_E_INVALID_ARGUMENT, "half width must be positive");
  const double t =
      t_quantile(0.5 * (1.0 + confidence), static_cast<double>(n_raters - 1));
  return half_width * std::sqrt(static_cast<double>(n_raters)) / t;
}

std::string format_mos_report(const std::vector<MosReport>& reports) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-28s %s\n", "Characteristic evaluated", "Mean opinion score");
  out += buf;
  double mean_sum = 0.0;
  double hw_sum = 0.0;
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-28s %.2f ± %.2f  (n=%zu raters%s)\n",
                  r.dimension.c_str(), r.mean, r.half_width, r.n_raters,
                  r.zero_variance ? ", zero-variance" : "");
    out += buf;
    mean_sum += r.mean;
    hw_sum += r.half_width;
  }
  if (reports.size() > 1) {
    std::snprintf(buf, sizeof buf, "%-28s %.2f ± %.2f\n", "Overall",
                  mean_sum / static_cast<double>(reports.size()),
                  hw_sum / static_cast<double>(reports.size()));
    out += buf;
  }
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%s.mean=%.6f\n%s.half_width=%.6f\n%s.n_raters=%zu\n",
                  r.dimension.c_str(), r.mean, r.dimension.c_str(), r.half_width,
                  r.dimension.c_str(), r.n_raters);
    out += buf;
  }
  return out;
}

void export_loss_plot(const std::vector<LossRecord>& records, const std::string& csv_path,
                      const std::string& svg_path) {
  require(!records.empty(), LRT_E_EMPTY_LOG, "no loss records to export");
  write_file(csv_path, format_loss_log(records));

  const double width = 800.0, height = 400.0, margin = 50.0;
  double min_loss = records[0].train_loss, max_loss = records[0].train_loss;
  uint64_t min_it = records.front().iteration, max_it = records.back().iteration;
  bool any_val = false;
  for (const auto& r : records) {
    min_loss = std::min(min_loss, r.train_loss);
    max_loss = std::max(max_loss, r.train_loss);
    if (r.has_val) {
      any_val = true;
      min_loss = std::min(min_loss, r.val_loss);
      max_loss = std::max(max_loss, r.val_loss);
    }
  }
  if (max_loss <= min_loss) max_loss = min_loss + 1.0;
  const double span_it = static_cast<double>(max_it > min_it ? max_it - min_it : 1);

  const auto x_of = [&](uint64_t it) {
    return margin + (width - 2 * margin) * static_cast<double>(it - min_it) / span_it;
  };
  const auto y_of = [&](double loss) {
    return height - margin - (height - 2 * margin) * (loss - min_loss) / (max_loss - min_loss);
  };

  std::string svg;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" "
                "viewBox=\"0 0 %g %g\">\n",
                width, height, width, height);
  svg += buf;
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n"
                "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"black\"/>\n",
                margin, height - margin, width - margin, height - margin, margin, margin, margin,
                height - margin);
  svg += buf;

  const auto polyline = [&](bool val_series, const char* color) {
    std::string points;
    for (const auto& r : records) {
      if (val_series && !r.has_val) continue;
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", x_of(r.iteration),
                    y_of(val_series ? r.val_loss : r.train_loss));
      points += buf;
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + points +
           "\"/>\n";
  };
  svg += polyline(false, "#1f77b4");
  if (any_val) svg += polyline(true, "#d62728");

  std::snprintf(buf, sizeof buf,
                "<text x=\"%g\" y=\"%g\" font-size=\"12\">iter %llu</text>\n"
                "<text x=\"%g\" y=\"%g\" font-size=\"12\" text-anchor=\"end\">iter %llu</text>\n"
                "<text x=\"%g\" y=\"%g\" font-size=\"12\">%.4g</text>\n"
                "<text x=\"%g\" y=\"%g\" font-size=\"12\">%.4g</text>\n",
                margin, height - margin + 16, static_cast<unsigned long long>(min_it),
                width - margin, height - margin + 16, static_cast<unsigned long long>(max_it), 4.0,
                height - margin, min_loss, 4.0, margin + 4, max_loss);
  svg += buf;
  svg += "</svg>\n";
  write_file(svg_path, svg);
}

}  // namespace lrt
