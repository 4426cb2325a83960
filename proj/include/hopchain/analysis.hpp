#pragma once

// Accuracy and size analysis over recorded chain runs, and the fit of the
// accuracy decay law AEL(t) = (t+1)^-alpha by RMSE minimization.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hopchain/gleu.hpp"
#include "hopchain/runner.hpp"

namespace hopchain {

struct CurvePoint {
  int t = 0;
  double value = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Accumulated accuracy per measurement step. t = 0 is the original text,
// pinned at 1.
struct AccuracyCurve {
  std::string label;
  std::vector<CurvePoint> points;

  // Number of measured points after t = 0.
  std::size_t measured() const {
    return std::count_if(points.begin(), points.end(),
                         [](const CurvePoint& p) { return p.t > 0; });
  }
  friend bool operator==(const AccuracyCurve&, const AccuracyCurve&) = default;
};

struct SizeCurve {
  std::string label;
  std::vector<CurvePoint> points;  // value = word count
  friend bool operator==(const SizeCurve&, const SizeCurve&) = default;
};

struct AelFit {
  double alpha = 0.0;  // semantic divergence factor
  double rmse = 0.0;
  std::size_t n = 0;   // points entering the RMSE (t = 0 excluded)
  friend bool operator==(const AelFit&, const AelFit&) = default;
};

// Mean curve with a constant half-width equal to the fitted RMSE.
struct CurveBand {
  AccuracyCurve mean;
  double half_width = 0.0;
};

// Search interval for alpha.
inline constexpr double kAlphaMin = 0.0;
inline constexpr double kAlphaMax = 10.0;
inline constexpr double kAlphaTolerance = 1e-9;

inline double ael(int t, double alpha) {
  return std::pow(static_cast<double>(t) + 1.0, -alpha);
}

// Root mean squared residual against AEL over the points with t >= 1.
inline double rmse(const AccuracyCurve& empirical, double alpha) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const CurvePoint& p : empirical.points) {
    if (p.t < 1) continue;
    const double r = p.value - ael(p.t, alpha);
    sum += r * r;
    ++n;
  }
  if (n == 0) throw std::invalid_argument("RMSE needs at least one point after t = 0");
  return std::sqrt(sum / static_cast<double>(n));
}

// Coarse scan to bracket the global minimum, then golden-section search
// inside the bracket.
inline AelFit fit_ael(const AccuracyCurve& empirical) {
  const std::size_t n = empirical.measured();
  if (n == 0) throw std::invalid_argument("cannot fit a curve with no points after t = 0");
  auto loss = [&](double alpha) { return rmse(empirical, alpha); };

  constexpr int kScanSteps = 1000;
  constexpr double kStep = (kAlphaMax - kAlphaMin) / kScanSteps;
  int best = 0;
  double best_loss = loss(kAlphaMin);
  for (int i = 1; i <= kScanSteps; ++i) {
    const double l = loss(kAlphaMin + kStep * i);
    if (l < best_loss) {
      best_loss = l;
      best = i;
    }
  }
  double lo = std::max(kAlphaMin, kAlphaMin + kStep * (best - 1));
  double hi = std::min(kAlphaMax, kAlphaMin + kStep * (best + 1));

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = loss(x1);
  double f2 = loss(x2);
  while (hi - lo > kAlphaTolerance) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = loss(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = loss(x2);
    }
  }
  // Keep whichever candidate is lowest, including the scan winner and the
  // interval ends.
  double alpha = 0.5 * (lo + hi);
  for (double candidate : {kAlphaMin + kStep * best, lo, hi}) {
    if (loss(candidate) < loss(alpha)) alpha = candidate;
  }
  return {alpha, loss(alpha), n};
}

// --- curves from runs ----------------------------------------------------------

namespace detail {

// Reference-language texts in measurement order, paired with the hop that
// produced each (nullptr for the initial text).
inline std::vector<std::pair<const HopRecord*, const std::string*>>
measurement_texts(const ChainRun& run) {
  std::vector<std::pair<const HopRecord*, const std::string*>> out;
  out.emplace_back(nullptr, &run.initial_reference_text());
  for (const HopRecord& hop : run.hops) {
    const bool expected =
        hop.target == run.spec.reference || run.spec.topology == Topology::kDirect;
    if (expected && !hop.measurement_text) {
      throw IntegrityError("run '" + run.id + "' hop " + std::to_string(hop.t) +
                           " lacks its measurement text");
    }
    if (hop.measurement_text) out.emplace_back(&hop, &*hop.measurement_text);
  }
  return out;
}

}  // namespace detail

inline AccuracyCurve accumulated_gleu(const ChainRun& run, std::string_view initial,
                                      int n_max = 4) {
  const NGramBag reference = extract_ngrams(tokenize(initial), n_max);
  AccuracyCurve curve;
  curve.label = run.id;
  const auto texts = detail::measurement_texts(run);
  for (std::size_t m = 0; m < texts.size(); ++m) {
    const double value =
        m == 0 ? 1.0 : gleu(extract_ngrams(tokenize(*texts[m].second), n_max), reference).value;
    curve.points.push_back({static_cast<int>(m), value});
  }
  return curve;
}

// Against the run's own initial reference-language text.
inline AccuracyCurve accumulated_gleu(const ChainRun& run, int n_max = 4) {
  return accumulated_gleu(run, run.initial_reference_text(), n_max);
}

struct StepScore {
  Hop pair;
  double score = 0.0;
};

// GLEU between consecutive reference-language texts. Pivot runs attribute a
// score to (reference, visited language); direct runs to the hop itself.
inline std::vector<StepScore> stepwise_gleu(const ChainRun& run, int n_max = 4) {
  const auto texts = detail::measurement_texts(run);
  std::vector<StepScore> out;
  for (std::size_t m = 1; m < texts.size(); ++m) {
    const HopRecord& hop = *texts[m].first;
    Hop pair{hop.source, hop.target};
    if (run.spec.topology == Topology::kPivot) pair = {run.spec.reference, hop.source};
    const double score =
        gleu(tokenize(*texts[m].second), tokenize(*texts[m - 1].second), n_max).value;
    out.push_back({std::move(pair), score});
  }
  return out;
}

// --- aggregation -----------------------------------------------------------------

struct CurveAggregate {
  AccuracyCurve mean;
  CurveBand band;
  AelFit fit;
};

inline CurveAggregate aggregate_curves(std::span<const AccuracyCurve> curves,
                                       std::string label = "mean") {
  if (curves.empty()) throw std::invalid_argument("no curves to aggregate");
  AccuracyCurve mean;
  mean.label = std::move(label);
  mean.points = curves.front().points;
  for (std::size_t c = 1; c < curves.size(); ++c) {
    const auto& pts = curves[c].points;
    if (pts.size() != mean.points.size()) {
      throw std::invalid_argument("curves do not share a t grid");
    }
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].t != mean.points[i].t) throw std::invalid_argument("curves do not share a t grid");
      mean.points[i].value += pts[i].value;
    }
  }
  for (auto& p : mean.points) p.value /= static_cast<double>(curves.size());
  CurveAggregate out;
  out.fit = fit_ael(mean);
  out.band = {mean, out.fit.rmse};
  out.mean = std::move(mean);
  return out;
}

struct SizeTrajectory {
  std::vector<SizeCurve> runs;
  SizeCurve mean;
  std::vector<double> run_ratios;  // final / initial word count per run
  double final_ratio = 0.0;        // of the mean curve
};

// Word count after every hop; t = 0 is the source text.
inline SizeCurve size_curve(const ChainRun& run) {
  SizeCurve curve;
  curve.label = run.id;
  curve.points.push_back({0, static_cast<double>(run.text.initial_word_count)});
  for (const HopRecord& hop : run.hops) {
    curve.points.push_back({hop.t, static_cast<double>(hop.output_word_count)});
  }
  return curve;
}

inline SizeTrajectory size_trajectory(std::span<const ChainRun> runs) {
  if (runs.empty()) throw std::invalid_argument("no runs for a size trajectory");
  SizeTrajectory out;
  for (const ChainRun& run : runs) out.runs.push_back(size_curve(run));
  out.mean.label = "mean";
  out.mean.points = out.runs.front().points;
  for (std::size_t r = 1; r < out.runs.size(); ++r) {
    if (out.runs[r].points.size() != out.mean.points.size()) {
      throw std::invalid_argument("runs differ in length; size curves cannot be averaged");
    }
    for (std::size_t i = 0; i < out.mean.points.size(); ++i) {
      out.mean.points[i].value += out.runs[r].points[i].value;
    }
  }
  for (auto& p : out.mean.points) p.value /= static_cast<double>(out.runs.size());
  auto ratio = [](const SizeCurve& c) {
    const double first = c.points.front().value;
    return first > 0.0 ? c.points.back().value / first : 0.0;
  };
  for (const auto& c : out.runs) out.run_ratios.push_back(ratio(c));
  out.final_ratio = ratio(out.mean);
  return out;
}

// --- pair matrix -------------------------------------------------------------------

struct PairCell {
  double mean = 0.0;
  std::size_t samples = 0;
};

struct PairMatrix {
  std::vector<std::string> languages;  // sorted codes seen in any pair
  std::map<Hop, PairCell> cells;       // directed (source, target)

  std::optional<PairCell> cell(const std::string& source, const std::string& target) const {
    auto it = cells.find({source, target});
    if (it == cells.end()) return std::nullopt;
    return it->second;
  }

  // Mean over defined off-diagonal cells; absent when there are none.
  std::optional<double> aggregate_mean() const {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& [pair, cell] : cells) {
      if (pair.source == pair.target) continue;
      sum += cell.mean;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  }
};

inline PairMatrix pair_matrix_from_scores(std::span<const StepScore> scores) {
  std::map<Hop, std::pair<double, std::size_t>> sums;
  for (const StepScore& s : scores) {
    if (s.pair.source == s.pair.target) continue;  // A -> A never occurs
    auto& [sum, n] = sums[s.pair];
    sum += s.score;
    ++n;
  }
  PairMatrix matrix;
  std::vector<std::string> langs;
  for (const auto& [pair, acc] : sums) {
    matrix.cells[pair] = {acc.first / static_cast<double>(acc.second), acc.second};
    langs.push_back(pair.source);
    langs.push_back(pair.target);
  }
  std::sort(langs.begin(), langs.end());
  langs.erase(std::unique(langs.begin(), langs.end()), langs.end());
  matrix.languages = std::move(langs);
  return matrix;
}

inline PairMatrix pair_matrix(std::span<const ChainRun> runs, int n_max = 4) {
  std::vector<StepScore> all;
  for (const ChainRun& run : runs) {
    auto scores = stepwise_gleu(run, n_max);
    all.insert(all.end(), scores.begin(), scores.end());
  }
  return pair_matrix_from_scores(all);
}

}  // namespace hopchain
