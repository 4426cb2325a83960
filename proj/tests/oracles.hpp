#pragma once

// Slow, obviously-correct reference computations used to cross-check the
// library. Nothing here shares code with include/hopchain.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

namespace oracle {

// Enumerates every window of every order 1..n_max in both sequences and pairs
// each candidate window with a not-yet-used identical reference window.
inline double gleu(const std::vector<std::string>& cand, const std::vector<std::string>& ref,
                   int n_max = 4) {
  if (cand.empty() && ref.empty()) return 1.0;
  if (cand.empty() || ref.empty()) return 0.0;
  std::size_t cand_total = 0;
  std::size_t ref_total = 0;
  std::size_t matches = 0;
  for (int n = 1; n <= n_max; ++n) {
    std::vector<std::vector<std::string>> cw, rw;
    for (std::size_t i = 0; i + n <= cand.size(); ++i) cw.emplace_back(cand.begin() + i, cand.begin() + i + n);
    for (std::size_t i = 0; i + n <= ref.size(); ++i) rw.emplace_back(ref.begin() + i, ref.begin() + i + n);
    cand_total += cw.size();
    ref_total += rw.size();
    std::vector<bool> used(rw.size(), false);
    for (const auto& w : cw) {
      for (std::size_t j = 0; j < rw.size(); ++j) {
        if (!used[j] && rw[j] == w) {
          used[j] = true;
          ++matches;
          break;
        }
      }
    }
  }
  const double p = static_cast<double>(matches) / static_cast<double>(cand_total);
  const double r = static_cast<double>(matches) / static_cast<double>(ref_total);
  return p < r ? p : r;
}

// Root mean square residual against (t+1)^-alpha over points with t >= 1.
inline double rmse(const std::vector<std::pair<int, double>>& points, double alpha) {
  double sum = 0.0;
  int n = 0;
  for (const auto& [t, v] : points) {
    if (t < 1) continue;
    const double d = v - std::pow(t + 1.0, -alpha);
    sum += d * d;
    ++n;
  }
  return std::sqrt(sum / n);
}

// Grid search with final spacing `step`. A full 1e-3 sweep of [lo, hi] picks
// the best cell; the neighbourhood of that cell is then swept at `step`.
inline double grid_alpha(const std::vector<std::pair<int, double>>& points, double step = 1e-5,
                         double lo = 0.0, double hi = 10.0) {
  auto sweep = [&](double a, double b, double h) {
    double best = a;
    double best_err = rmse(points, a);
    const long steps = std::lround((b - a) / h);
    for (long i = 1; i <= steps; ++i) {
      const double x = a + h * static_cast<double>(i);
      const double e = rmse(points, x);
      if (e < best_err) {
        best_err = e;
        best = x;
      }
    }
    return best;
  };
  const double coarse = sweep(lo, hi, 1e-3);
  const double a = coarse - 2e-3 < lo ? lo : coarse - 2e-3;
  const double b = coarse + 2e-3 > hi ? hi : coarse + 2e-3;
  return sweep(a, b, step);
}

inline std::vector<std::pair<int, double>> ael_points(double alpha, int n) {
  std::vector<std::pair<int, double>> out;
  for (int t = 0; t <= n; ++t) out.emplace_back(t, std::pow(t + 1.0, -alpha));
  return out;
}

}  // namespace oracle
