#pragma once

// Brute-force reference for r(f, eps) in d = 1: search the lattice values
// H_1..H_m directly inside their boxes [F_j - eps, F_j + eps] on a 41-point
// grid per axis, then zoom around the best point. Shares no code with the
// dual solver.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "inclab/grid.hpp"
#include "inclab/rate.hpp"

namespace oracle {

inline double rate_from_lattice(const std::vector<double>& H, int m, inclab::BallKind kind) {
  double total = 0.0;
  double prev = 0.0;
  for (double h : H) {
    const double g = (h - prev) * m;
    prev = h;
    if (kind == inclab::BallKind::strassen) {
      total += g * g / m;
    } else {
      if (g < 0) return std::numeric_limits<double>::infinity();
      total += (g == 0 ? 1.0 : g * std::log(g) - g + 1.0) / m;
    }
  }
  return total;
}

inline double exhaustive_r(const inclab::GridFunction& f, inclab::BallKind kind, double eps, int points = 41,
                           int rounds = 12) {
  const int m = f.spec().m;
  const auto cdf = f.cdf();
  std::vector<double> lo(m), hi(m), box_lo(m), box_hi(m);
  for (int j = 0; j < m; ++j) {
    box_lo[j] = lo[j] = cdf[j + 1] - eps;
    box_hi[j] = hi[j] = cdf[j + 1] + eps;
  }
  if (kind == inclab::BallKind::gamma) {
    // Non-negative densities mean 0 <= H_1 <= ... <= H_m; tighten the boxes.
    for (int j = 0; j < m; ++j) box_lo[j] = std::max(box_lo[j], j == 0 ? 0.0 : box_lo[j - 1]);
    for (int j = m - 1; j > 0; --j) box_hi[j - 1] = std::min(box_hi[j - 1], box_hi[j]);
    for (int j = 0; j < m; ++j) {
      if (box_lo[j] > box_hi[j]) return std::numeric_limits<double>::infinity();
      lo[j] = box_lo[j];
      hi[j] = box_hi[j];
    }
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_h(m);
  for (int round = 0; round < rounds; ++round) {
    std::vector<int> idx(m, 0);
    std::vector<double> H(m);
    bool found = false;
    while (true) {
      for (int j = 0; j < m; ++j) H[j] = lo[j] + (hi[j] - lo[j]) * idx[j] / (points - 1);
      const double r = rate_from_lattice(H, m, kind);
      if (r < best) {
        best = r;
        best_h = H;
        found = true;
      }
      int pos = 0;
      while (pos < m && ++idx[pos] == points) idx[pos++] = 0;
      if (pos == m) break;
    }
    if (!found && round > 0) break;
    if (!std::isfinite(best)) break;
    for (int j = 0; j < m; ++j) {
      const double step = (hi[j] - lo[j]) / (points - 1);
      lo[j] = std::max(box_lo[j], best_h[j] - 2 * step);
      hi[j] = std::min(box_hi[j], best_h[j] + 2 * step);
    }
  }
  return best;
}

}  // namespace oracle
