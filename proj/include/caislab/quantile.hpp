#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>

#include "caislab/errors.hpp"

namespace caislab {

// Distributions are represented by their values at 49 fixed quantile levels
// tau_i = 0.02 * i for i = 1..49. The grid is symmetric about 0.5 and stays
// clear of the extreme tails, which keeps single-sample regression stable.
inline constexpr int kNumQuantiles = 49;

inline const std::array<double, kNumQuantiles>& quantile_levels() {
  static const std::array<double, kNumQuantiles> levels = [] {
    std::array<double, kNumQuantiles> t{};
    for (int i = 0; i < kNumQuantiles; ++i) t[i] = 0.02 * (i + 1);
    return t;
  }();
  return levels;
}

// One scalar dimension's quantile estimates, kept sorted by the owner.
struct QuantileTable {
  std::array<double, kNumQuantiles> values{};

  double mean() const {
    double s = 0.0;
    for (double v : values) s += v;
    return s / kNumQuantiles;
  }

  bool is_monotone() const {
    for (int i = 1; i < kNumQuantiles; ++i)
      if (values[i] < values[i - 1]) return false;
    return true;
  }

  // Restores monotonicity after a gradient step. The table is nearly sorted
  // already, so insertion sort beats anything fancier.
  void project_monotone() {
    for (int i = 1; i < kNumQuantiles; ++i) {
      double v = values[i];
      int j = i - 1;
      while (j >= 0 && values[j] > v) {
        values[j + 1] = values[j];
        --j;
      }
      values[j + 1] = v;
    }
  }
};

inline double huber(double u, double kappa) {
  double a = std::abs(u);
  if (a <= kappa) return 0.5 * u * u;
  return kappa * (a - 0.5 * kappa);
}

// Asymmetrically weighted Huber loss for quantile regression at level tau.
// u is the residual target - prediction.
inline double quantile_huber_loss(double u, double tau, double kappa) {
  double w = std::abs(tau - (u < 0.0 ? 1.0 : 0.0));
  return w * huber(u, kappa);
}

// d/dq of quantile_huber_loss with u = y - q. Used directly by the tables;
// kept next to the loss so the pair stays consistent.
inline double quantile_huber_grad(double u, double tau, double kappa) {
  double w = std::abs(tau - (u < 0.0 ? 1.0 : 0.0));
  double dhuber = std::abs(u) <= kappa ? u : (u > 0.0 ? kappa : -kappa);
  return -w * dhuber;
}

// 1-Wasserstein distance between two distributions given as quantile tables
// on the shared level grid: the mean absolute difference of quantile values.
inline double wasserstein1(const QuantileTable& a, const QuantileTable& b) {
  double s = 0.0;
  for (int i = 0; i < kNumQuantiles; ++i)
    s += std::abs(a.values[i] - b.values[i]);
  return s / kNumQuantiles;
}

}  // namespace caislab
