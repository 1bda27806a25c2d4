#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "caislab/errors.hpp"

namespace caislab {

struct AdamWConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;  // decoupled; applied as theta -= lr * wd * theta
};

// Plain AdamW over a flat parameter block. Each instance owns its moment
// buffers and step count, so parameter groups that update at different rates
// (the conditional quantile tables) each get correct bias correction.
class AdamW {
 public:
  AdamW(std::size_t n, AdamWConfig cfg)
      : cfg_(cfg), m_(n, 0.0), v_(n, 0.0) {}

  void step(std::span<double> params, std::span<const double> grads) {
    if (params.size() != m_.size() || grads.size() != m_.size())
      throw ContractViolation("AdamW::step size mismatch");
    ++t_;
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < m_.size(); ++i) {
      double g = grads[i];
      m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
      v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g * g;
      double mhat = m_[i] / bc1;
      double vhat = v_[i] / bc2;
      params[i] -= cfg_.lr * (mhat / (std::sqrt(vhat) + cfg_.eps) +
                              cfg_.weight_decay * params[i]);
    }
  }

  long steps_taken() const { return t_; }
  const AdamWConfig& config() const { return cfg_; }

 private:
  AdamWConfig cfg_;
  std::vector<double> m_, v_;
  long t_ = 0;
};

}  // namespace caislab
