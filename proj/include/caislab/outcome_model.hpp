#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <ostream>
#include <span>
#include <vector>

#include "caislab/adamw.hpp"
#include "caislab/env.hpp"
#include "caislab/quantile.hpp"

namespace caislab {

// Per-joint action influence scores. scores[j][v] is the score for joint j
// under action value v (0 = no torque, 1 = move).
struct CaisVector {
  std::array<std::array<double, 2>, kNumJoints> scores{};
};

// Online distribution estimates of the latent outcome: one unconditional
// baseline table per latent dimension plus one table per (joint, action
// value, dimension). All tables regress on the same outcome sample each step;
// a conditional table only trains when its action value was the one taken.
//
// The causal action influence score of (joint, value) is the mean over
// dimensions of the 1-Wasserstein distance between the conditional and
// baseline tables.
//
// cond_lr_mult scales the conditional tables' learning rate relative to the
// baseline table. A conditional table trains on roughly half the steps the
// baseline sees (its action value must have been the taken one), so at
// equal rates it trails the baseline whenever the outcome distribution
// drifts, and the trailing gap reads as influence. A multiplier near the
// inverse action frequency keeps the two in step.
//
// Scores read from Polyak-averaged copies of the tables (exponential moving
// average with coefficient avg_beta) rather than the raw iterates. The raw
// tables never stop wobbling around their target: each update moves every
// entry by roughly the learning rate, and the distance computation folds
// that noise through an absolute value, which inflates scores that should
// be zero. Averaging shrinks the wobble by the square root of the window
// length while leaving converged values where they are.
//
// Predictions (expected_outcome) read the raw iterates instead. Prediction
// error is an instantaneous signal; a lagged average would keep reporting
// stale-model surprise long after the raw tables had caught up with a
// change, and that phantom error feeds back into behaviour when surprise is
// part of the reward.
class OutcomeModelBank {
 public:
  OutcomeModelBank(int latent_dim, AdamWConfig opt, double kappa,
                   double cond_lr_mult = 1.0, double avg_beta = 0.02)
      : dim_(latent_dim), kappa_(kappa), avg_beta_(avg_beta) {
    if (latent_dim <= 0) throw ConfigError("model latent_dim must be positive");
    if (!(kappa > 0.0)) throw ConfigError("model.kappa must be positive");
    if (!(cond_lr_mult > 0.0))
      throw ConfigError("model.cond_lr_mult must be positive");
    if (!(avg_beta > 0.0 && avg_beta <= 1.0))
      throw ConfigError("model.avg_beta must lie in (0, 1]");
    std::size_t n = static_cast<std::size_t>(dim_) * kNumQuantiles;
    baseline_ = Group{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                      AdamW(n, opt)};
    AdamWConfig copt = opt;
    copt.lr *= cond_lr_mult;
    for (auto& per_value : cond_)
      for (auto& g : per_value)
        g = Group{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                  AdamW(n, copt)};
  }

  int latent_dim() const { return dim_; }
  double kappa() const { return kappa_; }
  long update_count() const { return updates_; }

  void update(const ActionVector& taken, std::span<const double> outcome) {
    if (static_cast<int>(outcome.size()) != dim_)
      throw ContractViolation("OutcomeModelBank::update outcome size mismatch");
    ++updates_;
    train(baseline_, outcome);
    for (int j = 0; j < kNumJoints; ++j)
      train(cond_[j][static_cast<int>(taken[j])], outcome);
    smooth(baseline_);
    for (auto& per_value : cond_)
      for (auto& g : per_value) smooth(g);
  }

  double cais(int joint, ActionValue v) const {
    check_joint(joint);
    const Group& g = cond_[joint][static_cast<int>(v)];
    double s = 0.0;
    for (int d = 0; d < dim_; ++d) {
      const double* a = &g.avg[static_cast<std::size_t>(d) * kNumQuantiles];
      const double* b = &baseline_.avg[static_cast<std::size_t>(d) * kNumQuantiles];
      double w = 0.0;
      for (int i = 0; i < kNumQuantiles; ++i) w += std::abs(a[i] - b[i]);
      s += w / kNumQuantiles;
    }
    return s / dim_;
  }

  CaisVector cais_all() const {
    CaisVector out;
    for (int j = 0; j < kNumJoints; ++j) {
      out.scores[j][0] = cais(j, ActionValue::kNoTorque);
      out.scores[j][1] = cais(j, ActionValue::kMove);
    }
    return out;
  }

  // Predicted mean outcome under a joint action: the baseline mean plus the
  // per-joint conditional mean shifts stacked additively. Single-joint
  // effects superpose in the dynamics, so this is the natural composition.
  std::vector<double> expected_outcome(const ActionVector& taken) const {
    std::vector<double> out(dim_);
    for (int d = 0; d < dim_; ++d) {
      double base = slice_mean(baseline_, d);
      double v = base;
      for (int j = 0; j < kNumJoints; ++j)
        v += slice_mean(cond_[j][static_cast<int>(taken[j])], d) - base;
      out[d] = v;
    }
    return out;
  }

  // Averaged tables, as used by score reads.
  QuantileTable baseline_avg(int dim) const {
    return slice_avg(baseline_, dim);
  }

  QuantileTable conditional_avg(int joint, ActionValue v, int dim) const {
    check_joint(joint);
    return slice_avg(cond_[joint][static_cast<int>(v)], dim);
  }

  QuantileTable baseline(int dim) const { return slice(baseline_, dim); }

  QuantileTable conditional(int joint, ActionValue v, int dim) const {
    check_joint(joint);
    return slice(cond_[joint][static_cast<int>(v)], dim);
  }

  // Snapshot of all tables as CSV for offline inspection.
  void dump(std::ostream& os) const {
    os << "group,dim,tau,value\n";
    auto emit = [&](const char* name, const Group& g) {
      for (int d = 0; d < dim_; ++d)
        for (int i = 0; i < kNumQuantiles; ++i)
          os << name << ',' << d << ',' << quantile_levels()[i] << ','
             << g.q[static_cast<std::size_t>(d) * kNumQuantiles + i] << '\n';
    };
    emit("baseline", baseline_);
    for (int j = 0; j < kNumJoints; ++j) {
      std::string no = std::string(joint_name(j)) + ":no_torque";
      std::string mv = std::string(joint_name(j)) + ":move";
      emit(no.c_str(), cond_[j][0]);
      emit(mv.c_str(), cond_[j][1]);
    }
  }

 private:
  struct Group {
    std::vector<double> q;    // dim-major: q[d * kNumQuantiles + i]
    std::vector<double> avg;  // Polyak average of q, same layout
    AdamW opt{0, AdamWConfig{}};
  };

  void smooth(Group& g) {
    for (std::size_t i = 0; i < g.q.size(); ++i)
      g.avg[i] += avg_beta_ * (g.q[i] - g.avg[i]);
  }

  static void check_joint(int joint) {
    if (joint < 0 || joint >= kNumJoints)
      throw ContractViolation("joint index out of range");
  }

  void train(Group& g, std::span<const double> outcome) {
    const auto& taus = quantile_levels();
    std::vector<double> grad(g.q.size());
    for (int d = 0; d < dim_; ++d) {
      double y = outcome[d];
      std::size_t off = static_cast<std::size_t>(d) * kNumQuantiles;
      for (int i = 0; i < kNumQuantiles; ++i)
        grad[off + i] = quantile_huber_grad(y - g.q[off + i], taus[i], kappa_);
    }
    g.opt.step(g.q, grad);
    for (int d = 0; d < dim_; ++d) {
      // Insertion sort per dimension; the slice is nearly sorted already.
      double* q = &g.q[static_cast<std::size_t>(d) * kNumQuantiles];
      for (int i = 1; i < kNumQuantiles; ++i) {
        double v = q[i];
        int j = i - 1;
        while (j >= 0 && q[j] > v) {
          q[j + 1] = q[j];
          --j;
        }
        q[j + 1] = v;
      }
    }
  }

  QuantileTable slice(const Group& g, int dim) const {
    if (dim < 0 || dim >= dim_) throw ContractViolation("dim index out of range");
    QuantileTable t;
    std::size_t off = static_cast<std::size_t>(dim) * kNumQuantiles;
    for (int i = 0; i < kNumQuantiles; ++i) t.values[i] = g.q[off + i];
    return t;
  }

  QuantileTable slice_avg(const Group& g, int dim) const {
    if (dim < 0 || dim >= dim_) throw ContractViolation("dim index out of range");
    QuantileTable t;
    std::size_t off = static_cast<std::size_t>(dim) * kNumQuantiles;
    for (int i = 0; i < kNumQuantiles; ++i) t.values[i] = g.avg[off + i];
    return t;
  }

  double slice_mean(const Group& g, int dim) const {
    std::size_t off = static_cast<std::size_t>(dim) * kNumQuantiles;
    double s = 0.0;
    for (int i = 0; i < kNumQuantiles; ++i) s += g.q[off + i];
    return s / kNumQuantiles;
  }

  int dim_;
  double kappa_;
  double avg_beta_;
  long updates_ = 0;
  Group baseline_;
  std::array<std::array<Group, 2>, kNumJoints> cond_;
};

// Prediction error as root mean square over latent dimensions.
inline double surprise(std::span<const double> expected,
                       std::span<const double> actual) {
  if (expected.size() != actual.size() || expected.empty())
    throw ContractViolation("surprise: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    double d = expected[i] - actual[i];
    s += d * d;
  }
  return std::sqrt(s / expected.size());
}

}  // namespace caislab
