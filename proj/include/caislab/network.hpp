#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "caislab/errors.hpp"

namespace caislab {

// Value network: Linear(input -> hidden), LayerNorm, a stack of residual
// blocks h = h + gelu(LayerNorm(W h + b)), a final LayerNorm, and a linear
// head. Forward and backward are written out by hand; the network is small
// enough that clarity beats a tensor library here.
struct NetworkSpec {
  int input_dim = 76;
  int hidden_dim = 64;
  int residual_blocks = 2;
  int output_dim = 24;

  void validate() const {
    if (input_dim <= 0) throw ConfigError("NetworkSpec.input_dim must be positive");
    if (hidden_dim <= 0) throw ConfigError("NetworkSpec.hidden_dim must be positive");
    if (residual_blocks < 0)
      throw ConfigError("NetworkSpec.residual_blocks must be non-negative");
    if (output_dim <= 0) throw ConfigError("NetworkSpec.output_dim must be positive");
  }

  std::size_t param_count() const {
    std::size_t h = hidden_dim;
    std::size_t n = h * input_dim + 3 * h;          // input linear + first LN
    n += residual_blocks * (h * h + 3 * h);          // per block: W, b, gain, offset
    n += 2 * h;                                      // final LN
    n += static_cast<std::size_t>(output_dim) * h + output_dim;  // head
    return n;
  }
};

inline constexpr double kLayerNormEps = 1e-5;

inline double gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x / std::sqrt(2.0)));
}

inline double gelu_grad(double x) {
  double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
  double cdf = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
  return cdf + x * phi;
}

// Everything backward() needs from one forward pass. input/output sizes also
// serve as a consistency check against the owning network's spec.
struct ForwardTrace {
  std::vector<double> input;
  std::vector<double> ln_in_zhat;
  double ln_in_invstd = 0.0;
  std::vector<std::vector<double>> block_in;       // residual stream entering each block
  std::vector<std::vector<double>> block_zhat;
  std::vector<double> block_invstd;
  std::vector<std::vector<double>> block_gelu_in;  // LN affine output, pre-gelu
  std::vector<double> final_zhat;
  double final_invstd = 0.0;
  std::vector<double> final_out;                   // after final LN affine
  std::vector<double> output;
};

class QNetwork {
 public:
  explicit QNetwork(NetworkSpec spec) : spec_(spec) {
    spec_.validate();
    layout();
    params_.assign(total_, 0.0);
  }

  // Fan-in uniform weights, zero biases, identity layer norms.
  static QNetwork initialize(NetworkSpec spec, std::mt19937_64& rng) {
    QNetwork net(spec);
    auto fill = [&](std::size_t off, int rows, int cols) {
      double bound = 1.0 / std::sqrt(static_cast<double>(cols));
      std::uniform_real_distribution<double> u(-bound, bound);
      for (int i = 0; i < rows * cols; ++i) net.params_[off + i] = u(rng);
    };
    fill(net.w_in_, spec.hidden_dim, spec.input_dim);
    for (int k = 0; k < spec.residual_blocks; ++k)
      fill(net.w_block_[k], spec.hidden_dim, spec.hidden_dim);
    fill(net.w_out_, spec.output_dim, spec.hidden_dim);
    for (int i = 0; i < spec.hidden_dim; ++i) {
      net.params_[net.g_in_ + i] = 1.0;
      net.params_[net.g_f_ + i] = 1.0;
      for (int k = 0; k < spec.residual_blocks; ++k)
        net.params_[net.g_block_[k] + i] = 1.0;
    }
    return net;
  }

  const NetworkSpec& spec() const { return spec_; }
  std::size_t param_count() const { return total_; }
  std::vector<double>& params() { return params_; }
  const std::vector<double>& params() const { return params_; }

  std::vector<double> forward(std::span<const double> input,
                              ForwardTrace* trace = nullptr) const {
    if (static_cast<int>(input.size()) != spec_.input_dim)
      throw ContractViolation("QNetwork::forward input size mismatch");
    for (double x : input)
      if (!std::isfinite(x))
        throw ContractViolation("QNetwork::forward non-finite input");

    int h = spec_.hidden_dim;
    std::vector<double> z(h);
    matvec(w_in_, spec_.input_dim, input, b_in_, z);

    std::vector<double> zhat(h);
    double invstd = normalize(z, zhat);
    std::vector<double> stream(h);
    for (int i = 0; i < h; ++i)
      stream[i] = params_[g_in_ + i] * zhat[i] + params_[o_in_ + i];

    if (trace) {
      trace->input.assign(input.begin(), input.end());
      trace->ln_in_zhat = zhat;
      trace->ln_in_invstd = invstd;
      trace->block_in.clear();
      trace->block_zhat.clear();
      trace->block_invstd.clear();
      trace->block_gelu_in.clear();
    }

    std::vector<double> bz(h), bzhat(h), gin(h);
    for (int k = 0; k < spec_.residual_blocks; ++k) {
      if (trace) trace->block_in.push_back(stream);
      matvec(w_block_[k], h, stream, b_block_[k], bz);
      double binv = normalize(bz, bzhat);
      for (int i = 0; i < h; ++i)
        gin[i] = params_[g_block_[k] + i] * bzhat[i] + params_[o_block_[k] + i];
      for (int i = 0; i < h; ++i) stream[i] += gelu(gin[i]);
      if (trace) {
        trace->block_zhat.push_back(bzhat);
        trace->block_invstd.push_back(binv);
        trace->block_gelu_in.push_back(gin);
      }
    }

    std::vector<double> fzhat(h);
    double finv = normalize(stream, fzhat);
    std::vector<double> fout(h);
    for (int i = 0; i < h; ++i)
      fout[i] = params_[g_f_ + i] * fzhat[i] + params_[o_f_ + i];

    std::vector<double> out(spec_.output_dim);
    matvec(w_out_, h, fout, b_out_, out);

    if (trace) {
      trace->final_zhat = fzhat;
      trace->final_invstd = finv;
      trace->final_out = fout;
      trace->output = out;
    }
    return out;
  }

  // Gradient of sum(output_grad . output) with respect to every parameter,
  // in the same flat layout as params(). The trace must come from a forward
  // pass through this network at the current parameter values.
  std::vector<double> backward(const ForwardTrace& trace,
                               std::span<const double> output_grad) const {
    int h = spec_.hidden_dim;
    if (static_cast<int>(output_grad.size()) != spec_.output_dim)
      throw ContractViolation("QNetwork::backward output_grad size mismatch");
    if (static_cast<int>(trace.input.size()) != spec_.input_dim ||
        static_cast<int>(trace.block_in.size()) != spec_.residual_blocks ||
        static_cast<int>(trace.final_out.size()) != h)
      throw ContractViolation("QNetwork::backward trace does not match spec");

    std::vector<double> grad(total_, 0.0);

    // Head.
    std::vector<double> dfout(h, 0.0);
    for (int r = 0; r < spec_.output_dim; ++r) {
      double go = output_grad[r];
      grad[b_out_ + r] += go;
      std::size_t row = w_out_ + static_cast<std::size_t>(r) * h;
      for (int c = 0; c < h; ++c) {
        grad[row + c] += go * trace.final_out[c];
        dfout[c] += go * params_[row + c];
      }
    }

    // Final layer norm.
    std::vector<double> dstream(h);
    ln_backward(dfout, trace.final_zhat, trace.final_invstd, g_f_, o_f_, grad,
                dstream);

    // Residual blocks, in reverse.
    std::vector<double> dgin(h), dz(h), dprev(h);
    for (int k = spec_.residual_blocks - 1; k >= 0; --k) {
      for (int i = 0; i < h; ++i)
        dgin[i] = dstream[i] * gelu_grad(trace.block_gelu_in[k][i]);
      ln_backward(dgin, trace.block_zhat[k], trace.block_invstd[k], g_block_[k],
                  o_block_[k], grad, dz);
      std::fill(dprev.begin(), dprev.end(), 0.0);
      for (int r = 0; r < h; ++r) {
        grad[b_block_[k] + r] += dz[r];
        std::size_t row = w_block_[k] + static_cast<std::size_t>(r) * h;
        for (int c = 0; c < h; ++c) {
          grad[row + c] += dz[r] * trace.block_in[k][c];
          dprev[c] += dz[r] * params_[row + c];
        }
      }
      for (int i = 0; i < h; ++i) dstream[i] += dprev[i];  // skip path
    }

    // First layer norm and input linear.
    ln_backward(dstream, trace.ln_in_zhat, trace.ln_in_invstd, g_in_, o_in_,
                grad, dz);
    for (int r = 0; r < h; ++r) {
      grad[b_in_ + r] += dz[r];
      std::size_t row = w_in_ + static_cast<std::size_t>(r) * spec_.input_dim;
      for (int c = 0; c < spec_.input_dim; ++c)
        grad[row + c] += dz[r] * trace.input[c];
    }
    return grad;
  }

 private:
  void layout() {
    std::size_t h = spec_.hidden_dim;
    std::size_t off = 0;
    auto take = [&off](std::size_t n) {
      std::size_t o = off;
      off += n;
      return o;
    };
    w_in_ = take(h * spec_.input_dim);
    b_in_ = take(h);
    g_in_ = take(h);
    o_in_ = take(h);
    w_block_.resize(spec_.residual_blocks);
    b_block_.resize(spec_.residual_blocks);
    g_block_.resize(spec_.residual_blocks);
    o_block_.resize(spec_.residual_blocks);
    for (int k = 0; k < spec_.residual_blocks; ++k) {
      w_block_[k] = take(h * h);
      b_block_[k] = take(h);
      g_block_[k] = take(h);
      o_block_[k] = take(h);
    }
    g_f_ = take(h);
    o_f_ = take(h);
    w_out_ = take(static_cast<std::size_t>(spec_.output_dim) * h);
    b_out_ = take(spec_.output_dim);
    total_ = off;
  }

  void matvec(std::size_t w_off, int cols, std::span<const double> x,
              std::size_t b_off, std::vector<double>& out) const {
    int rows = static_cast<int>(out.size());
    for (int r = 0; r < rows; ++r) {
      double s = params_[b_off + r];
      std::size_t row = w_off + static_cast<std::size_t>(r) * cols;
      for (int c = 0; c < cols; ++c) s += params_[row + c] * x[c];
      out[r] = s;
    }
  }

  // Population statistics, epsilon inside the square root.
  static double normalize(const std::vector<double>& z, std::vector<double>& zhat) {
    int n = static_cast<int>(z.size());
    double mean = 0.0;
    for (double v : z) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= n;
    double invstd = 1.0 / std::sqrt(var + kLayerNormEps);
    for (int i = 0; i < n; ++i) zhat[i] = (z[i] - mean) * invstd;
    return invstd;
  }

  // Backward through affine + normalize. dout is the gradient at the LN
  // output; dz receives the gradient at the LN input.
  void ln_backward(const std::vector<double>& dout,
                   const std::vector<double>& zhat, double invstd,
                   std::size_t g_off, std::size_t o_off,
                   std::vector<double>& grad, std::vector<double>& dz) const {
    int n = static_cast<int>(dout.size());
    double mean_dzhat = 0.0, mean_dzhat_zhat = 0.0;
    for (int i = 0; i < n; ++i) {
      grad[g_off + i] += dout[i] * zhat[i];
      grad[o_off + i] += dout[i];
      double dzh = dout[i] * params_[g_off + i];
      dz[i] = dzh;  // reuse as scratch for dzhat
      mean_dzhat += dzh;
      mean_dzhat_zhat += dzh * zhat[i];
    }
    mean_dzhat /= n;
    mean_dzhat_zhat /= n;
    for (int i = 0; i < n; ++i)
      dz[i] = invstd * (dz[i] - mean_dzhat - zhat[i] * mean_dzhat_zhat);
  }

  NetworkSpec spec_;
  std::vector<double> params_;
  std::size_t w_in_ = 0, b_in_ = 0, g_in_ = 0, o_in_ = 0;
  std::vector<std::size_t> w_block_, b_block_, g_block_, o_block_;
  std::size_t g_f_ = 0, o_f_ = 0, w_out_ = 0, b_out_ = 0, total_ = 0;
};

}  // namespace caislab
