#pragma once

#include <vector>

#include "ecc/nn/tensor.hpp"

namespace ecc::nn {

/// Gate column blocks inside the fused weight matrices, each `hidden` wide.
enum Gate : int { kInput = 0, kForget = 1, kCell = 2, kOutput = 3 };

struct LstmGrads {
  Tensor2 wx, wh, bias;
};

struct LstmStepCache {
  Tensor2 x, h_prev, c_prev;
  Tensor2 i, f, g, o;  // post-activation gates
  Tensor2 c, tanh_c;
};

struct LstmSequenceCache {
  std::vector<LstmStepCache> steps;
  bool valid = false;
};

/// Standard LSTM cell:
///   i = sigma(x Wx_i + h Wh_i + b_i)   f, o likewise
///   g = tanh(x Wx_g + h Wh_g + b_g)
///   c' = f*c + i*g,  h' = o*tanh(c')
struct LstmCell {
  Tensor2 wx;    // in x 4H
  Tensor2 wh;    // H x 4H
  Tensor2 bias;  // 1 x 4H

  static LstmCell create(int inputs, int hidden, Rng& rng);

  int inputs() const { return static_cast<int>(wx.rows()); }
  int hidden() const { return static_cast<int>(wh.rows()); }

  void step(const Tensor2& x, const Tensor2& h, const Tensor2& c, Tensor2& h_out, Tensor2& c_out,
            LstmStepCache* cache = nullptr) const;

  /// Backpropagates one step. `dh`/`dc` are gradients w.r.t. this step's
  /// outputs; parameter gradients accumulate into `grads`.
  void step_backward(const LstmStepCache& cache, const Tensor2& dh, const Tensor2& dc, LstmGrads& grads,
                     Tensor2& dx, Tensor2& dh_prev, Tensor2& dc_prev) const;

  /// Runs the sequence from zero state and returns the final hidden state.
  Tensor2 forward_sequence(const std::vector<Tensor2>& xs, LstmSequenceCache* cache = nullptr) const;
  /// Backpropagation through time from a gradient on the final hidden state.
  std::vector<Tensor2> backward_sequence(const LstmSequenceCache& cache, const Tensor2& dh_last,
                                         LstmGrads& grads) const;
};

}  // namespace ecc::nn
