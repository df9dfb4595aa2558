#pragma once

#include "ecc/nn/tensor.hpp"

namespace ecc::nn {

enum class Activation { Identity, Relu };

struct DenseCache {
  Tensor2 input;
  Tensor2 output;
  bool valid = false;
};

struct DenseGrads {
  Tensor2 weight;
  Tensor2 bias;

  void zero_like(const Tensor2& w, const Tensor2& b) {
    weight = Tensor2::Zero(w.rows(), w.cols());
    bias = Tensor2::Zero(b.rows(), b.cols());
  }
};

/// y = act(x W + b), x is batch x in.
struct DenseLayer {
  Tensor2 weight;  // in x out
  Tensor2 bias;    // 1 x out
  Activation activation = Activation::Identity;

  /// He-uniform weights, zero bias.
  static DenseLayer create(int inputs, int outputs, Activation act, Rng& rng);

  int inputs() const { return static_cast<int>(weight.rows()); }
  int outputs() const { return static_cast<int>(weight.cols()); }

  Tensor2 forward(const Tensor2& x, DenseCache* cache = nullptr) const;
  /// Returns the input gradient; parameter gradients are accumulated into `grads`.
  Tensor2 backward(const DenseCache& cache, const Tensor2& grad_out, DenseGrads& grads) const;
};

}  // namespace ecc::nn
