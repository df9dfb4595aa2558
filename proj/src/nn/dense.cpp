#include "ecc/nn/dense.hpp"

#include <cmath>

namespace ecc::nn {

DenseLayer DenseLayer::create(int inputs, int outputs, Activation act, Rng& rng) {
  DenseLayer l;
  const double limit = std::sqrt(6.0 / inputs);
  l.weight = uniform_tensor(inputs, outputs, act == Activation::Relu ? limit : limit / std::sqrt(2.0), rng);
  l.bias = Tensor2::Zero(1, outputs);
  l.activation = act;
  return l;
}

Tensor2 DenseLayer::forward(const Tensor2& x, DenseCache* cache) const {
  require_shape(x, -1, inputs(), "dense input");
  require_finite(x, "dense input");
  Tensor2 y = x * weight;
  y.rowwise() += bias.row(0);
  if (activation == Activation::Relu) y = y.cwiseMax(0.0);
  require_finite(y, "dense output");
  if (cache) {
    cache->input = x;
    cache->output = y;
    cache->valid = true;
  }
  return y;
}

Tensor2 DenseLayer::backward(const DenseCache& cache, const Tensor2& grad_out, DenseGrads& grads) const {
  if (!cache.valid) throw std::logic_error("dense backward without a forward cache");
  require_shape(grad_out, cache.output.rows(), outputs(), "dense upstream gradient");
  require_finite(grad_out, "dense upstream gradient");
  Tensor2 g = grad_out;
  if (activation == Activation::Relu) g = (cache.output.array() > 0.0).select(g, 0.0);
  if (grads.weight.size() == 0) grads.zero_like(weight, bias);
  grads.weight.noalias() += cache.input.transpose() * g;
  grads.bias += g.colwise().sum();
  return g * weight.transpose();
}

}  // namespace ecc::nn
