#pragma once

#include <span>
#include <vector>

#include "ecc/nn/tensor.hpp"

namespace ecc::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Bias-corrected Adam. Moments are created on the first step and must keep
/// the shapes of the parameters they were created for.
class Adam {
 public:
  Adam() = default;
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(std::span<Tensor2* const> params, std::span<const Tensor2* const> grads);

  long steps() const { return t_; }
  const AdamConfig& config() const { return cfg_; }
  const std::vector<Tensor2>& first_moments() const { return m_; }
  const std::vector<Tensor2>& second_moments() const { return v_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<Tensor2> m_, v_;
};

}  // namespace ecc::nn
