#include "ecc/nn/adam.hpp"

#include <cmath>

namespace ecc::nn {

void Adam::step(std::span<Tensor2* const> params, std::span<const Tensor2* const> grads) {
  if (params.size() != grads.size()) throw ShapeError("adam: parameter/gradient count mismatch");
  if (m_.empty()) {
    for (const Tensor2* p : params) {
      m_.push_back(Tensor2::Zero(p->rows(), p->cols()));
      v_.push_back(Tensor2::Zero(p->rows(), p->cols()));
    }
  }
  if (m_.size() != params.size()) throw ShapeError("adam: parameter count changed");
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor2& p = *params[i];
    const Tensor2& g = *grads[i];
    require_shape(g, p.rows(), p.cols(), "adam gradient");
    require_shape(m_[i], p.rows(), p.cols(), "adam moment");
    require_finite(g, "adam gradient");
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * g;
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * g.cwiseProduct(g);
    p.array() -= cfg_.lr * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + cfg_.eps);
  }
}

}  // namespace ecc::nn
