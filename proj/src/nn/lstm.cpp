#include "ecc/nn/lstm.hpp"

#include <cmath>

namespace ecc::nn {

namespace {

Tensor2 sigmoid(const Tensor2& z) { return (1.0 / (1.0 + (-z.array()).exp())).matrix(); }

}  // namespace

LstmCell LstmCell::create(int inputs, int hidden, Rng& rng) {
  LstmCell c;
  const double limit = 1.0 / std::sqrt(static_cast<double>(hidden));
  c.wx = uniform_tensor(inputs, 4 * hidden, limit, rng);
  c.wh = uniform_tensor(hidden, 4 * hidden, limit, rng);
  c.bias = Tensor2::Zero(1, 4 * hidden);
  // Forget gate starts open so early training keeps the cell state.
  c.bias.middleCols(kForget * hidden, hidden).setConstant(1.0);
  return c;
}

void LstmCell::step(const Tensor2& x, const Tensor2& h, const Tensor2& c, Tensor2& h_out, Tensor2& c_out,
                    LstmStepCache* cache) const {
  const int H = hidden();
  require_shape(x, -1, inputs(), "lstm input");
  require_shape(h, x.rows(), H, "lstm hidden state");
  require_shape(c, x.rows(), H, "lstm cell state");
  require_finite(x, "lstm input");

  Tensor2 z = x * wx + h * wh;
  z.rowwise() += bias.row(0);
  Tensor2 i = sigmoid(z.middleCols(kInput * H, H));
  Tensor2 f = sigmoid(z.middleCols(kForget * H, H));
  Tensor2 g = z.middleCols(kCell * H, H).array().tanh().matrix();
  Tensor2 o = sigmoid(z.middleCols(kOutput * H, H));
  c_out = (f.array() * c.array() + i.array() * g.array()).matrix();
  Tensor2 tanh_c = c_out.array().tanh().matrix();
  h_out = (o.array() * tanh_c.array()).matrix();
  require_finite(h_out, "lstm output");
  if (cache) {
    cache->x = x;
    cache->h_prev = h;
    cache->c_prev = c;
    cache->i = std::move(i);
    cache->f = std::move(f);
    cache->g = std::move(g);
    cache->o = std::move(o);
    cache->c = c_out;
    cache->tanh_c = std::move(tanh_c);
  }
}

void LstmCell::step_backward(const LstmStepCache& k, const Tensor2& dh, const Tensor2& dc, LstmGrads& grads,
                             Tensor2& dx, Tensor2& dh_prev, Tensor2& dc_prev) const {
  const int H = hidden();
  if (grads.wx.size() == 0) {
    grads.wx = Tensor2::Zero(wx.rows(), wx.cols());
    grads.wh = Tensor2::Zero(wh.rows(), wh.cols());
    grads.bias = Tensor2::Zero(1, bias.cols());
  }
  const auto o = k.o.array();
  const auto i = k.i.array();
  const auto f = k.f.array();
  const auto g = k.g.array();
  const auto tc = k.tanh_c.array();

  Tensor2 dct = (dc.array() + dh.array() * o * (1.0 - tc * tc)).matrix();
  Tensor2 dz(k.x.rows(), 4 * H);
  dz.middleCols(kInput * H, H) = (dct.array() * g * i * (1.0 - i)).matrix();
  dz.middleCols(kForget * H, H) = (dct.array() * k.c_prev.array() * f * (1.0 - f)).matrix();
  dz.middleCols(kCell * H, H) = (dct.array() * i * (1.0 - g * g)).matrix();
  dz.middleCols(kOutput * H, H) = (dh.array() * tc * o * (1.0 - o)).matrix();

  grads.wx.noalias() += k.x.transpose() * dz;
  grads.wh.noalias() += k.h_prev.transpose() * dz;
  grads.bias += dz.colwise().sum();
  dx = dz * wx.transpose();
  dh_prev = dz * wh.transpose();
  dc_prev = (dct.array() * f).matrix();
}

Tensor2 LstmCell::forward_sequence(const std::vector<Tensor2>& xs, LstmSequenceCache* cache) const {
  if (xs.empty()) throw ShapeError("lstm sequence is empty");
  const auto batch = xs.front().rows();
  Tensor2 h = Tensor2::Zero(batch, hidden());
  Tensor2 c = Tensor2::Zero(batch, hidden());
  if (cache) {
    cache->steps.assign(xs.size(), {});
    cache->valid = true;
  }
  for (std::size_t s = 0; s < xs.size(); ++s) {
    Tensor2 h2, c2;
    step(xs[s], h, c, h2, c2, cache ? &cache->steps[s] : nullptr);
    h = std::move(h2);
    c = std::move(c2);
  }
  return h;
}

std::vector<Tensor2> LstmCell::backward_sequence(const LstmSequenceCache& cache, const Tensor2& dh_last,
                                                 LstmGrads& grads) const {
  if (!cache.valid) throw std::logic_error("lstm backward without a forward cache");
  std::vector<Tensor2> dxs(cache.steps.size());
  Tensor2 dh = dh_last;
  Tensor2 dc = Tensor2::Zero(dh_last.rows(), hidden());
  for (std::size_t s = cache.steps.size(); s-- > 0;) {
    Tensor2 dh_prev, dc_prev;
    step_backward(cache.steps[s], dh, dc, grads, dxs[s], dh_prev, dc_prev);
    dh = std::move(dh_prev);
    dc = std::move(dc_prev);
  }
  return dxs;
}

}  // namespace ecc::nn
