#include "ecc/forecaster.hpp"

#include <algorithm>
#include <numeric>

#include "ecc/nn/adam.hpp"

namespace ecc {

using nn::Tensor2;

ForecasterNetwork::ForecasterNetwork(int dims_, int window_, int hidden, double scale_, std::uint64_t seed)
    : dims(dims_), window(window_), scale(scale_) {
  if (dims <= 0 || window <= 0 || hidden <= 0) throw ForecastError("forecaster sizes must be positive");
  if (!(scale > 0.0)) throw ForecastError("forecaster scale must be positive");
  Rng rng(seed);
  lstm = nn::LstmCell::create(dims, hidden, rng);
  readout = nn::DenseLayer::create(hidden, dims, nn::Activation::Identity, rng);
}

Tensor2 ForecasterNetwork::forward(const std::vector<Tensor2>& steps, nn::LstmSequenceCache* lstm_cache,
                                   nn::DenseCache* readout_cache) const {
  if (static_cast<int>(steps.size()) != window) throw ForecastError("window length mismatch");
  const Tensor2 h = lstm.forward_sequence(steps, lstm_cache);
  return readout.forward(h, readout_cache);
}

std::vector<double> ForecasterNetwork::predict(const std::vector<double>& rows) const {
  if (static_cast<int>(rows.size()) != window * dims) throw ForecastError("window has wrong size");
  std::vector<Tensor2> steps;
  steps.reserve(window);
  for (int r = 0; r < window; ++r) {
    Tensor2 x(1, dims);
    for (int d = 0; d < dims; ++d) x(0, d) = rows[r * dims + d] / scale;
    steps.push_back(std::move(x));
  }
  const Tensor2 y = forward(steps, nullptr, nullptr);
  std::vector<double> out(dims);
  for (int d = 0; d < dims; ++d) out[d] = std::clamp(y(0, d) * scale, 0.0, scale);
  return out;
}

std::vector<double> ForecasterNetwork::predict(const LoadMatrix& loads) const {
  if (loads.window() != window || loads.nodes() != dims) throw ForecastError("load matrix shape mismatch");
  std::vector<double> rows(loads.data().begin(), loads.data().end());
  return predict(rows);
}

std::vector<nn::NamedParam> ForecasterNetwork::parameters() {
  return {{"lstm.wx", &lstm.wx},
          {"lstm.wh", &lstm.wh},
          {"lstm.bias", &lstm.bias},
          {"readout.weight", &readout.weight},
          {"readout.bias", &readout.bias}};
}

namespace {

struct Pair {
  const Trace* trace;
  int start;
};

std::vector<Pair> pairs_of(const std::vector<Trace>& traces, int window, int lead, int dims) {
  if (lead < 1) throw ForecastError("lead must be at least 1");
  std::vector<Pair> out;
  for (const Trace& tr : traces) {
    for (const auto& row : tr)
      if (static_cast<int>(row.size()) != dims) throw ForecastError("trace row has wrong width");
    const int n = static_cast<int>(tr.size());
    for (int s = 0; s + window - 1 + lead < n; ++s) out.push_back({&tr, s});
  }
  if (out.empty()) throw ForecastError("traces too short for the window and lead");
  return out;
}

int trace_dims(const std::vector<Trace>& traces) {
  for (const Trace& tr : traces)
    if (!tr.empty()) return static_cast<int>(tr.front().size());
  throw ForecastError("no trace data");
}

}  // namespace

ForecastReport train_forecaster(ForecasterNetwork& net, const std::vector<Trace>& traces,
                                const ForecastTraining& opt) {
  if (opt.epochs < 0 || opt.batch <= 0) throw ForecastError("bad training schedule");
  std::vector<Pair> pairs = pairs_of(traces, net.window, opt.lead, net.dims);
  nn::Adam adam(nn::AdamConfig{opt.lr, 0.9, 0.999, 1e-8});
  Rng rng(opt.seed);
  ForecastReport report;

  auto params = net.parameters();
  std::vector<Tensor2*> pptr;
  for (auto& p : params) pptr.push_back(p.value);

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[uniform_index(rng, i)]);
    double sq = 0.0;
    for (std::size_t b0 = 0; b0 < pairs.size(); b0 += opt.batch) {
      const int bs = static_cast<int>(std::min<std::size_t>(opt.batch, pairs.size() - b0));
      std::vector<Tensor2> steps(net.window, Tensor2(bs, net.dims));
      Tensor2 target(bs, net.dims);
      for (int b = 0; b < bs; ++b) {
        const Pair& p = pairs[b0 + b];
        for (int r = 0; r < net.window; ++r)
          for (int d = 0; d < net.dims; ++d) steps[r](b, d) = (*p.trace)[p.start + r][d] / net.scale;
        const auto& tgt = (*p.trace)[p.start + net.window - 1 + opt.lead];
        for (int d = 0; d < net.dims; ++d) target(b, d) = tgt[d] / net.scale;
      }
      nn::LstmSequenceCache lc;
      nn::DenseCache dc;
      const Tensor2 y = net.forward(steps, &lc, &dc);
      const Tensor2 diff = y - target;
      sq += diff.squaredNorm();
      // loss = mean over batch and dims of diff^2
      const Tensor2 grad = diff * (2.0 / (static_cast<double>(bs) * net.dims));

      nn::DenseGrads dg;
      dg.zero_like(net.readout.weight, net.readout.bias);
      const Tensor2 dh = net.readout.backward(dc, grad, dg);
      nn::LstmGrads lg{Tensor2::Zero(net.lstm.wx.rows(), net.lstm.wx.cols()),
                       Tensor2::Zero(net.lstm.wh.rows(), net.lstm.wh.cols()),
                       Tensor2::Zero(1, net.lstm.bias.cols())};
      net.lstm.backward_sequence(lc, dh, lg);
      const Tensor2* gptr[] = {&lg.wx, &lg.wh, &lg.bias, &dg.weight, &dg.bias};
      adam.step(pptr, gptr);
    }
    report.epoch_mse.push_back(sq * net.scale * net.scale /
                               (static_cast<double>(pairs.size()) * net.dims));
  }
  return report;
}

double forecast_mse(const ForecasterNetwork& net, const std::vector<Trace>& traces, int lead) {
  const auto pairs = pairs_of(traces, net.window, lead, net.dims);
  double sq = 0.0;
  std::vector<double> rows(static_cast<std::size_t>(net.window) * net.dims);
  for (const Pair& p : pairs) {
    for (int r = 0; r < net.window; ++r)
      for (int d = 0; d < net.dims; ++d) rows[r * net.dims + d] = (*p.trace)[p.start + r][d];
    const auto y = net.predict(rows);
    const auto& tgt = (*p.trace)[p.start + net.window - 1 + lead];
    for (int d = 0; d < net.dims; ++d) sq += (y[d] - tgt[d]) * (y[d] - tgt[d]);
  }
  return sq / (static_cast<double>(pairs.size()) * net.dims);
}

double persistence_mse(const std::vector<Trace>& traces, int window, int lead) {
  const int dims = trace_dims(traces);
  const auto pairs = pairs_of(traces, window, lead, dims);
  double sq = 0.0;
  for (const Pair& p : pairs) {
    const auto& last = (*p.trace)[p.start + window - 1];
    const auto& tgt = (*p.trace)[p.start + window - 1 + lead];
    for (int d = 0; d < dims; ++d) sq += (last[d] - tgt[d]) * (last[d] - tgt[d]);
  }
  return sq / (static_cast<double>(pairs.size()) * dims);
}

double mean_predictor_mse(const std::vector<Trace>& train, const std::vector<Trace>& test, int window,
                          int lead) {
  const int dims = trace_dims(train);
  std::vector<double> mean(dims, 0.0);
  long count = 0;
  for (const Trace& tr : train)
    for (const auto& row : tr) {
      for (int d = 0; d < dims; ++d) mean[d] += row[d];
      ++count;
    }
  for (double& m : mean) m /= static_cast<double>(count);
  const auto pairs = pairs_of(test, window, lead, dims);
  double sq = 0.0;
  for (const Pair& p : pairs) {
    const auto& tgt = (*p.trace)[p.start + window - 1 + lead];
    for (int d = 0; d < dims; ++d) sq += (mean[d] - tgt[d]) * (mean[d] - tgt[d]);
  }
  return sq / (static_cast<double>(pairs.size()) * dims);
}

const char* to_string(ForecastMode m) {
  switch (m) {
    case ForecastMode::Lstm: return "lstm";
    case ForecastMode::None: return "none";
    case ForecastMode::Oracle: return "oracle";
  }
  return "?";
}

LoadForecast LoadForecast::none(int nodes) {
  LoadForecast f;
  f.mode_ = ForecastMode::None;
  f.nodes_ = nodes;
  return f;
}

LoadForecast LoadForecast::oracle(int nodes) {
  LoadForecast f;
  f.mode_ = ForecastMode::Oracle;
  f.nodes_ = nodes;
  return f;
}

LoadForecast LoadForecast::lstm(std::shared_ptr<const ForecasterNetwork> net) {
  if (!net) throw ForecastError("null forecaster");
  LoadForecast f;
  f.mode_ = ForecastMode::Lstm;
  f.nodes_ = net->dims;
  f.net_ = std::move(net);
  return f;
}

std::vector<double> LoadForecast::next_loads(const Telemetry& telemetry, const Environment& env) const {
  switch (mode_) {
    case ForecastMode::Lstm: return net_->predict(telemetry.loads());
    case ForecastMode::Oracle: {
      const auto a = env.lookahead_active();
      return std::vector<double>(a.begin(), a.end());
    }
    case ForecastMode::None: break;
  }
  return std::vector<double>(nodes_, 0.0);
}

}  // namespace ecc
