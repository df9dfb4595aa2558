#pragma once

// LSTM load predictor. Input is a W x D window of loads (oldest row first),
// output is the D loads `lead` slots past the newest row. Inputs are divided
// by `scale` before the LSTM and outputs multiplied back and clamped to
// [0, scale].

#include <cstdint>
#include <memory>
#include <vector>

#include "ecc/environment.hpp"
#include "ecc/nn/dense.hpp"
#include "ecc/nn/lstm.hpp"
#include "ecc/telemetry.hpp"

namespace ecc {

/// One multivariate series: trace[time][dim].
using Trace = std::vector<std::vector<double>>;

struct ForecasterNetwork {
  int dims = 0;
  int window = 0;
  double scale = 1.0;
  nn::LstmCell lstm;
  nn::DenseLayer readout;

  ForecasterNetwork() = default;
  ForecasterNetwork(int dims, int window, int hidden, double scale, std::uint64_t seed);

  /// `window_rows` is window x dims, row-major.
  std::vector<double> predict(const std::vector<double>& window_rows) const;
  std::vector<double> predict(const LoadMatrix& loads) const;

  /// Raw (unclamped, normalized) outputs for a batch; one tensor per time step.
  nn::Tensor2 forward(const std::vector<nn::Tensor2>& steps, nn::LstmSequenceCache* lstm_cache,
                      nn::DenseCache* readout_cache) const;

  std::vector<nn::NamedParam> parameters();
};

struct ForecastTraining {
  int epochs = 30;
  int batch = 32;
  double lr = 5e-3;
  int lead = 1;
  std::uint64_t seed = 7;
};

struct ForecastReport {
  std::vector<double> epoch_mse;  // training MSE per epoch, in load units
};

class ForecastError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Supervised fit on every (window, target) pair of every trace.
ForecastReport train_forecaster(ForecasterNetwork& net, const std::vector<Trace>& traces,
                                const ForecastTraining& opt);

/// Mean squared error over every pair of every trace for a given predictor.
double forecast_mse(const ForecasterNetwork& net, const std::vector<Trace>& traces, int lead);
/// Same, predicting the newest row of the window.
double persistence_mse(const std::vector<Trace>& traces, int window, int lead);
/// Same, predicting the per-dimension mean of the training traces.
double mean_predictor_mse(const std::vector<Trace>& train, const std::vector<Trace>& test, int window,
                          int lead);

enum class ForecastMode { Lstm, None, Oracle };

const char* to_string(ForecastMode m);

/// What the agents see as the next-slot load vector (N+1 entries).
class LoadForecast {
 public:
  LoadForecast() = default;
  static LoadForecast none(int nodes);
  static LoadForecast oracle(int nodes);
  static LoadForecast lstm(std::shared_ptr<const ForecasterNetwork> net);

  ForecastMode mode() const { return mode_; }
  const ForecasterNetwork* network() const { return net_.get(); }

  std::vector<double> next_loads(const Telemetry& telemetry, const Environment& env) const;

 private:
  ForecastMode mode_ = ForecastMode::None;
  int nodes_ = 0;
  std::shared_ptr<const ForecasterNetwork> net_;
};

}  // namespace ecc
