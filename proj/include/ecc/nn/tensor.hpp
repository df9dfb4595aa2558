#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecc/random.hpp"

namespace ecc::nn {

/// Row-major matrix of doubles. Batches are rows.
using Tensor2 = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

std::string shape_of(const Tensor2& t);
void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what);
void require_finite(const Tensor2& t, const char* where);

Tensor2 uniform_tensor(Eigen::Index rows, Eigen::Index cols, double limit, Rng& rng);

/// A parameter tensor paired with a stable name, for checkpoints and optimizers.
struct NamedParam {
  std::string name;
  Tensor2* value;
};

}  // namespace ecc::nn
