#include "ecc/nn/tensor.hpp"

#include <sstream>

namespace ecc::nn {

std::string shape_of(const Tensor2& t) {
  std::ostringstream os;
  os << t.rows() << 'x' << t.cols();
  return os.str();
}

void require_shape(const Tensor2& t, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if ((rows >= 0 && t.rows() != rows) || (cols >= 0 && t.cols() != cols)) {
    std::ostringstream os;
    os << what << ": expected " << (rows >= 0 ? std::to_string(rows) : std::string("*")) << 'x'
       << (cols >= 0 ? std::to_string(cols) : std::string("*")) << ", got " << shape_of(t);
    throw ShapeError(os.str());
  }
}

void require_finite(const Tensor2& t, const char* where) {
  if (!t.allFinite()) throw NonFiniteError(std::string("non-finite value in ") + where);
}

Tensor2 uniform_tensor(Eigen::Index rows, Eigen::Index cols, double limit, Rng& rng) {
  Tensor2 t(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) t(i, j) = uniform_real(rng, -limit, limit);
  return t;
}

}  // namespace ecc::nn
