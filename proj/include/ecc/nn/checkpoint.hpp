#pragma once

#include <map>
#include <string>
#include <vector>

#include "ecc/nn/tensor.hpp"

namespace ecc::nn {

inline constexpr const char* kCheckpointFormat = "ecc-params";
inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// JSON document: {"format", "version", "meta", "tensors": [{name, shape, values}]}.
/// Doubles are written with round-trip precision.
std::string checkpoint_to_string(const std::vector<NamedParam>& params, const std::string& meta = "{}");
void save_checkpoint(const std::string& path, const std::vector<NamedParam>& params,
                     const std::string& meta = "{}");

/// Fills every named parameter from the checkpoint. Shapes must match exactly;
/// missing or extra tensors are errors. Returns the stored meta JSON text.
std::string checkpoint_from_string(const std::string& text, const std::vector<NamedParam>& params);
std::string load_checkpoint(const std::string& path, const std::vector<NamedParam>& params);

}  // namespace ecc::nn
