#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace etc {

using Index = Eigen::Index;

/// Cell-centered vector, one entry per voxel in x-fastest order.
template <typename Scalar>
using CellVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using DenseMatrix = Eigen::MatrixXd;

enum class Precision { F64, F32 };

inline const char* to_string(Precision p) { return p == Precision::F64 ? "f64" : "f32"; }

template <typename Scalar>
constexpr Precision precision_of() {
  return sizeof(Scalar) == sizeof(double) ? Precision::F64 : Precision::F32;
}

/// Violated precondition on an argument (index out of range, length mismatch, ...).
class ContractError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Invalid user-facing configuration (generator parameters, boundary data, flags).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace etc
