// types.hpp
// Dense Eigen aliases and the error type shared by every module.

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace facilitrans {

using Real = double;
using Complex = std::complex<Real>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using RVector = Vector<Real>;
using CVector = Vector<Complex>;
using RMatrix = Matrix<Real>;
using CMatrix = Matrix<Complex>;
using Vec3 = Eigen::Matrix<Real, 3, 1>;

enum class ErrorCode {
  ZeroVector,
  InvalidSites,
  NonHermitianInput,
  InvalidState,
  DimensionMismatch,
  ZeroDistance,
  InvalidGeometry,
  InvalidParams,
  UnreachableWaypoint,
  ToleranceNotMet,
  IndexOutOfRange,
  NonPositiveInput,
  ZeroCoupling,
  InvalidGrid,
  Config,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::InvalidSites: return "InvalidSites";
    case ErrorCode::NonHermitianInput: return "NonHermitianInput";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ZeroDistance: return "ZeroDistance";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::InvalidParams: return "InvalidParams";
    case ErrorCode::UnreachableWaypoint: return "UnreachableWaypoint";
    case ErrorCode::ToleranceNotMet: return "ToleranceNotMet";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::ZeroCoupling: return "ZeroCoupling";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::Config: return "Config";
  }
  return "Unknown";
}

}  // namespace facilitrans
