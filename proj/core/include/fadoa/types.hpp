#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace fadoa {

inline constexpr const char* kVersion = "0.1.0";

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Invalid input, configuration or precondition failure. CLI exit code 2.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Numerical breakdown: degenerate spectrum, failed decomposition,
/// ill-posed bound. CLI exit code 3.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fadoa
