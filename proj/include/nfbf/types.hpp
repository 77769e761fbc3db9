#ifndef NFBF_TYPES_HPP
#define NFBF_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace nfbf {

using cxd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using IMat = Eigen::MatrixXi;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = 3.141592653589793238462643383279502884;

/// Raised when an iteration produces a non-finite value or a geometric
/// quantity leaves its valid domain by more than the floating-point guard.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an exact/enumerative mode is requested on a problem too large
/// to enumerate.
struct CapacityError : std::runtime_error {
  explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised on invalid experiment configuration, before any computation runs.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when an output path cannot be created or written.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) {
  if (watt <= 0.0) throw std::invalid_argument("watt_to_dbm: power must be positive");
  return 10.0 * std::log10(watt) + 30.0;
}

}  // namespace nfbf

#endif
