#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace ifspec {

using cplx = std::complex<double>;
using CVector = std::vector<cplx>;
using RVector = std::vector<double>;

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kPi = std::numbers::pi;

// ps/(nm km) -> s/m^2
inline constexpr double kPsPerNmKm = 1e-6;

/// Invalid input or unsupported configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical grid or truncation check failed (tail energy, aliasing, overflow).
class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A model-validity diagnostic (negative PSD, inconsistent inputs).
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An iterative procedure did not meet its stopping rule.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double to_db(double x) { return 10.0 * std::log10(x); }

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

}  // namespace ifspec
