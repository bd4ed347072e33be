#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "nadvqe/error.hpp"

namespace nadvqe {

/// Uniform (r, theta) grid; spacings follow from range and count.
struct GridSpec {
  std::size_t n_r = 64, n_theta = 64;
  double r_min = 0.9449, r_max = 3.7352;
  double theta_min = 0.5236, theta_max = 3.1007;

  std::size_t size() const { return n_r * n_theta; }
  double dr() const { return (r_max - r_min) / static_cast<double>(n_r - 1); }
  double dtheta() const { return (theta_max - theta_min) / static_cast<double>(n_theta - 1); }
  double r(std::size_t i) const { return r_min + static_cast<double>(i) * dr(); }
  double theta(std::size_t j) const { return theta_min + static_cast<double>(j) * dtheta(); }
  std::size_t index(std::size_t i, std::size_t j) const { return i * n_theta + j; }

  std::vector<double> r_axis() const {
    std::vector<double> v(n_r);
    for (std::size_t i = 0; i < n_r; ++i) v[i] = r(i);
    return v;
  }
  std::vector<double> theta_axis() const {
    std::vector<double> v(n_theta);
    for (std::size_t j = 0; j < n_theta; ++j) v[j] = theta(j);
    return v;
  }

  void validate() const {
    if (n_r < 3 || n_theta < 3) throw Error(ErrorKind::schema, "grid needs at least 3 points per axis");
    if (!(r_max > r_min) || !(theta_max > theta_min)) throw Error(ErrorKind::schema, "grid ranges must be increasing");
    if (!(r_min > 0.0)) throw Error(ErrorKind::schema, "r_min must be > 0");
  }

  bool operator==(const GridSpec&) const = default;
};

/// Declared spacings are printed values, so they are checked against
/// range/(N-1) to half a unit in their fourth decimal.
inline constexpr double spacing_tolerance = 5e-5;

inline std::string spacing_mismatch(const char* name, double declared, double expected) {
  if (std::abs(declared - expected) <= spacing_tolerance) return {};
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s = %.6g inconsistent with range/(N-1): expected %.4f", name, declared, expected);
  return buf;
}

}  // namespace nadvqe
