#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nadvqe/error.hpp"
#include "nadvqe/io.hpp"

namespace nadvqe {

/// Linear map from knot values to spline second derivatives, not-a-knot ends.
inline Eigen::MatrixXd not_a_knot_moments(const std::vector<double>& x) {
  const Eigen::Index n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  if (n < 3) return s;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n), b = Eigen::MatrixXd::Zero(n, n);
  auto h = [&](Eigen::Index i) { return x[static_cast<std::size_t>(i + 1)] - x[static_cast<std::size_t>(i)]; };
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    a(i, i - 1) = h(i - 1);
    a(i, i) = 2.0 * (h(i - 1) + h(i));
    a(i, i + 1) = h(i);
    b(i, i - 1) = 6.0 / h(i - 1);
    b(i, i) = -6.0 / h(i - 1) - 6.0 / h(i);
    b(i, i + 1) = 6.0 / h(i);
  }
  if (n == 3) {
    // Both end conditions coincide: the spline is the interpolating parabola.
    a(0, 0) = 1.0, a(0, 1) = -1.0;
    a(2, 1) = 1.0, a(2, 2) = -1.0;
  } else {
    a(0, 0) = h(1), a(0, 1) = -(h(0) + h(1)), a(0, 2) = h(0);
    a(n - 1, n - 3) = h(n - 2), a(n - 1, n - 2) = -(h(n - 3) + h(n - 2)), a(n - 1, n - 1) = h(n - 3);
  }
  s = a.partialPivLu().solve(b);
  return s;
}

/// Row q of the result holds the weights that evaluate the not-a-knot cubic
/// spline through (x, y) at xq[q] as a dot product with y.
inline Eigen::MatrixXd spline_weights(const std::vector<double>& x, const std::vector<double>& xq) {
  const std::size_t n = x.size();
  if (n == 0) throw Error(ErrorKind::dimension, "spline needs at least one knot");
  for (std::size_t k = 1; k < n; ++k)
    if (!(x[k] > x[k - 1])) throw Error(ErrorKind::schema, "spline knots must be strictly increasing");
  const double span = n > 1 ? x.back() - x.front() : 1.0;
  const double tol = 1e-9 * std::max(1.0, span);
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(xq.size()), static_cast<Eigen::Index>(n));
  const Eigen::MatrixXd s = not_a_knot_moments(x);
  for (std::size_t q = 0; q < xq.size(); ++q) {
    const double v = xq[q];
    if (v < x.front() - tol || v > x.back() + tol)
      throw Error(ErrorKind::extrapolation, "point " + format_real(v) + " outside knot range [" +
                                                format_real(x.front()) + ", " + format_real(x.back()) + "]");
    const auto row = static_cast<Eigen::Index>(q);
    if (n == 1) {
      w(row, 0) = 1.0;
      continue;
    }
    std::size_t k = 0;
    while (k + 2 < n && v > x[k + 1]) ++k;
    const double h = x[k + 1] - x[k];
    const double a = (x[k + 1] - v) / h, b = 1.0 - a;
    const auto kk = static_cast<Eigen::Index>(k);
    w(row, kk) += a;
    w(row, kk + 1) += b;
    const double ca = (a * a * a - a) * h * h / 6.0, cb = (b * b * b - b) * h * h / 6.0;
    if (ca != 0.0) w.row(row) += ca * s.row(kk);
    if (cb != 0.0) w.row(row) += cb * s.row(kk + 1);
  }
  return w;
}

/// Tensor-product bicubic spline of a row-major (x-major) field.
struct Bicubic {
  Eigen::MatrixXd wx, wy;

  Bicubic(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& xq,
          const std::vector<double>& yq)
      : wx(spline_weights(x, xq)), wy(spline_weights(y, yq)) {}

  std::vector<double> apply(const std::vector<double>& field) const {
    const Eigen::Index nx = wx.cols(), ny = wy.cols();
    if (static_cast<Eigen::Index>(field.size()) != nx * ny)
      throw Error(ErrorKind::dimension, "field size does not match the spline axes");
    const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> c(
        field.data(), nx, ny);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> f = wx * c * wy.transpose();
    return std::vector<double>(f.data(), f.data() + f.size());
  }
};

}  // namespace nadvqe
