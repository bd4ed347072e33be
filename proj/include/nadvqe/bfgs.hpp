#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

namespace nadvqe {

struct BfgsOptions {
  double gradient_tolerance = 1e-7;
  std::size_t max_iterations = 500;
  double initial_step = 0.05;
  double line_tolerance = 0.1;
  /// Hessian resets allowed when the line search stalls before convergence.
  std::size_t max_resets = 8;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
};

using Objective = std::function<double(std::span<const double>)>;
using Gradient = std::function<void(std::span<const double>, std::span<double>)>;

/// Central-difference gradient of f with step h.
inline void central_difference_gradient(const Objective& f, std::span<const double> x, double h,
                                        std::span<double> g) {
  std::vector<double> probe(x.begin(), x.end());
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double fp = f(probe);
    probe[i] = x[i] - h;
    const double fm = f(probe);
    probe[i] = x[i];
    g[i] = (fp - fm) / (2.0 * h);
  }
}

namespace detail {

struct GslProblem {
  const Objective* f;
  const Gradient* g;
  std::size_t evaluations = 0;
};

inline double gsl_f(const gsl_vector* v, void* p) {
  auto* prob = static_cast<GslProblem*>(p);
  ++prob->evaluations;
  return (*prob->f)(std::span<const double>(v->data, v->size));
}

inline void gsl_df(const gsl_vector* v, void* p, gsl_vector* out) {
  auto* prob = static_cast<GslProblem*>(p);
  (*prob->g)(std::span<const double>(v->data, v->size), std::span<double>(out->data, out->size));
}

inline void gsl_fdf(const gsl_vector* v, void* p, double* f, gsl_vector* out) {
  *f = gsl_f(v, p);
  gsl_df(v, p, out);
}

inline double norm2(const gsl_vector* g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g->size; ++i) s += g->data[i] * g->data[i];
  return std::sqrt(s);
}

/// Newton steps on a finite-difference Hessian, used once the line search can
/// no longer resolve progress. Eigenvalues are taken in absolute value and
/// near-null directions (redundant angles) are dropped.
inline void newton_polish(const Objective& f, const Gradient& grad, std::vector<double>& x, double& value,
                          double& gnorm, double tol, std::size_t& evaluations) {
  const std::size_t n = x.size();
  const double eps = 1e-3;
  Eigen::VectorXd g(n), gp(n), gm(n);
  grad(x, std::span<double>(g.data(), n));
  for (int it = 0; it < 6 && g.norm() > tol; ++it) {
    Eigen::MatrixXd hess(n, n);
    std::vector<double> probe = x;
    for (std::size_t j = 0; j < n; ++j) {
      probe[j] = x[j] + eps;
      grad(probe, std::span<double>(gp.data(), n));
      probe[j] = x[j] - eps;
      grad(probe, std::span<double>(gm.data(), n));
      probe[j] = x[j];
      hess.col(static_cast<Eigen::Index>(j)) = (gp - gm) / (2.0 * eps);
    }
    hess = 0.5 * (hess + hess.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(hess);
    const Eigen::VectorXd lam = es.eigenvalues();
    const double cut = 1e-6 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    Eigen::VectorXd coeff = es.eigenvectors().transpose() * g;
    for (Eigen::Index k = 0; k < coeff.size(); ++k) coeff[k] = std::abs(lam[k]) > cut ? coeff[k] / std::abs(lam[k]) : 0.0;
    const Eigen::VectorXd dx = -(es.eigenvectors() * coeff);
    std::vector<double> trial(n);
    Eigen::VectorXd gt(n);
    bool accepted = false;
    for (double a = 1.0; a > 1e-3 && !accepted; a *= 0.5) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = x[i] + a * dx[static_cast<Eigen::Index>(i)];
      const double ft = f(trial);
      ++evaluations;
      grad(trial, std::span<double>(gt.data(), n));
      if (gt.norm() < g.norm() && ft <= value + 1e-10 * std::max(1.0, std::abs(value))) {
        x = trial;
        value = ft;
        g = gt;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  gnorm = g.norm();
}

}  // namespace detail

/// Quasi-Newton minimization (GSL vector_bfgs2 with Moré–Thuente-style line
/// search). Converged means ||grad|| <= gradient_tolerance.
inline BfgsResult minimize_bfgs(const Objective& f, const Gradient& grad, std::vector<double> x0,
                                const BfgsOptions& opt = {}) {
  gsl_set_error_handler_off();
  const std::size_t n = x0.size();
  BfgsResult res;
  res.x = x0;
  if (n == 0) {
    res.value = f(res.x);
    res.converged = true;
    return res;
  }

  detail::GslProblem prob{&f, &grad};
  gsl_multimin_function_fdf fn;
  fn.n = n;
  fn.f = detail::gsl_f;
  fn.df = detail::gsl_df;
  fn.fdf = detail::gsl_fdf;
  fn.params = &prob;

  gsl_vector* x = gsl_vector_alloc(n);
  gsl_multimin_fdfminimizer* s =
      gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, n);

  std::size_t resets = 0;
  double step = opt.initial_step;
  while (true) {
    for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, res.x[i]);
    gsl_multimin_fdfminimizer_set(s, &fn, x, step, opt.line_tolerance);
    res.gradient_norm = detail::norm2(s->gradient);
    bool stalled = false;
    while (res.gradient_norm > opt.gradient_tolerance && res.iterations < opt.max_iterations) {
      const int status = gsl_multimin_fdfminimizer_iterate(s);
      ++res.iterations;
      res.gradient_norm = detail::norm2(s->gradient);
      if (status != GSL_SUCCESS) {
        stalled = true;
        break;
      }
    }
    for (std::size_t i = 0; i < n; ++i) res.x[i] = gsl_vector_get(s->x, i);
    res.value = s->f;
    if (stalled && res.gradient_norm > opt.gradient_tolerance)
      detail::newton_polish(f, grad, res.x, res.value, res.gradient_norm, opt.gradient_tolerance,
                            prob.evaluations);
    if (res.gradient_norm <= opt.gradient_tolerance || res.iterations >= opt.max_iterations ||
        !stalled || resets >= opt.max_resets)
      break;
    ++resets;
    step = std::max(1e-6, 0.1 * res.gradient_norm);
  }
  res.converged = res.gradient_norm <= opt.gradient_tolerance;
  res.evaluations = prob.evaluations;

  gsl_multimin_fdfminimizer_free(s);
  gsl_vector_free(x);
  return res;
}

}  // namespace nadvqe
