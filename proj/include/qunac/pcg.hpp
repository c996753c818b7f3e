#pragma once

#include <string_view>
#include <vector>

#include "qunac/linalg.hpp"

namespace qunac {

/// Sampling matrix S together with its recorded action Q S.
struct SamplingBlock {
  TallBlock s;
  TallBlock action;
  /// c_i = p_i^T Q p_i of the raw direction behind column i; empty when the
  /// block was not produced by PCG.
  std::vector<double> curvatures;

  Index size() const noexcept { return s.cols(); }
  bool empty() const noexcept { return s.cols() == 0; }
};

struct CGConfig {
  int max_q = 20;
  double tol = 1e-2;
};

enum class CGStatus { Converged, MaxIterations, NegativeCurvatureLater, NegativeCurvatureFirst };

std::string_view to_string(CGStatus status);

struct CGResult {
  /// Directions p_i / sqrt(c_i) and their actions A p_i / sqrt(c_i).
  SamplingBlock sampling;
  /// Approximate solution y of A y = -r0, or p_0 on NegativeCurvatureFirst.
  Vector step;
  CGStatus status = CGStatus::Converged;
  /// Operator applications performed, including the one that detected
  /// negative curvature.
  int inner_iterations = 0;
  double final_relative_residual = 0.0;
};

/// Forcing tolerance min{0.01, sqrt(grad_norm)}.
double pcg_tolerance(double grad_norm);

/// Preconditioned CG from y0 = 0 on A y = -r0, harvesting the conjugate
/// directions with positive curvature. `precond` applies M^{-1}.
///
/// Stops on relative residual ||r_i|| / ||r_0|| < tol, after min(max_q, n)
/// iterations, or on the first direction with p^T A p <= 0. If that happens
/// at i = 0 the preconditioned steepest-descent direction p_0 is returned
/// as the step and nothing is sampled.
///
/// Throws NumericalBreakdown when a non-finite value appears.
CGResult pcg_collect(const LinearOperator& a, const LinearOperator& precond, const Vector& r0,
                     const CGConfig& config);

}  // namespace qunac
