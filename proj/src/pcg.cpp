#include "qunac/pcg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qunac {

std::string_view to_string(CGStatus status) {
  switch (status) {
    case CGStatus::Converged: return "converged";
    case CGStatus::MaxIterations: return "max-iterations";
    case CGStatus::NegativeCurvatureLater: return "negative-curvature";
    case CGStatus::NegativeCurvatureFirst: return "negative-curvature-first";
  }
  return "unknown";
}

double pcg_tolerance(double grad_norm) {
  if (grad_norm < 0.0) throw std::invalid_argument("pcg_tolerance: negative gradient norm");
  return std::min(0.01, std::sqrt(grad_norm));
}

CGResult pcg_collect(const LinearOperator& a, const LinearOperator& precond, const Vector& r0,
                     const CGConfig& config) {
  if (config.max_q < 1) throw std::invalid_argument("pcg_collect: max_q must be >= 1");
  if (!(config.tol >= 0.0 && config.tol < 1.0)) {
    throw std::invalid_argument("pcg_collect: tol must lie in [0, 1)");
  }
  const Index n = r0.size();
  if (a.dim != n || precond.dim != n) throw std::invalid_argument("pcg_collect: dimension mismatch");
  if (!r0.allFinite()) throw NumericalBreakdown("pcg_collect", 0);

  CGResult result;
  result.step = Vector::Zero(n);
  const double r0_norm = r0.norm();
  if (r0_norm == 0.0) {
    result.sampling.s.resize(n, 0);
    result.sampling.action.resize(n, 0);
    return result;
  }

  const int max_q = static_cast<int>(std::min<Index>(config.max_q, n));
  std::vector<Vector> dirs;
  std::vector<Vector> actions;
  std::vector<double> curv;

  Vector r = r0;
  Vector z = precond(r);
  Vector p = -z;
  double rz = r.dot(z);
  Vector& y = result.step;
  result.status = CGStatus::MaxIterations;
  double rel = 1.0;

  for (int i = 0; i < max_q; ++i) {
    const Vector ap = a(p);
    const double c = p.dot(ap);
    ++result.inner_iterations;
    if (!std::isfinite(c) || !ap.allFinite()) throw NumericalBreakdown("pcg_collect", i);
    if (c <= 0.0) {
      if (i == 0) {
        result.status = CGStatus::NegativeCurvatureFirst;
        y = p;
      } else {
        result.status = CGStatus::NegativeCurvatureLater;
      }
      break;
    }
    const double alpha = rz / c;
    y.noalias() += alpha * p;
    r.noalias() += alpha * ap;
    const double scale = 1.0 / std::sqrt(c);
    dirs.push_back(scale * p);
    actions.push_back(scale * ap);
    curv.push_back(c);

    rel = r.norm() / r0_norm;
    if (!std::isfinite(rel)) throw NumericalBreakdown("pcg_collect", i);
    if (rel < config.tol || rel == 0.0) {
      result.status = CGStatus::Converged;
      break;
    }
    if (i + 1 == max_q) break;
    z = precond(r);
    const double rz_next = r.dot(z);
    if (!std::isfinite(rz_next)) throw NumericalBreakdown("pcg_collect", i);
    const double beta = rz_next / rz;
    p = -z + beta * p;
    rz = rz_next;
  }

  result.final_relative_residual = rel;
  const auto q = static_cast<Index>(dirs.size());
  result.sampling.s.resize(n, q);
  result.sampling.action.resize(n, q);
  for (Index j = 0; j < q; ++j) {
    result.sampling.s.col(j) = dirs[static_cast<std::size_t>(j)];
    result.sampling.action.col(j) = actions[static_cast<std::size_t>(j)];
  }
  result.sampling.curvatures = std::move(curv);
  return result;
}

}  // namespace qunac
