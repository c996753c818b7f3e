#include "qunac/baselines.hpp"

#include "qunac/newton.hpp"

namespace qunac {

bool has_positive_curvature(const SecantPair& pair) {
  const double gd = pair.gamma.dot(pair.delta);
  return gd > kSecantCurvatureTolerance * pair.gamma.norm() * pair.delta.norm() && gd > 0.0;
}

std::optional<DenseSymmetric> bfgs_update(const DenseSymmetric& h, const SecantPair& pair) {
  if (!has_positive_curvature(pair)) return std::nullopt;
  const Vector& s = pair.delta;
  const Vector& y = pair.gamma;
  const double rho = 1.0 / y.dot(s);
  const Vector hy = h.apply(y);
  const double yhy = y.dot(hy);
  Matrix out = h.matrix();
  out.noalias() -= rho * (s * hy.transpose() + hy * s.transpose());
  out.noalias() += (rho * rho * yhy + rho) * (s * s.transpose());
  return DenseSymmetric(std::move(out));
}

SolveReport lbfgs_method(const Problem& problem, NewtonConfig config) {
  config.method = Method::LBFGS;
  return minimize(problem, config);
}

SolveReport newton_cg_method(const Problem& problem, NewtonConfig config) {
  config.method = Method::NewtonCG;
  return minimize(problem, config);
}

SolveReport bfgs_method(const Problem& problem, NewtonConfig config) {
  config.method = Method::BFGS;
  return minimize(problem, config);
}

}  // namespace qunac
