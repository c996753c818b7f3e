#pragma once

#include <optional>

#include "qunac/linalg.hpp"

namespace qunac {

class Problem;
struct NewtonConfig;
struct SolveReport;

struct SecantPair {
  Vector delta;  ///< x_{k+1} - x_k
  Vector gamma;  ///< grad f_{k+1} - grad f_k
};

/// Pairs are kept only when gamma^T delta > kSecantCurvatureTolerance * ||gamma|| ||delta||.
inline constexpr double kSecantCurvatureTolerance = 1e-12;

bool has_positive_curvature(const SecantPair& pair);

/// Textbook inverse BFGS update
///   (I - rho delta gamma^T) H (I - rho gamma delta^T) + rho delta delta^T,
/// rho = 1 / gamma^T delta. Returns nullopt (skip) when the pair fails
/// has_positive_curvature.
std::optional<DenseSymmetric> bfgs_update(const DenseSymmetric& h, const SecantPair& pair);

/// L-BFGS through the shared Newton driver, memory = config.max_q.
SolveReport lbfgs_method(const Problem& problem, NewtonConfig config);

/// Newton-CG (unpreconditioned PCG, iteration cap n) through the shared driver.
SolveReport newton_cg_method(const Problem& problem, NewtonConfig config);

/// Dense BFGS through the shared driver.
SolveReport bfgs_method(const Problem& problem, NewtonConfig config);

}  // namespace qunac
