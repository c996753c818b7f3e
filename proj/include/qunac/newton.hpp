#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qunac/linalg.hpp"
#include "qunac/pcg.hpp"
#include "qunac/problems.hpp"

namespace qunac {

enum class Method { InverseQuNac, InverseLQuNac, NewtonCG, BFGS, LBFGS };

/// "inverse-qunac", "inverse-lqunac", "newton-cg", "bfgs", "lbfgs".
std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view name);
/// Comma separated list of the names accepted by parse_method.
std::string method_names();

struct NewtonConfig {
  /// Stop once ||g|| / ||g0|| < eps (or ||g|| < eps * 1e-3).
  double eps = 1e-8;
  /// PCG iteration cap per outer iteration; L-BFGS memory.
  int max_q = 20;
  /// Sufficient-descent constant.
  double c1 = 1e-4;
  double backtrack_factor = 0.5;
  int max_backtracks = 60;
  /// Step sizes below this end the solve with SmallStep.
  double small_step = 1e-14;
  std::optional<double> max_time_seconds;
  std::optional<int> max_outer_iterations;
  Method method = Method::InverseQuNac;
  /// Reset the estimate to H0 when the direction is not a descent direction.
  bool reset_enabled = false;
  /// Blocks retained by the limited-memory preconditioner.
  std::size_t lqunac_blocks = 1;

  /// Throws std::invalid_argument on out-of-range parameters.
  void validate() const;
};

enum class StopReason { Converged, SmallStep, Timeout, MaxIterations, NumericalBreakdown };

std::string_view to_string(StopReason reason);

/// Which half of the stopping rule fired.
enum class ConvergenceTest { None, Relative, Absolute };

struct IterationRecord {
  int k = 0;
  double f = 0.0;
  double gnorm = 0.0;
  double rel_gnorm = 0.0;
  /// Hessian-vector products spent by PCG computing the next direction.
  int q = 0;
  /// Accepted step size that produced this iterate (0 for the start point).
  double step = 0.0;
  long long cum_hv = 0;
  double seconds = 0.0;
  /// Tags such as "reset", "neg-curvature-first", "estimate-repeated",
  /// "block-truncated".
  std::vector<std::string> events;

  bool has_event(std::string_view tag) const;
};

struct SolveReport {
  Vector x;
  StopReason stop = StopReason::Converged;
  ConvergenceTest converged_by = ConvergenceTest::None;
  /// Record 0 is the start point; record k the iterate after the k-th step.
  std::vector<IterationRecord> trace;
  std::string message;

  int outer_iterations() const { return static_cast<int>(trace.size()) - 1; }
  long long total_inner() const;
  const IterationRecord& last() const { return trace.back(); }
  bool any_event(std::string_view tag) const;
};

/// Scale of H0 = scale * I: (g^T g) / (g^T He g), falling back to 1 when
/// the denominator is not positive (or the gradient vanishes).
double initial_scaling(const Vector& grad0, const LinearOperator& hessian);

struct LineSearchResult {
  bool accepted = false;
  double step = 0.0;
  Vector x;
  double f = 0.0;
  int evaluations = 0;
};

/// Backtracking from a = 1 until f(x + a d) - f(x) <= c1 a d^T g.
/// `accepted == false` signals SmallStep: the step fell below
/// config.small_step, max_backtracks was exhausted, or d is not a descent
/// direction.
LineSearchResult line_search(const std::function<double(const Vector&)>& f, const Vector& x,
                             double fx, const Vector& d, const Vector& g,
                             const NewtonConfig& config);

/// -<d, g> / (||d|| ||g||) > eps. False for zero vectors.
bool descent_check(const Vector& d, const Vector& g, double eps);

/// Snapshot handed to an observer at the start point (k = 0) and after each
/// outer iteration.
struct IterationView {
  int k;
  const Vector& x;
  const Vector& gradient;
  /// Search direction that will be used from x.
  const Vector& direction;
  /// PCG output behind `direction`, when the method runs PCG.
  const CGResult* cg;
  /// Preconditioner / inverse estimate after this iteration's update.
  const LinearOperator& estimate;
};

using IterationObserver = std::function<void(const IterationView&)>;

/// Newton-PCG driver shared by all five methods. The first step uses
/// d0 = -H0 g0 with the scaled identity H0, except for NewtonCG, which runs
/// its unpreconditioned CG solve from the start point. quNac methods then run PCG at
/// every new iterate, preconditioned by the current estimate, and update the
/// estimate with every harvested direction. NumericalBreakdown is reported
/// through the stop reason with the trace up to that point.
SolveReport minimize(const Problem& problem, const NewtonConfig& config,
                     const IterationObserver& observer = {});

}  // namespace qunac
