#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "qunac/libsvm.hpp"
#include "qunac/linalg.hpp"

namespace qunac {

/// Smooth unconstrained objective with gradient and Hessian-vector
/// products. Implementations are immutable and may be evaluated from
/// several threads at once.
class Problem {
 public:
  virtual ~Problem() = default;

  virtual std::string name() const = 0;
  virtual Index dim() const = 0;
  virtual Vector start() const = 0;

  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// He(x) v
  virtual Vector hess_vec(const Vector& x, const Vector& v) const = 0;

  /// The Hessian at x as an operator.
  LinearOperator hessian_at(const Vector& x) const;
};

using ProblemPtr = std::shared_ptr<const Problem>;

/// f(x) = 1/2 x^T Q x - b^T x with dense symmetric Q.
class QuadraticProblem final : public Problem {
 public:
  QuadraticProblem(std::string name, Matrix q, Vector b, Vector start);

  std::string name() const override { return name_; }
  Index dim() const override { return q_.rows(); }
  Vector start() const override { return start_; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;

  const Matrix& hessian() const noexcept { return q_; }
  const Vector& rhs() const noexcept { return b_; }

 private:
  std::string name_;
  Matrix q_;
  Vector b_;
  Vector start_;
};

/// Q_ij = 2 / (i + j - 1) (1-based), b = 0, start at the all-ones vector.
std::shared_ptr<const QuadraticProblem> hilbert_quadratic(Index n);

/// Q = tridiag(-2, 4, -2), b = e_1, start at the all-ones vector. Throws
/// std::invalid_argument for n < 2.
std::shared_ptr<const QuadraticProblem> tridiag_quadratic(Index n);

struct Regularizer {
  enum class Kind { L2, PseudoHuber };
  Kind kind = Kind::L2;
  /// Smoothing of the pseudo-Huber term, 0 < mu < 1.
  double mu = 0.1;

  static Regularizer l2() { return {Kind::L2, 0.1}; }
  static Regularizer pseudo_huber(double mu = 0.1) { return {Kind::PseudoHuber, mu}; }
};

/// sum_i log(1 + exp(-y_i <x_i, w>)) + lambda R(w), with R either ||w||^2 or
/// mu sum_j (sqrt(1 + w_j^2 / mu^2) - 1). Starts at w = 0.
class LogisticSvm final : public Problem {
 public:
  /// Throws std::invalid_argument for lambda <= 0 or mu outside (0, 1).
  LogisticSvm(std::shared_ptr<const SvmDataset> data, Regularizer reg, double lambda);

  std::string name() const override;
  Index dim() const override { return data_->features(); }
  Vector start() const override { return Vector::Zero(dim()); }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& w) const override;
  Vector hess_vec(const Vector& w, const Vector& v) const override;

  double regularizer_value(const Vector& w) const;
  const SvmDataset& data() const noexcept { return *data_; }

 private:
  std::shared_ptr<const SvmDataset> data_;
  Regularizer reg_;
  double lambda_;
};

/// Extended Rosenbrock: sum over pairs of 100 (x_{2i} - x_{2i-1}^2)^2 +
/// (1 - x_{2i-1})^2, started at (-1.2, 1, -1.2, 1, ...). n must be even.
class ExtendedRosenbrock final : public Problem {
 public:
  explicit ExtendedRosenbrock(Index n);

  std::string name() const override;
  Index dim() const override { return n_; }
  Vector start() const override;
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;

 private:
  Index n_;
};

/// Extended Powell singular function over blocks of four, started at
/// (3, -1, 0, 1, ...). n must be a multiple of 4.
class ExtendedPowell final : public Problem {
 public:
  explicit ExtendedPowell(Index n);

  std::string name() const override;
  Index dim() const override { return n_; }
  Vector start() const override;
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Vector hess_vec(const Vector& x, const Vector& v) const override;

 private:
  Index n_;
};

/// Builds a built-in problem from "hilbert:N", "tridiag:N", "rosenbrock:N"
/// or "powell:N". Throws std::invalid_argument for unknown selectors.
ProblemPtr make_builtin_problem(const std::string& selector);

struct DerivativeReport {
  /// Max-norm error of central differences against the analytic gradient,
  /// relative to max(1, ||gradient||_inf).
  double gradient_error = 0.0;
  /// Same for central differences of the gradient against hess_vec, worst
  /// over the random unit directions.
  double hessian_error = 0.0;
  /// ||hv(x, a v) - a hv(x, v)|| / ||a hv(x, v)|| for a random scalar a.
  double linearity_error = 0.0;
};

/// Finite-difference validation of gradient and hess_vec at x with step h.
DerivativeReport check_derivatives(const Problem& p, const Vector& x, double h,
                                   std::uint64_t seed = 7, int directions = 3);

}  // namespace qunac
