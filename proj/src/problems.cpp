#include "qunac/problems.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qunac {

LinearOperator Problem::hessian_at(const Vector& x) const {
  return {dim(), [this, x](const Vector& v) -> Vector { return hess_vec(x, v); }};
}

// ---------------------------------------------------------------------------
// Quadratics

QuadraticProblem::QuadraticProblem(std::string name, Matrix q, Vector b, Vector start)
    : name_(std::move(name)), q_(std::move(q)), b_(std::move(b)), start_(std::move(start)) {
  if (q_.rows() == 0 || q_.rows() != q_.cols() || b_.size() != q_.rows() ||
      start_.size() != q_.rows()) {
    throw std::invalid_argument("QuadraticProblem: inconsistent dimensions");
  }
  symmetrize(q_);
}

double QuadraticProblem::value(const Vector& x) const { return 0.5 * x.dot(q_ * x) - b_.dot(x); }

Vector QuadraticProblem::gradient(const Vector& x) const { return q_ * x - b_; }

Vector QuadraticProblem::hess_vec(const Vector&, const Vector& v) const { return q_ * v; }

std::shared_ptr<const QuadraticProblem> hilbert_quadratic(Index n) {
  if (n < 1) throw std::invalid_argument("hilbert_quadratic: n must be >= 1");
  Matrix q(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) q(i, j) = 2.0 / static_cast<double>(i + j + 1);
  }
  return std::make_shared<QuadraticProblem>("hilbert:" + std::to_string(n), std::move(q),
                                            Vector::Zero(n), Vector::Ones(n));
}

std::shared_ptr<const QuadraticProblem> tridiag_quadratic(Index n) {
  if (n < 2) throw std::invalid_argument("tridiag_quadratic: n must be >= 2");
  Matrix q = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    q(i, i) = 4.0;
    if (i + 1 < n) {
      q(i, i + 1) = -2.0;
      q(i + 1, i) = -2.0;
    }
  }
  if (q.llt().info() != Eigen::Success) {
    throw std::logic_error("tridiag_quadratic: matrix is not positive definite");
  }
  Vector b = Vector::Zero(n);
  b[0] = 1.0;
  return std::make_shared<QuadraticProblem>("tridiag:" + std::to_string(n), std::move(q),
                                            std::move(b), Vector::Ones(n));
}

// ---------------------------------------------------------------------------
// Logistic loss

namespace {

// log(1 + exp(u)) without overflow.
double softplus(double u) { return std::max(u, 0.0) + std::log1p(std::exp(-std::abs(u))); }

double sigmoid(double u) {
  if (u >= 0.0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

LogisticSvm::LogisticSvm(std::shared_ptr<const SvmDataset> data, Regularizer reg, double lambda)
    : data_(std::move(data)), reg_(reg), lambda_(lambda) {
  if (!data_ || data_->samples() < 1) throw std::invalid_argument("LogisticSvm: empty dataset");
  if (!(lambda_ > 0.0)) throw std::invalid_argument("LogisticSvm: lambda must be positive");
  if (reg_.kind == Regularizer::Kind::PseudoHuber && !(reg_.mu > 0.0 && reg_.mu < 1.0)) {
    throw std::invalid_argument("LogisticSvm: pseudo-Huber mu must lie in (0, 1)");
  }
}

std::string LogisticSvm::name() const {
  const std::string r = reg_.kind == Regularizer::Kind::L2 ? "l2" : "huber";
  return "svm[" + data_->source + "," + r + "]";
}

double LogisticSvm::regularizer_value(const Vector& w) const {
  if (reg_.kind == Regularizer::Kind::L2) return w.squaredNorm();
  const double mu = reg_.mu;
  double acc = 0.0;
  for (Index j = 0; j < w.size(); ++j) {
    const double t = (w[j] / mu) * (w[j] / mu);
    acc += t / (std::sqrt(1.0 + t) + 1.0);
  }
  return mu * acc;
}

double LogisticSvm::value(const Vector& w) const {
  const Vector margin = data_->x.multiply(w);
  double loss = 0.0;
  for (Index i = 0; i < margin.size(); ++i) loss += softplus(-data_->y[i] * margin[i]);
  return loss + lambda_ * regularizer_value(w);
}

Vector LogisticSvm::gradient(const Vector& w) const {
  const Vector margin = data_->x.multiply(w);
  Vector coef(margin.size());
  for (Index i = 0; i < margin.size(); ++i) {
    const double y = data_->y[i];
    coef[i] = -y * sigmoid(-y * margin[i]);
  }
  Vector g = data_->x.multiply_transpose(coef);
  if (reg_.kind == Regularizer::Kind::L2) {
    g += 2.0 * lambda_ * w;
  } else {
    const double mu = reg_.mu;
    for (Index j = 0; j < w.size(); ++j) {
      g[j] += lambda_ * w[j] / (mu * std::sqrt(1.0 + (w[j] / mu) * (w[j] / mu)));
    }
  }
  return g;
}

Vector LogisticSvm::hess_vec(const Vector& w, const Vector& v) const {
  const Vector margin = data_->x.multiply(w);
  Vector xv = data_->x.multiply(v);
  for (Index i = 0; i < margin.size(); ++i) {
    const double m = data_->y[i] * margin[i];
    xv[i] *= sigmoid(m) * sigmoid(-m);
  }
  Vector hv = data_->x.multiply_transpose(xv);
  if (reg_.kind == Regularizer::Kind::L2) {
    hv += 2.0 * lambda_ * v;
  } else {
    const double mu = reg_.mu;
    for (Index j = 0; j < w.size(); ++j) {
      const double t = 1.0 + (w[j] / mu) * (w[j] / mu);
      hv[j] += lambda_ * v[j] / (mu * t * std::sqrt(t));
    }
  }
  return hv;
}

// ---------------------------------------------------------------------------
// Extended Rosenbrock

ExtendedRosenbrock::ExtendedRosenbrock(Index n) : n_(n) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("ExtendedRosenbrock: n must be even");
}

std::string ExtendedRosenbrock::name() const { return "rosenbrock:" + std::to_string(n_); }

Vector ExtendedRosenbrock::start() const {
  Vector x(n_);
  for (Index i = 0; i < n_; i += 2) {
    x[i] = -1.2;
    x[i + 1] = 1.0;
  }
  return x;
}

double ExtendedRosenbrock::value(const Vector& x) const {
  double f = 0.0;
  for (Index i = 0; i < n_; i += 2) {
    const double a = x[i + 1] - x[i] * x[i];
    const double b = 1.0 - x[i];
    f += 100.0 * a * a + b * b;
  }
  return f;
}

Vector ExtendedRosenbrock::gradient(const Vector& x) const {
  Vector g(n_);
  for (Index i = 0; i < n_; i += 2) {
    const double a = x[i + 1] - x[i] * x[i];
    g[i] = -400.0 * x[i] * a - 2.0 * (1.0 - x[i]);
    g[i + 1] = 200.0 * a;
  }
  return g;
}

Vector ExtendedRosenbrock::hess_vec(const Vector& x, const Vector& v) const {
  Vector hv(n_);
  for (Index i = 0; i < n_; i += 2) {
    const double hxx = 1200.0 * x[i] * x[i] - 400.0 * x[i + 1] + 2.0;
    const double hxy = -400.0 * x[i];
    hv[i] = hxx * v[i] + hxy * v[i + 1];
    hv[i + 1] = hxy * v[i] + 200.0 * v[i + 1];
  }
  return hv;
}

// ---------------------------------------------------------------------------
// Extended Powell singular

ExtendedPowell::ExtendedPowell(Index n) : n_(n) {
  if (n < 4 || n % 4 != 0) throw std::invalid_argument("ExtendedPowell: n must be a multiple of 4");
}

std::string ExtendedPowell::name() const { return "powell:" + std::to_string(n_); }

Vector ExtendedPowell::start() const {
  Vector x(n_);
  for (Index i = 0; i < n_; i += 4) {
    x[i] = 3.0;
    x[i + 1] = -1.0;
    x[i + 2] = 0.0;
    x[i + 3] = 1.0;
  }
  return x;
}

// Per block: a = x1 + 10 x2, b = x3 - x4, c = x2 - 2 x3, d = x1 - x4,
// f = a^2 + 5 b^2 + c^4 + 10 d^4.
double ExtendedPowell::value(const Vector& x) const {
  double f = 0.0;
  for (Index i = 0; i < n_; i += 4) {
    const double a = x[i] + 10.0 * x[i + 1];
    const double b = x[i + 2] - x[i + 3];
    const double c = x[i + 1] - 2.0 * x[i + 2];
    const double d = x[i] - x[i + 3];
    f += a * a + 5.0 * b * b + c * c * c * c + 10.0 * d * d * d * d;
  }
  return f;
}

Vector ExtendedPowell::gradient(const Vector& x) const {
  Vector g(n_);
  for (Index i = 0; i < n_; i += 4) {
    const double a = x[i] + 10.0 * x[i + 1];
    const double b = x[i + 2] - x[i + 3];
    const double c = x[i + 1] - 2.0 * x[i + 2];
    const double d = x[i] - x[i + 3];
    const double c3 = 4.0 * c * c * c;
    const double d3 = 40.0 * d * d * d;
    g[i] = 2.0 * a + d3;
    g[i + 1] = 20.0 * a + c3;
    g[i + 2] = 10.0 * b - 2.0 * c3;
    g[i + 3] = -10.0 * b - d3;
  }
  return g;
}

Vector ExtendedPowell::hess_vec(const Vector& x, const Vector& v) const {
  Vector hv(n_);
  for (Index i = 0; i < n_; i += 4) {
    const double c = x[i + 1] - 2.0 * x[i + 2];
    const double d = x[i] - x[i + 3];
    // Directional derivatives of a, b, c, d along v.
    const double va = v[i] + 10.0 * v[i + 1];
    const double vb = v[i + 2] - v[i + 3];
    const double vc = v[i + 1] - 2.0 * v[i + 2];
    const double vd = v[i] - v[i + 3];
    const double ta = 2.0 * va;
    const double tb = 10.0 * vb;
    const double tc = 12.0 * c * c * vc;
    const double td = 120.0 * d * d * vd;
    hv[i] = ta + td;
    hv[i + 1] = 10.0 * ta + tc;
    hv[i + 2] = tb - 2.0 * tc;
    hv[i + 3] = -tb - td;
  }
  return hv;
}

// ---------------------------------------------------------------------------

ProblemPtr make_builtin_problem(const std::string& selector) {
  const auto colon = selector.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("problem selector must look like name:N, got '" + selector + "'");
  }
  const std::string kind = selector.substr(0, colon);
  const std::string size = selector.substr(colon + 1);
  long long n = 0;
  const auto [ptr, ec] = std::from_chars(size.data(), size.data() + size.size(), n);
  if (ec != std::errc() || ptr != size.data() + size.size() || n < 1) {
    throw std::invalid_argument("bad problem size in '" + selector + "'");
  }
  const auto dim = static_cast<Index>(n);
  if (kind == "hilbert") return hilbert_quadratic(dim);
  if (kind == "tridiag") return tridiag_quadratic(dim);
  if (kind == "rosenbrock") return std::make_shared<ExtendedRosenbrock>(dim);
  if (kind == "powell") return std::make_shared<ExtendedPowell>(dim);
  throw std::invalid_argument("unknown problem '" + kind +
                              "' (expected hilbert, tridiag, rosenbrock or powell)");
}

DerivativeReport check_derivatives(const Problem& p, const Vector& x, double h,
                                   std::uint64_t seed, int directions) {
  if (!(h > 0.0)) throw std::invalid_argument("check_derivatives: h must be positive");
  const Index n = p.dim();
  DerivativeReport report;

  const Vector g = p.gradient(x);
  Vector fd(n);
  Vector xp = x;
  for (Index i = 0; i < n; ++i) {
    const double xi = x[i];
    xp[i] = xi + h;
    const double fp = p.value(xp);
    xp[i] = xi - h;
    const double fm = p.value(xp);
    xp[i] = xi;
    fd[i] = (fp - fm) / (2.0 * h);
  }
  report.gradient_error = (fd - g).lpNorm<Eigen::Infinity>() /
                          std::max(1.0, g.lpNorm<Eigen::Infinity>());

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int k = 0; k < directions; ++k) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v[i] = normal(rng);
    v.normalize();
    const Vector hv = p.hess_vec(x, v);
    const Vector gfd = (p.gradient(x + h * v) - p.gradient(x - h * v)) / (2.0 * h);
    report.hessian_error = std::max(
        report.hessian_error,
        (gfd - hv).lpNorm<Eigen::Infinity>() / std::max(1.0, hv.lpNorm<Eigen::Infinity>()));

    const double a = 0.5 + std::abs(normal(rng));
    const Vector scaled = p.hess_vec(x, a * v);
    const double denom = (a * hv).norm();
    const double lin = (scaled - a * hv).norm() / (denom > 0.0 ? denom : 1.0);
    report.linearity_error = std::max(report.linearity_error, lin);
  }
  return report;
}

}  // namespace qunac
