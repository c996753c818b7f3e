#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "qunac/baselines.hpp"
#include "qunac/newton.hpp"
#include "qunac/verify/oracles.hpp"

namespace qunac {
namespace {

std::shared_ptr<const QuadraticProblem> diag23() {
  return std::make_shared<QuadraticProblem>("diag23", Matrix(Eigen::Vector2d(2, 3).asDiagonal()),
                                            Vector::Zero(2), Eigen::Vector2d(1, 1));
}

// f = x^4/4 - x^2/2 + y^2/2: concave in x near the origin, minima at (+-1, 0).
class DoubleWell final : public Problem {
 public:
  explicit DoubleWell(Vector start) : start_(std::move(start)) {}
  std::string name() const override { return "double-well"; }
  Index dim() const override { return 2; }
  Vector start() const override { return start_; }
  double value(const Vector& x) const override {
    return std::pow(x[0], 4) / 4 - x[0] * x[0] / 2 + x[1] * x[1] / 2;
  }
  Vector gradient(const Vector& x) const override {
    return Eigen::Vector2d(std::pow(x[0], 3) - x[0], x[1]);
  }
  Vector hess_vec(const Vector& x, const Vector& v) const override {
    return Eigen::Vector2d((3 * x[0] * x[0] - 1) * v[0], v[1]);
  }

 private:
  Vector start_;
};

// Quartic whose Hessian-vector product turns non-finite.
class BrokenHessian final : public Problem {
 public:
  std::string name() const override { return "broken"; }
  Index dim() const override { return 3; }
  Vector start() const override { return Vector::Ones(3); }
  double value(const Vector& x) const override { return 0.25 * std::pow(x.squaredNorm(), 2); }
  Vector gradient(const Vector& x) const override { return x.squaredNorm() * x; }
  Vector hess_vec(const Vector&, const Vector& v) const override {
    return Vector::Constant(v.size(), std::nan(""));
  }
};

NewtonConfig with_method(Method m) {
  NewtonConfig c;
  c.method = m;
  return c;
}

const Method kAllMethods[] = {Method::InverseQuNac, Method::InverseLQuNac, Method::NewtonCG,
                              Method::BFGS, Method::LBFGS};

TEST(MethodNames, RoundTrip) {
  for (Method m : kAllMethods) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_FALSE(parse_method("newton").has_value());
  EXPECT_EQ(method_names(), "inverse-qunac, inverse-lqunac, newton-cg, bfgs, lbfgs");
}

TEST(NewtonConfigTest, Validation) {
  EXPECT_NO_THROW(NewtonConfig{}.validate());
  const auto bad = [](auto mutate) {
    NewtonConfig c;
    mutate(c);
    return c;
  };
  EXPECT_THROW(bad([](NewtonConfig& c) { c.eps = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](NewtonConfig& c) { c.c1 = 1; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](NewtonConfig& c) { c.backtrack_factor = 0; }).validate(),
               std::invalid_argument);
  EXPECT_THROW(bad([](NewtonConfig& c) { c.max_q = 0; }).validate(), std::invalid_argument);
  EXPECT_THROW(bad([](NewtonConfig& c) { c.max_time_seconds = -1.0; }).validate(),
               std::invalid_argument);
  EXPECT_THROW(minimize(*diag23(), bad([](NewtonConfig& c) { c.eps = -1; })),
               std::invalid_argument);
}

TEST(InitialScaling, Examples) {
  EXPECT_DOUBLE_EQ(initial_scaling(Eigen::Vector2d(1, 2), LinearOperator::scaled_identity(2, 1)),
                   1.0);
  const LinearOperator d = LinearOperator::from_matrix(Eigen::Vector2d(2, 3).asDiagonal());
  EXPECT_DOUBLE_EQ(initial_scaling(Eigen::Vector2d(1, 0), d), 0.5);
  const LinearOperator neg = LinearOperator::scaled_identity(1, -5.0);
  EXPECT_DOUBLE_EQ(initial_scaling(Vector::Ones(1), neg), 1.0);
  EXPECT_DOUBLE_EQ(initial_scaling(Vector::Zero(2), d), 1.0);
}

TEST(LineSearch, AcceptsUnitStep) {
  const auto f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const Vector x = Eigen::Vector2d(1, 0);
  const LineSearchResult r = line_search(f, x, 0.5, -x, x, NewtonConfig{});
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.step, 1.0);
  EXPECT_EQ(r.f, 0.0);
  EXPECT_EQ(r.evaluations, 1);
}

TEST(LineSearch, BacktracksOnOvershoot) {
  const auto f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const Vector x = Eigen::Vector2d(1, 0);
  const LineSearchResult r = line_search(f, x, 0.5, -4.0 * x, x, NewtonConfig{});
  EXPECT_TRUE(r.accepted);
  EXPECT_EQ(r.step, 0.25);
}

TEST(LineSearch, ZeroDirectionIsSmallStep) {
  const auto f = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  const Vector x = Eigen::Vector2d(1, 0);
  EXPECT_FALSE(line_search(f, x, 0.5, Vector::Zero(2), x, NewtonConfig{}).accepted);
  EXPECT_FALSE(line_search(f, x, 0.5, x, x, NewtonConfig{}).accepted);
}

TEST(DescentCheck, Examples) {
  const Vector g = Eigen::Vector2d(1, 2);
  EXPECT_TRUE(descent_check(-g, g, 0.999));
  EXPECT_FALSE(descent_check(g, g, 1e-8));
  EXPECT_FALSE(descent_check(Eigen::Vector2d(-2, 1), g, 1e-8));
  EXPECT_FALSE(descent_check(Vector::Zero(2), g, 1e-8));
}

TEST(Minimize, DiagonalQuadraticTerminatesWithinDimension) {
  NewtonConfig c = with_method(Method::InverseQuNac);
  c.max_q = 2;
  const SolveReport r = minimize(*diag23(), c);
  EXPECT_EQ(r.stop, StopReason::Converged);
  EXPECT_LE(r.last().gnorm, c.eps);
  EXPECT_LE(r.total_inner(), 2);
}

TEST(Minimize, StationaryStartConvergesImmediately) {
  const auto p = std::make_shared<QuadraticProblem>("zero", Matrix::Identity(2, 2), Vector::Zero(2),
                                                    Vector::Zero(2));
  for (Method m : kAllMethods) {
    const SolveReport r = minimize(*p, with_method(m));
    EXPECT_EQ(r.stop, StopReason::Converged);
    EXPECT_EQ(r.outer_iterations(), 0);
    EXPECT_EQ(r.converged_by, ConvergenceTest::Absolute);
  }
}

TEST(Minimize, ConvergedMeansRelativeGradientBelowEps) {
  for (const char* sel : {"hilbert:6", "tridiag:30", "rosenbrock:10", "powell:8"}) {
    for (Method m : kAllMethods) {
      const SolveReport r = minimize(*make_builtin_problem(sel), with_method(m));
      ASSERT_EQ(r.stop, StopReason::Converged) << sel << " " << to_string(m);
      if (r.converged_by == ConvergenceTest::Relative) {
        EXPECT_LT(r.last().rel_gnorm, 1e-8) << sel << " " << to_string(m);
      } else {
        EXPECT_LT(r.last().gnorm, 1e-11) << sel << " " << to_string(m);
      }
    }
  }
}

TEST(Minimize, TraceIsConsistent) {
  NewtonConfig c = with_method(Method::InverseLQuNac);
  const SolveReport r = minimize(*make_builtin_problem("rosenbrock:10"), c);
  ASSERT_GE(r.trace.size(), 2u);
  EXPECT_EQ(r.trace.front().step, 0.0);
  EXPECT_EQ(r.trace.front().rel_gnorm, 1.0);
  for (std::size_t k = 1; k < r.trace.size(); ++k) {
    const IterationRecord& rec = r.trace[k];
    EXPECT_EQ(rec.k, static_cast<int>(k));
    EXPECT_GE(rec.gnorm, 0.0);
    EXPECT_LE(rec.q, c.max_q);
    EXPECT_GT(rec.step, 0.0);
    EXPECT_GE(rec.cum_hv, r.trace[k - 1].cum_hv);
    EXPECT_GE(rec.seconds, r.trace[k - 1].seconds);
  }
}

TEST(Minimize, MonotoneSufficientDescent) {
  for (Method m : kAllMethods) {
    NewtonConfig c = with_method(m);
    const SolveReport r = minimize(*make_builtin_problem("rosenbrock:20"), c);
    for (std::size_t k = 1; k < r.trace.size(); ++k) {
      EXPECT_LT(r.trace[k].f, r.trace[k - 1].f) << to_string(m) << " k=" << k;
    }
  }
}

// Collects every PCG direction across outer iterations of a quadratic solve.
Matrix collected_directions(const QuadraticProblem& p, const NewtonConfig& c) {
  std::vector<Vector> cols;
  const SolveReport r = minimize(p, c, [&](const IterationView& v) {
    if (!v.cg) return;
    for (Index i = 0; i < v.cg->sampling.size(); ++i) cols.push_back(v.cg->sampling.s.col(i));
  });
  EXPECT_EQ(r.stop, StopReason::Converged);
  Matrix s(p.dim(), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) s.col(static_cast<Index>(i)) = cols[i];
  return s;
}

double max_off_diagonal(const Matrix& m) {
  double worst = 0.0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (i != j) worst = std::max(worst, std::abs(m(i, j)));
    }
  }
  return worst;
}

TEST(QuadraticTermination, HilbertWithinDimensionPlusTwo) {
  const auto p = hilbert_quadratic(6);
  NewtonConfig c = with_method(Method::InverseQuNac);
  c.max_q = 10;
  const SolveReport r = minimize(*p, c);
  EXPECT_EQ(r.stop, StopReason::Converged);
  EXPECT_LE(r.total_inner(), 8);
  // Within one PCG solve the directions stay conjugate despite cond ~ 1e7.
  (void)minimize(*p, c, [&](const IterationView& v) {
    if (!v.cg || v.cg->sampling.size() < 2) return;
    const Matrix& s = v.cg->sampling.s;
    EXPECT_LE(max_off_diagonal(s.transpose() * p->hessian() * s), 1e-6) << "k=" << v.k;
  });
}

TEST(QuadraticTermination, DirectionsConjugateAcrossOuterIterations) {
  verify::Rng rng(4);
  for (int t = 0; t < 10; ++t) {
    const Index n = 10 + 4 * t;
    const QuadraticProblem p("rand", verify::random_spd(n, rng, 10.0), Vector::Zero(n),
                             verify::random_matrix(n, 1, rng).col(0));
    NewtonConfig c = with_method(Method::InverseQuNac);
    c.max_q = 4;
    const Matrix s = collected_directions(p, c);
    ASSERT_LE(s.cols(), n) << "n=" << n;
    EXPECT_LE(max_off_diagonal(s.transpose() * p.hessian() * s), 1e-6)
        << "n=" << n << " directions=" << s.cols();
  }
}

TEST(QuadraticTermination, TridiagonalWithinDimensionPlusTwo) {
  const auto p = tridiag_quadratic(50);
  NewtonConfig c = with_method(Method::InverseQuNac);
  c.max_q = 10;
  const SolveReport r = minimize(*p, c);
  EXPECT_EQ(r.stop, StopReason::Converged);
  EXPECT_LE(r.total_inner(), 52);
  const Matrix s = collected_directions(*p, c);
  EXPECT_LE(max_off_diagonal(s.transpose() * p->hessian() * s), 1e-6);
}

TEST(QuadraticTermination, RandomSpdQuadratics) {
  verify::Rng rng(5);
  for (int t = 0; t < 10; ++t) {
    const Index n = 5 + 3 * t;
    const QuadraticProblem p("rand", verify::random_spd(n, rng, 100.0), Vector::Zero(n),
                             verify::random_matrix(n, 1, rng).col(0));
    NewtonConfig c = with_method(Method::InverseQuNac);
    c.max_q = static_cast<int>(n / 3 + 1);
    const SolveReport r = minimize(p, c);
    EXPECT_EQ(r.stop, StopReason::Converged);
    EXPECT_LE(r.total_inner(), n + 2) << "n=" << n;
  }
}

TEST(Estimate, RecoversSamplingAfterEveryUpdate) {
  for (Method m : {Method::InverseQuNac, Method::InverseLQuNac}) {
    const auto p = hilbert_quadratic(8);
    int checked = 0;
    (void)minimize(*p, with_method(m), [&](const IterationView& v) {
      if (!v.cg || v.cg->sampling.empty()) return;
      const Matrix& s = v.cg->sampling.s;
      const Matrix& action = v.cg->sampling.action;
      Matrix back(s.rows(), s.cols());
      for (Index i = 0; i < s.cols(); ++i) back.col(i) = v.estimate(action.col(i));
      EXPECT_LE((back - s).norm(), 1e-8 * s.norm()) << to_string(m) << " k=" << v.k;
      ++checked;
    });
    EXPECT_GT(checked, 0);
  }
}

TEST(NewtonCG, FirstDirectionParallelToScaledSteepestDescent) {
  const ProblemPtr p = make_builtin_problem("rosenbrock:10");
  Vector qunac_d0;
  Vector cg_p0;
  (void)minimize(*p, with_method(Method::InverseQuNac), [&](const IterationView& v) {
    if (v.k == 0) qunac_d0 = v.direction;
  });
  (void)minimize(*p, with_method(Method::NewtonCG), [&](const IterationView& v) {
    if (v.k == 0 && v.cg) cg_p0 = v.cg->sampling.s.col(0);
  });
  ASSERT_EQ(qunac_d0.size(), 10);
  ASSERT_EQ(cg_p0.size(), 10);
  const double cosine = qunac_d0.dot(cg_p0) / (qunac_d0.norm() * cg_p0.norm());
  EXPECT_NEAR(cosine, 1.0, 1e-12);
}

TEST(NewtonCG, SolvesSpdQuadraticInOneOuterIteration) {
  // CG reaches the forcing tolerance only at its n-step termination here.
  for (const auto& p : {diag23(), tridiag_quadratic(20), tridiag_quadratic(60)}) {
    const SolveReport r = minimize(*p, with_method(Method::NewtonCG));
    EXPECT_EQ(r.stop, StopReason::Converged);
    EXPECT_EQ(r.outer_iterations(), 1);
  }
}

TEST(Baselines, BfgsUpdateExamples) {
  const auto h = bfgs_update(DenseSymmetric::identity(2), {Eigen::Vector2d(1, 0), Eigen::Vector2d(2, 0)});
  ASSERT_TRUE(h.has_value());
  EXPECT_LE(relative_difference(h->matrix(), Eigen::Vector2d(0.5, 1).asDiagonal().toDenseMatrix()),
            1e-15);
  const Vector e = Eigen::Vector2d(0.6, 0.8);
  EXPECT_LE(relative_difference(bfgs_update(DenseSymmetric::identity(2), {e, e})->matrix(),
                                Matrix::Identity(2, 2)),
            1e-15);
  EXPECT_FALSE(bfgs_update(DenseSymmetric::identity(2), {Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)})
                   .has_value());
  EXPECT_FALSE(has_positive_curvature({Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)}));
}

TEST(Baselines, EntryPointsMatchDriver) {
  const ProblemPtr p = make_builtin_problem("rosenbrock:6");
  const SolveReport a = lbfgs_method(*p, NewtonConfig{});
  const SolveReport b = minimize(*p, with_method(Method::LBFGS));
  EXPECT_EQ(a.outer_iterations(), b.outer_iterations());
  EXPECT_EQ(newton_cg_method(*p, NewtonConfig{}).outer_iterations(),
            minimize(*p, with_method(Method::NewtonCG)).outer_iterations());
  EXPECT_EQ(bfgs_method(*p, NewtonConfig{}).outer_iterations(),
            minimize(*p, with_method(Method::BFGS)).outer_iterations());
}

TEST(Baselines, AllMethodsAgreeOnStronglyConvexOptimum) {
  verify::Rng rng(6);
  std::ostringstream text;
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 60; ++i) {
    text << (u(rng) > 0 ? 1 : -1);
    for (int j = 1; j <= 8; ++j) text << ' ' << j << ':' << u(rng);
    text << '\n';
  }
  std::istringstream in(text.str());
  const auto data = std::make_shared<const SvmDataset>(parse_libsvm(in));
  for (const Regularizer reg : {Regularizer::l2(), Regularizer::pseudo_huber(0.1)}) {
    const LogisticSvm p(data, reg, 1.0);
    std::vector<double> optima;
    for (Method m : kAllMethods) {
      NewtonConfig c = with_method(m);
      c.eps = 1e-7;
      const SolveReport r = minimize(p, c);
      EXPECT_EQ(r.stop, StopReason::Converged) << to_string(m);
      optima.push_back(r.last().f);
    }
    for (double f : optima) EXPECT_LE(std::abs(f - optima[0]), 1e-6 * std::abs(optima[0]));
  }
}

TEST(Baselines, LbfgsMemoryCoversQuadratic) {
  const auto p = tridiag_quadratic(10);
  NewtonConfig c = with_method(Method::LBFGS);
  c.max_q = 10;
  const SolveReport r = minimize(*p, c);
  EXPECT_EQ(r.stop, StopReason::Converged);
  EXPECT_LE(r.outer_iterations(), 40);
}

TEST(Events, NegativeCurvatureIsTagged) {
  for (Method m : {Method::InverseQuNac, Method::InverseLQuNac, Method::NewtonCG}) {
    NewtonConfig c = with_method(m);
    c.reset_enabled = true;
    const SolveReport r = minimize(DoubleWell(Eigen::Vector2d(0.1, 0.0)), c);
    EXPECT_TRUE(r.any_event("neg-curvature-first")) << to_string(m);
    EXPECT_TRUE(r.any_event("estimate-repeated") || m == Method::NewtonCG) << to_string(m);
    EXPECT_EQ(r.stop, StopReason::Converged) << to_string(m);
    EXPECT_NEAR(std::abs(r.x[0]), 1.0, 1e-6) << to_string(m);
  }
}

TEST(Events, NegativeCurvatureAfterPositiveDirections) {
  NewtonConfig c = with_method(Method::InverseQuNac);
  const SolveReport r = minimize(DoubleWell(Eigen::Vector2d(0.2, 3.0)), c);
  EXPECT_TRUE(r.any_event("neg-curvature") || r.any_event("neg-curvature-first"));
  EXPECT_EQ(r.stop, StopReason::Converged);
}

TEST(Events, ResetDisabledLeavesNoTag) {
  const SolveReport r = minimize(*make_builtin_problem("rosenbrock:10"), NewtonConfig{});
  EXPECT_FALSE(r.any_event("reset"));
}

TEST(Stops, MaxIterations) {
  NewtonConfig c;
  c.max_outer_iterations = 2;
  const SolveReport r = minimize(*make_builtin_problem("rosenbrock:10"), c);
  EXPECT_EQ(r.stop, StopReason::MaxIterations);
  EXPECT_EQ(r.outer_iterations(), 2);
}

TEST(Stops, Timeout) {
  NewtonConfig c;
  c.max_time_seconds = 0.0;
  const SolveReport r = minimize(*make_builtin_problem("rosenbrock:10"), c);
  EXPECT_EQ(r.stop, StopReason::Timeout);
}

TEST(Stops, SmallStep) {
  NewtonConfig c;
  c.eps = 1e-300;
  const SolveReport r = minimize(*hilbert_quadratic(12), c);
  EXPECT_EQ(r.stop, StopReason::SmallStep);
  EXPECT_FALSE(r.message.empty());
}

TEST(Events, IllConditionedBlocksAreTruncated) {
  for (Method m : {Method::InverseQuNac, Method::InverseLQuNac}) {
    NewtonConfig c = with_method(m);
    c.eps = 1e-300;
    const SolveReport r = minimize(*hilbert_quadratic(12), c);
    EXPECT_TRUE(r.any_event("block-truncated")) << to_string(m);
    EXPECT_LT(r.last().rel_gnorm, 1e-6) << to_string(m);
  }
}

TEST(Stops, NumericalBreakdown) {
  for (Method m : {Method::InverseQuNac, Method::NewtonCG}) {
    const SolveReport r = minimize(BrokenHessian(), with_method(m));
    EXPECT_EQ(r.stop, StopReason::NumericalBreakdown) << to_string(m);
    EXPECT_FALSE(r.message.empty());
  }
}

TEST(StopNames, Strings) {
  EXPECT_EQ(to_string(StopReason::Converged), "converged");
  EXPECT_EQ(to_string(StopReason::Timeout), "timeout");
}

}  // namespace
}  // namespace qunac
