#include "qunac/newton.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <memory>
#include <stdexcept>

#include "qunac/baselines.hpp"
#include "qunac/preconditioners.hpp"

namespace qunac {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::InverseQuNac: return "inverse-qunac";
    case Method::InverseLQuNac: return "inverse-lqunac";
    case Method::NewtonCG: return "newton-cg";
    case Method::BFGS: return "bfgs";
    case Method::LBFGS: return "lbfgs";
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (Method m : {Method::InverseQuNac, Method::InverseLQuNac, Method::NewtonCG, Method::BFGS,
                   Method::LBFGS}) {
    if (name == to_string(m)) return m;
  }
  return std::nullopt;
}

std::string method_names() { return "inverse-qunac, inverse-lqunac, newton-cg, bfgs, lbfgs"; }

std::string_view to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Converged: return "converged";
    case StopReason::SmallStep: return "small-step";
    case StopReason::Timeout: return "timeout";
    case StopReason::MaxIterations: return "max-iterations";
    case StopReason::NumericalBreakdown: return "numerical-breakdown";
  }
  return "unknown";
}

void NewtonConfig::validate() const {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  if (max_q < 1) throw std::invalid_argument("max_q must be >= 1");
  if (!(c1 > 0.0 && c1 < 1.0)) throw std::invalid_argument("c1 must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) {
    throw std::invalid_argument("backtrack_factor must lie in (0, 1)");
  }
  if (max_backtracks < 1) throw std::invalid_argument("max_backtracks must be >= 1");
  if (!(small_step >= 0.0)) throw std::invalid_argument("small_step must be non-negative");
  if (max_time_seconds && !(*max_time_seconds >= 0.0)) {
    throw std::invalid_argument("max_time_seconds must be non-negative");
  }
  if (max_outer_iterations && *max_outer_iterations < 0) {
    throw std::invalid_argument("max_outer_iterations must be non-negative");
  }
  if (lqunac_blocks < 1) throw std::invalid_argument("lqunac_blocks must be >= 1");
}

bool IterationRecord::has_event(std::string_view tag) const {
  return std::find(events.begin(), events.end(), tag) != events.end();
}

long long SolveReport::total_inner() const {
  long long total = 0;
  for (const auto& r : trace) total += r.q;
  return total;
}

bool SolveReport::any_event(std::string_view tag) const {
  return std::any_of(trace.begin(), trace.end(),
                     [&](const IterationRecord& r) { return r.has_event(tag); });
}

double initial_scaling(const Vector& grad0, const LinearOperator& hessian) {
  const double num = grad0.squaredNorm();
  const double den = grad0.dot(hessian(grad0));
  if (!(num > 0.0) || !(den > 0.0) || !std::isfinite(num / den)) return 1.0;
  return num / den;
}

LineSearchResult line_search(const std::function<double(const Vector&)>& f, const Vector& x,
                             double fx, const Vector& d, const Vector& g,
                             const NewtonConfig& config) {
  LineSearchResult out;
  const double slope = d.dot(g);
  if (!(slope < 0.0)) return out;
  double a = 1.0;
  for (int it = 0; it <= config.max_backtracks; ++it) {
    if (a < config.small_step) break;
    Vector xt = x + a * d;
    const double ft = f(xt);
    ++out.evaluations;
    if (std::isfinite(ft) && ft - fx <= config.c1 * a * slope) {
      out.accepted = true;
      out.step = a;
      out.x = std::move(xt);
      out.f = ft;
      return out;
    }
    a *= config.backtrack_factor;
  }
  return out;
}

bool descent_check(const Vector& d, const Vector& g, double eps) {
  const double nd = d.norm();
  const double ng = g.norm();
  if (!(nd > 0.0) || !(ng > 0.0)) return false;
  return -d.dot(g) / (nd * ng) > eps;
}

namespace {

using Clock = std::chrono::steady_clock;

struct StepContext {
  const Problem& problem;
  const NewtonConfig& config;
  const Vector& x_old;
  const Vector& g_old;
  const Vector& x_new;
  const Vector& g_new;
  double h0_scale;
  long long& hv_count;
  IterationRecord& record;
  std::optional<CGResult>& cg;
};

// Counts Hessian-vector products issued through it.
LinearOperator counted_hessian(const Problem& p, const Vector& x, long long& counter) {
  return {p.dim(), [&p, x, &counter](const Vector& v) -> Vector {
            ++counter;
            return p.hess_vec(x, v);
          }};
}

void tag_cg(const CGResult& cg, IterationRecord& record) {
  if (cg.status == CGStatus::NegativeCurvatureFirst) record.events.emplace_back("neg-curvature-first");
  if (cg.status == CGStatus::NegativeCurvatureLater) record.events.emplace_back("neg-curvature");
}

// Leading PCG columns that still satisfy S^T S_bar = I; round-off on
// ill-conditioned Hessians can spoil the trailing ones.
Index usable_columns(const CGResult& cg, IterationRecord& record) {
  const Index keep = normalized_prefix(cg.sampling.s, cg.sampling.action);
  if (keep == 0) {
    record.events.emplace_back("estimate-repeated");
  } else if (keep < cg.sampling.size()) {
    record.events.emplace_back("block-truncated");
  }
  return keep;
}

class Strategy {
 public:
  virtual ~Strategy() = default;
  virtual void reset() = 0;
  /// Direction from the start point; empty means d0 = -H0 g0.
  virtual std::optional<Vector> first(StepContext&) { return std::nullopt; }
  /// Direction from the new iterate.
  virtual Vector next(StepContext& ctx) = 0;
  virtual LinearOperator estimate() const = 0;
};

class FullQuNac final : public Strategy {
 public:
  FullQuNac(Index n, double scale) : n_(n), scale_(scale), h_(DenseSymmetric::identity(n, scale)) {}

  void reset() override { h_ = FullMemoryPrecond(DenseSymmetric::identity(n_, scale_)); }

  Vector next(StepContext& ctx) override {
    const LinearOperator hess = counted_hessian(ctx.problem, ctx.x_new, ctx.hv_count);
    const LinearOperator pre{n_, [this](const Vector& v) -> Vector { return h_.apply(v); }};
    ctx.cg = pcg_collect(hess, pre, ctx.g_new,
                         {ctx.config.max_q, pcg_tolerance(ctx.g_new.norm())});
    const CGResult& cg = *ctx.cg;
    ctx.record.q = cg.inner_iterations;
    tag_cg(cg, ctx.record);
    const Index keep = usable_columns(cg, ctx.record);
    if (keep > 0) h_ = h_.updated(cg.sampling.s.leftCols(keep), cg.sampling.action.leftCols(keep));
    return cg.step;
  }

  LinearOperator estimate() const override { return LinearOperator::from_matrix(h_.matrix().matrix()); }

 private:
  Index n_;
  double scale_;
  FullMemoryPrecond h_;
};

class LimitedQuNac final : public Strategy {
 public:
  LimitedQuNac(Index n, double scale, std::size_t blocks)
      : n_(n), scale_(scale), h_(LinearOperator::scaled_identity(n, scale), blocks) {}

  void reset() override {
    h_ = h_.cleared().with_base(LinearOperator::scaled_identity(n_, scale_));
  }

  Vector next(StepContext& ctx) override {
    const LinearOperator hess = counted_hessian(ctx.problem, ctx.x_new, ctx.hv_count);
    const LinearOperator pre{n_, [this](const Vector& v) -> Vector { return h_.apply(v); }};
    ctx.cg = pcg_collect(hess, pre, ctx.g_new,
                         {ctx.config.max_q, pcg_tolerance(ctx.g_new.norm())});
    const CGResult& cg = *ctx.cg;
    ctx.record.q = cg.inner_iterations;
    tag_cg(cg, ctx.record);
    const Index keep = usable_columns(cg, ctx.record);
    if (keep > 0) {
      const double scale = initial_scaling(ctx.g_new, hess);
      h_ = h_.with_base(LinearOperator::scaled_identity(n_, scale))
               .with_block(cg.sampling.s.leftCols(keep), cg.sampling.action.leftCols(keep));
    }
    return cg.step;
  }

  LinearOperator estimate() const override {
    return {n_, [h = h_](const Vector& v) -> Vector { return h.apply(v); }};
  }

 private:
  Index n_;
  double scale_;
  LimitedMemoryPrecond h_;
};

class NewtonCGStrategy final : public Strategy {
 public:
  explicit NewtonCGStrategy(Index n) : n_(n) {}

  void reset() override {}

  std::optional<Vector> first(StepContext& ctx) override { return next(ctx); }

  Vector next(StepContext& ctx) override {
    const LinearOperator hess = counted_hessian(ctx.problem, ctx.x_new, ctx.hv_count);
    const LinearOperator identity = LinearOperator::scaled_identity(n_, 1.0);
    ctx.cg = pcg_collect(hess, identity, ctx.g_new,
                         {static_cast<int>(n_), pcg_tolerance(ctx.g_new.norm())});
    ctx.record.q = ctx.cg->inner_iterations;
    tag_cg(*ctx.cg, ctx.record);
    return ctx.cg->step;
  }

  LinearOperator estimate() const override { return LinearOperator::scaled_identity(n_, 1.0); }

 private:
  Index n_;
};

class BfgsStrategy final : public Strategy {
 public:
  BfgsStrategy(Index n, double scale) : n_(n), scale_(scale), h_(DenseSymmetric::identity(n, scale)) {}

  void reset() override { h_ = DenseSymmetric::identity(n_, scale_); }

  Vector next(StepContext& ctx) override {
    const SecantPair pair{ctx.x_new - ctx.x_old, ctx.g_new - ctx.g_old};
    if (auto updated = bfgs_update(h_, pair)) {
      h_ = std::move(*updated);
    } else {
      ctx.record.events.emplace_back("curvature-skip");
    }
    return -h_.apply(ctx.g_new);
  }

  LinearOperator estimate() const override { return LinearOperator::from_matrix(h_.matrix()); }

 private:
  Index n_;
  double scale_;
  DenseSymmetric h_;
};

class LbfgsStrategy final : public Strategy {
 public:
  LbfgsStrategy(Index n, double scale, int memory) : n_(n), scale_(scale), h0_scale_(scale), memory_(memory) {}

  void reset() override {
    pairs_.clear();
    h0_scale_ = scale_;
  }

  Vector next(StepContext& ctx) override {
    SecantPair pair{ctx.x_new - ctx.x_old, ctx.g_new - ctx.g_old};
    if (has_positive_curvature(pair)) {
      h0_scale_ = pair.gamma.dot(pair.delta) / pair.gamma.squaredNorm();
      pairs_.push_back({std::move(pair.delta), std::move(pair.gamma)});
      while (static_cast<int>(pairs_.size()) > memory_) pairs_.pop_front();
    } else {
      ctx.record.events.emplace_back("curvature-skip");
    }
    return -apply(ctx.g_new);
  }

  LinearOperator estimate() const override {
    return {n_, [self = *this](const Vector& v) -> Vector { return self.apply(v); }};
  }

 private:
  Vector apply(const Vector& v) const {
    const std::vector<CorrectionPair> pairs(pairs_.begin(), pairs_.end());
    return two_loop_apply(LinearOperator::scaled_identity(n_, h0_scale_), pairs, v,
                          TwoLoopMode::RawSecant);
  }

  Index n_;
  double scale_;
  double h0_scale_;
  int memory_;
  std::deque<CorrectionPair> pairs_;
};

std::unique_ptr<Strategy> make_strategy(const NewtonConfig& config, Index n, double scale) {
  switch (config.method) {
    case Method::InverseQuNac: return std::make_unique<FullQuNac>(n, scale);
    case Method::InverseLQuNac: return std::make_unique<LimitedQuNac>(n, scale, config.lqunac_blocks);
    case Method::NewtonCG: return std::make_unique<NewtonCGStrategy>(n);
    case Method::BFGS: return std::make_unique<BfgsStrategy>(n, scale);
    case Method::LBFGS: return std::make_unique<LbfgsStrategy>(n, scale, config.max_q);
  }
  throw std::invalid_argument("unknown method");
}

}  // namespace

SolveReport minimize(const Problem& problem, const NewtonConfig& config,
                     const IterationObserver& observer) {
  config.validate();
  const auto t0 = Clock::now();
  const auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - t0).count(); };

  SolveReport report;
  Vector x = problem.start();
  double f = problem.value(x);
  Vector g = problem.gradient(x);
  const double g0norm = g.norm();
  long long hv_count = 0;

  const auto converged = [&](double gnorm) {
    if (g0norm > 0.0 && gnorm / g0norm < config.eps) return ConvergenceTest::Relative;
    if (gnorm < config.eps * 1e-3) return ConvergenceTest::Absolute;
    return ConvergenceTest::None;
  };

  IterationRecord rec0;
  rec0.f = f;
  rec0.gnorm = g0norm;
  rec0.rel_gnorm = g0norm > 0.0 ? 1.0 : 0.0;
  report.trace.push_back(rec0);

  if (!std::isfinite(f) || !g.allFinite()) {
    report.x = x;
    report.stop = StopReason::NumericalBreakdown;
    report.message = "non-finite objective or gradient at the start point";
    return report;
  }
  if (const auto test = converged(g0norm); test != ConvergenceTest::None) {
    report.x = x;
    report.stop = StopReason::Converged;
    report.converged_by = test;
    report.trace.back().seconds = elapsed();
    return report;
  }

  const double h0_scale = initial_scaling(g, counted_hessian(problem, x, hv_count));
  std::unique_ptr<Strategy> strategy = make_strategy(config, problem.dim(), h0_scale);
  Vector d = -h0_scale * g;
  {
    std::optional<CGResult> cg;
    StepContext ctx{problem, config, x, g, x, g, h0_scale, hv_count, report.trace.back(), cg};
    try {
      if (auto d0 = strategy->first(ctx)) d = std::move(*d0);
    } catch (const NumericalBreakdown& e) {
      report.x = x;
      report.stop = StopReason::NumericalBreakdown;
      report.message = e.what();
      return report;
    }
    report.trace.back().cum_hv = hv_count;
    report.trace.back().seconds = elapsed();
    if (observer) {
      const LinearOperator est = strategy->estimate();
      observer(IterationView{0, x, g, d, cg ? &*cg : nullptr, est});
    }
  }
  const auto fval = [&problem](const Vector& v) { return problem.value(v); };

  for (int k = 0;; ++k) {
    if (config.max_outer_iterations && k >= *config.max_outer_iterations) {
      report.stop = StopReason::MaxIterations;
      break;
    }
    if (config.max_time_seconds && elapsed() > *config.max_time_seconds) {
      report.stop = StopReason::Timeout;
      break;
    }

    IterationRecord rec;
    rec.k = k + 1;
    if (config.reset_enabled && !descent_check(d, g, config.eps)) {
      strategy->reset();
      d = -h0_scale * g;
      rec.events.emplace_back("reset");
    }

    LineSearchResult ls = line_search(fval, x, f, d, g, config);
    if (!ls.accepted) {
      report.stop = StopReason::SmallStep;
      report.message = "line search step fell below the small-step threshold";
      break;
    }

    Vector g_new = problem.gradient(ls.x);
    rec.f = ls.f;
    rec.step = ls.step;
    rec.gnorm = g_new.norm();
    rec.rel_gnorm = rec.gnorm / g0norm;
    if (!g_new.allFinite()) {
      rec.seconds = elapsed();
      rec.cum_hv = hv_count;
      report.trace.push_back(std::move(rec));
      x = std::move(ls.x);
      report.stop = StopReason::NumericalBreakdown;
      report.message = "non-finite gradient";
      break;
    }

    const auto test = converged(rec.gnorm);
    std::optional<CGResult> cg;
    Vector d_new;
    if (test == ConvergenceTest::None) {
      StepContext ctx{problem, config, x, g, ls.x, g_new, h0_scale, hv_count, rec, cg};
      try {
        d_new = strategy->next(ctx);
      } catch (const NumericalBreakdown& e) {
        rec.seconds = elapsed();
        rec.cum_hv = hv_count;
        report.trace.push_back(std::move(rec));
        x = std::move(ls.x);
        report.stop = StopReason::NumericalBreakdown;
        report.message = e.what();
        break;
      }
    }

    x = std::move(ls.x);
    f = ls.f;
    g = std::move(g_new);
    rec.cum_hv = hv_count;
    rec.seconds = elapsed();
    report.trace.push_back(std::move(rec));

    if (test != ConvergenceTest::None) {
      report.stop = StopReason::Converged;
      report.converged_by = test;
      break;
    }
    d = std::move(d_new);
    if (observer) {
      const LinearOperator est = strategy->estimate();
      observer(IterationView{k + 1, x, g, d, cg ? &*cg : nullptr, est});
    }
  }

  report.x = std::move(x);
  return report;
}

}  // namespace qunac
