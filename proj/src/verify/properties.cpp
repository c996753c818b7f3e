#include "qunac/verify/properties.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "qunac/baselines.hpp"
#include "qunac/errors.hpp"
#include "qunac/pcg.hpp"
#include "qunac/preconditioners.hpp"
#include "qunac/problems.hpp"
#include "qunac/updates.hpp"

namespace qunac::verify {
namespace {

Index uniform_index(Rng& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

DenseSymmetric spd(Index n, Rng& rng, double condition = 100.0) {
  return DenseSymmetric(random_spd(n, rng, condition));
}

Matrix correction(const UpdateResult& r, const DenseSymmetric& before) {
  return r.matrix.matrix() - before.matrix();
}

double spectral_margin(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  return scale > 0.0 ? ev[0] / scale : 0.0;
}

struct PcgInstance {
  Matrix a;
  Matrix h0;
  CGResult cg;
};

// Hessian with condition 10 and a scaled-identity base, as the driver uses.
PcgInstance pcg_instance(Rng& rng, Index n, int max_q) {
  const double scale = uniform(rng, 0.1, 10.0);
  PcgInstance inst{random_spd(n, rng, 10.0), scale * Matrix::Identity(n, n), {}};
  const Vector r0 = random_matrix(n, 1, rng).col(0);
  inst.cg = pcg_collect(LinearOperator::from_matrix(inst.a), LinearOperator::from_matrix(inst.h0),
                        r0, CGConfig{max_q, 1e-2});
  return inst;
}

}  // namespace

Measurement projection_idempotence(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 30);
    const Index q = uniform_index(rng, 1, std::min<Index>(8, n));
    const Matrix w = random_spd(n, rng);
    const Matrix s = random_tall_block(n, q, rng);
    const GramFactor f = GramFactor::factor(gram(s, w * s));
    const Matrix pw = s * f.solve(Matrix(s.transpose())) * w;
    m.worst = std::max(m.worst, relative_difference(pw * pw, pw));
    ++m.trials;
  }
  return m;
}

Measurement projection_range(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 30);
    const Index q = uniform_index(rng, 1, std::min<Index>(8, n - 1));
    const Matrix w = random_spd(n, rng);
    const Matrix s = random_tall_block(n, q, rng);
    const GramFactor f = GramFactor::factor(gram(s, w * s));
    const Vector u = proj_apply(s, f, random_matrix(n, 1, rng).col(0));
    const Vector fit = s * s.colPivHouseholderQr().solve(u);
    m.worst = std::max(m.worst, (fit - u).norm() / std::max(u.norm(), 1e-300));
    ++m.trials;
  }
  return m;
}

Measurement direct_action(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 20);
    const Index q = uniform_index(rng, 1, std::min<Index>(5, n));
    const DenseSymmetric g = spd(n, rng, 10.0);
    const Matrix qm = random_spd(n, rng, 10.0);
    const Matrix s = random_tall_block(n, q, rng);
    const Matrix qs = qm * s;
    const UpdateResult r = qunac_direct(g, s, qs);
    m.worst = std::max(m.worst, relative_difference(r.matrix.matrix() * s, qs));
    ++m.trials;
  }
  return m;
}

Measurement inverse_action(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 20);
    const Index q = uniform_index(rng, 1, std::min<Index>(5, n));
    const DenseSymmetric h = spd(n, rng, 10.0);
    const Matrix qm = random_spd(n, rng, 10.0);
    const Matrix s = random_tall_block(n, q, rng);
    const Matrix qs = qm * s;
    const auto check = [&](const UpdateResult& r) {
      m.worst = std::max(m.worst, relative_difference(r.matrix.matrix() * qs, s));
    };
    check(qunac_inverse(h, s, qs));
    for (double lambda : {0.0, 0.25, 0.5, 1.0}) check(family_blend(h, s, qs, FamilyBlend{lambda}));
    ++m.trials;
  }
  return m;
}

Measurement least_change_optimality(Rng& rng, int trials, int competitors, Index max_n,
                                    Index max_q) {
  Measurement m;
  m.secondary = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Index q = uniform_index(rng, 1, max_q);
    const Index n = uniform_index(rng, q + 1, std::max(q + 1, max_n));
    const Matrix w = random_spd(n, rng, 10.0);
    const Matrix w_inv = dense_inverse(w);
    const DenseSymmetric g(random_symmetric(n, rng));
    const Matrix qm = random_symmetric(n, rng);
    const Matrix s = random_tall_block(n, q, rng);

    const Matrix e = correction(least_change_update(g, s, qm * s, w * s), g);
    const Matrix oracle = least_change_qp(w, s, qm - g.matrix());
    m.worst = std::max(m.worst, relative_difference(e, oracle));

    const double e_norm = weighted_frobenius(w_inv, e);
    for (int c = 0; c < competitors; ++c) {
      Matrix nperturb = random_null_perturbation(s, rng);
      const double scale = std::pow(10.0, uniform(rng, -4.0, 1.0)) * e.norm() /
                           std::max(nperturb.norm(), 1e-300);
      nperturb *= scale;
      const double f_norm = weighted_frobenius(w_inv, e + nperturb);
      m.secondary = std::max(m.secondary, (e_norm - f_norm) / std::max(e_norm, 1e-300));
    }
    ++m.trials;
  }
  return m;
}

Measurement pd_chain(Rng& rng, int trials, int steps) {
  Measurement m;
  m.worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 4, 20);
    DenseSymmetric g = spd(n, rng);
    DenseSymmetric h = spd(n, rng);
    for (int k = 0; k < steps; ++k) {
      const Index q = uniform_index(rng, 1, 3);
      const Matrix qm = random_spd(n, rng);
      const Matrix s = random_tall_block(n, q, rng);
      const Matrix qs = qm * s;
      g = qunac_direct(g, s, qs).matrix;
      h = qunac_inverse(h, s, qs).matrix;
      m.worst = std::min({m.worst, spectral_margin(g.matrix()), spectral_margin(h.matrix())});
    }
    ++m.trials;
  }
  return m;
}

Measurement quadratic_hereditary(Rng& rng, int trials, Index max_n) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, max_n);
    const Matrix qm = random_spd(n, rng);
    const Matrix all = random_conjugate_block(qm, n, rng);
    DenseSymmetric g = spd(n, rng);
    DenseSymmetric h = spd(n, rng);
    for (Index start = 0; start < n;) {
      const Index q = std::min(n - start, uniform_index(rng, 1, 4));
      const Matrix s = all.middleCols(start, q);
      const Matrix qs = qm * s;
      g = qunac_direct(g, s, qs).matrix;
      h = qunac_inverse(h, s, qs).matrix;
      start += q;
    }
    m.worst = std::max(m.worst, relative_difference(g.matrix(), qm));
    m.secondary = std::max(m.secondary, relative_difference(h.matrix(), dense_inverse(qm)));
    ++m.trials;
  }
  return m;
}

Measurement unraveling(Rng& rng, int trials, Index n, Index q) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Matrix qm = random_spd(n, rng);
    const Matrix s = random_conjugate_block(qm, q, rng);
    const Matrix qs = qm * s;
    const DenseSymmetric g0 = spd(n, rng);
    const DenseSymmetric h0 = spd(n, rng);

    DenseSymmetric g = g0;
    DenseSymmetric h = h0;
    for (Index j = 0; j < q; ++j) {
      g = qunac_direct(g, s.col(j), qs.col(j)).matrix;
      auto next = bfgs_update(h, SecantPair{s.col(j), qs.col(j)});
      if (!next) throw ContractViolation("unraveling: BFGS pair without positive curvature");
      h = std::move(*next);
    }
    m.worst = std::max(m.worst, relative_difference(qunac_direct(g0, s, qs).matrix.matrix(),
                                                    g.matrix()));
    m.secondary = std::max(m.secondary, relative_difference(
                                            qunac_inverse(h0, s, qs).matrix.matrix(), h.matrix()));
    ++m.trials;
  }
  return m;
}

Measurement rank_bounds(Rng& rng, int trials) {
  Measurement m;
  m.worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Index q = uniform_index(rng, 1, 3);
    const Index n = uniform_index(rng, 3 * q + 1, 16);
    const DenseSymmetric g = spd(n, rng);
    const Matrix qm = random_spd(n, rng);
    const Matrix w = random_spd(n, rng);
    const Matrix s = random_tall_block(n, q, rng);
    const Matrix qs = qm * s;
    const auto check = [&](const UpdateResult& r) {
      const auto excess = static_cast<double>(numerical_rank(correction(r, g)) - r.rank_bound);
      m.worst = std::max(m.worst, excess);
    };
    check(least_change_update(g, s, qs, w * s));
    check(qunac_direct(g, s, qs));
    check(qunac_inverse(g, s, qs));
    check(qunac_direct_inverse(g, s, qs));
    check(family_blend(g, s, qs, FamilyBlend{uniform(rng, 0.05, 0.95)}));
    ++m.trials;
  }
  return m;
}

Measurement single_column_equivalence(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 12);
    const DenseSymmetric h = spd(n, rng);
    const Matrix qm = random_spd(n, rng);
    const Vector s = random_tall_block(n, 1, rng).col(0);
    const Vector qs = qm * s;

    const auto bfgs = bfgs_update(h, SecantPair{s, qs});
    if (!bfgs) throw ContractViolation("single-column check: BFGS pair rejected");
    m.worst = std::max(m.worst, relative_difference(qunac_inverse(h, s, qs).matrix.matrix(),
                                                    bfgs->matrix()));
    m.secondary =
        std::max(m.secondary, relative_difference(qunac_direct_inverse(h, s, qs).matrix.matrix(),
                                                  dfp_inverse_update(h.matrix(), s, qs)));
    m.secondary = std::max(m.secondary,
                           relative_difference(qunac_direct(h, s, qs).matrix.matrix(),
                                               dfp_direct_update(h.matrix(), s, qs)));
    ++m.trials;
  }
  return m;
}

Measurement woodbury(Rng& rng, int trials, double condition) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 2, 20);
    const Index q = uniform_index(rng, 1, std::min<Index>(5, n));
    const Matrix hm = random_spd(n, rng, condition);
    const Matrix qm = random_spd(n, rng, condition);
    const Matrix s = random_tall_block(n, q, rng);
    const Matrix qs = qm * s;
    const DenseSymmetric g(dense_inverse(hm));
    const Matrix direct_inv = dense_inverse(qunac_direct(g, s, qs).matrix.matrix());
    const Matrix woodbury = qunac_direct_inverse(DenseSymmetric(hm), s, qs).matrix.matrix();
    m.worst = std::max(m.worst, relative_difference(woodbury, direct_inv));
    ++m.trials;
  }
  return m;
}

Measurement lqunac_two_loop(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 4, 40);
    const PcgInstance inst = pcg_instance(rng, n, static_cast<int>(uniform_index(rng, 1, 10)));
    const SamplingBlock& blk = inst.cg.sampling;
    if (blk.empty()) continue;
    const LinearOperator h0 = LinearOperator::from_matrix(inst.h0);
    const LimitedMemoryPrecond pre = LimitedMemoryPrecond(h0).with_block(blk.s, blk.action);

    std::vector<CorrectionPair> pairs;
    for (Index j = 0; j < blk.size(); ++j) pairs.push_back({blk.s.col(j), blk.action.col(j)});
    const Vector v = random_matrix(n, 1, rng).col(0);
    const Vector a = lqunac_apply(pre, v);
    const Vector b = two_loop_apply(h0, pairs, v, TwoLoopMode::Normalized);
    m.worst = std::max(m.worst, (a - b).norm() / std::max(b.norm(), 1e-300));
    ++m.trials;
  }
  return m;
}

Measurement operator_matrix_agreement(Rng& rng, int trials) {
  Measurement m;
  m.secondary = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 4, 30);
    const PcgInstance inst = pcg_instance(rng, n, static_cast<int>(uniform_index(rng, 1, 8)));
    const SamplingBlock& blk = inst.cg.sampling;
    if (blk.empty()) continue;
    const LimitedMemoryPrecond pre =
        LimitedMemoryPrecond(LinearOperator::from_matrix(inst.h0)).with_block(blk.s, blk.action);
    const Matrix op = materialize(LinearOperator{n, [&pre](const Vector& v) { return pre.apply(v); }});
    const Matrix full = full_memory_update(DenseSymmetric(inst.h0), blk.s, blk.action).matrix();
    m.worst = std::max(m.worst, relative_difference(op, full));
    m.secondary = std::min(m.secondary, spectral_margin(0.5 * (op + op.transpose())));
    ++m.trials;
  }
  return m;
}

Measurement pcg_conjugacy(Rng& rng, int trials) {
  Measurement m;
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 4, 50);
    const Matrix a = random_spd(n, rng, 10.0);
    const Matrix minv = random_spd(n, rng, 2.0);
    const Vector r0 = random_matrix(n, 1, rng).col(0);
    const CGResult cg = pcg_collect(LinearOperator::from_matrix(a),
                                    LinearOperator::from_matrix(minv), r0, CGConfig{});
    const Matrix& s = cg.sampling.s;
    const Index q = s.cols();
    const Matrix c = s.transpose() * a * s;
    for (Index i = 0; i < q; ++i) {
      for (Index j = 0; j < q; ++j) {
        if (i != j) m.worst = std::max(m.worst, std::abs(c(i, j)));
      }
    }

    // Residual after i steps: r_i = r0 - sum_{j<i} (A s_j)(s_j^T r0).
    Matrix res(n, q + 1);
    res.col(0) = r0;
    for (Index i = 0; i < q; ++i) {
      res.col(i + 1) = res.col(i) - cg.sampling.action.col(i) * s.col(i).dot(r0);
    }
    const Matrix mr = minv * res;
    for (Index i = 0; i <= q; ++i) {
      for (Index j = 0; j < i; ++j) {
        const double denom = std::sqrt(res.col(i).dot(mr.col(i)) * res.col(j).dot(mr.col(j)));
        // Rebuilt residuals carry absolute error near eps * norm(r0).
        if (res.col(i).norm() > 1e-4 * r0.norm()) {
          m.secondary = std::max(m.secondary, std::abs(res.col(i).dot(mr.col(j))) / denom);
        }
      }
    }
    ++m.trials;
  }
  return m;
}

Measurement lemma_posdef(Rng& rng, int trials) {
  Measurement m;
  m.worst = std::numeric_limits<double>::infinity();
  m.secondary = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const Index n = uniform_index(rng, 3, 16);
    const Index q = uniform_index(rng, 1, n - 1);
    const Matrix x = random_matrix(n, q, rng);
    const Matrix y = random_matrix(n, q, rng);
    const Matrix p = oblique_projection(x, y);
    const Matrix ip = Matrix::Identity(n, n) - p;

    // Positive definite on `inside`, negative definite on its complement,
    // with random coupling.
    const auto indefinite_on = [&](const Matrix& inside) {
      const Matrix u = range_basis(inside);
      const Matrix v = complement_basis(inside);
      const Matrix c = random_matrix(u.cols(), v.cols(), rng);
      Matrix a = u * random_spd(u.cols(), rng, 10.0) * u.transpose() -
                 v * random_spd(v.cols(), rng, 10.0) * v.transpose() + u * c * v.transpose() +
                 v * c.transpose() * u.transpose();
      symmetrize(a);
      return a;
    };
    const Matrix a = indefinite_on(x);
    const Matrix b = indefinite_on(complement_basis(y));
    Matrix sum = p.transpose() * a * p + ip.transpose() * b * ip;
    symmetrize(sum);
    m.worst = std::min(m.worst, spectral_margin(sum));
    m.secondary = std::min(m.secondary, std::min(min_eigenvalue(a), min_eigenvalue(b)));
    ++m.trials;
  }
  return m;
}

Measurement derivative_checks(Rng& rng) {
  std::vector<ProblemPtr> problems;
  for (const char* sel : {"hilbert:6", "tridiag:10", "rosenbrock:10", "powell:8"}) {
    problems.push_back(make_builtin_problem(sel));
  }
  auto data = std::make_shared<SvmDataset>();
  {
    const Index rows = 40;
    const Index cols = 6;
    std::vector<std::vector<SparseRows::Entry>> entries(static_cast<std::size_t>(rows));
    for (Index i = 0; i < rows; ++i) {
      for (Index j = 0; j < cols; ++j) {
        if (uniform(rng, 0.0, 1.0) < 0.7) {
          entries[static_cast<std::size_t>(i)].push_back({j, uniform(rng, -1.0, 1.0)});
        }
      }
      data->y.push_back(uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    }
    data->x = SparseRows(cols, entries);
    data->source = "random";
  }
  problems.push_back(std::make_shared<LogisticSvm>(data, Regularizer::l2(), 0.5));
  problems.push_back(std::make_shared<LogisticSvm>(data, Regularizer::pseudo_huber(0.1), 0.5));

  Measurement m;
  for (const ProblemPtr& p : problems) {
    const Vector x0 = p->start();
    for (int k = 0; k < 6; ++k) {
      const Vector x = k == 0 ? x0 : Vector(x0 + 0.5 * random_matrix(p->dim(), 1, rng).col(0));
      const DerivativeReport r = check_derivatives(*p, x, 1e-5, rng());
      m.worst = std::max(m.worst, r.gradient_error);
      m.secondary = std::max({m.secondary, r.hessian_error, r.linearity_error});
      ++m.trials;
    }
  }
  return m;
}

}  // namespace qunac::verify
