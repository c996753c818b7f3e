#include "qunac/preconditioners.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qunac {

void check_normalized(const TallBlock& s, const TallBlock& s_bar) {
  if (s.rows() != s_bar.rows() || s.cols() != s_bar.cols()) {
    throw std::invalid_argument("normalized block: S and S_bar differ in shape");
  }
  if (s.cols() == 0) return;
  const Matrix m = s.transpose() * s_bar;
  const double err = (m - Matrix::Identity(s.cols(), s.cols())).cwiseAbs().maxCoeff();
  if (!(err <= kNormalizationTolerance)) {
    throw ContractViolation("S^T S_bar deviates from the identity by " + std::to_string(err));
  }
}

Index normalized_prefix(const TallBlock& s, const TallBlock& s_bar) {
  if (s.rows() != s_bar.rows() || s.cols() != s_bar.cols()) {
    throw std::invalid_argument("normalized block: S and S_bar differ in shape");
  }
  const Matrix m = s.transpose() * s_bar;
  for (Index k = 0; k < m.cols(); ++k) {
    for (Index j = 0; j <= k; ++j) {
      const double target = j == k ? 1.0 : 0.0;
      if (!(std::abs(m(k, j) - target) <= kNormalizationTolerance &&
            std::abs(m(j, k) - target) <= kNormalizationTolerance)) {
        return k;
      }
    }
  }
  return m.cols();
}

DenseSymmetric full_memory_update(const DenseSymmetric& h, const TallBlock& s,
                                  const TallBlock& s_bar) {
  if (s.rows() != h.dim()) throw std::invalid_argument("full_memory_update: dimension mismatch");
  check_normalized(s, s_bar);
  if (s.cols() == 0) return h;

  const Matrix h_under = h.matrix() * s_bar;
  Matrix core = s_bar.transpose() * h_under;
  core.diagonal().array() += 1.0;
  Matrix out = h.matrix();
  const Matrix sc = s * core;
  out.noalias() += sc * s.transpose();
  out.noalias() -= h_under * s.transpose();
  out.noalias() -= s * h_under.transpose();
  return DenseSymmetric(std::move(out));
}

LimitedMemoryPrecond::LimitedMemoryPrecond(LinearOperator h0, std::size_t max_blocks)
    : h0_(std::move(h0)), max_blocks_(max_blocks) {
  if (max_blocks_ == 0) throw std::invalid_argument("LimitedMemoryPrecond: capacity must be >= 1");
  if (!h0_.apply) throw std::invalid_argument("LimitedMemoryPrecond: missing base operator");
}

LimitedMemoryPrecond LimitedMemoryPrecond::with_block(const TallBlock& s,
                                                      const TallBlock& s_bar) const {
  if (s.rows() != dim()) throw std::invalid_argument("with_block: dimension mismatch");
  check_normalized(s, s_bar);
  LimitedMemoryPrecond out = *this;
  if (s.cols() == 0) return out;
  out.blocks_.push_back(std::make_shared<const Block>(Block{s, s_bar}));
  while (out.blocks_.size() > max_blocks_) out.blocks_.erase(out.blocks_.begin());
  return out;
}

LimitedMemoryPrecond LimitedMemoryPrecond::with_base(LinearOperator h0) const {
  if (h0.dim != dim()) throw std::invalid_argument("with_base: dimension mismatch");
  LimitedMemoryPrecond out = *this;
  out.h0_ = std::move(h0);
  return out;
}

LimitedMemoryPrecond LimitedMemoryPrecond::cleared() const {
  LimitedMemoryPrecond out = *this;
  out.blocks_.clear();
  return out;
}

Vector LimitedMemoryPrecond::apply_level(std::size_t level, const Vector& v) const {
  if (level == 0) return h0_(v);
  const Block& b = *blocks_[level - 1];
  const Vector vs = b.s.transpose() * v;
  const Vector z = v - b.s_bar * vs;
  const Vector r = apply_level(level - 1, z);
  const Vector rs = b.s_bar.transpose() * r;
  return r + b.s * (vs - rs);
}

Vector LimitedMemoryPrecond::apply(const Vector& v) const {
  if (v.size() != dim()) throw std::invalid_argument("lqunac_apply: dimension mismatch");
  return apply_level(blocks_.size(), v);
}

Vector lqunac_apply(const LimitedMemoryPrecond& pre, const Vector& v) { return pre.apply(v); }

Vector two_loop_apply(const LinearOperator& h0, std::span<const CorrectionPair> pairs,
                      const Vector& v, TwoLoopMode mode) {
  if (v.size() != h0.dim) throw std::invalid_argument("two_loop_apply: dimension mismatch");
  const std::size_t m = pairs.size();
  std::vector<double> rho(m, 1.0);
  std::vector<double> alpha(m, 0.0);
  if (mode == TwoLoopMode::RawSecant) {
    for (std::size_t i = 0; i < m; ++i) {
      const double sy = pairs[i].s_bar.dot(pairs[i].s);
      if (!(sy > 0.0)) throw CurvatureError("two_loop_apply: non-positive curvature s_bar^T s");
      rho[i] = 1.0 / sy;
    }
  }

  Vector q = v;
  for (std::size_t k = m; k-- > 0;) {
    alpha[k] = rho[k] * pairs[k].s.dot(q);
    q.noalias() -= alpha[k] * pairs[k].s_bar;
  }
  Vector r = h0(q);
  for (std::size_t k = 0; k < m; ++k) {
    const double beta = rho[k] * pairs[k].s_bar.dot(r);
    r.noalias() += (alpha[k] - beta) * pairs[k].s;
  }
  return r;
}

}  // namespace qunac
