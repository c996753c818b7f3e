#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "qunac/linalg.hpp"

namespace qunac {

/// Largest |(S^T S_bar - I)_ij| accepted by the normalized-block routines.
inline constexpr double kNormalizationTolerance = 1e-6;

/// Throws ContractViolation unless S^T S_bar = I within kNormalizationTolerance.
void check_normalized(const TallBlock& s, const TallBlock& s_bar);

/// Largest m such that the leading m x m block of S^T S_bar equals I within
/// kNormalizationTolerance.
Index normalized_prefix(const TallBlock& s, const TallBlock& s_bar);

/// Full-memory inverse quNac update for a normalized block (S^T S_bar = I,
/// S_bar = He S):
///
///   H + S (I + S_bar^T H S_bar) S^T - (H S_bar) S^T - S (H S_bar)^T.
///
/// O(n^2 q); an empty block returns H unchanged.
DenseSymmetric full_memory_update(const DenseSymmetric& h, const TallBlock& s,
                                  const TallBlock& s_bar);

/// Explicit-matrix preconditioner.
class FullMemoryPrecond {
 public:
  explicit FullMemoryPrecond(DenseSymmetric h) : h_(std::move(h)) {}

  const DenseSymmetric& matrix() const noexcept { return h_; }
  Index dim() const noexcept { return h_.dim(); }
  Vector apply(const Vector& v) const { return h_.apply(v); }

  FullMemoryPrecond updated(const TallBlock& s, const TallBlock& s_bar) const {
    return FullMemoryPrecond(full_memory_update(h_, s, s_bar));
  }

 private:
  DenseSymmetric h_;
};

/// Operator form: a base operator H0 followed by inverse quNac corrections
/// from the most recent normalized blocks. With the default capacity of one
/// block only the latest PCG harvest is kept. Older blocks, when retained,
/// nest: block j uses the operator built from blocks 0..j-1 as its base.
///
/// Values are immutable; the block storage is shared between copies.
class LimitedMemoryPrecond {
 public:
  struct Block {
    TallBlock s;
    TallBlock s_bar;
  };

  LimitedMemoryPrecond(LinearOperator h0, std::size_t max_blocks = 1);

  Index dim() const noexcept { return h0_.dim; }
  std::size_t max_blocks() const noexcept { return max_blocks_; }
  std::size_t block_count() const noexcept { return blocks_.size(); }
  const Block& block(std::size_t i) const { return *blocks_[i]; }
  const LinearOperator& base() const noexcept { return h0_; }

  /// Copy with `(s, s_bar)` appended, dropping the oldest block beyond
  /// capacity. Empty blocks are ignored. Throws ContractViolation when the
  /// block is not normalized.
  LimitedMemoryPrecond with_block(const TallBlock& s, const TallBlock& s_bar) const;
  /// Copy with a different base operator.
  LimitedMemoryPrecond with_base(LinearOperator h0) const;
  /// Copy without stored blocks.
  LimitedMemoryPrecond cleared() const;

  Vector apply(const Vector& v) const;

 private:
  Vector apply_level(std::size_t level, const Vector& v) const;

  LinearOperator h0_;
  std::size_t max_blocks_;
  std::vector<std::shared_ptr<const Block>> blocks_;
};

/// One application of the limited-memory operator:
///   v^S = S^T v; z = v - S_bar v^S; r = H0 z; r^S = S_bar^T r; z = r + S (v^S - r^S)
/// Throws std::invalid_argument on dimension mismatch.
Vector lqunac_apply(const LimitedMemoryPrecond& pre, const Vector& v);

/// A correction pair for the two-loop recursion: (delta, gamma) for raw
/// secant pairs, (s, He s) with s^T He s = 1 for normalized pairs.
struct CorrectionPair {
  Vector s;
  Vector s_bar;
};

enum class TwoLoopMode {
  /// Pairs are pre-normalized so that rho_i = 1.
  Normalized,
  /// Classic L-BFGS with rho_i = 1 / (s_bar_i^T s_i); throws CurvatureError
  /// when that denominator is not positive.
  RawSecant,
};

/// L-BFGS two-loop recursion; `pairs` ordered oldest to newest.
Vector two_loop_apply(const LinearOperator& h0, std::span<const CorrectionPair> pairs,
                      const Vector& v, TwoLoopMode mode);

}  // namespace qunac
