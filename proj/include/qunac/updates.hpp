#pragma once

#include "qunac/linalg.hpp"

namespace qunac {

/// What an update does when the Gram matrix of the sampling block is not
/// numerically positive definite.
enum class RankPolicy {
  /// Keep the longest leading set of columns whose Gram block factors;
  /// throw RankDeficientSampling only when no column survives.
  DropTrailing,
  /// Throw RankDeficientSampling on any failed pivot.
  Strict,
};

struct UpdateResult {
  DenseSymmetric matrix;
  /// Upper bound on rank(matrix - previous estimate): 3q or 2q.
  Index rank_bound = 0;
  /// Number of leading sampling columns the update actually used.
  Index columns_used = 0;
};

/// Least-change update under the W-weighted Frobenius norm:
///
///   G + E = Q + (I - W P)(G - Q)(I - P W),   P = S (S^T W S)^{-1} S^T,
///
/// evaluated from G, S, Q S and W S only. The result satisfies the action
/// constraint (G + E) S = Q S and is a rank-3q modification of G.
UpdateResult least_change_update(const DenseSymmetric& g, const TallBlock& s,
                                 const TallBlock& qs, const TallBlock& ws,
                                 RankPolicy policy = RankPolicy::DropTrailing);

/// Direct quNac update: the least-change update with W = Q. Keeps G positive
/// definite whenever G is and S^T Q S is. For q = 1 this is DFP.
UpdateResult qunac_direct(const DenseSymmetric& g, const TallBlock& s, const TallBlock& qs,
                          RankPolicy policy = RankPolicy::DropTrailing);

/// Inverse quNac update: estimates Q^{-1} with the action H_{k+1} (Q S) = S.
///
///   H_{k+1} = P + (I - P Q) H (I - Q P),   P = S (S^T Q S)^{-1} S^T.
///
/// For q = 1 this is the BFGS inverse update with (delta, gamma) = (S, Q S).
UpdateResult qunac_inverse(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs,
                           RankPolicy policy = RankPolicy::DropTrailing);

/// Inverse of the direct update obtained through Woodbury, using H only:
///
///   H_{k+1} = H + proj_{S,Q} - H Q proj_{S,QHQ} Q H.
///
/// Two Gram matrices are factored (S^T Q S and S^T Q H Q S); the
/// RankDeficientSampling error names the one that failed.
UpdateResult qunac_direct_inverse(const DenseSymmetric& h, const TallBlock& s,
                                  const TallBlock& qs,
                                  RankPolicy policy = RankPolicy::DropTrailing);

struct FamilyBlend {
  double lambda = 0.0;
};

/// lambda * qunac_direct_inverse + (1 - lambda) * qunac_inverse.
/// Throws std::invalid_argument for lambda outside [0, 1].
UpdateResult family_blend(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs,
                          FamilyBlend blend, RankPolicy policy = RankPolicy::DropTrailing);

/// The n x q factor V with qunac_direct_inverse = qunac_inverse - V V^T, so
/// that every family member is qunac_inverse - lambda V V^T. Uses the
/// Strict policy.
TallBlock family_correction(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs);

}  // namespace qunac
