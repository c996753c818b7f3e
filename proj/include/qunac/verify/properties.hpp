#pragma once

// Randomized property checks over the update formulas, preconditioners,
// PCG and problem instances. Each returns the worst value observed; the
// caller owns the tolerance. Shared by `qunac selftest`, the unit tests and
// the acceptance suite.

#include "qunac/verify/oracles.hpp"

namespace qunac::verify {

struct Measurement {
  /// Worst observed value (largest error, or smallest margin where noted).
  double worst = 0.0;
  /// Second statistic where a property has two parts.
  double secondary = 0.0;
  int trials = 0;
};

/// max ||(PW)^2 - PW||_F / ||PW||_F, P = S (S^T W S)^{-1} S^T, n <= 30, q <= 8.
Measurement projection_idempotence(Rng& rng, int trials);

/// Relative distance of proj_apply output from its least-squares fit in span(S).
Measurement projection_range(Rng& rng, int trials);

/// max ||G+ S - Q S||_F / ||Q S||_F for qunac_direct.
Measurement direct_action(Rng& rng, int trials);

/// max ||H+ Q S - S||_F / ||S||_F for qunac_inverse and family_blend at
/// lambda in {0, 0.25, 0.5, 1}.
Measurement inverse_action(Rng& rng, int trials);

/// worst: relative Frobenius distance between least_change_update and the
/// QP oracle. secondary: largest ||E||_W - ||F||_W over random feasible F.
Measurement least_change_optimality(Rng& rng, int trials, int competitors, Index max_n = 10,
                                    Index max_q = 3);

/// worst: smallest lambda_min(G) / ||G||_2 seen along chained qunac_direct and
/// qunac_inverse sequences of `steps` updates (a margin, larger is better).
Measurement pd_chain(Rng& rng, int trials, int steps);

/// max ||G_final - Q||_F / ||Q||_F after direct updates with conjugate blocks
/// spanning R^n, n <= max_n.
Measurement quadratic_hereditary(Rng& rng, int trials, Index max_n = 16);

/// Block update vs sequential single-column updates on Q-orthogonal columns.
/// worst: direct (qunac_direct columns). secondary: inverse (BFGS columns).
Measurement unraveling(Rng& rng, int trials, Index n, Index q);

/// max (numerical rank of the correction - documented bound); <= 0 passes.
Measurement rank_bounds(Rng& rng, int trials);

/// worst: qunac_inverse vs bfgs_update. secondary: qunac_direct_inverse vs
/// the DFP inverse formula (q = 1, relative Frobenius).
Measurement single_column_equivalence(Rng& rng, int trials);

/// qunac_direct_inverse vs dense inversion of qunac_direct(H^{-1}).
Measurement woodbury(Rng& rng, int trials, double condition = 1e2);

/// lqunac_apply vs normalized two-loop recursion on PCG-produced blocks.
Measurement lqunac_two_loop(Rng& rng, int trials);

/// worst: materialized limited-memory operator vs full_memory_update.
/// secondary: smallest eigenvalue of the materialized operator (margin).
Measurement operator_matrix_agreement(Rng& rng, int trials);

/// worst: max |s_i^T A s_j| over i != j for PCG columns (unit A-norm).
/// secondary: max normalized |r_i^T M^{-1} r_j|.
Measurement pcg_conjugacy(Rng& rng, int trials);

/// Smallest eigenvalue of P^T A P + (I - P)^T B (I - P) with A, B indefinite
/// but positive definite on Range(P), Range(I - P) (a margin).
Measurement lemma_posdef(Rng& rng, int trials);

/// worst: largest gradient error, secondary: largest Hessian-vector error
/// over every built-in problem at its start and five random points.
Measurement derivative_checks(Rng& rng);

}  // namespace qunac::verify
