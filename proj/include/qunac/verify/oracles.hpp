#pragma once

// Independent reference computations used by the property suite, the
// self-test command and the tests. Nothing here calls into the update
// formulas it is meant to check.

#include <cstdint>
#include <random>

#include "qunac/linalg.hpp"

namespace qunac::verify {

using Rng = std::mt19937_64;

Matrix random_matrix(Index rows, Index cols, Rng& rng);

/// Symmetric positive definite with eigenvalues log-uniform in
/// [1, condition] and a random orthogonal eigenbasis.
Matrix random_spd(Index n, Rng& rng, double condition = 100.0);

Matrix random_symmetric(Index n, Rng& rng);

/// Random n x q block U diag(d) V^T with orthonormal U, orthogonal V and d
/// log-uniform in [1, condition].
Matrix random_tall_block(Index n, Index q, Rng& rng, double condition = 10.0);

/// Random n x q block whose columns are mutually Q-orthogonal (Gram-Schmidt
/// in the Q inner product).
Matrix random_conjugate_block(const Matrix& q_mat, Index cols, Rng& rng);

/// Q-orthogonalizes the columns of `block` in order.
Matrix q_orthogonalize(const Matrix& q_mat, Matrix block);

/// Solves min 1/2 tr(W^{-1} E W^{-1} E) subject to E S = R S, E = E^T by
/// vectorizing E over the n(n+1)/2 symmetric basis and solving the KKT
/// normal equations with a rank-revealing decomposition. Returns E.
Matrix least_change_qp(const Matrix& w, const Matrix& s, const Matrix& r);

/// sqrt(tr(W^{-1} E W^{-1} E)) = ||W^{-1/2} E W^{-1/2}||_F for symmetric E.
double weighted_frobenius(const Matrix& w_inv, const Matrix& e);

/// Symmetric N with N S = 0 (random element of the feasible directions).
Matrix random_null_perturbation(const Matrix& s, Rng& rng);

double min_eigenvalue(const Matrix& m);

/// Number of singular values above rel_tol * sigma_max.
Index numerical_rank(const Matrix& m, double rel_tol = 1e-9);

/// Dense inverse through a full-pivot LU.
Matrix dense_inverse(const Matrix& m);

/// Textbook DFP inverse update H + d d^T / (d^T y) - H y y^T H / (y^T H y).
Matrix dfp_inverse_update(const Matrix& h, const Vector& delta, const Vector& gamma);

/// Textbook DFP direct update (I - r y d^T) B (I - r d y^T) + r y y^T, r = 1 / (y^T d).
Matrix dfp_direct_update(const Matrix& b, const Vector& delta, const Vector& gamma);

/// Columns op(e_j).
Matrix materialize(const LinearOperator& op);

/// Oblique projection X (Y^T X)^{-1} Y^T onto span X.
Matrix oblique_projection(const Matrix& x, const Matrix& y);

/// Orthonormal basis of the column space, and of its complement.
Matrix range_basis(const Matrix& m, double rel_tol = 1e-10);
Matrix complement_basis(const Matrix& m, double rel_tol = 1e-10);

}  // namespace qunac::verify
