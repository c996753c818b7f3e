#include "qunac/verify/oracles.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qunac::verify {

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  }
  return m;
}

Matrix random_spd(Index n, Rng& rng, double condition) {
  const Eigen::HouseholderQR<Matrix> qr(random_matrix(n, n, rng));
  const Matrix u = qr.householderQ();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector eig(n);
  for (Index i = 0; i < n; ++i) eig[i] = std::pow(condition, unit(rng));
  if (n > 1) {
    eig[0] = 1.0;
    eig[n - 1] = condition;
  }
  Matrix m = u * eig.asDiagonal() * u.transpose();
  symmetrize(m);
  return m;
}

Matrix random_symmetric(Index n, Rng& rng) {
  Matrix m = random_matrix(n, n, rng);
  m = 0.5 * (m + m.transpose()).eval();
  return m;
}

Matrix random_tall_block(Index n, Index q, Rng& rng, double condition) {
  const Eigen::HouseholderQR<Matrix> left(random_matrix(n, q, rng));
  const Eigen::HouseholderQR<Matrix> right(random_matrix(q, q, rng));
  const Matrix u = left.householderQ() * Matrix::Identity(n, q);
  const Matrix v = right.householderQ();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Vector d(q);
  for (Index i = 0; i < q; ++i) d[i] = std::pow(condition, unit(rng));
  return u * d.asDiagonal() * v.transpose();
}

Matrix q_orthogonalize(const Matrix& q_mat, Matrix block) {
  for (Index j = 0; j < block.cols(); ++j) {
    // Two passes of modified Gram-Schmidt in the Q inner product.
    for (int pass = 0; pass < 2; ++pass) {
      for (Index i = 0; i < j; ++i) {
        const Vector qi = q_mat * block.col(i);
        const double coef = qi.dot(block.col(j)) / qi.dot(block.col(i));
        block.col(j) -= coef * block.col(i);
      }
    }
    block.col(j) /= std::sqrt(block.col(j).dot(q_mat * block.col(j)));
  }
  return block;
}

Matrix random_conjugate_block(const Matrix& q_mat, Index cols, Rng& rng) {
  return q_orthogonalize(q_mat, random_matrix(q_mat.rows(), cols, rng));
}

Matrix least_change_qp(const Matrix& w, const Matrix& s, const Matrix& r) {
  const Index n = w.rows();
  const Index q = s.cols();
  const Matrix w_inv = dense_inverse(w);

  std::vector<std::pair<Index, Index>> basis;
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i <= j; ++i) basis.emplace_back(i, j);
  }
  const auto nb = static_cast<Index>(basis.size());
  const auto basis_matrix = [&](Index a) {
    Matrix b = Matrix::Zero(n, n);
    const auto [i, j] = basis[static_cast<std::size_t>(a)];
    b(i, j) = 1.0;
    b(j, i) = 1.0;
    return b;
  };

  Matrix k(nb, nb);
  for (Index a = 0; a < nb; ++a) {
    const Matrix t = w_inv * basis_matrix(a) * w_inv;
    for (Index b = 0; b < nb; ++b) {
      const auto [i, j] = basis[static_cast<std::size_t>(b)];
      k(a, b) = i == j ? t(i, i) : t(i, j) + t(j, i);
    }
  }

  // Rows of the constraint E S = R S, ordered column-major over (row, col).
  Matrix a(n * q, nb);
  for (Index c = 0; c < nb; ++c) {
    const Matrix bs = basis_matrix(c) * s;
    for (Index col = 0; col < q; ++col) a.block(col * n, c, n, 1) = bs.col(col);
  }
  const Matrix rs = r * s;
  Vector rhs = Vector::Zero(nb + n * q);
  for (Index col = 0; col < q; ++col) rhs.segment(nb + col * n, n) = rs.col(col);

  Matrix kkt = Matrix::Zero(nb + n * q, nb + n * q);
  kkt.topLeftCorner(nb, nb) = k;
  kkt.topRightCorner(nb, n * q) = a.transpose();
  kkt.bottomLeftCorner(n * q, nb) = a;
  const Vector sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(kkt).solve(rhs);

  Matrix e = Matrix::Zero(n, n);
  for (Index c = 0; c < nb; ++c) {
    const auto [i, j] = basis[static_cast<std::size_t>(c)];
    e(i, j) = sol[c];
    e(j, i) = sol[c];
  }
  return e;
}

double weighted_frobenius(const Matrix& w_inv, const Matrix& e) {
  const Matrix t = w_inv * e;
  return std::sqrt(std::max(0.0, (t * t).trace()));
}

Matrix random_null_perturbation(const Matrix& s, Rng& rng) {
  const Matrix z = complement_basis(s);
  const Matrix m = random_symmetric(z.cols(), rng);
  return z * m * z.transpose();
}

double min_eigenvalue(const Matrix& m) {
  const Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

Index numerical_rank(const Matrix& m, double rel_tol) {
  const Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < sv.size(); ++i) r += sv[i] > rel_tol * sv[0] ? 1 : 0;
  return r;
}

Matrix dense_inverse(const Matrix& m) { return Eigen::FullPivLU<Matrix>(m).inverse(); }

Matrix dfp_inverse_update(const Matrix& h, const Vector& delta, const Vector& gamma) {
  const Vector hy = h * gamma;
  return h + delta * delta.transpose() / delta.dot(gamma) - hy * hy.transpose() / gamma.dot(hy);
}

Matrix dfp_direct_update(const Matrix& b, const Vector& delta, const Vector& gamma) {
  const Index n = b.rows();
  const double r = 1.0 / gamma.dot(delta);
  const Matrix left = Matrix::Identity(n, n) - r * gamma * delta.transpose();
  return left * b * left.transpose() + r * gamma * gamma.transpose();
}

Matrix materialize(const LinearOperator& op) {
  Matrix m(op.dim, op.dim);
  for (Index j = 0; j < op.dim; ++j) m.col(j) = op(Vector::Unit(op.dim, j));
  return m;
}

Matrix oblique_projection(const Matrix& x, const Matrix& y) {
  return x * Eigen::FullPivLU<Matrix>(y.transpose() * x).solve(y.transpose());
}

Matrix range_basis(const Matrix& m, double rel_tol) {
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const Index r = numerical_rank(m, rel_tol);
  return svd.matrixU().leftCols(r);
}

Matrix complement_basis(const Matrix& m, double rel_tol) {
  const Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeFullU);
  const Index r = numerical_rank(m, rel_tol);
  return svd.matrixU().rightCols(m.rows() - r);
}

}  // namespace qunac::verify
