#include "qunac/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qunac {

void symmetrize(Matrix& m) {
  const Index n = m.rows();
  for (Index j = 0; j < n; ++j) {
    for (Index i = j + 1; i < n; ++i) {
      const double avg = 0.5 * (m(i, j) + m(j, i));
      m(i, j) = avg;
      m(j, i) = avg;
    }
  }
}

DenseSymmetric::DenseSymmetric(Matrix m) : m_(std::move(m)) {
  if (m_.rows() == 0 || m_.rows() != m_.cols()) {
    throw std::invalid_argument("DenseSymmetric requires a non-empty square matrix");
  }
  symmetrize(m_);
}

DenseSymmetric DenseSymmetric::identity(Index n, double scale) {
  return DenseSymmetric(scale * Matrix::Identity(n, n));
}

LinearOperator LinearOperator::from_matrix(Matrix m) {
  const Index n = m.rows();
  return {n, [m = std::move(m)](const Vector& v) -> Vector { return m * v; }};
}

LinearOperator LinearOperator::scaled_identity(Index n, double scale) {
  return {n, [scale](const Vector& v) -> Vector { return scale * v; }};
}

SparseRows::SparseRows(Index cols, const std::vector<std::vector<Entry>>& rows) : cols_(cols) {
  if (cols < 0) throw std::invalid_argument("SparseRows: negative column count");
  offsets_.reserve(rows.size() + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index prev = -1;
    for (const Entry& e : rows[r]) {
      if (e.index < 0 || e.index >= cols) {
        throw std::invalid_argument("SparseRows: index out of range in row " + std::to_string(r));
      }
      if (e.index <= prev) {
        throw std::invalid_argument("SparseRows: indices not strictly increasing in row " +
                                    std::to_string(r));
      }
      prev = e.index;
      entries_.push_back(e);
    }
    offsets_.push_back(entries_.size());
  }
}

std::span<const SparseRows::Entry> SparseRows::row(Index i) const {
  const auto b = offsets_[static_cast<std::size_t>(i)];
  const auto e = offsets_[static_cast<std::size_t>(i) + 1];
  return {entries_.data() + b, e - b};
}

Vector SparseRows::multiply(const Vector& v) const {
  Vector out(rows());
  for (Index i = 0; i < rows(); ++i) {
    double acc = 0.0;
    for (const Entry& e : row(i)) acc += e.value * v[e.index];
    out[i] = acc;
  }
  return out;
}

Vector SparseRows::multiply_transpose(const Vector& u) const {
  Vector out = Vector::Zero(cols_);
  for (Index i = 0; i < rows(); ++i) {
    const double ui = u[i];
    if (ui == 0.0) continue;
    for (const Entry& e : row(i)) out[e.index] += e.value * ui;
  }
  return out;
}

namespace {

// Column-oriented Cholesky. Returns the number of pivots that passed; `l`
// holds the factor of that leading block.
Index cholesky_prefix(const Matrix& m, Matrix& l) {
  const Index n = m.rows();
  l = Matrix::Zero(n, n);
  if (n == 0) return 0;
  const double max_diag = m.diagonal().maxCoeff();
  const double tol = kGramPivotTolerance * std::max(max_diag, 0.0);
  for (Index j = 0; j < n; ++j) {
    double d = m(j, j);
    for (Index k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > tol) || max_diag <= 0.0) {
      l.conservativeResize(j, j);
      return j;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return n;
}

}  // namespace

GramFactor GramFactor::factor(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("GramFactor: matrix not square");
  Matrix l;
  const Index k = cholesky_prefix(m, l);
  if (k < m.rows()) throw NotPositiveDefinite(static_cast<std::size_t>(k));
  return GramFactor(std::move(l));
}

GramFactor GramFactor::factor_prefix(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("GramFactor: matrix not square");
  Matrix l;
  cholesky_prefix(m, l);
  return GramFactor(std::move(l));
}

Vector GramFactor::solve(const Vector& y) const {
  Vector x = lower_.triangularView<Eigen::Lower>().solve(y);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix GramFactor::solve(const Matrix& y) const {
  Matrix x = lower_.triangularView<Eigen::Lower>().solve(y);
  lower_.transpose().triangularView<Eigen::Upper>().solveInPlace(x);
  return x;
}

Matrix GramFactor::solve_lower(const Matrix& y) const {
  return lower_.triangularView<Eigen::Lower>().solve(y);
}

Matrix gram(const TallBlock& s, const TallBlock& b) {
  if (s.rows() != b.rows() || s.cols() != b.cols()) {
    throw std::invalid_argument("gram: blocks must have identical shape");
  }
  Matrix m = s.transpose() * b;
  symmetrize(m);
  return m;
}

Vector proj_apply(const TallBlock& s, const GramFactor& factor, const Vector& v) {
  if (v.size() != s.rows()) throw std::invalid_argument("proj_apply: dimension mismatch");
  if (factor.size() != s.cols()) throw std::invalid_argument("proj_apply: factor size mismatch");
  return s * factor.solve(Vector(s.transpose() * v));
}

double relative_difference(const Matrix& a, const Matrix& b) {
  const double nb = b.norm();
  return (a - b).norm() / (nb > 0.0 ? nb : 1.0);
}

}  // namespace qunac
