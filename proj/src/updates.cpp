#include "qunac/updates.hpp"

#include <stdexcept>
#include <string>

namespace qunac {
namespace {

void check_shapes(Index n, const TallBlock& a, const TallBlock& b, const char* who) {
  if (a.rows() != n || b.rows() != n || a.cols() != b.cols()) {
    throw std::invalid_argument(std::string(who) + ": block shapes do not match the estimate");
  }
}

// Factor of the leading Gram block honouring `policy`.
GramFactor factor_gram(const Matrix& m, RankPolicy policy, const char* which) {
  GramFactor f = GramFactor::factor_prefix(m);
  if (f.size() == 0 || (policy == RankPolicy::Strict && f.size() < m.rows())) {
    throw RankDeficientSampling(which, static_cast<std::size_t>(f.size()));
  }
  return f;
}

// genquNac(G, Z -> Y): the estimate that maps Z to Y and stays closest to G
// in the norm weighted by the operator sending Z to Y.
//
//   G+ = Y M^{-1} Y^T + (I - Y M^{-1} Z^T) G (I - Z M^{-1} Y^T),  M = Z^T Y
//      = G - A (G Z)^T - (G Z) A^T + A (M + Z^T G Z) A^T,        A = Y M^{-1}
Matrix action_update(const Matrix& g, const TallBlock& z, const TallBlock& y,
                     const Matrix& m, const GramFactor& factor) {
  const Matrix gz = g * z;
  const Matrix a = factor.solve(Matrix(y.transpose())).transpose();
  Matrix inner = m + gram(z, gz);
  Matrix out = g;
  out.noalias() -= a * gz.transpose();
  out.noalias() -= gz * a.transpose();
  const Matrix ai = a * inner;
  out.noalias() += ai * a.transpose();
  symmetrize(out);
  return out;
}

}  // namespace

UpdateResult least_change_update(const DenseSymmetric& g, const TallBlock& s,
                                 const TallBlock& qs, const TallBlock& ws, RankPolicy policy) {
  const Index n = g.dim();
  check_shapes(n, s, qs, "least_change_update");
  check_shapes(n, s, ws, "least_change_update");
  const GramFactor factor = factor_gram(gram(s, ws), policy, "S^T W S");
  const Index q = factor.size();
  const auto sq = s.leftCols(q);
  const auto wsq = ws.leftCols(q);

  // R S = (G - Q) S; B = W S (S^T W S)^{-1}
  const Matrix rs = g.matrix() * sq - qs.leftCols(q);
  const Matrix b = factor.solve(Matrix(wsq.transpose())).transpose();
  const Matrix srs = gram(sq, rs);

  Matrix out = g.matrix();
  out.noalias() -= b * rs.transpose();
  out.noalias() -= rs * b.transpose();
  const Matrix bs = b * srs;
  out.noalias() += bs * b.transpose();
  return {DenseSymmetric(std::move(out)), 3 * q, q};
}

UpdateResult qunac_direct(const DenseSymmetric& g, const TallBlock& s, const TallBlock& qs,
                          RankPolicy policy) {
  check_shapes(g.dim(), s, qs, "qunac_direct");
  const Matrix m = gram(s, qs);
  const GramFactor factor = factor_gram(m, policy, "S^T Q S");
  const Index q = factor.size();
  Matrix out = action_update(g.matrix(), s.leftCols(q), qs.leftCols(q), m.topLeftCorner(q, q),
                             factor);
  return {DenseSymmetric(std::move(out)), 2 * q, q};
}

UpdateResult qunac_inverse(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs,
                           RankPolicy policy) {
  check_shapes(h.dim(), s, qs, "qunac_inverse");
  const Matrix m = gram(qs, s);
  const GramFactor factor = factor_gram(m, policy, "S^T Q S");
  const Index q = factor.size();
  Matrix out = action_update(h.matrix(), qs.leftCols(q), s.leftCols(q), m.topLeftCorner(q, q),
                             factor);
  return {DenseSymmetric(std::move(out)), 2 * q, q};
}

UpdateResult qunac_direct_inverse(const DenseSymmetric& h, const TallBlock& s,
                                  const TallBlock& qs, RankPolicy policy) {
  check_shapes(h.dim(), s, qs, "qunac_direct_inverse");
  const Matrix m1 = gram(s, qs);
  const GramFactor f1 = factor_gram(m1, policy, "S^T Q S");
  Index q = f1.size();

  const Matrix hqs_full = h.matrix() * qs.leftCols(q);
  const Matrix m2 = gram(qs.leftCols(q), hqs_full);
  const GramFactor f2 = factor_gram(m2, policy, "S^T Q H Q S");
  q = f2.size();

  // Rank decisions above use the caller's columns; the evaluation below uses
  // orthonormal bases of the same spans, which keeps S^T Q H Q S near cond(H).
  const Index n = h.dim();
  const Eigen::HouseholderQR<Matrix> qr_s(s.leftCols(q));
  const Matrix so = qr_s.householderQ() * Matrix::Identity(n, q);
  const Matrix r_s = so.transpose() * s.leftCols(q);
  // Q So = (Q S) R_s^{-1}
  const Matrix qso =
      r_s.transpose().triangularView<Eigen::Lower>().solve(Matrix(qs.leftCols(q).transpose()))
          .transpose();
  const Eigen::HouseholderQR<Matrix> qr_y(qs.leftCols(q));
  const Matrix yo = qr_y.householderQ() * Matrix::Identity(n, q);

  // H - U K^{-1} U^T with U = H Yo, then the sandwich correction that removes
  // the residual Yo^T M left by rounding.
  const Matrix u = h.matrix() * yo;
  const GramFactor k = GramFactor::factor(gram(yo, u));
  Matrix out = h.matrix();
  out.noalias() -= u * k.solve(Matrix(u.transpose()));
  const Matrix residual = yo.transpose() * out;
  out.noalias() -= u * k.solve(residual);
  symmetrize(out);

  const GramFactor g = GramFactor::factor(gram(so, qso));
  out.noalias() += so * g.solve(Matrix(so.transpose()));
  return {DenseSymmetric(std::move(out)), 2 * q, q};
}

UpdateResult family_blend(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs,
                          FamilyBlend blend, RankPolicy policy) {
  const double lambda = blend.lambda;
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("family_blend: lambda must lie in [0, 1]");
  }
  if (lambda == 0.0) return qunac_inverse(h, s, qs, policy);
  if (lambda == 1.0) return qunac_direct_inverse(h, s, qs, policy);

  UpdateResult direct = qunac_direct_inverse(h, s, qs, policy);
  const Index q = direct.columns_used;
  UpdateResult inverse = qunac_inverse(h, s.leftCols(q), qs.leftCols(q), policy);
  Matrix out = lambda * direct.matrix.matrix() + (1.0 - lambda) * inverse.matrix.matrix();
  return {DenseSymmetric(std::move(out)), 3 * q, q};
}

TallBlock family_correction(const DenseSymmetric& h, const TallBlock& s, const TallBlock& qs) {
  check_shapes(h.dim(), s, qs, "family_correction");
  const GramFactor f1 = factor_gram(gram(s, qs), RankPolicy::Strict, "S^T Q S");
  const Matrix hqs = h.matrix() * qs;
  const Matrix m2 = gram(qs, hqs);
  const GramFactor f2 = factor_gram(m2, RankPolicy::Strict, "S^T Q H Q S");
  // (proj_{S,Q} Q - I) H Q S (S^T Q H Q S)^{-1/2}, with the inverse square
  // root taken as L^{-T} from m2 = L L^T.
  const Matrix x = s * f1.solve(m2) - hqs;
  return f2.solve_lower(Matrix(x.transpose())).transpose();
}

}  // namespace qunac
