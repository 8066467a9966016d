// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_LINALG_HPP
#define HAMRED_LINALG_HPP

#include <span>
#include <stdexcept>
#include <string>
#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hamred
{

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

// All library failures (bad input, rank deficiency, failed factorizations) surface as this.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Canonical symplectic map J = [0 I; -I 0] applied columnwise: (q, p) -> (p, -q). J is never
// stored densely at full order.
template <typename Derived>
typename Derived::PlainObject ApplyJ(const Eigen::MatrixBase<Derived> &x)
{
  const Index m = x.rows() / 2;
  if (2 * m != x.rows())
  {
    throw Error("symplectic map requires an even number of rows, got " +
                std::to_string(x.rows()));
  }
  typename Derived::PlainObject y(x.rows(), x.cols());
  y.topRows(m) = x.bottomRows(m);
  y.bottomRows(m) = -x.topRows(m);
  return y;
}

// Jᵀ = -J: (q, p) -> (-p, q).
template <typename Derived>
typename Derived::PlainObject ApplyJt(const Eigen::MatrixBase<Derived> &x)
{
  return -ApplyJ(x);
}

// Dense canonical J_n for reduced dimensions only.
Matrix CanonicalJ(Index n);

double MaxAbs(const Matrix &a);

// ‖UᵀU − I‖_max.
double OrthonormalityError(const Matrix &u);

// Thin SVD with descending singular values and a fixed sign convention: the largest-magnitude
// entry of every left singular vector is positive (first occurrence wins on ties).
struct ThinSvd
{
  Matrix u;
  Vector s;
  Matrix v;
};
ThinSvd ComputeThinSvd(const Matrix &a);

// Number of singular values above max(rows, cols)·σ₁·ε.
Index NumericalRank(const Vector &s, Index rows, Index cols);

// sqrt(∫ f(t) dt) by the trapezoid rule on a uniform grid, where f holds squared norms.
double TrapezoidL2(std::span<const double> squared_norms, double dt);

}  // namespace hamred

#endif  // HAMRED_LINALG_HPP
