// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/linalg.hpp"

#include <cmath>
#include <limits>
#include <Eigen/SVD>

namespace hamred
{

Matrix CanonicalJ(Index n)
{
  if (n % 2 != 0)
  {
    throw Error("canonical symplectic matrix needs even dimension, got " + std::to_string(n));
  }
  const Index m = n / 2;
  Matrix j = Matrix::Zero(n, n);
  j.topRightCorner(m, m).setIdentity();
  j.bottomLeftCorner(m, m) = -Matrix::Identity(m, m);
  return j;
}

double MaxAbs(const Matrix &a)
{
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double OrthonormalityError(const Matrix &u)
{
  return MaxAbs(u.transpose() * u - Matrix::Identity(u.cols(), u.cols()));
}

ThinSvd ComputeThinSvd(const Matrix &a)
{
  ThinSvd out;
  if (a.rows() == 0 || a.cols() == 0)
  {
    out.u = Matrix(a.rows(), 0);
    out.s = Vector(0);
    out.v = Matrix(a.cols(), 0);
    return out;
  }
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.u = svd.matrixU();
  out.s = svd.singularValues();
  out.v = svd.matrixV();
  for (Index j = 0; j < out.u.cols(); j++)
  {
    Index imax = 0;
    double best = -1.0;
    for (Index i = 0; i < out.u.rows(); i++)
    {
      const double mag = std::abs(out.u(i, j));
      if (mag > best)
      {
        best = mag;
        imax = i;
      }
    }
    if (out.u(imax, j) < 0.0)
    {
      out.u.col(j) *= -1.0;
      out.v.col(j) *= -1.0;
    }
  }
  return out;
}

Index NumericalRank(const Vector &s, Index rows, Index cols)
{
  if (s.size() == 0 || s(0) <= 0.0)
  {
    return 0;
  }
  const double tol = static_cast<double>(std::max(rows, cols)) * s(0) *
                     std::numeric_limits<double>::epsilon();
  Index r = 0;
  while (r < s.size() && s(r) > tol)
  {
    r++;
  }
  return r;
}

double TrapezoidL2(std::span<const double> squared_norms, double dt)
{
  if (squared_norms.size() < 2)
  {
    return 0.0;
  }
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < squared_norms.size(); k++)
  {
    acc += 0.5 * (squared_norms[k] + squared_norms[k + 1]);
  }
  return std::sqrt(acc * dt);
}

}  // namespace hamred
