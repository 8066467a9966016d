// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/basis.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <sstream>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace hamred
{

namespace
{

constexpr double DEGENERATE_SIGMA = 1.0e-12;

void CheckRequest(const SnapshotSet &snaps, Index n)
{
  if (n <= 0 || n % 2 != 0)
  {
    throw Error("reduced dimension must be even and positive, got " + std::to_string(n));
  }
  if (snaps.Dim() % 2 != 0)
  {
    throw Error("snapshot dimension must be even");
  }
  if (n > snaps.Dim())
  {
    throw Error("reduced dimension " + std::to_string(n) + " exceeds state dimension " +
                std::to_string(snaps.Dim()));
  }
}

std::optional<Vector> CenterOf(const SnapshotSet &snaps, bool centered)
{
  if (!centered)
  {
    return std::nullopt;
  }
  return snaps.Center() ? *snaps.Center() : Vector(snaps.States().col(0));
}

Matrix Shifted(const SnapshotSet &snaps, const std::optional<Vector> &center)
{
  if (!center)
  {
    return snaps.States();
  }
  return snaps.States().colwise() - *center;
}

[[noreturn]] void ThrowRank(std::string_view what, Index requested, Index achievable)
{
  std::ostringstream msg;
  msg << "requested reduced dimension " << requested << " exceeds the numerical rank of the "
      << what << "; achievable maximum is " << achievable;
  throw Error(msg.str());
}

Matrix BlockDiag(const Matrix &a, const Matrix &b)
{
  Matrix u = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  u.topLeftCorner(a.rows(), a.cols()) = a;
  u.bottomRightCorner(b.rows(), b.cols()) = b;
  return u;
}

// Leading m left singular vectors of a, with a rank check.
Matrix LeadingVectors(const Matrix &a, Index m, Vector &s, std::string_view what, Index scale)
{
  const ThinSvd svd = ComputeThinSvd(a);
  s = svd.s;
  const Index r = NumericalRank(svd.s, a.rows(), a.cols());
  if (m > r)
  {
    ThrowRank(what, scale * m, scale * r);
  }
  return svd.u.leftCols(m);
}

}  // namespace

std::string_view BasisKindName(BasisKind kind)
{
  switch (kind)
  {
    case BasisKind::OrdinaryPOD:
      return "pod";
    case BasisKind::CotangentLift:
      return "cotangent";
    case BasisKind::ComplexSVD:
      return "complex";
    case BasisKind::BlockQP:
      return "blockqp";
  }
  return "unknown";
}

BasisKind ParseBasisKind(std::string_view text)
{
  if (text == "pod")
  {
    return BasisKind::OrdinaryPOD;
  }
  if (text == "cotangent")
  {
    return BasisKind::CotangentLift;
  }
  if (text == "complex")
  {
    return BasisKind::ComplexSVD;
  }
  if (text == "blockqp")
  {
    return BasisKind::BlockQP;
  }
  throw Error("unknown basis kind '" + std::string(text) +
              "' (expected pod, cotangent, complex or blockqp)");
}

Matrix ReducedBasis::Project(const Matrix &x) const
{
  return u * (u.transpose() * x);
}

ReducedBasis OrdinaryPod(const SnapshotSet &snaps, Index n, bool centered)
{
  CheckRequest(snaps, n);
  ReducedBasis b;
  b.kind = BasisKind::OrdinaryPOD;
  b.center = CenterOf(snaps, centered);
  const Matrix x = Shifted(snaps, b.center);
  b.u = LeadingVectors(x, n, b.singular_values, "snapshot matrix", 1);
  return b;
}

ReducedBasis CotangentLift(const SnapshotSet &snaps, Index n, bool centered)
{
  CheckRequest(snaps, n);
  const Index half = snaps.Dim() / 2;
  const Index m = n / 2;
  ReducedBasis b;
  b.kind = BasisKind::CotangentLift;
  b.center = CenterOf(snaps, centered);
  const Matrix x = Shifted(snaps, b.center);
  Matrix qp(half, 2 * x.cols());
  qp << x.topRows(half), x.bottomRows(half);
  const Matrix uqp = LeadingVectors(qp, m, b.singular_values, "matrix [Q P]", 2);
  b.u = BlockDiag(uqp, uqp);
  return b;
}

ReducedBasis ComplexSvd(const SnapshotSet &snaps, Index n, bool centered)
{
  CheckRequest(snaps, n);
  const Index half = snaps.Dim() / 2;
  const Index m = n / 2;
  ReducedBasis b;
  b.kind = BasisKind::ComplexSVD;
  b.center = CenterOf(snaps, centered);
  const Matrix x = Shifted(snaps, b.center);
  Eigen::MatrixXcd y(half, x.cols());
  y.real() = x.topRows(half);
  y.imag() = x.bottomRows(half);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(y, Eigen::ComputeThinU);
  b.singular_values = svd.singularValues();
  const Index r = NumericalRank(b.singular_values, y.rows(), y.cols());
  if (m > r)
  {
    ThrowRank("complex snapshot matrix Q + iP", n, 2 * r);
  }
  Eigen::MatrixXcd phi = svd.matrixU().leftCols(m);
  // Fix the phase so the largest-magnitude entry of each vector is real and positive.
  for (Index j = 0; j < m; j++)
  {
    Index imax = 0;
    double best = -1.0;
    for (Index i = 0; i < half; i++)
    {
      const double mag = std::abs(phi(i, j));
      if (mag > best)
      {
        best = mag;
        imax = i;
      }
    }
    const std::complex<double> z = phi(imax, j);
    phi.col(j) *= std::conj(z) / std::abs(z);
  }
  b.u.resize(2 * half, n);
  b.u.topLeftCorner(half, m) = phi.real();
  b.u.bottomLeftCorner(half, m) = phi.imag();
  b.u.topRightCorner(half, m) = -phi.imag();
  b.u.bottomRightCorner(half, m) = phi.real();
  return b;
}

ReducedBasis BlockQp(const SnapshotSet &snaps, Index n, bool centered)
{
  CheckRequest(snaps, n);
  const Index half = snaps.Dim() / 2;
  const Index m = n / 2;
  ReducedBasis b;
  b.kind = BasisKind::BlockQP;
  b.center = CenterOf(snaps, centered);
  const Matrix x = Shifted(snaps, b.center);
  const Matrix uq = LeadingVectors(x.topRows(half), m, b.singular_values, "Q block", 2);
  const Matrix up = LeadingVectors(x.bottomRows(half), m, b.singular_values_p, "P block", 2);
  b.u = BlockDiag(uq, up);
  return b;
}

ReducedBasis BuildBasis(BasisKind kind, const SnapshotSet &snaps, Index n, bool centered)
{
  switch (kind)
  {
    case BasisKind::OrdinaryPOD:
      return OrdinaryPod(snaps, n, centered);
    case BasisKind::CotangentLift:
      return CotangentLift(snaps, n, centered);
    case BasisKind::ComplexSVD:
      return ComplexSvd(snaps, n, centered);
    case BasisKind::BlockQP:
      return BlockQp(snaps, n, centered);
  }
  throw Error("unknown basis kind");
}

double SnapshotEnergy(const Vector &singular_values, Index n)
{
  if (n < 0 || n > singular_values.size())
  {
    throw Error("snapshot energy needs 0 <= n <= " + std::to_string(singular_values.size()));
  }
  const double total = singular_values.sum();
  if (!(total > 0.0))
  {
    throw Error("snapshot energy of an all-zero spectrum is undefined");
  }
  return singular_values.head(n).sum() / total;
}

double BasisSnapshotEnergy(const ReducedBasis &basis)
{
  const Index m = basis.Size() / 2;
  switch (basis.kind)
  {
    case BasisKind::OrdinaryPOD:
      return SnapshotEnergy(basis.singular_values, basis.Size());
    case BasisKind::CotangentLift:
    case BasisKind::ComplexSVD:
      return SnapshotEnergy(basis.singular_values, m);
    case BasisKind::BlockQP:
    {
      const double total = basis.singular_values.sum() + basis.singular_values_p.sum();
      if (!(total > 0.0))
      {
        throw Error("snapshot energy of an all-zero spectrum is undefined");
      }
      return (basis.singular_values.head(m).sum() + basis.singular_values_p.head(m).sum()) /
             total;
    }
  }
  return 0.0;
}

double ProjectionError(const Matrix &x, const Matrix &u, const std::optional<Vector> &center)
{
  if (x.rows() != u.rows() || (center && center->size() != x.rows()))
  {
    throw Error("projection error: dimension mismatch");
  }
  const Matrix xc = center ? Matrix(x.colwise() - *center) : x;
  return (xc - u * (u.transpose() * xc)).norm();
}

double ProjectionError(const SnapshotSet &snaps, const ReducedBasis &basis)
{
  return ProjectionError(snaps.States(), basis.u, basis.center);
}

Matrix ReducedJ(const Matrix &u)
{
  return u.transpose() * ApplyJ(u);
}

ReducedSymplectic AnalyzeReducedSymplectic(const Matrix &u)
{
  ReducedSymplectic out;
  out.j_hat = ReducedJ(u);
  if (out.j_hat.rows() == 0)
  {
    throw Error("empty basis");
  }
  Eigen::JacobiSVD<Matrix> svd(out.j_hat);
  out.sigma_min = svd.singularValues()(svd.singularValues().size() - 1);
  if (out.sigma_min <= DEGENERATE_SIGMA)
  {
    std::ostringstream msg;
    msg << "isotropic or near-degenerate basis: sigma_min(U^T J U) = " << out.sigma_min;
    throw Error(msg.str());
  }
  out.canon_dev = 1.0 / (out.sigma_min * out.sigma_min) - 1.0;
  return out;
}

ReducedSymplectic AnalyzeReducedSymplectic(const ReducedBasis &basis)
{
  return AnalyzeReducedSymplectic(basis.u);
}

Matrix HaarRandomFrame(Index dim, Index n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  return HaarRandomFrame(dim, n, rng);
}

Matrix HaarRandomFrame(Index dim, Index n, std::mt19937_64 &rng)
{
  if (n <= 0 || n > dim)
  {
    throw Error("random frame needs 0 < n <= dim");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(dim, n);
  for (Index j = 0; j < n; j++)
  {
    for (Index i = 0; i < dim; i++)
    {
      g(i, j) = gauss(rng);
    }
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, n);
  const Matrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  for (Index j = 0; j < n; j++)
  {
    if (r(j, j) < 0.0)
    {
      q.col(j) *= -1.0;
    }
  }
  return q;
}

}  // namespace hamred
