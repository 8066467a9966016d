// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/opinf.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <vector>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace hamred
{

namespace
{

constexpr double EPS = std::numeric_limits<double>::epsilon();
constexpr Index KRONECKER_MAX_DIM = 64;
constexpr double SYLVESTER_MIN_RCOND = 1.0e-8;

// Thin SVD of X̂ with the full-row-rank check σ_min > K·σ_max·ε·10.
ThinSvd CheckedDataSvd(const Matrix &x_hat)
{
  const Index n = x_hat.rows();
  const Index k = x_hat.cols();
  if (n == 0)
  {
    throw Error("inference needs a nonempty reduced state matrix");
  }
  if (k < n)
  {
    std::ostringstream msg;
    msg << "reduced snapshot matrix has " << k << " columns but full row rank n = " << n
        << " is required; reduce n or add snapshots";
    throw Error(msg.str());
  }
  ThinSvd svd = ComputeThinSvd(x_hat);
  const double smax = svd.s(0);
  const double smin = svd.s(n - 1);
  if (!(smin > static_cast<double>(k) * smax * EPS * 10.0))
  {
    std::ostringstream msg;
    msg << "reduced snapshot matrix is rank deficient: sigma_min = " << smin
        << " (sigma_max = " << smax << "), full row rank n = " << n
        << " is required; reduce n or add snapshots";
    throw Error(msg.str());
  }
  return svd;
}

Matrix Symmetrized(const Matrix &a)
{
  return 0.5 * (a + a.transpose());
}

// Dense (A⊗B + B⊗A), acting on column-major vec.
Matrix SymmetricKroneckerSum(const Matrix &a, const Matrix &b)
{
  const Index n = a.rows();
  Matrix k(n * n, n * n);
  for (Index ia = 0; ia < n; ia++)
  {
    for (Index ja = 0; ja < n; ja++)
    {
      k.block(ia * n, ja * n, n, n) = a(ia, ja) * b + b(ia, ja) * a;
    }
  }
  return k;
}

// Columnwise norms integrated in time; a single column reports its plain norm.
double L2InTime(const Matrix &r, double dt)
{
  std::vector<double> sq(static_cast<std::size_t>(r.cols()));
  for (Index k = 0; k < r.cols(); k++)
  {
    sq[static_cast<std::size_t>(k)] = r.col(k).squaredNorm();
  }
  if (sq.size() == 1)
  {
    return std::sqrt(sq[0]);
  }
  return TrapezoidL2(sq, dt);
}

}  // namespace

std::string_view VelocitySourceName(VelocitySource s)
{
  switch (s)
  {
    case VelocitySource::Exact:
      return "exact";
    case VelocitySource::Central2:
      return "central2";
    case VelocitySource::Forward1:
      return "forward1";
  }
  return "unknown";
}

VelocitySource ParseVelocitySource(std::string_view text)
{
  if (text == "exact")
  {
    return VelocitySource::Exact;
  }
  if (text == "central2")
  {
    return VelocitySource::Central2;
  }
  if (text == "forward1")
  {
    return VelocitySource::Forward1;
  }
  throw Error("unknown velocity source '" + std::string(text) +
              "' (expected exact, central2 or forward1)");
}

Matrix FiniteDifferenceVelocity(const Matrix &x, double dt, VelocitySource scheme)
{
  if (!(dt > 0.0))
  {
    throw Error("finite differences need a positive time step");
  }
  const Index k = x.cols();
  if (k < 2)
  {
    throw Error("finite differences need at least 2 snapshot columns");
  }
  Matrix v(x.rows(), k);
  switch (scheme)
  {
    case VelocitySource::Forward1:
      v.leftCols(k - 1) = (x.rightCols(k - 1) - x.leftCols(k - 1)) / dt;
      v.col(k - 1) = (x.col(k - 1) - x.col(k - 2)) / dt;
      break;
    case VelocitySource::Central2:
      if (k == 2)
      {
        v.col(0) = (x.col(1) - x.col(0)) / dt;
        v.col(1) = v.col(0);
        break;
      }
      v.middleCols(1, k - 2) = (x.rightCols(k - 2) - x.leftCols(k - 2)) / (2.0 * dt);
      v.col(0) = (-3.0 * x.col(0) + 4.0 * x.col(1) - x.col(2)) / (2.0 * dt);
      v.col(k - 1) = (3.0 * x.col(k - 1) - 4.0 * x.col(k - 2) + x.col(k - 3)) / (2.0 * dt);
      break;
    case VelocitySource::Exact:
      throw Error("exact velocities are not a finite-difference scheme");
  }
  return v;
}

Matrix FiniteDifferenceVelocity(const SnapshotSet &snaps, VelocitySource scheme)
{
  return FiniteDifferenceVelocity(snaps.States(), snaps.TimeStep(), scheme);
}

SnapshotSet ReprojectStates(const FlowStep &step, const ReducedBasis &basis, const Vector &x0,
                            Index steps, double dt, bool centered, const VelocityOracle &velocity)
{
  if (x0.size() != basis.Dim())
  {
    throw Error("re-projection: initial state does not match basis dimension");
  }
  if (steps < 0)
  {
    throw Error("re-projection: negative step count");
  }
  Matrix x(x0.size(), steps + 1);
  if (centered)
  {
    x.col(0) = x0;
    for (Index k = 1; k <= steps; k++)
    {
      const Vector y = step(x.col(k - 1));
      x.col(k) = x0 + basis.Project(y - x0);
    }
  }
  else
  {
    x.col(0) = basis.Project(x0);
    for (Index k = 1; k <= steps; k++)
    {
      x.col(k) = basis.Project(step(x.col(k - 1)));
    }
  }
  std::optional<Matrix> v;
  if (velocity)
  {
    v = velocity(x);
  }
  return SnapshotSet::Uniform(std::move(x), 0.0, dt, std::move(v));
}

SnapshotSet ReprojectSnapshots(const SnapshotSet &snaps, const ReducedBasis &basis, bool centered,
                               const VelocityOracle &velocity)
{
  if (snaps.Dim() != basis.Dim())
  {
    throw Error("re-projection: snapshot dimension does not match basis");
  }
  Matrix x;
  if (centered)
  {
    const Vector x0 = snaps.States().col(0);
    x = basis.Project(snaps.States().colwise() - x0).colwise() + x0;
  }
  else
  {
    x = basis.Project(snaps.States());
  }
  std::optional<Matrix> v;
  if (velocity)
  {
    v = velocity(x);
  }
  return SnapshotSet(std::move(x), snaps.Times(), std::move(v));
}

Matrix SolveSymmetricLyapunov(const Matrix &s, const Matrix &c)
{
  const Index n = s.rows();
  if (s.cols() != n || c.rows() != n || c.cols() != n)
  {
    throw Error("Lyapunov solve: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Symmetrized(s));
  if (eig.info() != Eigen::Success)
  {
    throw Error("Lyapunov solve: eigendecomposition failed");
  }
  const Vector &lam = eig.eigenvalues();
  const Matrix &q = eig.eigenvectors();
  const double tol = static_cast<double>(n) * EPS * std::max(std::abs(lam(0)), std::abs(lam(n - 1)));
  Matrix ct = q.transpose() * c * q;
  for (Index j = 0; j < n; j++)
  {
    for (Index i = 0; i < n; i++)
    {
      const double d = lam(i) + lam(j);
      if (!(d > tol))
      {
        std::ostringstream msg;
        msg << "Lyapunov solve: eigenvalue sum " << d << " is not positive; sigma_min of the "
            << "reduced snapshot matrix is too small for n = " << n;
        throw Error(msg.str());
      }
      ct(i, j) /= d;
    }
  }
  return Symmetrized(q * ct * q.transpose());
}

Matrix SolveSymmetricSylvester(const Matrix &g, const Matrix &s, const Matrix &r)
{
  const Index n = g.rows();
  if (g.cols() != n || s.rows() != n || s.cols() != n || r.rows() != n || r.cols() != n)
  {
    throw Error("Sylvester solve: dimension mismatch");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> geig(Symmetrized(g), Eigen::EigenvaluesOnly);
  const double gmin = geig.eigenvalues()(0);
  const double gmax = geig.eigenvalues()(n - 1);
  if (!(gmin > 0.0))
  {
    throw Error("Sylvester solve: G = J_hat^T J_hat is singular");
  }
  if (gmin / gmax > SYLVESTER_MIN_RCOND)
  {
    // S v = λ G v with VᵀGV = I and VᵀSV = diag(d): Z_ij = (VᵀRV)_ij / (d_i + d_j), Ā = VZVᵀ.
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ges(Symmetrized(s), Symmetrized(g));
    if (ges.info() == Eigen::Success)
    {
      const Vector &d = ges.eigenvalues();
      const Matrix &v = ges.eigenvectors();
      const double tol = static_cast<double>(n) * EPS * std::max(std::abs(d(0)), std::abs(d(n - 1)));
      Matrix z = v.transpose() * r * v;
      bool ok = true;
      for (Index j = 0; j < n && ok; j++)
      {
        for (Index i = 0; i < n; i++)
        {
          const double den = d(i) + d(j);
          if (!(den > tol))
          {
            ok = false;
            break;
          }
          z(i, j) /= den;
        }
      }
      if (ok)
      {
        return Symmetrized(v * z * v.transpose());
      }
    }
  }
  if (n > KRONECKER_MAX_DIM)
  {
    std::ostringstream msg;
    msg << "Sylvester solve: G is ill-conditioned (eigenvalue ratio " << gmin / gmax
        << ") and n = " << n << " exceeds the dense fallback limit " << KRONECKER_MAX_DIM;
    throw Error(msg.str());
  }
  const Matrix k = SymmetricKroneckerSum(Symmetrized(g), Symmetrized(s));
  const Eigen::Map<const Vector> rhs(r.data(), n * n);
  Eigen::PartialPivLU<Matrix> lu(k);
  const Vector x = lu.solve(rhs);
  const Matrix a = Eigen::Map<const Matrix>(x.data(), n, n);
  return Symmetrized(a);
}

Matrix InferSymmetricOperator(const Matrix &x_hat, const Matrix &z)
{
  if (z.rows() != x_hat.rows() || z.cols() != x_hat.cols())
  {
    throw Error("inference: data shapes do not agree");
  }
  // With X̂ = WΣVᵀ and Ā = WĀ'Wᵀ the objective decouples into 2×2 symmetric pairs of
  // B = WᵀZV; this is the Lyapunov solution without forming S = X̂X̂ᵀ.
  const ThinSvd svd = CheckedDataSvd(x_hat);
  const Index n = x_hat.rows();
  const Matrix b = svd.u.transpose() * z * svd.v;
  const Vector &s = svd.s;
  Matrix ap(n, n);
  for (Index j = 0; j < n; j++)
  {
    for (Index i = 0; i < n; i++)
    {
      ap(i, j) = (b(i, j) * s(j) + s(i) * b(j, i)) / (s(i) * s(i) + s(j) * s(j));
    }
  }
  return Symmetrized(svd.u * ap * svd.u.transpose());
}

Matrix InferVch(const Matrix &x_hat, const Matrix &x_t, const Matrix &f_hat, const Matrix &u)
{
  if (x_t.rows() != u.rows() || x_t.cols() != x_hat.cols() || u.cols() != x_hat.rows() ||
      f_hat.rows() != x_hat.rows() || f_hat.cols() != x_hat.cols())
  {
    throw Error("VCH inference: data shapes do not agree");
  }
  const Matrix z = u.transpose() * ApplyJt(x_t) - f_hat;
  return InferSymmetricOperator(x_hat, z);
}

Matrix InferCh(const Matrix &x_hat, const Matrix &xt_hat, const Matrix &f_hat,
               const Matrix &j_hat)
{
  const Index n = x_hat.rows();
  if (xt_hat.rows() != n || xt_hat.cols() != x_hat.cols() || f_hat.rows() != n ||
      f_hat.cols() != x_hat.cols() || j_hat.rows() != n || j_hat.cols() != n)
  {
    throw Error("CH inference: data shapes do not agree");
  }
  const Matrix g = j_hat.transpose() * j_hat;
  if (MaxAbs(g - Matrix::Identity(n, n)) <= 1.0e-12)
  {
    // Orthogonal Ĵ: ‖X̂_t − Ĵ(ĀX̂ + F̂)‖ = ‖ĴᵀX̂_t − F̂ − ĀX̂‖.
    return InferSymmetricOperator(x_hat, j_hat.transpose() * xt_hat - f_hat);
  }
  CheckedDataSvd(x_hat);
  const Matrix y = xt_hat - j_hat * f_hat;
  const Matrix jy = j_hat.transpose() * y * x_hat.transpose();
  const Matrix r = jy + jy.transpose();
  const Matrix s = x_hat * x_hat.transpose();
  return SolveSymmetricSylvester(g, s, r);
}

Matrix InferGalerkin(const Matrix &x_hat, const Matrix &xt_hat, double ridge)
{
  if (xt_hat.rows() != x_hat.rows() || xt_hat.cols() != x_hat.cols())
  {
    throw Error("Galerkin inference: data shapes do not agree");
  }
  if (ridge < 0.0)
  {
    throw Error("ridge parameter must be non-negative");
  }
  // X̂_tX̂ᵀ(X̂X̂ᵀ + εI)⁻¹ = X̂_t V diag(σ/(σ² + ε)) Wᵀ.
  const ThinSvd svd = CheckedDataSvd(x_hat);
  const Vector filt = svd.s.array() / (svd.s.array().square() + ridge);
  return xt_hat * svd.v * filt.asDiagonal() * svd.u.transpose();
}

Vector CenteredShiftNonintrusive(const Vector &v0, const Vector &x0, const ReducedBasis &basis,
                                 RomVariant variant, const std::optional<NonlinearTerm> &f)
{
  if (v0.size() != basis.Dim() || x0.size() != basis.Dim())
  {
    throw Error("centered shift: dimension mismatch");
  }
  Vector w = v0;
  if (f)
  {
    w -= ApplyJ(f->gradient(x0));
  }
  if (variant == RomVariant::Galerkin)
  {
    return basis.u.transpose() * w;
  }
  return basis.u.transpose() * ApplyJt(w);
}

ReducedModel AssembleOpInfRom(const Matrix &op, const Vector &shift,
                              std::shared_ptr<const ReducedBasis> basis, RomVariant variant,
                              bool centered, bool reprojected, const Vector &x0,
                              double energy_offset)
{
  if (!centered && shift.size() > 0 && shift.cwiseAbs().maxCoeff() != 0.0)
  {
    throw Error("uncentered OpInf model cannot carry a nonzero centered shift");
  }
  const Index n = basis ? basis->Size() : 0;
  const Vector s = shift.size() == 0 ? Vector::Zero(n) : shift;
  return AssembleReducedModel(variant, reprojected ? Provenance::OpInfReprojected : Provenance::OpInf,
                              std::move(basis), op, s, x0, centered, energy_offset);
}

OpInfResult RunOpInf(const HamiltonianSystem &sys, const SnapshotSet &snaps,
                     std::shared_ptr<const ReducedBasis> basis, const OpInfOptions &options,
                     Index flow_substeps)
{
  if (!basis || basis->Dim() != sys.Dim() || snaps.Dim() != sys.Dim())
  {
    throw Error("OpInf: system, snapshot and basis dimensions must agree");
  }
  if (snaps.Count() < 2)
  {
    throw Error("OpInf needs at least 2 snapshots");
  }
  if (flow_substeps < 1)
  {
    throw Error("OpInf: flow substeps must be positive");
  }
  const Matrix &u = basis->u;
  const Vector x0 = sys.InitialState();
  const double dt = snaps.TimeStep();
  const auto &f = sys.Nonlinear();
  const VelocityOracle oracle = [&sys](const Matrix &x) { return sys.Velocity(x); };

  OpInfResult out;
  if (options.reprojected)
  {
    if (options.velocity_source == VelocitySource::Exact)
    {
      SnapshotSet rs = ReprojectSnapshots(snaps, *basis, options.centered, oracle);
      out.states = rs.States();
      out.velocities = rs.Velocities();
    }
    else
    {
      const MidpointStepper stepper(sys, dt / static_cast<double>(flow_substeps));
      const FlowStep flow = [&stepper, flow_substeps](const Vector &x)
      {
        Vector y = x;
        for (Index s = 0; s < flow_substeps; s++)
        {
          y = stepper.Step(y);
        }
        return y;
      };
      SnapshotSet rs = ReprojectStates(flow, *basis, x0, snaps.Count() - 1, dt, options.centered);
      out.states = rs.States();
      out.velocities = FiniteDifferenceVelocity(out.states, dt, options.velocity_source);
    }
  }
  else
  {
    out.states = snaps.States();
    if (options.velocity_source == VelocitySource::Exact)
    {
      if (!snaps.HasVelocities())
      {
        throw Error("exact velocity source requested but the snapshots carry no velocities");
      }
      out.velocities = snaps.Velocities();
    }
    else
    {
      out.velocities = FiniteDifferenceVelocity(snaps, options.velocity_source);
    }
  }

  if (options.velocity_source == VelocitySource::Exact)
  {
    out.eps_dt = 0.0;
  }
  else
  {
    out.eps_dt = L2InTime(out.velocities - sys.Velocity(out.states), dt);
  }

  const Index n = u.cols();
  const Index k = out.states.cols();
  Matrix xc = out.states;
  if (options.centered)
  {
    xc.colwise() -= x0;
  }
  out.x_hat = u.transpose() * xc;

  Matrix f_hat = Matrix::Zero(n, k);
  Matrix jgrad_f;  // J∇f at the training states, Galerkin only
  if (f)
  {
    Matrix gf(sys.Dim(), k);
    for (Index c = 0; c < k; c++)
    {
      gf.col(c) = f->gradient(out.states.col(c));
    }
    f_hat = u.transpose() * gf;
    jgrad_f = ApplyJ(gf);
  }

  const Vector v0 = out.velocities.col(0);
  out.shift = options.centered ? CenteredShiftNonintrusive(v0, x0, *basis, options.variant, f)
                               : Vector::Zero(n);

  Matrix target;
  Matrix residual;
  switch (options.variant)
  {
    case RomVariant::ConsistentHam:
    {
      Matrix xt = out.velocities;
      if (options.centered)
      {
        Vector w = v0;
        if (f)
        {
          w -= ApplyJ(f->gradient(x0));
        }
        xt.colwise() -= w;
      }
      target = u.transpose() * ApplyJt(xt) - f_hat;
      out.op = InferSymmetricOperator(out.x_hat, target);
      residual = target - out.op * out.x_hat;
      break;
    }
    case RomVariant::LeastSquaresHam:
    {
      const Matrix j_hat = ReducedJ(u);
      Matrix fp = f_hat;
      fp.colwise() += out.shift;
      target = u.transpose() * out.velocities;
      out.op = InferCh(out.x_hat, target, fp, j_hat);
      residual = target - j_hat * (out.op * out.x_hat + fp);
      break;
    }
    case RomVariant::Galerkin:
    {
      target = u.transpose() * out.velocities;
      target.colwise() -= out.shift;
      if (f)
      {
        target -= u.transpose() * jgrad_f;
      }
      out.op = InferGalerkin(out.x_hat, target);
      residual = target - out.op * out.x_hat;
      break;
    }
  }
  out.eps_a = L2InTime(residual, dt);
  const double tnorm = target.norm();
  out.relative_residual = tnorm > 0.0 ? residual.norm() / tnorm : residual.norm();

  double offset = 0.0;
  if (options.centered)
  {
    offset = sys.Energy(x0) - (f ? f->value(x0) : 0.0);
  }
  out.model = AssembleOpInfRom(out.op, out.shift, basis, options.variant, options.centered,
                               options.reprojected, x0, offset);
  AttachNonlinearTerm(out.model, sys);
  return out;
}

}  // namespace hamred
