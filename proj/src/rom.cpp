// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/rom.hpp"

#include <cmath>
#include <sstream>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace hamred
{

namespace
{

constexpr double DEGENERATE_SIGMA = 1.0e-12;
constexpr int NEWTON_MAX_ITERS = 50;

Matrix Symmetrized(const Matrix &a)
{
  return 0.5 * (a + a.transpose());
}

Matrix SkewSymmetrized(const Matrix &a)
{
  return 0.5 * (a - a.transpose());
}

double SigmaMin(const Matrix &a)
{
  if (a.size() == 0)
  {
    return 0.0;
  }
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

void CheckDims(const HamiltonianSystem &sys, const std::shared_ptr<const ReducedBasis> &basis)
{
  if (!basis)
  {
    throw Error("reduced model needs a basis");
  }
  if (basis->Dim() != sys.Dim())
  {
    throw Error("basis dimension " + std::to_string(basis->Dim()) +
                " does not match system dimension " + std::to_string(sys.Dim()));
  }
}

}  // namespace

// Adds Uᵀ∇f(x̄ + Ux̂), mapped by the variant's left factor.
void AttachNonlinearTerm(ReducedModel &model, const HamiltonianSystem &sys)
{
  if (sys.IsLinear())
  {
    return;
  }
  const NonlinearTerm f = *sys.Nonlinear();
  const auto basis = model.basis;
  const Vector center = model.center;
  const RomVariant variant = model.variant;
  const Matrix j_hat = model.j_hat;
  auto lift = [basis, center](const Vector &xhat) -> Vector
  { return center + basis->u * xhat; };

  ReducedNonlinear nl;
  nl.value = [f, lift](const Vector &xhat) { return f.value(lift(xhat)); };
  nl.rhs = [f, lift, basis, variant, j_hat](const Vector &xhat) -> Vector
  {
    const Vector g = f.gradient(lift(xhat));
    switch (variant)
    {
      case RomVariant::Galerkin:
        return basis->u.transpose() * ApplyJ(g);
      case RomVariant::LeastSquaresHam:
        return j_hat * (basis->u.transpose() * g);
      case RomVariant::ConsistentHam:
        break;
    }
    return basis->u.transpose() * g;
  };
  if (f.hessian)
  {
    nl.jacobian = [f, lift, basis, variant, j_hat](const Vector &xhat) -> Matrix
    {
      const Matrix hu = f.hessian(lift(xhat)) * basis->u;
      switch (variant)
      {
        case RomVariant::Galerkin:
          return basis->u.transpose() * ApplyJ(hu);
        case RomVariant::LeastSquaresHam:
          return j_hat * (basis->u.transpose() * hu);
        case RomVariant::ConsistentHam:
          break;
      }
      return basis->u.transpose() * hu;
    };
  }
  model.nonlinear = std::move(nl);
}

namespace
{

ReducedModel BuildBase(RomVariant variant, const HamiltonianSystem &sys,
                       std::shared_ptr<const ReducedBasis> basis, bool centered)
{
  CheckDims(sys, basis);
  const Matrix &u = basis->u;
  const Matrix au = sys.Quad().Apply(u);
  const Matrix a_hat = Symmetrized(u.transpose() * au);
  const Vector x0 = sys.InitialState();
  Vector shift;
  Matrix op;
  double offset = 0.0;
  if (variant == RomVariant::Galerkin)
  {
    op = u.transpose() * ApplyJ(au);
    shift = centered ? Vector(u.transpose() * ApplyJ(sys.Quad().Apply(x0))) : Vector::Zero(u.cols());
  }
  else
  {
    op = a_hat;
    shift = centered ? Vector(au.transpose() * x0) : Vector::Zero(u.cols());
  }
  if (centered)
  {
    offset = 0.5 * sys.Quad().QuadraticForm(x0);
  }
  ReducedModel model = AssembleReducedModel(variant, Provenance::Intrusive, std::move(basis), op,
                                            shift, x0, centered, offset);
  model.a_hat = a_hat;
  model.g_hat = centered ? Vector(au.transpose() * x0) : Vector::Zero(u.cols());
  AttachNonlinearTerm(model, sys);
  return model;
}

}  // namespace

std::string_view RomVariantName(RomVariant v)
{
  switch (v)
  {
    case RomVariant::Galerkin:
      return "galerkin";
    case RomVariant::LeastSquaresHam:
      return "lsq_ham";
    case RomVariant::ConsistentHam:
      return "consistent_ham";
  }
  return "unknown";
}

RomVariant ParseRomVariant(std::string_view text)
{
  if (text == "galerkin")
  {
    return RomVariant::Galerkin;
  }
  if (text == "lsq_ham")
  {
    return RomVariant::LeastSquaresHam;
  }
  if (text == "consistent_ham")
  {
    return RomVariant::ConsistentHam;
  }
  throw Error("unknown ROM variant '" + std::string(text) +
              "' (expected galerkin, lsq_ham or consistent_ham)");
}

std::string_view ProvenanceName(Provenance p)
{
  switch (p)
  {
    case Provenance::Intrusive:
      return "intrusive";
    case Provenance::OpInf:
      return "opinf";
    case Provenance::OpInfReprojected:
      return "opinf_reprojected";
  }
  return "unknown";
}

Provenance ParseProvenance(std::string_view text)
{
  if (text == "intrusive")
  {
    return Provenance::Intrusive;
  }
  if (text == "opinf")
  {
    return Provenance::OpInf;
  }
  if (text == "opinf_reprojected")
  {
    return Provenance::OpInfReprojected;
  }
  throw Error("unknown provenance '" + std::string(text) + "'");
}

ReducedModel AssembleReducedModel(RomVariant variant, Provenance provenance,
                                  std::shared_ptr<const ReducedBasis> basis, const Matrix &op,
                                  const Vector &shift, const Vector &x0, bool centered,
                                  double energy_offset)
{
  if (!basis)
  {
    throw Error("reduced model needs a basis");
  }
  const Index n = basis->Size();
  if (op.rows() != n || op.cols() != n || shift.size() != n)
  {
    throw Error("reduced operator or shift does not match basis size " + std::to_string(n));
  }
  if (x0.size() != basis->Dim())
  {
    throw Error("initial state does not match basis dimension");
  }
  ReducedModel model;
  model.variant = variant;
  model.provenance = provenance;
  model.centered = centered;
  model.center = centered ? x0 : Vector::Zero(x0.size());
  model.initial_state = centered ? Vector::Zero(n) : Vector(basis->u.transpose() * x0);
  model.j_hat = SkewSymmetrized(ReducedJ(basis->u));
  model.sigma_min_j = SigmaMin(model.j_hat);
  model.shift = shift;
  model.g_hat = (variant == RomVariant::Galerkin) ? Vector::Zero(n) : shift;
  model.energy_offset = energy_offset;

  switch (variant)
  {
    case RomVariant::Galerkin:
      model.e = Matrix::Identity(n, n);
      model.l = op;
      model.c = shift;
      break;
    case RomVariant::LeastSquaresHam:
      model.a_hat = Symmetrized(op);
      model.e = Matrix::Identity(n, n);
      model.l = model.j_hat * (*model.a_hat);
      model.c = model.j_hat * shift;
      if (model.sigma_min_j <= DEGENERATE_SIGMA)
      {
        std::ostringstream msg;
        msg << "reduced symplectic matrix is near-degenerate (sigma_min = " << model.sigma_min_j
            << ")";
        model.warnings.push_back(msg.str());
      }
      break;
    case RomVariant::ConsistentHam:
      if (model.sigma_min_j <= DEGENERATE_SIGMA)
      {
        std::ostringstream msg;
        msg << "consistent Hamiltonian ROM needs an invertible U^T J U; sigma_min = "
            << model.sigma_min_j << " (isotropic or near-degenerate basis)";
        throw Error(msg.str());
      }
      model.a_hat = Symmetrized(op);
      model.e = model.j_hat.transpose();
      model.l = *model.a_hat;
      model.c = shift;
      break;
  }
  model.basis = std::move(basis);
  return model;
}

ReducedModel BuildGalerkin(const HamiltonianSystem &sys,
                           std::shared_ptr<const ReducedBasis> basis, bool centered)
{
  return BuildBase(RomVariant::Galerkin, sys, std::move(basis), centered);
}

ReducedModel BuildLsqHam(const HamiltonianSystem &sys, std::shared_ptr<const ReducedBasis> basis,
                         bool centered)
{
  return BuildBase(RomVariant::LeastSquaresHam, sys, std::move(basis), centered);
}

ReducedModel BuildConsistentHam(const HamiltonianSystem &sys,
                                std::shared_ptr<const ReducedBasis> basis, bool centered)
{
  return BuildBase(RomVariant::ConsistentHam, sys, std::move(basis), centered);
}

ReducedModel BuildIntrusive(RomVariant variant, const HamiltonianSystem &sys,
                            std::shared_ptr<const ReducedBasis> basis, bool centered)
{
  return BuildBase(variant, sys, std::move(basis), centered);
}

double ReducedModel::Energy(const Vector &xhat) const
{
  if (!a_hat)
  {
    throw Error("model has no energy operator");
  }
  if (xhat.size() != Size())
  {
    throw Error("reduced state dimension mismatch");
  }
  double h = 0.5 * xhat.dot(*a_hat * xhat) + g_hat.dot(xhat) + energy_offset;
  if (nonlinear && nonlinear->value)
  {
    h += nonlinear->value(xhat);
  }
  return h;
}

Vector ReducedModel::VelocityField(const Vector &xhat) const
{
  Vector rhs = l * xhat + c;
  if (nonlinear)
  {
    rhs += nonlinear->rhs(xhat);
  }
  if (variant == RomVariant::ConsistentHam)
  {
    return e.partialPivLu().solve(rhs);
  }
  return rhs;
}

Matrix ReducedModel::Reconstruct(const Matrix &xhat) const
{
  return (basis->u * xhat).colwise() + center;
}

struct RomStepper::Impl
{
  ReducedModel model;
  Eigen::PartialPivLU<Matrix> lu;
  Matrix lhs;
  Matrix rhs;
};

RomStepper::RomStepper(const ReducedModel &model, double dt) : dt(dt)
{
  if (dt == 0.0 || !std::isfinite(dt))
  {
    throw Error("time step must be nonzero and finite");
  }
  auto impl_ = std::make_shared<Impl>();
  impl_->model = model;
  impl_->lhs = model.e / dt - 0.5 * model.l;
  impl_->rhs = model.e / dt + 0.5 * model.l;
  impl_->lu.compute(impl_->lhs);
  const double rc = impl_->lu.rcond();
  if (!(rc > 1.0e-15))
  {
    std::ostringstream msg;
    msg << "reduced midpoint step matrix is singular (rcond = " << rc << ")";
    throw Error(msg.str());
  }
  impl = std::move(impl_);
}

Vector RomStepper::Step(const Vector &xhat) const
{
  const ReducedModel &m = impl->model;
  if (xhat.size() != m.Size())
  {
    throw Error("reduced state dimension mismatch");
  }
  const Vector base = impl->rhs * xhat + m.c;
  Vector y = impl->lu.solve(base);
  if (!m.nonlinear)
  {
    return y;
  }
  // Newton on E(y − x)/dt − L(y + x)/2 − c − N((y + x)/2) = 0.
  const Index n = m.Size();
  for (int it = 0; it < NEWTON_MAX_ITERS; it++)
  {
    const Vector mid = 0.5 * (y + xhat);
    const Vector res = impl->lhs * y - base - m.nonlinear->rhs(mid);
    Matrix jn;
    if (m.nonlinear->jacobian)
    {
      jn = m.nonlinear->jacobian(mid);
    }
    else
    {
      jn.resize(n, n);
      for (Index j = 0; j < n; j++)
      {
        const double h = 1.0e-7 * std::max(1.0, std::abs(mid(j)));
        Vector xp = mid;
        Vector xm = mid;
        xp(j) += h;
        xm(j) -= h;
        jn.col(j) = (m.nonlinear->rhs(xp) - m.nonlinear->rhs(xm)) / (2.0 * h);
      }
    }
    const Vector delta = (impl->lhs - 0.5 * jn).partialPivLu().solve(res);
    y -= delta;
    if (delta.norm() <= 1.0e-14 * std::max(1.0, y.norm()))
    {
      return y;
    }
  }
  throw Error("Newton iteration for the reduced midpoint step did not converge");
}

SnapshotSet IntegrateRom(const ReducedModel &model, double t_final, double dt,
                         Index sample_every)
{
  if (sample_every < 1)
  {
    throw Error("sample_every must be positive");
  }
  const Index steps = StepCount(t_final, dt);
  const Index samples = steps / sample_every + 1;
  Matrix states(model.Size(), samples);
  states.col(0) = model.initial_state;
  if (steps > 0)
  {
    const RomStepper stepper(model, dt);
    Vector x = model.initial_state;
    for (Index k = 1; k <= steps; k++)
    {
      x = stepper.Step(x);
      if (k % sample_every == 0)
      {
        states.col(k / sample_every) = x;
      }
    }
  }
  return SnapshotSet::Uniform(std::move(states), 0.0, dt * static_cast<double>(sample_every));
}

SnapshotSet Reconstruct(const ReducedBasis &basis, const SnapshotSet &reduced,
                        const std::optional<Vector> &center)
{
  if (reduced.Dim() != basis.Size() || (center && center->size() != basis.Dim()))
  {
    throw Error("reconstruction: dimension mismatch");
  }
  Matrix x = basis.u * reduced.States();
  if (center)
  {
    x.colwise() += *center;
  }
  return SnapshotSet(std::move(x), reduced.Times());
}

}  // namespace hamred
