// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/metrics.hpp"

#include <cmath>
#include <limits>
#include <Eigen/SVD>

namespace hamred
{

double RelativeL2(const Matrix &x, const Matrix &x_tilde)
{
  if (x.rows() != x_tilde.rows() || x.cols() != x_tilde.cols())
  {
    throw Error("relative error: shape mismatch");
  }
  const double den = x.norm();
  if (!(den > 0.0))
  {
    throw Error("relative error: reference matrix is zero");
  }
  return (x - x_tilde).norm() / den;
}

std::vector<double> HamiltonianTrace(const HamiltonianSystem &sys, const SnapshotSet &snaps)
{
  if (snaps.Dim() != sys.Dim())
  {
    throw Error("Hamiltonian trace: dimension mismatch");
  }
  const double h_ref = sys.Energy(sys.InitialState());
  std::vector<double> e(static_cast<std::size_t>(snaps.Count()));
  for (Index k = 0; k < snaps.Count(); k++)
  {
    e[static_cast<std::size_t>(k)] = sys.Energy(snaps.States().col(k)) - h_ref;
  }
  return e;
}

double CanonicityDeviation(const Matrix &j_hat)
{
  if (j_hat.rows() != j_hat.cols() || j_hat.rows() == 0)
  {
    throw Error("canonicity deviation needs a nonempty square matrix");
  }
  Eigen::JacobiSVD<Matrix> svd(j_hat);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0))
  {
    throw Error("canonicity deviation: reduced symplectic matrix is singular");
  }
  return 1.0 / (smin * smin) - 1.0;
}

BoundTerms BoundReport(const HamiltonianSystem &sys, const ReducedModel &model,
                       const SnapshotSet &fom_snaps, const std::optional<OpInfErrors> &opinf)
{
  if (fom_snaps.Dim() != sys.Dim() || model.basis->Dim() != sys.Dim())
  {
    throw Error("bound report: dimension mismatch");
  }
  BoundTerms b;
  const std::optional<Vector> center =
      model.centered ? std::optional<Vector>(model.center) : std::nullopt;
  b.proj_tail = ProjectionError(fom_snaps.States(), model.basis->u, center);
  try
  {
    b.canon_dev = CanonicityDeviation(model.j_hat);
  }
  catch (const Error &)
  {
    b.canon_dev = std::numeric_limits<double>::infinity();
  }
  const Matrix grad = sys.Gradient(fom_snaps.States());
  std::vector<double> sq(static_cast<std::size_t>(grad.cols()));
  for (Index k = 0; k < grad.cols(); k++)
  {
    sq[static_cast<std::size_t>(k)] = grad.col(k).squaredNorm();
  }
  b.grad_norm = sq.size() > 1 ? TrapezoidL2(sq, fom_snaps.TimeStep()) : std::sqrt(sq[0]);
  if (opinf)
  {
    b.eps_dt = opinf->eps_dt;
    b.eps_a = opinf->eps_a;
  }
  return b;
}

double RunReport::HamErrFirst() const
{
  return ham_trace.empty() ? std::numeric_limits<double>::quiet_NaN() : ham_trace.front();
}

double RunReport::HamErrMaxAbs() const
{
  if (ham_trace.empty())
  {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double m = 0.0;
  for (double e : ham_trace)
  {
    // A non-finite entry marks a blown-up trajectory and must dominate.
    if (!std::isfinite(e))
    {
      return std::numeric_limits<double>::infinity();
    }
    m = std::max(m, std::abs(e));
  }
  return m;
}

RunReport MakeRunReport(const HamiltonianSystem &sys, const ReducedModel &model,
                        const SnapshotSet &fom_snaps, const SnapshotSet &rom_full,
                        const std::optional<OpInfErrors> &opinf)
{
  if (fom_snaps.Count() != rom_full.Count() || fom_snaps.Dim() != rom_full.Dim())
  {
    throw Error("run report: FOM and ROM trajectories have different shapes");
  }
  RunReport r;
  r.basis_kind = std::string(BasisKindName(model.basis->kind));
  r.n = model.Size();
  r.variant = std::string(RomVariantName(model.variant));
  r.provenance = std::string(ProvenanceName(model.provenance));
  r.centered = model.centered;
  r.dt = fom_snaps.TimeStep();
  r.t_final = fom_snaps.Times().back();
  r.rel_l2 = RelativeL2(fom_snaps.States(), rom_full.States());
  r.ham_times = rom_full.Times();
  r.ham_trace = HamiltonianTrace(sys, rom_full);
  r.bounds = BoundReport(sys, model, fom_snaps, opinf);
  return r;
}

}  // namespace hamred
