// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_ROM_HPP
#define HAMRED_ROM_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>
#include "hamred/basis.hpp"
#include "hamred/fom.hpp"

namespace hamred
{

enum class RomVariant
{
  Galerkin,
  LeastSquaresHam,
  ConsistentHam
};

enum class Provenance
{
  Intrusive,
  OpInf,
  OpInfReprojected
};

// "galerkin", "lsq_ham", "consistent_ham".
std::string_view RomVariantName(RomVariant v);
RomVariant ParseRomVariant(std::string_view text);
// "intrusive", "opinf", "opinf_reprojected".
std::string_view ProvenanceName(Provenance p);
Provenance ParseProvenance(std::string_view text);

// Reduced nonlinear contribution N(x̂) to the right-hand side and its Jacobian.
struct ReducedNonlinear
{
  std::function<Vector(const Vector &)> rhs;
  std::function<Matrix(const Vector &)> jacobian;
  // f(x̄ + Ux̂), for the reduced energy.
  std::function<double(const Vector &)> value;
};

//
// Reduced model in the common form E x̂̇ = L x̂ + c + N(x̂):
//   Galerkin:          E = I,  L = UᵀJAU,  c = UᵀJAx̄;
//   least-squares H:   E = I,  L = ĴÂ,     c = Ĵĝ;
//   consistent H:      E = Ĵᵀ, L = Â,      c = ĝ,
// with Â = UᵀAU, Ĵ = UᵀJU and ĝ = UᵀAx̄. Nonintrusive models carry an inferred operator in place
// of Â (or of UᵀJAU). The full state is approximated by x̃ = x̄ + Ux̂ with x̄ = 0 when
// uncentered. Immutable after construction.
//
struct ReducedModel
{
  RomVariant variant = RomVariant::Galerkin;
  Provenance provenance = Provenance::Intrusive;
  bool centered = false;
  std::shared_ptr<const ReducedBasis> basis;
  // x̄ (zero vector when uncentered).
  Vector center;
  Vector initial_state;

  Matrix e;
  Matrix l;
  Vector c;
  std::optional<ReducedNonlinear> nonlinear;

  // Symmetric energy operator (Â or its inferred counterpart); absent for inferred Galerkin.
  std::optional<Matrix> a_hat;
  // Ĵ = UᵀJU, always recorded.
  Matrix j_hat;
  // ĝ (Hamiltonian variants) or the Galerkin shift c.
  Vector shift;
  // Linear term ĝ of the reduced energy.
  Vector g_hat;
  // Constant added to the reduced energy so that it matches H(x̄ + Ux̂).
  double energy_offset = 0.0;
  double sigma_min_j = 0.0;
  std::vector<std::string> warnings;

  Index Size() const { return e.rows(); }
  // ½x̂ᵀÂx̂ + ĝᵀx̂ + offset (+ f). Throws when no energy operator exists.
  double Energy(const Vector &xhat) const;
  // Right-hand side of x̂̇ (applies E⁻¹ through a solve).
  Vector VelocityField(const Vector &xhat) const;
  Matrix Reconstruct(const Matrix &xhat) const;
};

ReducedModel BuildGalerkin(const HamiltonianSystem &sys,
                           std::shared_ptr<const ReducedBasis> basis, bool centered);
ReducedModel BuildLsqHam(const HamiltonianSystem &sys, std::shared_ptr<const ReducedBasis> basis,
                         bool centered);
// Throws when σ_min(Ĵ) ≤ 1e-12.
ReducedModel BuildConsistentHam(const HamiltonianSystem &sys,
                                std::shared_ptr<const ReducedBasis> basis, bool centered);
ReducedModel BuildIntrusive(RomVariant variant, const HamiltonianSystem &sys,
                            std::shared_ptr<const ReducedBasis> basis, bool centered);

//
// Packages a given operator into a model. For the Hamiltonian variants op is the symmetric
// energy operator and shift is ĝ; for Galerkin op is the full reduced matrix and shift is c.
// x0 fixes the reduced initial state: zero when centered (x̄ = x0), Uᵀx0 otherwise.
//
ReducedModel AssembleReducedModel(RomVariant variant, Provenance provenance,
                                  std::shared_ptr<const ReducedBasis> basis, const Matrix &op,
                                  const Vector &shift, const Vector &x0, bool centered,
                                  double energy_offset = 0.0);

// Adds the reduced nonlinear contribution of sys (no-op for linear systems).
void AttachNonlinearTerm(ReducedModel &model, const HamiltonianSystem &sys);

//
// Implicit-midpoint stepper (E/dt − L/2) x̂⁺ = (E/dt + L/2) x̂ + c, factorized once per dt;
// nonlinear models use Newton iterations on the same step equation.
//
class RomStepper
{
public:
  RomStepper(const ReducedModel &model, double dt);
  Vector Step(const Vector &xhat) const;
  double TimeStep() const { return dt; }

private:
  struct Impl;
  double dt;
  std::shared_ptr<const Impl> impl;
};

// Reduced trajectory on [0, t_final] from the model's initial state.
SnapshotSet IntegrateRom(const ReducedModel &model, double t_final, double dt,
                         Index sample_every = 1);

// x̃_k = x̄ + U x̂_k, x̄ = 0 when center is absent.
SnapshotSet Reconstruct(const ReducedBasis &basis, const SnapshotSet &reduced,
                        const std::optional<Vector> &center);

}  // namespace hamred

#endif  // HAMRED_ROM_HPP
