// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_OPINF_HPP
#define HAMRED_OPINF_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string_view>
#include "hamred/basis.hpp"
#include "hamred/fom.hpp"
#include "hamred/rom.hpp"

namespace hamred
{

enum class VelocitySource
{
  Exact,
  Central2,
  Forward1
};

// "exact", "central2", "forward1".
std::string_view VelocitySourceName(VelocitySource s);
VelocitySource ParseVelocitySource(std::string_view text);

// Finite-difference time derivative of uniformly spaced columns. Central2 is second order with
// one-sided second-order ends (first order when only two columns exist); Forward1 is a forward
// difference with a backward difference in the last column.
Matrix FiniteDifferenceVelocity(const Matrix &x, double dt, VelocitySource scheme);
Matrix FiniteDifferenceVelocity(const SnapshotSet &snaps, VelocitySource scheme);

// One step of the true FOM flow over the snapshot spacing.
using FlowStep = std::function<Vector(const Vector &)>;
// Exact velocity oracle ẋ = J∇H(x), columnwise.
using VelocityOracle = std::function<Matrix(const Matrix &)>;

//
// Markovian re-projected trajectory of steps + 1 states. Uncentered: x₀ ↦ P_U x₀,
// x_k = P_U φ(x_{k−1}). Centered: the stored states are x₀ + P_U(x_k − x₀), i.e.
// x_k = x₀ + P_U(φ(x_{k−1}) − x₀), which carries the same reduced coordinates and velocity
// evaluation points as the unshifted sequence. Velocities are filled from the oracle when given.
//
SnapshotSet ReprojectStates(const FlowStep &step, const ReducedBasis &basis, const Vector &x0,
                            Index steps, double dt, bool centered,
                            const VelocityOracle &velocity = nullptr);

// Re-projects existing snapshots (x̄ + P_U(x_k − x̄), x̄ = x₀ when centered) and evaluates the
// velocity oracle there; used in place of a new trajectory when exact velocities exist.
SnapshotSet ReprojectSnapshots(const SnapshotSet &snaps, const ReducedBasis &basis, bool centered,
                               const VelocityOracle &velocity);

// Symmetric Ā minimizing ‖Z − ĀX̂‖_F, i.e. the solution of ĀS + SĀ = ZX̂ᵀ + X̂Zᵀ with
// S = X̂X̂ᵀ. Throws when X̂ is rank deficient.
Matrix InferSymmetricOperator(const Matrix &x_hat, const Matrix &z);

// Variationally consistent inference: Z = (JU)ᵀX_t − F̂ with full-order velocity data X_t.
Matrix InferVch(const Matrix &x_hat, const Matrix &x_t, const Matrix &f_hat, const Matrix &u);

// Least-squares Hamiltonian inference: symmetric Ā minimizing ‖X̂_t − Ĵ(ĀX̂ + F̂)‖_F with
// reduced velocity data X̂_t = UᵀD_t. Solves ĜĀS + SĀĜ = R with Ĝ = ĴᵀĴ.
Matrix InferCh(const Matrix &x_hat, const Matrix &xt_hat, const Matrix &f_hat,
               const Matrix &j_hat);

// Unconstrained M̂ minimizing ‖X̂_t − M̂X̂‖_F with Gram-matrix ridge.
Matrix InferGalerkin(const Matrix &x_hat, const Matrix &xt_hat, double ridge = 1.0e-12);

// Dense solvers of the matrix equations behind the inference problems.
// SĀ + ĀS = C via the eigendecomposition of symmetric S.
Matrix SolveSymmetricLyapunov(const Matrix &s, const Matrix &c);
// GĀS + SĀG = R via simultaneous diagonalization of SPD G and S, with a dense Kronecker fallback
// for n ≤ 64 when G is ill-conditioned.
Matrix SolveSymmetricSylvester(const Matrix &g, const Matrix &s, const Matrix &r);

// Centered shift from v₀ = ẋ(0): (JU)ᵀ(v₀ − J∇f(x₀)) for the Hamiltonian variants and
// Uᵀ(v₀ − J∇f(x₀)) for Galerkin.
Vector CenteredShiftNonintrusive(const Vector &v0, const Vector &x0, const ReducedBasis &basis,
                                 RomVariant variant,
                                 const std::optional<NonlinearTerm> &f = std::nullopt);

ReducedModel AssembleOpInfRom(const Matrix &op, const Vector &shift,
                              std::shared_ptr<const ReducedBasis> basis, RomVariant variant,
                              bool centered, bool reprojected, const Vector &x0,
                              double energy_offset = 0.0);

struct OpInfOptions
{
  RomVariant variant = RomVariant::ConsistentHam;
  bool reprojected = true;
  VelocitySource velocity_source = VelocitySource::Exact;
  bool centered = true;
};

struct OpInfResult
{
  ReducedModel model;
  // Inferred operator (symmetric Ā, or M̂ for Galerkin) and the centered shift.
  Matrix op;
  Vector shift;
  // Training data actually used: full-order states and their full-order velocity estimates.
  // LSQ targets project these as UᵀD_t(X); CH targets form UᵀJᵀD_t(P_U X) from them.
  Matrix states;
  Matrix velocities;
  Matrix x_hat;
  // L²-in-time norms of the velocity error ẋ − D_t(x) and of the residual of the model's own
  // equation on the training data.
  double eps_dt = 0.0;
  double eps_a = 0.0;
  // ‖residual‖_F / ‖target‖_F.
  double relative_residual = 0.0;
};

//
// Full nonintrusive pipeline on training snapshots. The system provides the FOM flow for
// re-projected trajectories and exact velocities; vanilla inference with finite differences only
// reads the snapshots (the system is then used for the error diagnostics alone).
//
OpInfResult RunOpInf(const HamiltonianSystem &sys, const SnapshotSet &snaps,
                     std::shared_ptr<const ReducedBasis> basis, const OpInfOptions &options,
                     Index flow_substeps = 1);

}  // namespace hamred

#endif  // HAMRED_OPINF_HPP
