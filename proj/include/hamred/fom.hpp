// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_FOM_HPP
#define HAMRED_FOM_HPP

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>
#include "hamred/linalg.hpp"

namespace hamred
{

//
// Symmetric positive-definite mass matrix. Applies M and M⁻¹ without forming M⁻¹: a diagonal
// fast path for lumped mass, otherwise a stored sparse Cholesky factorization.
//
class MassMatrix
{
public:
  static MassMatrix Identity(Index m);
  static MassMatrix Diagonal(Vector d);
  // Throws "mass matrix not SPD" when the factorization fails.
  static MassMatrix Sparse(const SparseMatrix &m);

  Index Size() const { return size; }
  bool IsDiagonal() const { return static_cast<bool>(diag); }
  Matrix Apply(const Matrix &x) const;
  Matrix Solve(const Matrix &x) const;
  SparseMatrix AsSparse() const;

private:
  struct Factor;
  Index size = 0;
  std::shared_ptr<const Vector> diag;
  std::shared_ptr<const SparseMatrix> mat;
  std::shared_ptr<const Factor> factor;
};

//
// Symmetric positive-semidefinite map A of the quadratic Hamiltonian part ½xᵀAx. Either
// block-structured A = diag(K, M⁻¹) with sparse stiffness K and a mass matrix, or a general
// dense symmetric matrix. Copies share the underlying immutable data.
//
class QuadraticOperator
{
public:
  static QuadraticOperator Block(SparseMatrix stiffness, MassMatrix mass);
  static QuadraticOperator General(Matrix a);

  Index Dim() const;
  bool IsBlock() const { return block; }
  Matrix Apply(const Matrix &x) const;
  double QuadraticForm(const Vector &x) const;

  // Block accessors; throw on a general operator.
  const SparseMatrix &Stiffness() const;
  const MassMatrix &Mass() const;
  // General accessor; throws on a block operator.
  const Matrix &Dense() const;
  // Densified A, for small systems and tests.
  Matrix ToDense() const;

private:
  bool block = true;
  std::shared_ptr<const SparseMatrix> stiffness;
  std::shared_ptr<const MassMatrix> mass;
  std::shared_ptr<const Matrix> dense;
};

// Non-quadratic Hamiltonian part f. The Hessian is optional and used only by Newton solves.
struct NonlinearTerm
{
  std::function<double(const Vector &)> value;
  std::function<Vector(const Vector &)> gradient;
  std::function<Matrix(const Vector &)> hessian;
};

//
// Canonical Hamiltonian system ẋ = J∇H(x), H(x) = ½xᵀAx + f(x), state x = (q, p) ∈ ℝᴺ.
//
class HamiltonianSystem
{
public:
  HamiltonianSystem(QuadraticOperator a, Vector x0,
                    std::optional<NonlinearTerm> f = std::nullopt);

  Index Dim() const { return quad.Dim(); }
  Index HalfDim() const { return quad.Dim() / 2; }
  const QuadraticOperator &Quad() const { return quad; }
  const Vector &InitialState() const { return x0; }
  const std::optional<NonlinearTerm> &Nonlinear() const { return nonlinear; }
  bool IsLinear() const { return !nonlinear.has_value(); }

  // Columnwise ∇H and J∇H.
  Matrix Gradient(const Matrix &x) const;
  Matrix Velocity(const Matrix &x) const;
  double Energy(const Vector &x) const;

private:
  QuadraticOperator quad;
  Vector x0;
  std::optional<NonlinearTerm> nonlinear;
};

// ½xᵀAx + f(x).
double HamiltonianValue(const HamiltonianSystem &sys, const Vector &x);

//
// Uniformly sampled trajectory: column k of the states holds x(t_k).
//
class SnapshotSet
{
public:
  // Rejects non-increasing or non-uniform time grids.
  SnapshotSet(Matrix states, std::vector<double> times,
              std::optional<Matrix> velocities = std::nullopt,
              std::optional<Vector> center = std::nullopt);
  static SnapshotSet Uniform(Matrix states, double t0, double dt,
                             std::optional<Matrix> velocities = std::nullopt);

  Index Dim() const { return x.rows(); }
  Index Count() const { return x.cols(); }
  const Matrix &States() const { return x; }
  const std::vector<double> &Times() const { return t; }
  double TimeStep() const { return dt; }
  bool HasVelocities() const { return v.has_value(); }
  const Matrix &Velocities() const;
  const std::optional<Vector> &Center() const { return center; }

private:
  Matrix x;
  std::vector<double> t;
  double dt = 0.0;
  std::optional<Matrix> v;
  std::optional<Vector> center;
};

// Grid face: axis 0..2 and lower/upper side, written "x-", "x+", "y-", ... in configs.
struct AxisFace
{
  int axis = 0;
  bool upper = false;

  static AxisFace Parse(std::string_view text);
  std::string Name() const;
  bool operator==(const AxisFace &) const = default;
};

struct LatticeSpec
{
  Index nx = 3, ny = 3, nz = 3;
  double stiffness = 1.0;
  double mass = 1.0;
  AxisFace clamped_face{0, false};
  AxisFace kick_face{0, true};
  double kick_speed = 1.0;
};

// Cubic spline profile of the wave initial displacement.
double WaveInitialProfile(double y);

// Periodic 1D wave with M grid points on [0, l); quadratic operator from the averaged two-sided
// difference energy, K = (c²/(2Δs²))·circ(−1, 2, −1), unit mass.
HamiltonianSystem BuildWaveFom(Index num_cells, double wave_speed, double length);

// Nearest-neighbour mass-spring lattice with a clamped face and an initial velocity kick.
HamiltonianSystem BuildLatticeFom(const LatticeSpec &spec);

// First-order form of M q̈ + K q = 0 with p = M q̇.
HamiltonianSystem BuildFromMatrices(const SparseMatrix &mass, const SparseMatrix &stiffness,
                                    const Vector &q0, const Vector &qdot0);

// Number of steps covering [0, t_final]; rejects t_final that is not a multiple of dt.
Index StepCount(double t_final, double dt);

//
// One implicit-midpoint step of a linear Hamiltonian system. The step factorization is built
// once per dt. Negative dt integrates backwards.
//
class MidpointStepper
{
public:
  MidpointStepper(const HamiltonianSystem &sys, double dt);

  double TimeStep() const { return dt; }
  Vector Step(const Vector &x) const;

private:
  struct Impl;
  double dt;
  std::shared_ptr<const Impl> impl;
};

SnapshotSet IntegrateMidpoint(const HamiltonianSystem &sys, double t_final, double dt,
                              Index sample_every = 1);

struct NewmarkParams
{
  double t_final = 0.0;
  double dt = 0.0;
  double beta = 0.25;
  double gamma = 0.5;
  Index sample_every = 1;
};

// Newmark-β for M q̈ + K q = 0; snapshots are emitted in first-order form x = (q, M q̇) with
// exact velocities ẋ = (q̇, −K q).
SnapshotSet IntegrateNewmark(const SparseMatrix &mass, const SparseMatrix &stiffness,
                             const Vector &q0, const Vector &qdot0,
                             const NewmarkParams &params);
SnapshotSet IntegrateNewmark(const HamiltonianSystem &sys, const NewmarkParams &params);

}  // namespace hamred

#endif  // HAMRED_FOM_HPP
