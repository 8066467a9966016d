// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/fom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <Eigen/SparseCholesky>

namespace hamred
{

namespace
{

constexpr double SYMMETRY_TOL = 1.0e-12;

double SparseMaxAbs(const SparseMatrix &a)
{
  double m = 0.0;
  for (Index k = 0; k < a.outerSize(); k++)
  {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
    {
      m = std::max(m, std::abs(it.value()));
    }
  }
  return m;
}

bool IsSymmetric(const SparseMatrix &a)
{
  if (a.rows() != a.cols())
  {
    return false;
  }
  const SparseMatrix diff = SparseMatrix(a.transpose()) - a;
  return SparseMaxAbs(diff) <= SYMMETRY_TOL * std::max(1.0, SparseMaxAbs(a));
}

bool IsDiagonalPattern(const SparseMatrix &a)
{
  for (Index k = 0; k < a.outerSize(); k++)
  {
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
    {
      if (it.row() != it.col() && it.value() != 0.0)
      {
        return false;
      }
    }
  }
  return true;
}

}  // namespace

//
// MassMatrix
//

struct MassMatrix::Factor
{
  Eigen::SimplicialLLT<SparseMatrix> llt;
};

MassMatrix MassMatrix::Identity(Index m)
{
  return Diagonal(Vector::Ones(m));
}

MassMatrix MassMatrix::Diagonal(Vector d)
{
  if (d.size() == 0 || (d.array() <= 0.0).any())
  {
    throw Error("mass matrix not SPD");
  }
  MassMatrix out;
  out.size = d.size();
  out.diag = std::make_shared<const Vector>(std::move(d));
  return out;
}

MassMatrix MassMatrix::Sparse(const SparseMatrix &m)
{
  if (m.rows() != m.cols())
  {
    throw Error("mass matrix must be square");
  }
  if (!IsSymmetric(m))
  {
    throw Error("mass matrix not SPD (not symmetric)");
  }
  if (IsDiagonalPattern(m))
  {
    return Diagonal(Vector(m.diagonal()));
  }
  auto f = std::make_shared<Factor>();
  f->llt.compute(m);
  if (f->llt.info() != Eigen::Success)
  {
    throw Error("mass matrix not SPD");
  }
  MassMatrix out;
  out.size = m.rows();
  out.mat = std::make_shared<const SparseMatrix>(m);
  out.factor = std::move(f);
  return out;
}

Matrix MassMatrix::Apply(const Matrix &x) const
{
  if (diag)
  {
    return diag->asDiagonal() * x;
  }
  return (*mat) * x;
}

Matrix MassMatrix::Solve(const Matrix &x) const
{
  if (diag)
  {
    return diag->cwiseInverse().asDiagonal() * x;
  }
  return factor->llt.solve(x);
}

SparseMatrix MassMatrix::AsSparse() const
{
  if (diag)
  {
    SparseMatrix m(size, size);
    m.reserve(Eigen::VectorXi::Constant(size, 1));
    for (Index i = 0; i < size; i++)
    {
      m.insert(i, i) = (*diag)(i);
    }
    m.makeCompressed();
    return m;
  }
  return *mat;
}

//
// QuadraticOperator
//

QuadraticOperator QuadraticOperator::Block(SparseMatrix stiffness, MassMatrix mass)
{
  if (stiffness.rows() != stiffness.cols() || stiffness.rows() != mass.Size())
  {
    throw Error("stiffness/mass dimension mismatch");
  }
  if (!IsSymmetric(stiffness))
  {
    throw Error("stiffness matrix is not symmetric");
  }
  QuadraticOperator op;
  op.block = true;
  stiffness.makeCompressed();
  op.stiffness = std::make_shared<const SparseMatrix>(std::move(stiffness));
  op.mass = std::make_shared<const MassMatrix>(std::move(mass));
  return op;
}

QuadraticOperator QuadraticOperator::General(Matrix a)
{
  if (a.rows() != a.cols() || a.rows() % 2 != 0 || a.rows() == 0)
  {
    throw Error("quadratic operator must be square with even dimension");
  }
  if (MaxAbs(a - a.transpose()) > SYMMETRY_TOL * std::max(1.0, MaxAbs(a)))
  {
    throw Error("quadratic operator is not symmetric");
  }
  QuadraticOperator op;
  op.block = false;
  op.dense = std::make_shared<const Matrix>(std::move(a));
  return op;
}

Index QuadraticOperator::Dim() const
{
  return block ? 2 * stiffness->rows() : dense->rows();
}

Matrix QuadraticOperator::Apply(const Matrix &x) const
{
  if (x.rows() != Dim())
  {
    throw Error("dimension mismatch applying quadratic operator: expected " +
                std::to_string(Dim()) + ", got " + std::to_string(x.rows()));
  }
  if (!block)
  {
    return (*dense) * x;
  }
  const Index m = stiffness->rows();
  Matrix y(x.rows(), x.cols());
  y.topRows(m) = (*stiffness) * x.topRows(m);
  y.bottomRows(m) = mass->Solve(x.bottomRows(m));
  return y;
}

double QuadraticOperator::QuadraticForm(const Vector &x) const
{
  return x.dot(Apply(x).col(0));
}

const SparseMatrix &QuadraticOperator::Stiffness() const
{
  if (!block)
  {
    throw Error("general quadratic operator has no stiffness block");
  }
  return *stiffness;
}

const MassMatrix &QuadraticOperator::Mass() const
{
  if (!block)
  {
    throw Error("general quadratic operator has no mass block");
  }
  return *mass;
}

const Matrix &QuadraticOperator::Dense() const
{
  if (block)
  {
    throw Error("block quadratic operator has no dense form");
  }
  return *dense;
}

Matrix QuadraticOperator::ToDense() const
{
  if (!block)
  {
    return *dense;
  }
  return Apply(Matrix::Identity(Dim(), Dim()));
}

//
// HamiltonianSystem
//

HamiltonianSystem::HamiltonianSystem(QuadraticOperator a, Vector x0,
                                     std::optional<NonlinearTerm> f)
  : quad(std::move(a)), x0(std::move(x0)), nonlinear(std::move(f))
{
  if (this->x0.size() != quad.Dim())
  {
    throw Error("initial state has dimension " + std::to_string(this->x0.size()) +
                ", system has " + std::to_string(quad.Dim()));
  }
  if (nonlinear && (!nonlinear->value || !nonlinear->gradient))
  {
    throw Error("nonlinear term needs both a value and a gradient callback");
  }
}

Matrix HamiltonianSystem::Gradient(const Matrix &x) const
{
  Matrix g = quad.Apply(x);
  if (nonlinear)
  {
    for (Index k = 0; k < x.cols(); k++)
    {
      g.col(k) += nonlinear->gradient(x.col(k));
    }
  }
  return g;
}

Matrix HamiltonianSystem::Velocity(const Matrix &x) const
{
  return ApplyJ(Gradient(x));
}

double HamiltonianSystem::Energy(const Vector &x) const
{
  if (x.size() != Dim())
  {
    throw Error("dimension mismatch evaluating Hamiltonian: expected " +
                std::to_string(Dim()) + ", got " + std::to_string(x.size()));
  }
  double h = 0.5 * quad.QuadraticForm(x);
  if (nonlinear)
  {
    h += nonlinear->value(x);
  }
  return h;
}

double HamiltonianValue(const HamiltonianSystem &sys, const Vector &x)
{
  return sys.Energy(x);
}

//
// SnapshotSet
//

SnapshotSet::SnapshotSet(Matrix states, std::vector<double> times,
                         std::optional<Matrix> velocities, std::optional<Vector> center)
  : x(std::move(states)), t(std::move(times)), v(std::move(velocities)),
    center(std::move(center))
{
  if (x.cols() == 0)
  {
    throw Error("snapshot set needs at least one column");
  }
  if (static_cast<Index>(t.size()) != x.cols())
  {
    throw Error("snapshot set has " + std::to_string(x.cols()) + " columns but " +
                std::to_string(t.size()) + " times");
  }
  if (t.size() > 1)
  {
    dt = t[1] - t[0];
    if (!(dt > 0.0))
    {
      throw Error("snapshot times must be strictly increasing");
    }
    const double scale = std::max(std::abs(t.front()), std::abs(t.back()));
    const double tol = 1.0e-9 * dt + 8.0 * std::numeric_limits<double>::epsilon() * scale;
    for (std::size_t k = 1; k < t.size(); k++)
    {
      const double step = t[k] - t[k - 1];
      if (!(step > 0.0))
      {
        throw Error("snapshot times must be strictly increasing");
      }
      if (std::abs(step - dt) > tol)
      {
        throw Error("snapshot times must be uniformly spaced");
      }
    }
  }
  if (v && (v->rows() != x.rows() || v->cols() != x.cols()))
  {
    throw Error("velocity matrix shape does not match states");
  }
  if (this->center && this->center->size() != x.rows())
  {
    throw Error("center vector dimension does not match states");
  }
}

SnapshotSet SnapshotSet::Uniform(Matrix states, double t0, double dt,
                                 std::optional<Matrix> velocities)
{
  std::vector<double> times(static_cast<std::size_t>(states.cols()));
  for (std::size_t k = 0; k < times.size(); k++)
  {
    times[k] = t0 + static_cast<double>(k) * dt;
  }
  SnapshotSet s(std::move(states), std::move(times), std::move(velocities));
  s.dt = dt;
  return s;
}

const Matrix &SnapshotSet::Velocities() const
{
  if (!v)
  {
    throw Error("snapshot set carries no velocities");
  }
  return *v;
}

//
// Builders
//

AxisFace AxisFace::Parse(std::string_view text)
{
  AxisFace f;
  if (text.size() < 2)
  {
    throw Error("bad face id '" + std::string(text) + "'");
  }
  const char ax = text[0];
  if (ax < 'x' || ax > 'z')
  {
    throw Error("bad face axis in '" + std::string(text) + "'");
  }
  f.axis = ax - 'x';
  const std::string_view side = text.substr(1);
  if (side == "-" || side == "min")
  {
    f.upper = false;
  }
  else if (side == "+" || side == "max")
  {
    f.upper = true;
  }
  else
  {
    throw Error("bad face side in '" + std::string(text) + "'");
  }
  return f;
}

std::string AxisFace::Name() const
{
  return std::string(1, static_cast<char>('x' + axis)) + (upper ? "+" : "-");
}

double WaveInitialProfile(double y)
{
  if (y < 0.0)
  {
    throw Error("wave profile is defined for y >= 0");
  }
  if (y <= 1.0)
  {
    return 1.0 - 1.5 * y * y + 0.75 * y * y * y;
  }
  if (y <= 2.0)
  {
    const double r = 2.0 - y;
    return 0.25 * r * r * r;
  }
  return 0.0;
}

HamiltonianSystem BuildWaveFom(Index num_cells, double wave_speed, double length)
{
  if (num_cells < 3)
  {
    throw Error("wave FOM needs at least 3 cells");
  }
  if (!(wave_speed > 0.0) || !(length > 0.0))
  {
    throw Error("wave speed and length must be positive");
  }
  const Index m = num_cells;
  const double ds = length / static_cast<double>(m);
  // H_q = ½c² Σᵢ [(qᵢ₊₁−qᵢ)² + (qᵢ−qᵢ₋₁)²]/(4Δs²) = ½c² Σᵢ (qᵢ₊₁−qᵢ)²/(2Δs²) on a periodic grid.
  const double w = wave_speed * wave_speed / (2.0 * ds * ds);
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(3 * m));
  for (Index i = 0; i < m; i++)
  {
    trip.emplace_back(i, i, 2.0 * w);
    trip.emplace_back(i, (i + 1) % m, -w);
    trip.emplace_back(i, (i + m - 1) % m, -w);
  }
  SparseMatrix k(m, m);
  k.setFromTriplets(trip.begin(), trip.end());

  Vector x0 = Vector::Zero(2 * m);
  for (Index i = 0; i < m; i++)
  {
    const double s = static_cast<double>(i) * ds;
    x0(i) = WaveInitialProfile(std::abs(s - 0.5));
  }
  return HamiltonianSystem(QuadraticOperator::Block(std::move(k), MassMatrix::Identity(m)),
                           std::move(x0));
}

HamiltonianSystem BuildLatticeFom(const LatticeSpec &spec)
{
  if (spec.nx < 2 || spec.ny < 2 || spec.nz < 2)
  {
    throw Error("lattice needs at least 2 nodes along every axis");
  }
  if (!(spec.stiffness > 0.0) || !(spec.mass > 0.0))
  {
    throw Error("lattice stiffness and mass must be positive");
  }
  if (spec.clamped_face == spec.kick_face)
  {
    throw Error("clamped face and kick face must differ");
  }
  const std::array<Index, 3> dims{spec.nx, spec.ny, spec.nz};
  auto on_face = [&](const std::array<Index, 3> &c, const AxisFace &f)
  { return c[f.axis] == (f.upper ? dims[f.axis] - 1 : 0); };
  auto node_id = [&](const std::array<Index, 3> &c)
  { return c[0] + dims[0] * (c[1] + dims[1] * c[2]); };

  const Index total = spec.nx * spec.ny * spec.nz;
  std::vector<Index> dof_node(static_cast<std::size_t>(total), -1);
  Index free_nodes = 0;
  for (Index kz = 0; kz < spec.nz; kz++)
  {
    for (Index ky = 0; ky < spec.ny; ky++)
    {
      for (Index kx = 0; kx < spec.nx; kx++)
      {
        const std::array<Index, 3> c{kx, ky, kz};
        if (!on_face(c, spec.clamped_face))
        {
          dof_node[static_cast<std::size_t>(node_id(c))] = free_nodes++;
        }
      }
    }
  }
  const Index m = 3 * free_nodes;

  // Linearized axial springs: an edge along axis a stores ½k(u_a − v_a)², clamped ends fixed.
  std::vector<Eigen::Triplet<double>> trip;
  const double k = spec.stiffness;
  for (Index kz = 0; kz < spec.nz; kz++)
  {
    for (Index ky = 0; ky < spec.ny; ky++)
    {
      for (Index kx = 0; kx < spec.nx; kx++)
      {
        const std::array<Index, 3> c{kx, ky, kz};
        for (int a = 0; a < 3; a++)
        {
          std::array<Index, 3> nb = c;
          nb[a] += 1;
          if (nb[a] >= dims[a])
          {
            continue;
          }
          const Index iu = dof_node[static_cast<std::size_t>(node_id(c))];
          const Index iv = dof_node[static_cast<std::size_t>(node_id(nb))];
          const Index du = iu >= 0 ? 3 * iu + a : -1;
          const Index dv = iv >= 0 ? 3 * iv + a : -1;
          if (du >= 0)
          {
            trip.emplace_back(du, du, k);
          }
          if (dv >= 0)
          {
            trip.emplace_back(dv, dv, k);
          }
          if (du >= 0 && dv >= 0)
          {
            trip.emplace_back(du, dv, -k);
            trip.emplace_back(dv, du, -k);
          }
        }
      }
    }
  }
  SparseMatrix stiff(m, m);
  stiff.setFromTriplets(trip.begin(), trip.end());

  Vector x0 = Vector::Zero(2 * m);
  for (Index kz = 0; kz < spec.nz; kz++)
  {
    for (Index ky = 0; ky < spec.ny; ky++)
    {
      for (Index kx = 0; kx < spec.nx; kx++)
      {
        const std::array<Index, 3> c{kx, ky, kz};
        const Index id = dof_node[static_cast<std::size_t>(node_id(c))];
        if (id >= 0 && on_face(c, spec.kick_face))
        {
          x0(m + 3 * id + spec.kick_face.axis) = spec.mass * spec.kick_speed;
        }
      }
    }
  }
  return HamiltonianSystem(
      QuadraticOperator::Block(std::move(stiff), MassMatrix::Diagonal(Vector::Constant(m, spec.mass))),
      std::move(x0));
}

HamiltonianSystem BuildFromMatrices(const SparseMatrix &mass, const SparseMatrix &stiffness,
                                    const Vector &q0, const Vector &qdot0)
{
  const Index m = mass.rows();
  if (mass.cols() != m || stiffness.rows() != m || stiffness.cols() != m ||
      q0.size() != m || qdot0.size() != m)
  {
    throw Error("dimension mismatch between mass, stiffness and initial data");
  }
  MassMatrix mm = MassMatrix::Sparse(mass);
  Vector x0(2 * m);
  x0.head(m) = q0;
  x0.tail(m) = mm.Apply(qdot0);
  return HamiltonianSystem(QuadraticOperator::Block(stiffness, std::move(mm)), std::move(x0));
}

Index StepCount(double t_final, double dt)
{
  if (!(dt > 0.0))
  {
    throw Error("time step must be positive");
  }
  if (t_final < 0.0)
  {
    throw Error("final time must be non-negative");
  }
  const double ratio = t_final / dt;
  const double steps = std::round(ratio);
  if (std::abs(steps - ratio) > 1.0e-8 * std::max(1.0, ratio))
  {
    throw Error("final time is not an integer multiple of the time step");
  }
  return static_cast<Index>(steps);
}

//
// Implicit midpoint
//

struct MidpointStepper::Impl
{
  QuadraticOperator quad;
  // Block path: (M + dt²/4 K) q_mid = M q + dt/2 p, the Schur complement of I − (dt/2)JA.
  Eigen::SimplicialLDLT<SparseMatrix> schur;
  // General path: dense LU of I − (dt/2)JA and the explicit half-step I + (dt/2)JA.
  Eigen::PartialPivLU<Matrix> lu;
  Matrix explicit_half;
};

MidpointStepper::MidpointStepper(const HamiltonianSystem &sys, double dt) : dt(dt)
{
  if (!sys.IsLinear())
  {
    throw Error("implicit midpoint stepping of nonlinear full-order systems is not supported");
  }
  if (dt == 0.0 || !std::isfinite(dt))
  {
    throw Error("time step must be nonzero and finite");
  }
  auto impl_ = std::make_shared<Impl>();
  impl_->quad = sys.Quad();
  if (sys.Quad().IsBlock())
  {
    const SparseMatrix s =
        sys.Quad().Mass().AsSparse() + (0.25 * dt * dt) * sys.Quad().Stiffness();
    impl_->schur.compute(s);
    if (impl_->schur.info() != Eigen::Success)
    {
      throw Error("midpoint step matrix factorization failed");
    }
  }
  else
  {
    const Index n = sys.Dim();
    const Matrix ja = ApplyJ(sys.Quad().Dense());
    const Matrix lhs = Matrix::Identity(n, n) - 0.5 * dt * ja;
    impl_->lu.compute(lhs);
    if (!std::isfinite(impl_->lu.rcond()) || impl_->lu.rcond() < 1.0e-14)
    {
      throw Error("midpoint step matrix is singular");
    }
    impl_->explicit_half = Matrix::Identity(n, n) + 0.5 * dt * ja;
  }
  impl = std::move(impl_);
}

Vector MidpointStepper::Step(const Vector &x) const
{
  if (x.size() != impl->quad.Dim())
  {
    throw Error("dimension mismatch in midpoint step");
  }
  if (!impl->quad.IsBlock())
  {
    return impl->lu.solve(impl->explicit_half * x);
  }
  const Index m = x.size() / 2;
  const auto q = x.head(m);
  const auto p = x.tail(m);
  const Vector rhs = impl->quad.Mass().Apply(q) + (0.5 * dt) * p;
  const Vector qm = impl->schur.solve(rhs);
  Vector out(x.size());
  out.head(m) = 2.0 * qm - q;
  out.tail(m) = p - dt * (impl->quad.Stiffness() * qm);
  return out;
}

SnapshotSet IntegrateMidpoint(const HamiltonianSystem &sys, double t_final, double dt,
                              Index sample_every)
{
  if (sample_every < 1)
  {
    throw Error("sample_every must be positive");
  }
  const Index steps = StepCount(t_final, dt);
  const Index samples = steps / sample_every + 1;
  Matrix states(sys.Dim(), samples);
  states.col(0) = sys.InitialState();
  if (steps > 0)
  {
    const MidpointStepper stepper(sys, dt);
    Vector x = sys.InitialState();
    for (Index k = 1; k <= steps; k++)
    {
      x = stepper.Step(x);
      if (k % sample_every == 0)
      {
        states.col(k / sample_every) = x;
      }
    }
  }
  else if (!sys.IsLinear())
  {
    throw Error("implicit midpoint stepping of nonlinear full-order systems is not supported");
  }
  Matrix vel = sys.Velocity(states);
  return SnapshotSet::Uniform(std::move(states), 0.0, dt * static_cast<double>(sample_every),
                              std::move(vel));
}

//
// Newmark-β
//

SnapshotSet IntegrateNewmark(const SparseMatrix &mass, const SparseMatrix &stiffness,
                             const Vector &q0, const Vector &qdot0, const NewmarkParams &params)
{
  if (!(params.beta > 0.0) || !(params.gamma > 0.0) || params.gamma > 1.0)
  {
    throw Error("Newmark parameters need beta > 0 and 0 < gamma <= 1");
  }
  if (params.sample_every < 1)
  {
    throw Error("sample_every must be positive");
  }
  const Index m = mass.rows();
  if (mass.cols() != m || stiffness.rows() != m || stiffness.cols() != m ||
      q0.size() != m || qdot0.size() != m)
  {
    throw Error("dimension mismatch between mass, stiffness and initial data");
  }
  const Index steps = StepCount(params.t_final, params.dt);
  const MassMatrix mm = MassMatrix::Sparse(mass);
  const double dt = params.dt;
  const double beta = params.beta;
  const double gamma = params.gamma;

  Eigen::SimplicialLDLT<SparseMatrix> eff;
  eff.compute(mm.AsSparse() + (beta * dt * dt) * stiffness);
  if (eff.info() != Eigen::Success)
  {
    throw Error("Newmark effective stiffness factorization failed");
  }

  const Index samples = steps / params.sample_every + 1;
  Matrix states(2 * m, samples);
  Matrix vel(2 * m, samples);
  Vector q = q0;
  Vector v = qdot0;
  Vector a = mm.Solve(-(stiffness * q));
  auto record = [&](Index col)
  {
    states.col(col).head(m) = q;
    states.col(col).tail(m) = mm.Apply(v);
    vel.col(col).head(m) = v;
    vel.col(col).tail(m) = -(stiffness * q);
  };
  record(0);
  for (Index k = 1; k <= steps; k++)
  {
    const Vector q_pred = q + dt * v + (dt * dt * (0.5 - beta)) * a;
    const Vector v_pred = v + (dt * (1.0 - gamma)) * a;
    a = eff.solve(-(stiffness * q_pred));
    q = q_pred + (beta * dt * dt) * a;
    v = v_pred + (gamma * dt) * a;
    if (k % params.sample_every == 0)
    {
      record(k / params.sample_every);
    }
  }
  return SnapshotSet::Uniform(std::move(states), 0.0,
                              dt * static_cast<double>(params.sample_every), std::move(vel));
}

SnapshotSet IntegrateNewmark(const HamiltonianSystem &sys, const NewmarkParams &params)
{
  if (!sys.Quad().IsBlock() || !sys.IsLinear())
  {
    throw Error("Newmark integration needs a linear block-structured system");
  }
  const Index m = sys.HalfDim();
  const MassMatrix &mm = sys.Quad().Mass();
  const Vector q0 = sys.InitialState().head(m);
  const Vector qdot0 = mm.Solve(sys.InitialState().tail(m));
  return IntegrateNewmark(mm.AsSparse(), sys.Quad().Stiffness(), q0, qdot0, params);
}

}  // namespace hamred
