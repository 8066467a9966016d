// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <memory>
#include <random>
#include "doctest.h"
#include "hamred/basis.hpp"
#include "hamred/fom.hpp"
#include "hamred/opinf.hpp"
#include "hamred/rom.hpp"
#include "support.hpp"

using namespace hamred;
using hamred::test::DenseJ;
using hamred::test::Gaussian;
using hamred::test::KroneckerSylvester;

namespace
{

std::shared_ptr<const ReducedBasis> Share(ReducedBasis b)
{
  return std::make_shared<const ReducedBasis>(std::move(b));
}

struct WaveCase
{
  HamiltonianSystem sys;
  SnapshotSet snaps;
};

WaveCase SmallWave()
{
  HamiltonianSystem sys = BuildWaveFom(100, 0.1, 1.0);
  SnapshotSet snaps = IntegrateMidpoint(sys, 4.0, 0.02);
  return {std::move(sys), std::move(snaps)};
}

double RelF(const Matrix &a, const Matrix &b)
{
  return (a - b).norm() / b.norm();
}

// Random invertible skew matrix that is not orthogonal.
Matrix RandomSkew(Index n, std::mt19937_64 &rng)
{
  const Matrix a = Gaussian(n, n, rng);
  return a - a.transpose() + DenseJ(n);
}

}  // namespace

TEST_CASE("velocity source names round trip")
{
  for (VelocitySource s : {VelocitySource::Exact, VelocitySource::Central2, VelocitySource::Forward1})
  {
    CHECK(ParseVelocitySource(VelocitySourceName(s)) == s);
  }
  CHECK_THROWS_AS(ParseVelocitySource("spline"), Error);
}

TEST_CASE("finite differences are exact on low-degree polynomials")
{
  const double dt = 0.1;
  std::mt19937_64 rng(1);
  const Vector v = Gaussian(4, 1, rng);
  const Vector a = Gaussian(4, 1, rng);
  Matrix lin(4, 6);
  Matrix quad(4, 6);
  Matrix quad_dot(4, 6);
  for (Index k = 0; k < 6; k++)
  {
    const double t = static_cast<double>(k) * dt;
    lin.col(k) = static_cast<double>(k) * v;
    quad.col(k) = t * v + t * t * a;
    quad_dot.col(k) = v + 2.0 * t * a;
  }
  for (VelocitySource s : {VelocitySource::Central2, VelocitySource::Forward1})
  {
    const Matrix d = FiniteDifferenceVelocity(lin, dt, s);
    for (Index k = 0; k < 6; k++)
    {
      CHECK(MaxAbs(d.col(k) - v / dt) <= 1e-12);
    }
    CHECK(FiniteDifferenceVelocity(Matrix::Constant(4, 6, 2.5), dt, s).isZero(0.0));
  }
  CHECK(MaxAbs(FiniteDifferenceVelocity(quad, dt, VelocitySource::Central2) - quad_dot) <= 1e-12);
  CHECK_THROWS_AS(FiniteDifferenceVelocity(Matrix::Zero(4, 1), dt, VelocitySource::Central2), Error);
  CHECK_THROWS_AS(FiniteDifferenceVelocity(lin, dt, VelocitySource::Exact), Error);
}

TEST_CASE("central differences converge at second order on a sine")
{
  double prev = 0.0;
  for (double dt : {1e-2, 1e-3, 1e-4})
  {
    const Index k = static_cast<Index>(std::lround(1.0 / dt)) + 1;
    Matrix x(1, k);
    Matrix xd(1, k);
    for (Index i = 0; i < k; i++)
    {
      x(0, i) = std::sin(static_cast<double>(i) * dt);
      xd(0, i) = std::cos(static_cast<double>(i) * dt);
    }
    const double err = MaxAbs(FiniteDifferenceVelocity(x, dt, VelocitySource::Central2) - xd);
    CHECK(err <= 1.0 * dt * dt);
    if (prev > 0.0)
    {
      CHECK(err < prev / 50.0);
    }
    prev = err;
  }
}

TEST_CASE("re-projected states")
{
  const WaveCase w = SmallWave();
  const MidpointStepper stepper(w.sys, 0.02);
  const FlowStep flow = [&](const Vector &x) { return stepper.Step(x); };

  ReducedBasis eye;
  eye.u = Matrix::Identity(w.sys.Dim(), w.sys.Dim());
  const SnapshotSet full = ReprojectStates(flow, eye, w.sys.InitialState(), 200, 0.02, false);
  CHECK(MaxAbs(full.States() - w.snaps.States()) <= 1e-12);

  // 4-dim system: one step from x₀ in span(U) is P_U(φ(x₀)).
  std::mt19937_64 rng(2);
  const Matrix a = hamred::test::RandomSpd(4, rng);
  ReducedBasis b;
  b.u = hamred::test::RandomOrthonormal(4, 2, rng);
  const Vector x0 = b.u * Gaussian(2, 1, rng);
  const HamiltonianSystem small(QuadraticOperator::General(a), x0);
  const MidpointStepper s4(small, 0.1);
  const SnapshotSet one = ReprojectStates([&](const Vector &x) { return s4.Step(x); }, b, x0, 1,
                                          0.1, false);
  const Matrix prop = hamred::test::MidpointPropagator(a, 0.1);
  CHECK(MaxAbs(one.States().col(0) - x0) <= 1e-14);
  CHECK(MaxAbs(one.States().col(1) - b.u * b.u.transpose() * prop * x0) <= 1e-12);

  // Fixed point of the flow stays put in centered mode.
  const SnapshotSet fixed =
      ReprojectStates([](const Vector &x) { return x; }, b, x0, 5, 0.1, true);
  for (Index k = 0; k < fixed.Count(); k++)
  {
    CHECK(MaxAbs(fixed.States().col(k) - x0) == 0.0);
  }
}

TEST_CASE("symmetric inference equals the Kronecker solution")
{
  for (Index n : {2, 4, 8})
  {
    std::mt19937_64 rng(static_cast<std::uint64_t>(n));
    const Matrix xh = Gaussian(n, 3 * n, rng);
    const Matrix z = Gaussian(n, 3 * n, rng);
    const Matrix s = xh * xh.transpose();
    const Matrix c = z * xh.transpose() + xh * z.transpose();
    const Matrix want = KroneckerSylvester(Matrix::Identity(n, n), s, c);
    CHECK(MaxAbs(InferSymmetricOperator(xh, z) - want) <= 1e-10);
    CHECK(MaxAbs(SolveSymmetricLyapunov(s, c) - want) <= 1e-10);
  }
}

TEST_CASE("Lyapunov solver special cases")
{
  std::mt19937_64 rng(3);
  const Matrix c = hamred::test::RandomSymmetric(5, rng);
  CHECK(MaxAbs(SolveSymmetricLyapunov(Matrix::Identity(5, 5), c) - 0.5 * c) <= 1e-14);
  // 1×1: 2·s·ā = c.
  CHECK(SolveSymmetricLyapunov(Matrix::Constant(1, 1, 4.0), Matrix::Constant(1, 1, 3.0))(0, 0) ==
        doctest::Approx(3.0 / 8.0));
  Matrix singular = Matrix::Zero(3, 3);
  singular(0, 0) = 1.0;
  CHECK_THROWS_AS(SolveSymmetricLyapunov(singular, hamred::test::RandomSymmetric(3, rng)), Error);
}

TEST_CASE("generalized Sylvester solver equals the Kronecker solution")
{
  for (Index n : {2, 4, 8})
  {
    std::mt19937_64 rng(10 + static_cast<std::uint64_t>(n));
    const Matrix g = hamred::test::RandomSpd(n, rng);
    const Matrix s = hamred::test::RandomSpd(n, rng);
    const Matrix r = hamred::test::RandomSymmetric(n, rng);
    CHECK(MaxAbs(SolveSymmetricSylvester(g, s, r) - KroneckerSylvester(g, s, r)) <= 1e-10);

    // Forward-generate from a symmetric truth.
    const Matrix truth = hamred::test::RandomSymmetric(n, rng);
    const Matrix rhs = g * truth * s + s * truth * g;
    CHECK(MaxAbs(SolveSymmetricSylvester(g, s, rhs) - truth) <= 1e-10);
    CHECK(SolveSymmetricSylvester(g, s, Matrix::Zero(n, n)).isZero(0.0));
  }
}

TEST_CASE("Sylvester solver falls back to the Kronecker system for ill-conditioned G")
{
  std::mt19937_64 rng(4);
  const Index n = 4;
  const Matrix q = hamred::test::RandomOrthonormal(n, n, rng);
  Vector d(n);
  d << 1.0, 1e-3, 1e-7, 1e-13;
  const Matrix g = q * d.asDiagonal() * q.transpose();
  const Matrix s = hamred::test::RandomSpd(n, rng);
  const Matrix truth = hamred::test::RandomSymmetric(n, rng);
  const Matrix rhs = g * truth * s + s * truth * g;
  const Matrix got = SolveSymmetricSylvester(g, s, rhs);
  CHECK(MaxAbs(g * got * s + s * got * g - rhs) <= 1e-10 * rhs.norm());
  CHECK(MaxAbs(got - got.transpose()) <= 1e-12);
}

TEST_CASE("least-squares Hamiltonian inference")
{
  std::mt19937_64 rng(5);
  const Index n = 6;
  const Matrix xh = Gaussian(n, 40, rng);
  const Matrix f = Gaussian(n, 40, rng);
  const Matrix truth = hamred::test::RandomSymmetric(n, rng);

  // Orthogonal Ĵ: identical to symmetric inference on rotated data.
  const Matrix jn = DenseJ(n);
  const Matrix xt = jn * (truth * xh + f) + 1e-3 * Gaussian(n, 40, rng);
  CHECK(MaxAbs(InferCh(xh, xt, f, jn) - InferSymmetricOperator(xh, jn.transpose() * xt - f)) <=
        1e-12);

  // General Ĵ: exact data recover the truth.
  const Matrix jh = RandomSkew(n, rng);
  const Matrix exact = jh * (truth * xh + f);
  const Matrix got = InferCh(xh, exact, f, jh);
  CHECK(MaxAbs(got - truth) <= 1e-10 * truth.norm());
  CHECK(MaxAbs(got - got.transpose()) <= 1e-12);
  CHECK(InferCh(xh, jh * f, f, jh).norm() <= 1e-12);
}

TEST_CASE("Galerkin inference")
{
  std::mt19937_64 rng(6);
  const Index n = 5;
  const Matrix xt = Gaussian(n, n, rng);
  CHECK(MaxAbs(InferGalerkin(Matrix::Identity(n, n), xt) - xt) <= 1e-10);

  const Matrix xh = Gaussian(n, 30, rng);
  const Matrix truth = Gaussian(n, n, rng);
  CHECK(MaxAbs(InferGalerkin(xh, truth * xh) - truth) <= 1e-10);

  const Matrix noisy = truth * xh + 1e-6 * Gaussian(n, 30, rng);
  const Matrix fit = InferGalerkin(xh, noisy);
  CHECK((noisy - fit * xh).norm() > 0.0);
  CHECK((noisy - fit * xh).norm() < 1e-4);
}

TEST_CASE("rank-deficient data are rejected")
{
  std::mt19937_64 rng(7);
  Matrix xh = Gaussian(4, 10, rng);
  xh.row(3) = xh.row(0);
  CHECK_THROWS_WITH_AS(InferSymmetricOperator(xh, Gaussian(4, 10, rng)),
                       doctest::Contains("sigma_min"), Error);
  CHECK_THROWS_AS(InferGalerkin(xh, Gaussian(4, 10, rng)), Error);
  CHECK_THROWS_AS(InferCh(xh, Gaussian(4, 10, rng), Matrix::Zero(4, 10), RandomSkew(4, rng)),
                  Error);
}

TEST_CASE("nonintrusive centered shift")
{
  const WaveCase w = SmallWave();
  const ReducedBasis b = OrdinaryPod(w.snaps, 10, true);
  const Vector &x0 = w.sys.InitialState();
  CHECK(CenteredShiftNonintrusive(Vector::Zero(x0.size()), x0, b, RomVariant::ConsistentHam)
            .isZero(0.0));
  const Vector v0 = w.sys.Velocity(x0);
  const Vector ghat = b.u.transpose() * w.sys.Quad().Apply(x0);
  for (RomVariant v : {RomVariant::ConsistentHam, RomVariant::LeastSquaresHam})
  {
    CHECK(MaxAbs(CenteredShiftNonintrusive(v0, x0, b, v) - ghat) <= 1e-12 * (1.0 + ghat.norm()));
  }
  CHECK(MaxAbs(CenteredShiftNonintrusive(v0, x0, b, RomVariant::Galerkin) -
               b.u.transpose() * v0) <= 1e-14);

  const ReducedBasis lift = CotangentLift(w.snaps, 10, true);
  const auto intr = BuildConsistentHam(w.sys, std::make_shared<const ReducedBasis>(lift), true);
  CHECK(MaxAbs(CenteredShiftNonintrusive(v0, x0, lift, RomVariant::ConsistentHam) - intr.c) <=
        1e-12);
}

TEST_CASE("re-projected exact-velocity inference recovers intrusive operators")
{
  const WaveCase w = SmallWave();
  const Matrix a = w.sys.Quad().ToDense();
  for (Index n : {6, 12})
  {
    for (bool centered : {false, true})
    {
      const auto pod = Share(OrdinaryPod(w.snaps, n, centered));
      const auto lift = Share(CotangentLift(w.snaps, n, centered));
      OpInfOptions opt;
      opt.centered = centered;

      opt.variant = RomVariant::ConsistentHam;
      const OpInfResult vch = RunOpInf(w.sys, w.snaps, pod, opt);
      const Matrix ahat = pod->u.transpose() * a * pod->u;
      CHECK(RelF(vch.op, ahat) <= 1e-10);
      CHECK(MaxAbs(vch.op - vch.op.transpose()) <= 1e-12);
      CHECK(vch.eps_dt == 0.0);
      CHECK(vch.relative_residual <= 1e-12);
      const ReducedModel intr = BuildConsistentHam(w.sys, pod, centered);
      CHECK(MaxAbs(intr.Reconstruct(IntegrateRom(intr, 4.0, 0.02).States()) -
                   vch.model.Reconstruct(IntegrateRom(vch.model, 4.0, 0.02).States())) <= 1e-8);
      CHECK(vch.model.provenance == Provenance::OpInfReprojected);

      opt.variant = RomVariant::Galerkin;
      const OpInfResult gal = RunOpInf(w.sys, w.snaps, pod, opt);
      const Matrix mhat = pod->u.transpose() * DenseJ(w.sys.Dim()) * a * pod->u;
      CHECK(RelF(gal.op, mhat) <= 1e-10);

      // The least-squares variant recovers Â with an equivariant basis.
      opt.variant = RomVariant::LeastSquaresHam;
      const OpInfResult lsq = RunOpInf(w.sys, w.snaps, lift, opt);
      const Matrix lhat = lift->u.transpose() * a * lift->u;
      CHECK(RelF(lsq.op, lhat) <= 1e-10);
    }
  }
}

TEST_CASE("vanilla finite-difference inference differs but stays conservative")
{
  const WaveCase w = SmallWave();
  const auto pod = Share(OrdinaryPod(w.snaps, 10, true));
  OpInfOptions opt;
  opt.reprojected = false;
  opt.velocity_source = VelocitySource::Central2;
  const OpInfResult r = RunOpInf(w.sys, w.snaps, pod, opt);
  CHECK(r.eps_dt > 0.0);
  CHECK(r.eps_a > 0.0);
  CHECK(r.model.provenance == Provenance::OpInf);
  const SnapshotSet red = IntegrateRom(r.model, 4.0, 0.02);
  CHECK(red.States().allFinite());
  const double e0 = r.model.Energy(red.States().col(0));
  double drift = 0.0;
  for (Index k = 0; k < red.Count(); k++)
  {
    drift = std::max(drift, std::abs(r.model.Energy(red.States().col(k)) - e0));
  }
  CHECK(drift <= 1e-10 * std::max(1.0, std::abs(e0)));
  CHECK(r.model.initial_state.isZero(0.0));

  const auto intr = BuildConsistentHam(w.sys, pod, true);
  CHECK(MaxAbs(IntegrateRom(intr, 4.0, 0.02).States() - red.States()) > 1e-10);
}

TEST_CASE("re-projection with finite differences follows a new trajectory")
{
  const WaveCase w = SmallWave();
  const auto pod = Share(OrdinaryPod(w.snaps, 10, true));
  OpInfOptions opt;
  opt.velocity_source = VelocitySource::Central2;
  const OpInfResult r = RunOpInf(w.sys, w.snaps, pod, opt);
  // Training states lie on the affine subspace x₀ + span(U).
  const Matrix shifted = r.states.colwise() - w.sys.InitialState();
  CHECK(MaxAbs(shifted - pod->Project(shifted)) <= 1e-12);
  CHECK(MaxAbs(r.velocities - FiniteDifferenceVelocity(r.states, 0.02, VelocitySource::Central2)) ==
        0.0);
}
