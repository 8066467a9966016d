// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_TESTS_SUPPORT_HPP
#define HAMRED_TESTS_SUPPORT_HPP

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <Eigen/Dense>
#include "hamred/fom.hpp"
#include "hamred/linalg.hpp"

namespace hamred::test
{

inline Matrix Gaussian(Index rows, Index cols, std::mt19937_64 &rng)
{
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix a(rows, cols);
  for (Index j = 0; j < cols; j++)
  {
    for (Index i = 0; i < rows; i++)
    {
      a(i, j) = g(rng);
    }
  }
  return a;
}

inline Matrix RandomSymmetric(Index n, std::mt19937_64 &rng)
{
  const Matrix a = Gaussian(n, n, rng);
  return 0.5 * (a + a.transpose());
}

// Well-conditioned SPD: BBᵀ + nI.
inline Matrix RandomSpd(Index n, std::mt19937_64 &rng)
{
  const Matrix b = Gaussian(n, n, rng);
  return b * b.transpose() + static_cast<double>(n) * Matrix::Identity(n, n);
}

inline Matrix RandomOrthonormal(Index rows, Index cols, std::mt19937_64 &rng)
{
  Eigen::HouseholderQR<Matrix> qr(Gaussian(rows, cols, rng));
  return qr.householderQ() * Matrix::Identity(rows, cols);
}

// Dense J on ℝ^{2m}, written out entry by entry.
inline Matrix DenseJ(Index dim)
{
  const Index m = dim / 2;
  Matrix j = Matrix::Zero(dim, dim);
  for (Index i = 0; i < m; i++)
  {
    j(i, m + i) = 1.0;
    j(m + i, i) = -1.0;
  }
  return j;
}

// Discrete wave energy summed term by term from the two-sided difference formula.
inline double WaveEnergyLoop(const Vector &x, double c, double length)
{
  const Index m = x.size() / 2;
  const double dx = length / static_cast<double>(m);
  double h = 0.0;
  for (Index i = 0; i < m; i++)
  {
    const double qp = x((i + 1) % m);
    const double qm = x((i + m - 1) % m);
    const double qi = x(i);
    const double p = x(m + i);
    h += 0.5 * (p * p + c * c * ((qp - qi) * (qp - qi) + (qi - qm) * (qi - qm)) / (4.0 * dx * dx));
  }
  return h;
}

// Dense implicit-midpoint propagator (I − dt/2·JA)⁻¹(I + dt/2·JA) by a full inverse.
inline Matrix MidpointPropagator(const Matrix &a, double dt)
{
  const Index n = a.rows();
  const Matrix ja = DenseJ(n) * a;
  const Matrix lhs = Matrix::Identity(n, n) - 0.5 * dt * ja;
  const Matrix rhs = Matrix::Identity(n, n) + 0.5 * dt * ja;
  return lhs.inverse() * rhs;
}

// vec(Ā) solve of (G ⊗ S + S ⊗ G) vec Ā = vec R, assembled entry by entry.
inline Matrix KroneckerSylvester(const Matrix &g, const Matrix &s, const Matrix &r)
{
  const Index n = g.rows();
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Index a = 0; a < n; a++)
  {
    for (Index b = 0; b < n; b++)
    {
      for (Index c = 0; c < n; c++)
      {
        for (Index d = 0; d < n; d++)
        {
          // (GĀS)_{ab} = Σ G_ac Ā_cd S_db and (SĀG)_{ab} = Σ S_ac Ā_cd G_db.
          k(a + n * b, c + n * d) += g(a, c) * s(d, b) + s(a, c) * g(d, b);
        }
      }
    }
  }
  const Eigen::Map<const Vector> rhs(r.data(), n * n);
  const Vector x = k.fullPivLu().solve(rhs);
  return Eigen::Map<const Matrix>(x.data(), n, n);
}

// A scratch directory under the system temp dir, removed on destruction.
class TempDir
{
public:
  explicit TempDir(const std::string &tag)
  {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("hamred_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir()
  {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir &) = delete;
  TempDir &operator=(const TempDir &) = delete;
  const std::filesystem::path &Path() const { return path_; }

private:
  std::filesystem::path path_;
};

}  // namespace hamred::test

#endif  // HAMRED_TESTS_SUPPORT_HPP
