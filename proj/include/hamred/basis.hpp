// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_BASIS_HPP
#define HAMRED_BASIS_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include "hamred/fom.hpp"
#include "hamred/linalg.hpp"

namespace hamred
{

enum class BasisKind
{
  OrdinaryPOD,
  CotangentLift,
  ComplexSVD,
  BlockQP
};

// Config/CSV spelling: "pod", "cotangent", "complex", "blockqp".
std::string_view BasisKindName(BasisKind kind);
BasisKind ParseBasisKind(std::string_view text);

//
// Column-orthonormal N×n basis. For the block kinds the basis acts on (q, p) with identical
// (cotangent lift) or independent (block q/p) position and momentum factors.
//
struct ReducedBasis
{
  Matrix u;
  BasisKind kind = BasisKind::OrdinaryPOD;
  // Singular values of the decomposed snapshot matrix; for BlockQP these belong to the Q block
  // and the P-block values are kept separately.
  Vector singular_values;
  Vector singular_values_p;
  // Vector subtracted from the snapshots before decomposition (absent when uncentered).
  std::optional<Vector> center;

  Index Dim() const { return u.rows(); }
  Index Size() const { return u.cols(); }
  bool Centered() const { return center.has_value(); }
  // P_U x = U Uᵀ x, columnwise.
  Matrix Project(const Matrix &x) const;
};

// The centered builds subtract snaps.Center() when set, otherwise the first snapshot x₀.
ReducedBasis OrdinaryPod(const SnapshotSet &snaps, Index n, bool centered);
ReducedBasis CotangentLift(const SnapshotSet &snaps, Index n, bool centered);
ReducedBasis ComplexSvd(const SnapshotSet &snaps, Index n, bool centered);
ReducedBasis BlockQp(const SnapshotSet &snaps, Index n, bool centered);
ReducedBasis BuildBasis(BasisKind kind, const SnapshotSet &snaps, Index n, bool centered);

// Σ_{k≤n} σ_k / Σ_k σ_k with first powers of σ.
double SnapshotEnergy(const Vector &singular_values, Index n);
// Snapshot energy captured by a basis, counting the modes each construction retains.
double BasisSnapshotEnergy(const ReducedBasis &basis);

// ‖(X − X̄) − P_U(X − X̄)‖_F with X̄ the basis center (zero when uncentered).
double ProjectionError(const SnapshotSet &snaps, const ReducedBasis &basis);
double ProjectionError(const Matrix &x, const Matrix &u, const std::optional<Vector> &center);

struct ReducedSymplectic
{
  Matrix j_hat;
  double sigma_min = 0.0;
  // λ_max(Ĵ⁻ᵀĴ⁻¹ − I) = 1/σ_min(Ĵ)² − 1.
  double canon_dev = 0.0;
};

// Ĵ = UᵀJU without any invertibility check.
Matrix ReducedJ(const Matrix &u);

// Throws "isotropic or near-degenerate basis" when σ_min(Ĵ) ≤ 1e-12.
ReducedSymplectic AnalyzeReducedSymplectic(const Matrix &u);
ReducedSymplectic AnalyzeReducedSymplectic(const ReducedBasis &basis);

// Haar-distributed N×n orthonormal frame: QR of a Gaussian matrix with R's diagonal made
// positive.
Matrix HaarRandomFrame(Index dim, Index n, std::uint64_t seed);
Matrix HaarRandomFrame(Index dim, Index n, std::mt19937_64 &rng);

}  // namespace hamred

#endif  // HAMRED_BASIS_HPP
