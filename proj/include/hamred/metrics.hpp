// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_METRICS_HPP
#define HAMRED_METRICS_HPP

#include <optional>
#include <string>
#include <vector>
#include "hamred/basis.hpp"
#include "hamred/fom.hpp"
#include "hamred/rom.hpp"

namespace hamred
{

// ‖X − X̃‖_F / ‖X‖_F.
double RelativeL2(const Matrix &x, const Matrix &x_tilde);

// e_k = H(x̃_k) − H(x₀) with the FOM initial state as the reference.
std::vector<double> HamiltonianTrace(const HamiltonianSystem &sys, const SnapshotSet &snaps);

// λ_max(Ĵ⁻ᵀĴ⁻¹ − I) = 1/σ_min(Ĵ)² − 1. Throws for singular Ĵ.
double CanonicityDeviation(const Matrix &j_hat);

// Raw terms of the state error bound; the constants multiplying them are not estimated.
struct BoundTerms
{
  // Projection residual of the FOM snapshots onto the basis about the ROM center.
  double proj_tail = 0.0;
  // +inf when Ĵ is singular.
  double canon_dev = 0.0;
  // ‖∇H(x)‖ in L² over time along the FOM trajectory.
  double grad_norm = 0.0;
  // Only for nonintrusive models.
  std::optional<double> eps_dt;
  std::optional<double> eps_a;
};

struct OpInfErrors
{
  double eps_dt = 0.0;
  double eps_a = 0.0;
};

BoundTerms BoundReport(const HamiltonianSystem &sys, const ReducedModel &model,
                       const SnapshotSet &fom_snaps,
                       const std::optional<OpInfErrors> &opinf = std::nullopt);

struct RunReport
{
  std::string status = "ok";
  std::string basis_kind;
  Index n = 0;
  std::string variant;
  std::string provenance;
  bool centered = false;
  std::string velocity_source;
  std::string grid;
  double dt = 0.0;
  double t_final = 0.0;
  double rel_l2 = 0.0;
  std::vector<double> ham_times;
  std::vector<double> ham_trace;
  BoundTerms bounds;
  double wall_time = 0.0;
  std::string message;

  double HamErrFirst() const;
  double HamErrMaxAbs() const;
};

// Compares a reconstructed ROM trajectory with the FOM trajectory on the same grid.
RunReport MakeRunReport(const HamiltonianSystem &sys, const ReducedModel &model,
                        const SnapshotSet &fom_snaps, const SnapshotSet &rom_full,
                        const std::optional<OpInfErrors> &opinf = std::nullopt);

}  // namespace hamred

#endif  // HAMRED_METRICS_HPP
