// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_EXPERIMENT_HPP
#define HAMRED_EXPERIMENT_HPP

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include "hamred/basis.hpp"
#include "hamred/config.hpp"
#include "hamred/fom.hpp"
#include "hamred/metrics.hpp"
#include "hamred/rom.hpp"

namespace hamred
{

HamiltonianSystem BuildSystem(const FomConfig &cfg);

// FOM trajectory on [0, t_final] with the configured integrator.
SnapshotSet SimulateFom(const HamiltonianSystem &sys, const FomConfig &cfg, double dt,
                        double t_final, Index sample_every);
SnapshotSet TrainingSnapshots(const HamiltonianSystem &sys, const ExperimentConfig &cfg);

struct SweepItem
{
  BasisKind kind = BasisKind::OrdinaryPOD;
  Index n = 0;
  RomVariant variant = RomVariant::Galerkin;
  Provenance provenance = Provenance::Intrusive;
};

// Cross product of basis kinds, sizes, variants and provenances, sorted lexicographically on
// (kind name, n, variant name, provenance name).
std::vector<SweepItem> EnumerateSweep(const ExperimentConfig &cfg);

// Bases keyed by (kind, n); a failed construction stores its error message instead.
struct BasisEntry
{
  std::shared_ptr<const ReducedBasis> basis;
  std::string error;
};
using BasisCache = std::map<std::pair<BasisKind, Index>, BasisEntry>;

BasisCache BuildBases(const ExperimentConfig &cfg, const SnapshotSet &train);

struct RunOutput
{
  std::vector<RunReport> reports;
  // Reconstructed trajectories, parallel to reports; empty matrices unless requested.
  std::vector<Matrix> trajectories;
};

//
// Runs every item on the training grid and, when configured, the test grid. Items run on up to
// `threads` workers; the output keeps the item order. Failures become rows with status "error".
//
RunOutput RunItems(const ExperimentConfig &cfg, const HamiltonianSystem &sys,
                   const SnapshotSet &train, const std::optional<SnapshotSet> &test_fom,
                   const std::vector<SweepItem> &items, const BasisCache &bases, unsigned threads,
                   bool keep_trajectories);

// CSV with the "# hamred-csv-v1" header line; wall time is not part of the rows.
std::string RunReportsCsv(const std::vector<RunReport> &reports);
std::string HamTraceCsv(const RunReport &report);
std::string BasisTableCsv(const BasisCache &bases, const SnapshotSet &train);

// Snapshot binary plus JSON sidecar (kind, n, centered, singular values, center).
void SaveBasis(const std::filesystem::path &bin_path, const ReducedBasis &basis);
ReducedBasis LoadBasis(const std::filesystem::path &bin_path);

// JSON metadata for a FOM snapshot file.
std::string SnapshotSidecarJson(const HamiltonianSystem &sys, const SnapshotSet &snaps,
                                const FomConfig &cfg);

// "<kind>_<n>_<variant>_<provenance>_<grid>", for per-run file names.
std::string ReportTag(const RunReport &r);

struct HaarTrial
{
  double sigma_min = 0.0;
  double canon_dev = 0.0;
};
std::vector<HaarTrial> HaarDiagnostics(Index dim, Index n, Index trials, std::uint64_t seed);

}  // namespace hamred

#endif  // HAMRED_EXPERIMENT_HPP
