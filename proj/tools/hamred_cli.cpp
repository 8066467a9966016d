// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>
#include "CLI11.hpp"
#include "hamred/experiment.hpp"
#include "hamred/io.hpp"

namespace
{

using namespace hamred;

struct Options
{
  std::string config;
  std::string output;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string snapshots;
  std::vector<std::string> bases;
  bool emit_trajectory = false;
  bool emit_ham_trace = false;
};

ExperimentConfig Load(const Options &opt)
{
  ExperimentConfig cfg = LoadConfig(opt.config);
  if (!opt.output.empty())
  {
    cfg.output_dir = opt.output;
  }
  if (opt.seed)
  {
    cfg.seed = *opt.seed;
  }
  for (const auto &w : cfg.warnings)
  {
    std::cerr << "warning: " << w << "\n";
  }
  return cfg;
}

// Snapshots from --snapshots when given, otherwise a fresh FOM run.
SnapshotSet Training(const HamiltonianSystem &sys, const ExperimentConfig &cfg,
                     const std::string &path)
{
  if (path.empty())
  {
    return TrainingSnapshots(sys, cfg);
  }
  MatrixFile f = ReadMatrixFile(path);
  if (f.states.rows() != sys.Dim())
  {
    throw Error("snapshot file has " + std::to_string(f.states.rows()) +
                " rows but the configured system has dimension " + std::to_string(sys.Dim()));
  }
  const double spacing = cfg.fom.dt * static_cast<double>(cfg.fom.sample_every);
  return SnapshotSet::Uniform(std::move(f.states), 0.0, spacing, std::move(f.velocities));
}

std::string BasisFileName(const ReducedBasis &b)
{
  return "basis_" + std::string(BasisKindName(b.kind)) + "_" + std::to_string(b.Size()) + ".bin";
}

int CmdFom(const Options &opt)
{
  const ExperimentConfig cfg = Load(opt);
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet snaps = TrainingSnapshots(sys, cfg);
  const auto bin = cfg.output_dir / "snapshots.bin";
  WriteMatrixFile(bin, snaps.States(),
                  snaps.HasVelocities() ? std::optional<Matrix>(snaps.Velocities()) : std::nullopt);
  WriteTextFile(cfg.output_dir / "snapshots.json", SnapshotSidecarJson(sys, snaps, cfg.fom));
  std::cout << "wrote " << bin.string() << " (" << snaps.Dim() << " x " << snaps.Count() << ")\n";
  return 0;
}

int CmdBasis(const Options &opt)
{
  const ExperimentConfig cfg = Load(opt);
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = Training(sys, cfg, opt.snapshots);
  const BasisCache bases = BuildBases(cfg, train);
  int status = 0;
  for (const auto &[key, entry] : bases)
  {
    if (!entry.basis)
    {
      std::cerr << "error: basis " << BasisKindName(key.first) << " n=" << key.second << ": "
                << entry.error << "\n";
      status = 2;
      continue;
    }
    SaveBasis(cfg.output_dir / BasisFileName(*entry.basis), *entry.basis);
  }
  WriteTextFile(cfg.output_dir / "basis.csv", BasisTableCsv(bases, train));
  std::cout << "wrote " << (cfg.output_dir / "basis.csv").string() << "\n";
  return status;
}

int WriteRuns(const ExperimentConfig &cfg, const RunOutput &out, const std::string &csv_name,
              const Options &opt)
{
  WriteTextFile(cfg.output_dir / csv_name, RunReportsCsv(out.reports));
  int status = 0;
  for (std::size_t i = 0; i < out.reports.size(); i++)
  {
    const RunReport &r = out.reports[i];
    if (r.status != "ok")
    {
      std::cerr << "error: " << r.basis_kind << " n=" << r.n << " " << r.variant << " "
                << r.provenance << " (" << r.grid << "): " << r.message << "\n";
      status = 2;
      continue;
    }
    if (opt.emit_trajectory)
    {
      WriteMatrixFile(cfg.output_dir / ("traj_" + ReportTag(r) + ".bin"), out.trajectories[i]);
    }
    if (opt.emit_ham_trace)
    {
      WriteTextFile(cfg.output_dir / ("ham_" + ReportTag(r) + ".csv"), HamTraceCsv(r));
    }
  }
  std::cout << "wrote " << (cfg.output_dir / csv_name).string() << " (" << out.reports.size()
            << " rows)\n";
  return status;
}

std::optional<SnapshotSet> TestTrajectory(const HamiltonianSystem &sys,
                                          const ExperimentConfig &cfg)
{
  if (!cfg.test)
  {
    return std::nullopt;
  }
  return SimulateFom(sys, cfg.fom, cfg.test->dt, cfg.test->t_final, 1);
}

int CmdRun(const Options &opt)
{
  ExperimentConfig cfg = Load(opt);
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = Training(sys, cfg, opt.snapshots);
  BasisCache bases;
  if (opt.bases.empty())
  {
    bases = BuildBases(cfg, train);
  }
  else
  {
    std::set<BasisKind> kinds;
    std::set<Index> sizes;
    for (const auto &path : opt.bases)
    {
      auto b = std::make_shared<const ReducedBasis>(LoadBasis(path));
      if (b->Dim() != sys.Dim())
      {
        throw Error("basis " + path + " does not match the system dimension");
      }
      kinds.insert(b->kind);
      sizes.insert(b->Size());
      bases[{b->kind, b->Size()}] = BasisEntry{b, ""};
    }
    cfg.basis.kinds.assign(kinds.begin(), kinds.end());
    cfg.basis.sizes.assign(sizes.begin(), sizes.end());
  }
  std::vector<SweepItem> items = EnumerateSweep(cfg);
  if (!opt.bases.empty())
  {
    std::erase_if(items, [&](const SweepItem &it) { return !bases.count({it.kind, it.n}); });
  }
  const RunOutput out =
      RunItems(cfg, sys, train, TestTrajectory(sys, cfg), items, bases, 1, opt.emit_trajectory);
  return WriteRuns(cfg, out, "run.csv", opt);
}

int CmdSweep(const Options &opt)
{
  const ExperimentConfig cfg = Load(opt);
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = TrainingSnapshots(sys, cfg);
  const std::vector<SweepItem> items = EnumerateSweep(cfg);
  const BasisCache bases = items.empty() ? BasisCache{} : BuildBases(cfg, train);
  const unsigned threads = opt.threads > 0 ? opt.threads : cfg.threads;
  const RunOutput out =
      RunItems(cfg, sys, train, TestTrajectory(sys, cfg), items, bases, threads, false);
  return WriteRuns(cfg, out, "sweep.csv", Options{});
}

int CmdDiagnose(const Options &opt)
{
  const ExperimentConfig cfg = Load(opt);
  const auto trials =
      HaarDiagnostics(cfg.diagnose.dim, cfg.diagnose.n, cfg.diagnose.trials, cfg.seed);
  std::ostringstream os;
  os << "# hamred-csv-v1\n";
  os << "trial,sigma_min_Jhat,canon_dev\n";
  double worst = std::numeric_limits<double>::infinity();
  Index nondegenerate = 0;
  for (std::size_t k = 0; k < trials.size(); k++)
  {
    os << k << ',' << FormatDouble(trials[k].sigma_min) << ',' << FormatDouble(trials[k].canon_dev)
       << '\n';
    worst = std::min(worst, trials[k].sigma_min);
    nondegenerate += trials[k].sigma_min > 1.0e-8 ? 1 : 0;
  }
  WriteTextFile(cfg.output_dir / "diagnose.csv", os.str());
  std::cout << "random frames N=" << cfg.diagnose.dim << " n=" << cfg.diagnose.n << ": "
            << nondegenerate << "/" << trials.size()
            << " with sigma_min > 1e-8, smallest sigma_min = " << worst << "\n";
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Structure-preserving reduced-order models for canonical Hamiltonian systems"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&](CLI::App *sub)
  {
    sub->add_option("--config", opt.config, "Experiment config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--output", opt.output, "Output directory (overrides output_dir)");
    sub->add_option("--seed", opt.seed, "Random seed (overrides seed)");
  };

  CLI::App *fom = app.add_subcommand("fom", "Integrate the full model and write snapshots");
  common(fom);
  CLI::App *basis = app.add_subcommand("basis", "Build reduced bases and the basis table");
  common(basis);
  basis->add_option("--snapshots", opt.snapshots, "Snapshot file from the fom command")
      ->check(CLI::ExistingFile);
  CLI::App *run = app.add_subcommand("run", "Run reduced models on the configured grids");
  common(run);
  run->add_option("--snapshots", opt.snapshots, "Snapshot file from the fom command")
      ->check(CLI::ExistingFile);
  run->add_option("--basis", opt.bases, "Basis file(s) from the basis command")
      ->check(CLI::ExistingFile);
  run->add_flag("--emit-trajectory", opt.emit_trajectory,
                "Write reconstructed trajectories as snapshot files");
  run->add_flag("--emit-ham-trace", opt.emit_ham_trace,
                "Write per-step signed Hamiltonian error CSVs");
  CLI::App *sweep = app.add_subcommand("sweep", "Run the full basis/variant/provenance sweep");
  common(sweep);
  sweep->add_option("--threads", opt.threads, "Worker threads (overrides threads)")
      ->check(CLI::Range(1u, 1024u));
  CLI::App *diagnose =
      app.add_subcommand("diagnose", "Nondegeneracy statistics of random orthonormal frames");
  common(diagnose);

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*fom) return CmdFom(opt);
    if (*basis) return CmdBasis(opt);
    if (*run) return CmdRun(opt);
    if (*sweep) return CmdSweep(opt);
    if (*diagnose) return CmdDiagnose(opt);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
