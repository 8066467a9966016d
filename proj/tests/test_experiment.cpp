// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include "doctest.h"
#include "hamred/experiment.hpp"
#include "hamred/io.hpp"
#include "json.hpp"
#include "support.hpp"

using namespace hamred;
using hamred::test::TempDir;

namespace
{

const char *SMALL = R"(
[fom]
kind = wave
num_cells = 60
dt = 0.02
t_final = 1

[basis]
kind = pod, cotangent
n = 4, 8

[rom]
variant = galerkin, consistent_ham

[opinf]
enabled = true
reprojected = both
)";

std::size_t CountLines(const std::string &s)
{
  std::size_t n = 0;
  for (char c : s)
  {
    n += c == '\n' ? 1 : 0;
  }
  return n;
}

int RunCli(const std::string &args)
{
  const std::string cmd = std::string(HAMRED_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST_CASE("sweep enumeration is sorted on names")
{
  const ExperimentConfig cfg = ParseConfig(SMALL, ".");
  const auto items = EnumerateSweep(cfg);
  REQUIRE(items.size() == 2 * 2 * 2 * 3);
  CHECK(items.front().kind == BasisKind::CotangentLift);
  CHECK(items.front().variant == RomVariant::ConsistentHam);
  CHECK(items.front().provenance == Provenance::Intrusive);
  CHECK(items[1].provenance == Provenance::OpInf);
  CHECK(items[2].provenance == Provenance::OpInfReprojected);
  CHECK(items.back().kind == BasisKind::OrdinaryPOD);
  CHECK(items.back().n == 8);
  CHECK(items.back().variant == RomVariant::Galerkin);

  ExperimentConfig off = cfg;
  off.opinf.enabled = false;
  CHECK(EnumerateSweep(off).size() == 2 * 2 * 2);
  off.rom.variants.clear();
  CHECK(EnumerateSweep(off).empty());
  CHECK(RunReportsCsv({}) ==
        "# hamred-csv-v1\nstatus,basis_kind,n,variant,provenance,centered,velocity_source,grid,"
        "dt,t_final,rel_l2,ham_err_first,ham_err_max,proj_tail,canon_dev,grad_norm,eps_dt,eps_A,"
        "message\n");
}

TEST_CASE("sweep runs are deterministic and thread-count independent")
{
  const ExperimentConfig cfg = ParseConfig(SMALL, ".");
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = TrainingSnapshots(sys, cfg);
  const auto items = EnumerateSweep(cfg);
  const BasisCache bases = BuildBases(cfg, train);
  const std::string a =
      RunReportsCsv(RunItems(cfg, sys, train, std::nullopt, items, bases, 1, false).reports);
  const std::string b =
      RunReportsCsv(RunItems(cfg, sys, train, std::nullopt, items, bases, 3, false).reports);
  CHECK(a == b);
  CHECK(CountLines(a) == 2 + items.size());
  CHECK(a.find("error,") == std::string::npos);
}

TEST_CASE("failing items become error rows")
{
  ExperimentConfig cfg = ParseConfig(SMALL, ".");
  cfg.basis.sizes = {4, 200};
  cfg.test = TestGrid{0.04, 2.0};
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = TrainingSnapshots(sys, cfg);
  const SnapshotSet test = SimulateFom(sys, cfg.fom, 0.04, 2.0, 1);
  const auto items = EnumerateSweep(cfg);
  const BasisCache bases = BuildBases(cfg, train);
  CHECK(!bases.at({BasisKind::OrdinaryPOD, 200}).error.empty());
  const RunOutput out = RunItems(cfg, sys, train, test, items, bases, 1, true);
  REQUIRE(out.reports.size() == 2 * items.size());
  std::size_t errors = 0;
  for (std::size_t i = 0; i < out.reports.size(); i++)
  {
    const RunReport &r = out.reports[i];
    if (r.status == "error")
    {
      errors++;
      CHECK(r.n == 200);
      CHECK(!r.message.empty());
    }
    else
    {
      CHECK(out.trajectories[i].cols() == (r.grid == "train" ? 51 : 51));
      CHECK(r.t_final == (r.grid == "train" ? 1.0 : 2.0));
    }
  }
  CHECK(errors == out.reports.size() / 2);
  const std::string csv = RunReportsCsv(out.reports);
  CHECK(csv.find("error,pod,200,") != std::string::npos);
  CHECK(csv.find(",nan,nan,") != std::string::npos);
}

TEST_CASE("basis files round trip")
{
  TempDir dir("basis");
  const ExperimentConfig cfg = ParseConfig(SMALL, ".");
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = TrainingSnapshots(sys, cfg);
  const ReducedBasis b = CotangentLift(train, 8, true);
  SaveBasis(dir.Path() / "b.bin", b);
  const ReducedBasis back = LoadBasis(dir.Path() / "b.bin");
  CHECK(back.kind == b.kind);
  CHECK(MaxAbs(back.u - b.u) == 0.0);
  CHECK(MaxAbs(back.singular_values - b.singular_values) == 0.0);
  REQUIRE(back.center.has_value());
  CHECK(MaxAbs(*back.center - *b.center) == 0.0);

  const std::string table = BasisTableCsv(BuildBases(cfg, train), train);
  CHECK(table.rfind("# hamred-csv-v1\nkind,n,snapshot_energy,projection_error,sigma_min_Jhat,"
                    "canon_dev\n",
                    0) == 0);
  CHECK(CountLines(table) == 2 + 4);
}

TEST_CASE("snapshot sidecar")
{
  const ExperimentConfig cfg = ParseConfig(SMALL, ".");
  const HamiltonianSystem sys = BuildSystem(cfg.fom);
  const SnapshotSet train = TrainingSnapshots(sys, cfg);
  const auto j = nlohmann::json::parse(SnapshotSidecarJson(sys, train, cfg.fom));
  CHECK(j.at("rows").get<int>() == 120);
  CHECK(j.at("cols").get<int>() == 51);
  CHECK(j.at("dt").get<double>() == 0.02);
  CHECK(j.at("energy_trace").size() == 51);
}

TEST_CASE("random frame diagnostics")
{
  const auto trials = HaarDiagnostics(50, 10, 100, 0);
  REQUIRE(trials.size() == 100);
  for (const auto &t : trials)
  {
    CHECK(t.sigma_min > 1e-8);
    CHECK(t.canon_dev == doctest::Approx(1.0 / (t.sigma_min * t.sigma_min) - 1.0));
  }
  CHECK(HaarDiagnostics(50, 10, 3, 5)[2].sigma_min == HaarDiagnostics(50, 10, 3, 5)[2].sigma_min);
}

TEST_CASE("command line driver")
{
  TempDir dir("cli");
  const auto cfg = dir.Path() / "small.ini";
  WriteTextFile(cfg, std::string(SMALL) + "[test]\ndt = 0.04\nt_final = 2\n");
  const auto out = dir.Path() / "out" / "deeper";
  const std::string common = "--config " + cfg.string() + " --output " + out.string();

  CHECK(RunCli("fom " + common) == 0);
  const MatrixFile snaps = ReadMatrixFile(out / "snapshots.bin");
  CHECK(snaps.states.rows() == 120);
  CHECK(snaps.states.cols() == 51);
  CHECK(snaps.velocities.has_value());
  CHECK(std::filesystem::exists(out / "snapshots.json"));

  CHECK(RunCli("basis " + common + " --snapshots " + (out / "snapshots.bin").string()) == 0);
  CHECK(std::filesystem::exists(out / "basis_pod_8.bin"));
  CHECK(std::filesystem::exists(out / "basis_cotangent_4.json"));
  CHECK(std::filesystem::exists(out / "basis.csv"));

  CHECK(RunCli("run " + common + " --snapshots " + (out / "snapshots.bin").string() +
               " --basis " + (out / "basis_pod_8.bin").string() +
               " --emit-ham-trace --emit-trajectory") == 0);
  const std::string run = ReadTextFile(out / "run.csv");
  // Two variants × three provenances × two grids.
  CHECK(CountLines(run) == 2 + 12);
  CHECK(std::filesystem::exists(out / "ham_pod_8_consistent_ham_intrusive_test.csv"));
  CHECK(ReadMatrixFile(out / "traj_pod_8_galerkin_opinf_train.bin").states.cols() == 51);

  CHECK(RunCli("sweep " + common + " --threads 2") == 0);
  const std::string first = ReadTextFile(out / "sweep.csv");
  CHECK(RunCli("sweep " + common + " --threads 1") == 0);
  CHECK(ReadTextFile(out / "sweep.csv") == first);

  CHECK(RunCli("diagnose " + common + " --seed 3") == 0);
  CHECK(CountLines(ReadTextFile(out / "diagnose.csv")) == 102);

  CHECK(RunCli("sweep --config " + (dir.Path() / "missing.ini").string()) != 0);
  CHECK(RunCli("frobnicate " + common) != 0);

  WriteTextFile(dir.Path() / "zero.ini", "[fom]\nnum_cells = 20\nt_final = 0\n");
  CHECK(RunCli("fom --config " + (dir.Path() / "zero.ini").string() + " --output " +
               (dir.Path() / "zero").string()) == 0);
  CHECK(ReadMatrixFile(dir.Path() / "zero" / "snapshots.bin").states.cols() == 1);
}
