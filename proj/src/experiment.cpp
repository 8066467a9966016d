// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <sstream>
#include <thread>
#include <tuple>
#include "json.hpp"
#include "hamred/io.hpp"
#include "hamred/opinf.hpp"

namespace hamred
{

namespace
{

std::string CsvDouble(double x)
{
  if (std::isnan(x))
  {
    return "nan";
  }
  if (std::isinf(x))
  {
    return x > 0 ? "inf" : "-inf";
  }
  return FormatDouble(x);
}

std::string CsvText(const std::string &s)
{
  if (s.find_first_of(",\"\n\r") == std::string::npos)
  {
    return s;
  }
  std::string out = "\"";
  for (char c : s)
  {
    if (c == '"')
    {
      out += "\"\"";
    }
    else if (c == '\n' || c == '\r')
    {
      out += ' ';
    }
    else
    {
      out += c;
    }
  }
  return out + "\"";
}

std::filesystem::path SidecarPath(const std::filesystem::path &bin_path)
{
  std::filesystem::path p = bin_path;
  p.replace_extension(".json");
  return p;
}

RunReport ItemStub(const ExperimentConfig &cfg, const SweepItem &item, const std::string &grid)
{
  RunReport r;
  r.basis_kind = std::string(BasisKindName(item.kind));
  r.n = item.n;
  r.variant = std::string(RomVariantName(item.variant));
  r.provenance = std::string(ProvenanceName(item.provenance));
  r.centered = cfg.rom.centered;
  r.velocity_source = item.provenance == Provenance::Intrusive
                          ? "none"
                          : std::string(VelocitySourceName(cfg.opinf.velocity_source));
  r.grid = grid;
  if (grid == "train")
  {
    r.dt = cfg.fom.dt;
    r.t_final = cfg.fom.t_final;
  }
  else if (cfg.test)
  {
    r.dt = cfg.test->dt;
    r.t_final = cfg.test->t_final;
  }
  r.rel_l2 = std::numeric_limits<double>::quiet_NaN();
  r.bounds.proj_tail = r.bounds.canon_dev = r.bounds.grad_norm =
      std::numeric_limits<double>::quiet_NaN();
  return r;
}

struct ItemOutput
{
  std::vector<RunReport> reports;
  std::vector<Matrix> trajectories;
};

ItemOutput RunOne(const ExperimentConfig &cfg, const HamiltonianSystem &sys,
                  const SnapshotSet &train, const std::optional<SnapshotSet> &test_fom,
                  const SweepItem &item, const BasisCache &bases, bool keep_trajectories)
{
  std::vector<std::string> grids{"train"};
  if (test_fom)
  {
    grids.emplace_back("test");
  }
  ItemOutput out;
  const auto start = std::chrono::steady_clock::now();
  try
  {
    const auto it = bases.find({item.kind, item.n});
    if (it == bases.end())
    {
      throw Error("no basis was built for this kind and size");
    }
    if (!it->second.basis)
    {
      throw Error(it->second.error);
    }
    const auto basis = it->second.basis;

    ReducedModel model;
    std::optional<OpInfErrors> errs;
    if (item.provenance == Provenance::Intrusive)
    {
      model = BuildIntrusive(item.variant, sys, basis, cfg.rom.centered);
    }
    else
    {
      OpInfOptions opts;
      opts.variant = item.variant;
      opts.reprojected = item.provenance == Provenance::OpInfReprojected;
      opts.velocity_source = cfg.opinf.velocity_source;
      opts.centered = cfg.rom.centered;
      const OpInfResult res = RunOpInf(sys, train, basis, opts, cfg.fom.sample_every);
      model = res.model;
      errs = OpInfErrors{res.eps_dt, res.eps_a};
    }

    for (const auto &grid : grids)
    {
      const bool is_train = grid == "train";
      const SnapshotSet &fom = is_train ? train : *test_fom;
      const double dt = is_train ? cfg.fom.dt : cfg.test->dt;
      const Index every = is_train ? cfg.fom.sample_every : 1;
      const SnapshotSet red = IntegrateRom(model, fom.Times().back(), dt, every);
      Matrix full = model.Reconstruct(red.States());
      RunReport r = MakeRunReport(sys, model, fom, SnapshotSet(full, red.Times()), errs);
      const RunReport stub = ItemStub(cfg, item, grid);
      r.velocity_source = stub.velocity_source;
      r.grid = grid;
      r.dt = stub.dt;
      r.t_final = stub.t_final;
      for (const auto &w : model.warnings)
      {
        r.message += (r.message.empty() ? "" : "; ") + w;
      }
      out.reports.push_back(std::move(r));
      out.trajectories.push_back(keep_trajectories ? std::move(full) : Matrix());
    }
  }
  catch (const std::exception &e)
  {
    out.reports.clear();
    out.trajectories.clear();
    for (const auto &grid : grids)
    {
      RunReport r = ItemStub(cfg, item, grid);
      r.status = "error";
      r.message = e.what();
      out.reports.push_back(std::move(r));
      out.trajectories.emplace_back();
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  for (auto &r : out.reports)
  {
    r.wall_time = wall;
  }
  return out;
}

}  // namespace

HamiltonianSystem BuildSystem(const FomConfig &cfg)
{
  if (cfg.kind == "wave")
  {
    return BuildWaveFom(cfg.num_cells, cfg.wave_speed, cfg.length);
  }
  if (cfg.kind == "lattice")
  {
    return BuildLatticeFom(cfg.lattice);
  }
  if (cfg.kind == "matrices")
  {
    const SparseMatrix mass = ReadMatrixMarket(cfg.mass_file);
    const SparseMatrix stiff = ReadMatrixMarket(cfg.stiffness_file);
    const Vector q0 = ReadMatrixMarketVector(cfg.q0_file);
    const Vector qdot0 =
        cfg.qdot0_file.empty() ? Vector(Vector::Zero(q0.size())) : ReadMatrixMarketVector(cfg.qdot0_file);
    return BuildFromMatrices(mass, stiff, q0, qdot0);
  }
  throw Error("unknown FOM kind '" + cfg.kind + "'");
}

SnapshotSet SimulateFom(const HamiltonianSystem &sys, const FomConfig &cfg, double dt,
                        double t_final, Index sample_every)
{
  if (cfg.integrator == "newmark")
  {
    NewmarkParams p;
    p.t_final = t_final;
    p.dt = dt;
    p.beta = cfg.beta;
    p.gamma = cfg.gamma;
    p.sample_every = sample_every;
    return IntegrateNewmark(sys, p);
  }
  return IntegrateMidpoint(sys, t_final, dt, sample_every);
}

SnapshotSet TrainingSnapshots(const HamiltonianSystem &sys, const ExperimentConfig &cfg)
{
  return SimulateFom(sys, cfg.fom, cfg.fom.dt, cfg.fom.t_final, cfg.fom.sample_every);
}

std::vector<SweepItem> EnumerateSweep(const ExperimentConfig &cfg)
{
  std::vector<Provenance> provs{Provenance::Intrusive};
  if (cfg.opinf.enabled)
  {
    for (bool rp : cfg.opinf.reprojected)
    {
      const Provenance p = rp ? Provenance::OpInfReprojected : Provenance::OpInf;
      if (std::find(provs.begin(), provs.end(), p) == provs.end())
      {
        provs.push_back(p);
      }
    }
  }
  std::vector<SweepItem> items;
  for (BasisKind k : cfg.basis.kinds)
  {
    for (Index n : cfg.basis.sizes)
    {
      for (RomVariant v : cfg.rom.variants)
      {
        for (Provenance p : provs)
        {
          items.push_back({k, n, v, p});
        }
      }
    }
  }
  std::sort(items.begin(), items.end(),
            [](const SweepItem &a, const SweepItem &b)
            {
              return std::make_tuple(BasisKindName(a.kind), a.n, RomVariantName(a.variant),
                                     ProvenanceName(a.provenance)) <
                     std::make_tuple(BasisKindName(b.kind), b.n, RomVariantName(b.variant),
                                     ProvenanceName(b.provenance));
            });
  return items;
}

BasisCache BuildBases(const ExperimentConfig &cfg, const SnapshotSet &train)
{
  BasisCache cache;
  for (BasisKind k : cfg.basis.kinds)
  {
    for (Index n : cfg.basis.sizes)
    {
      BasisEntry e;
      try
      {
        e.basis = std::make_shared<const ReducedBasis>(BuildBasis(k, train, n, cfg.basis.centered));
      }
      catch (const std::exception &ex)
      {
        e.error = ex.what();
      }
      cache[{k, n}] = std::move(e);
    }
  }
  return cache;
}

RunOutput RunItems(const ExperimentConfig &cfg, const HamiltonianSystem &sys,
                   const SnapshotSet &train, const std::optional<SnapshotSet> &test_fom,
                   const std::vector<SweepItem> &items, const BasisCache &bases, unsigned threads,
                   bool keep_trajectories)
{
  std::vector<ItemOutput> results(items.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]()
  {
    for (std::size_t i = next++; i < items.size(); i = next++)
    {
      results[i] = RunOne(cfg, sys, train, test_fom, items[i], bases, keep_trajectories);
    }
  };
  const unsigned nthreads =
      std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(items.size())));
  if (nthreads <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; t++)
    {
      pool.emplace_back(worker);
    }
    for (auto &th : pool)
    {
      th.join();
    }
  }
  RunOutput out;
  for (auto &r : results)
  {
    for (std::size_t k = 0; k < r.reports.size(); k++)
    {
      out.reports.push_back(std::move(r.reports[k]));
      out.trajectories.push_back(std::move(r.trajectories[k]));
    }
  }
  return out;
}

std::string RunReportsCsv(const std::vector<RunReport> &reports)
{
  std::ostringstream os;
  os << "# hamred-csv-v1\n";
  os << "status,basis_kind,n,variant,provenance,centered,velocity_source,grid,dt,t_final,rel_l2,"
        "ham_err_first,ham_err_max,proj_tail,canon_dev,grad_norm,eps_dt,eps_A,message\n";
  const auto opt = [](const std::optional<double> &x)
  { return x ? CsvDouble(*x) : std::string("nan"); };
  for (const auto &r : reports)
  {
    os << r.status << ',' << r.basis_kind << ',' << r.n << ',' << r.variant << ','
       << r.provenance << ',' << (r.centered ? "true" : "false") << ',' << r.velocity_source
       << ',' << r.grid << ',' << CsvDouble(r.dt) << ',' << CsvDouble(r.t_final) << ','
       << CsvDouble(r.rel_l2) << ',' << CsvDouble(r.HamErrFirst()) << ','
       << CsvDouble(r.HamErrMaxAbs()) << ',' << CsvDouble(r.bounds.proj_tail) << ','
       << CsvDouble(r.bounds.canon_dev) << ',' << CsvDouble(r.bounds.grad_norm) << ','
       << opt(r.bounds.eps_dt) << ',' << opt(r.bounds.eps_a) << ',' << CsvText(r.message)
       << '\n';
  }
  return os.str();
}

std::string HamTraceCsv(const RunReport &report)
{
  std::ostringstream os;
  os << "# hamred-csv-v1\n";
  os << "t,ham_error\n";
  for (std::size_t k = 0; k < report.ham_trace.size(); k++)
  {
    os << CsvDouble(report.ham_times[k]) << ',' << CsvDouble(report.ham_trace[k]) << '\n';
  }
  return os.str();
}

std::string BasisTableCsv(const BasisCache &bases, const SnapshotSet &train)
{
  std::ostringstream os;
  os << "# hamred-csv-v1\n";
  os << "kind,n,snapshot_energy,projection_error,sigma_min_Jhat,canon_dev\n";
  for (const auto &[key, entry] : bases)
  {
    if (!entry.basis)
    {
      continue;
    }
    const ReducedBasis &b = *entry.basis;
    const Matrix j_hat = ReducedJ(b.u);
    Eigen::JacobiSVD<Matrix> svd(j_hat);
    const double smin = svd.singularValues()(svd.singularValues().size() - 1);
    const double cdev = smin > 0.0 ? 1.0 / (smin * smin) - 1.0
                                   : std::numeric_limits<double>::infinity();
    os << BasisKindName(b.kind) << ',' << b.Size() << ',' << CsvDouble(BasisSnapshotEnergy(b))
       << ',' << CsvDouble(ProjectionError(train, b)) << ',' << CsvDouble(smin) << ','
       << CsvDouble(cdev) << '\n';
  }
  return os.str();
}

void SaveBasis(const std::filesystem::path &bin_path, const ReducedBasis &basis)
{
  WriteMatrixFile(bin_path, basis.u);
  nlohmann::json j;
  j["kind"] = std::string(BasisKindName(basis.kind));
  j["n"] = basis.Size();
  j["rows"] = basis.Dim();
  j["centered"] = basis.Centered();
  j["singular_values"] = std::vector<double>(basis.singular_values.begin(),
                                             basis.singular_values.end());
  j["singular_values_p"] = std::vector<double>(basis.singular_values_p.begin(),
                                               basis.singular_values_p.end());
  if (basis.center)
  {
    j["center"] = std::vector<double>(basis.center->begin(), basis.center->end());
  }
  else
  {
    j["center"] = nullptr;
  }
  WriteTextFile(SidecarPath(bin_path), j.dump(2) + "\n");
}

ReducedBasis LoadBasis(const std::filesystem::path &bin_path)
{
  const MatrixFile f = ReadMatrixFile(bin_path);
  ReducedBasis b;
  b.u = f.states;
  const std::filesystem::path side = SidecarPath(bin_path);
  if (!std::filesystem::exists(side))
  {
    throw Error("basis sidecar not found: " + side.string());
  }
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(ReadTextFile(side));
    b.kind = ParseBasisKind(j.at("kind").get<std::string>());
    const auto sv = j.at("singular_values").get<std::vector<double>>();
    b.singular_values = Eigen::Map<const Vector>(sv.data(), static_cast<Index>(sv.size()));
    if (j.contains("singular_values_p"))
    {
      const auto svp = j.at("singular_values_p").get<std::vector<double>>();
      b.singular_values_p = Eigen::Map<const Vector>(svp.data(), static_cast<Index>(svp.size()));
    }
    if (!j.at("center").is_null())
    {
      const auto c = j.at("center").get<std::vector<double>>();
      b.center = Vector(Eigen::Map<const Vector>(c.data(), static_cast<Index>(c.size())));
    }
  }
  catch (const nlohmann::json::exception &e)
  {
    throw Error("malformed basis sidecar " + side.string() + ": " + e.what());
  }
  if (b.Size() % 2 != 0 || (b.center && b.center->size() != b.Dim()))
  {
    throw Error("inconsistent basis file " + bin_path.string());
  }
  if (OrthonormalityError(b.u) > 1.0e-10)
  {
    throw Error("basis file " + bin_path.string() + " is not column-orthonormal");
  }
  return b;
}

std::string SnapshotSidecarJson(const HamiltonianSystem &sys, const SnapshotSet &snaps,
                                const FomConfig &cfg)
{
  nlohmann::json j;
  j["format"] = "HSNP1";
  j["fom_kind"] = cfg.kind;
  j["integrator"] = cfg.integrator;
  j["rows"] = snaps.Dim();
  j["cols"] = snaps.Count();
  j["dt"] = cfg.dt;
  j["sample_every"] = cfg.sample_every;
  j["snapshot_dt"] = snaps.TimeStep();
  j["t_final"] = snaps.Times().back();
  j["has_velocities"] = snaps.HasVelocities();
  j["initial_energy"] = sys.Energy(sys.InitialState());
  j["energy_trace"] = HamiltonianTrace(sys, snaps);
  return j.dump(2) + "\n";
}

std::string ReportTag(const RunReport &r)
{
  return r.basis_kind + "_" + std::to_string(r.n) + "_" + r.variant + "_" + r.provenance + "_" +
         r.grid;
}

std::vector<HaarTrial> HaarDiagnostics(Index dim, Index n, Index trials, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<HaarTrial> out;
  out.reserve(static_cast<std::size_t>(trials));
  for (Index t = 0; t < trials; t++)
  {
    const Matrix u = HaarRandomFrame(dim, n, rng);
    Eigen::JacobiSVD<Matrix> svd(ReducedJ(u));
    HaarTrial h;
    h.sigma_min = svd.singularValues()(n - 1);
    h.canon_dev = h.sigma_min > 0.0 ? 1.0 / (h.sigma_min * h.sigma_min) - 1.0
                                    : std::numeric_limits<double>::infinity();
    out.push_back(h);
  }
  return out;
}

}  // namespace hamred
