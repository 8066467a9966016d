// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include "hamred/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include "hamred/io.hpp"

namespace hamred
{

namespace
{

std::string Trim(std::string_view s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos)
  {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> SplitList(const std::string &value)
{
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
  {
    item = Trim(item);
    if (!item.empty())
    {
      out.push_back(item);
    }
  }
  return out;
}

class Context
{
public:
  Context(std::string section, std::string key, int line)
    : where("line " + std::to_string(line) + " [" + section + "] " + key)
  {
  }

  [[noreturn]] void Fail(const std::string &what) const
  {
    throw Error("config " + where + ": " + what);
  }

  double Double(const std::string &v) const
  {
    double x = 0.0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size() || !std::isfinite(x))
    {
      Fail("expected a number, got '" + v + "'");
    }
    return x;
  }

  long long Int(const std::string &v) const
  {
    long long x = 0;
    const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
    if (r.ec != std::errc() || r.ptr != v.data() + v.size())
    {
      Fail("expected an integer, got '" + v + "'");
    }
    return x;
  }

  bool Bool(const std::string &v) const
  {
    if (v == "true" || v == "yes" || v == "1")
    {
      return true;
    }
    if (v == "false" || v == "no" || v == "0")
    {
      return false;
    }
    Fail("expected true or false, got '" + v + "'");
  }

  std::string where;
};

template <typename T, typename Name>
std::vector<T> Dedupe(const std::vector<T> &in, const std::string &what, Name name,
                      std::vector<std::string> &warnings)
{
  std::vector<T> out;
  for (const T &x : in)
  {
    if (std::find(out.begin(), out.end(), x) != out.end())
    {
      warnings.push_back("duplicate " + what + " entry '" + name(x) + "' ignored");
      continue;
    }
    out.push_back(x);
  }
  return out;
}

std::vector<Index> ParseSizes(const std::string &value, const Context &ctx)
{
  std::vector<Index> out;
  for (const auto &item : SplitList(value))
  {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
    {
      out.push_back(static_cast<Index>(ctx.Int(item)));
      continue;
    }
    std::vector<std::string> parts;
    std::stringstream ss(item);
    std::string p;
    while (std::getline(ss, p, ':'))
    {
      parts.push_back(Trim(p));
    }
    if (parts.size() != 3)
    {
      ctx.Fail("size range must be start:stop:step, got '" + item + "'");
    }
    const long long start = ctx.Int(parts[0]);
    const long long stop = ctx.Int(parts[1]);
    const long long step = ctx.Int(parts[2]);
    if (step <= 0 || stop < start)
    {
      ctx.Fail("bad size range '" + item + "'");
    }
    for (long long n = start; n <= stop; n += step)
    {
      out.push_back(static_cast<Index>(n));
    }
  }
  return out;
}

std::filesystem::path Resolve(const std::filesystem::path &base, const std::string &value)
{
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

void Validate(ExperimentConfig &cfg)
{
  const FomConfig &f = cfg.fom;
  if (f.kind != "wave" && f.kind != "lattice" && f.kind != "matrices")
  {
    throw Error("config [fom] kind must be wave, lattice or matrices, got '" + f.kind + "'");
  }
  if (f.integrator != "midpoint" && f.integrator != "newmark")
  {
    throw Error("config [fom] integrator must be midpoint or newmark, got '" + f.integrator + "'");
  }
  if (!(f.dt > 0.0))
  {
    throw Error("config [fom] dt must be positive");
  }
  if (f.t_final < 0.0)
  {
    throw Error("config [fom] t_final must be non-negative");
  }
  if (f.sample_every < 1)
  {
    throw Error("config [fom] sample_every must be positive");
  }
  StepCount(f.t_final, f.dt);
  if (f.kind == "matrices")
  {
    for (const auto *p : {&f.mass_file, &f.stiffness_file, &f.q0_file})
    {
      if (p->empty())
      {
        throw Error("config [fom] kind = matrices needs mass_file, stiffness_file and q0_file");
      }
    }
    for (const auto *p : {&f.mass_file, &f.stiffness_file, &f.q0_file, &f.qdot0_file})
    {
      if (!p->empty() && !std::filesystem::exists(*p))
      {
        throw Error("config [fom] referenced file does not exist: " + p->string());
      }
    }
  }
  for (Index n : cfg.basis.sizes)
  {
    if (n <= 0 || n % 2 != 0)
    {
      throw Error("config [basis] n values must be even and positive, got " + std::to_string(n));
    }
  }
  if (cfg.test)
  {
    if (!(cfg.test->dt > 0.0) || cfg.test->t_final < 0.0)
    {
      throw Error("config [test] needs dt > 0 and t_final >= 0");
    }
    if (cfg.test->dt < f.dt)
    {
      throw Error("config [test] dt must not be smaller than the training dt");
    }
    StepCount(cfg.test->t_final, cfg.test->dt);
  }
  if (cfg.diagnose.n <= 0 || cfg.diagnose.n % 2 != 0 || cfg.diagnose.dim % 2 != 0 ||
      cfg.diagnose.n > cfg.diagnose.dim || cfg.diagnose.trials <= 0)
  {
    throw Error("config [diagnose] needs even 0 < n <= dim and trials > 0");
  }
  if (cfg.threads == 0)
  {
    throw Error("config threads must be positive");
  }
}

}  // namespace

ExperimentConfig ParseConfig(const std::string &text, const std::filesystem::path &base_dir)
{
  ExperimentConfig cfg;
  std::optional<double> test_dt;
  std::optional<double> test_t_final;
  bool saw_test = false;
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw))
  {
    line_no++;
    const auto hash = raw.find_first_of("#;");
    const std::string line = Trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty())
    {
      continue;
    }
    if (line.front() == '[')
    {
      if (line.back() != ']')
      {
        throw Error("config line " + std::to_string(line_no) + ": malformed section header");
      }
      section = Trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known{"fom", "basis", "rom", "opinf", "test", "diagnose"};
      if (!known.count(section))
      {
        throw Error("config line " + std::to_string(line_no) + ": unknown section [" + section +
                    "]");
      }
      saw_test = saw_test || section == "test";
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
    {
      throw Error("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    const Context ctx(section, key, line_no);
    if (!seen.insert(section + "." + key).second)
    {
      ctx.Fail("key given twice");
    }

    if (section.empty())
    {
      if (key == "output_dir")
      {
        cfg.output_dir = Resolve(base_dir, value);
      }
      else if (key == "seed")
      {
        const long long s = ctx.Int(value);
        if (s < 0)
        {
          ctx.Fail("seed must be non-negative");
        }
        cfg.seed = static_cast<std::uint64_t>(s);
      }
      else if (key == "threads")
      {
        const long long t = ctx.Int(value);
        if (t < 1)
        {
          ctx.Fail("threads must be positive");
        }
        cfg.threads = static_cast<unsigned>(t);
      }
      else
      {
        ctx.Fail("unknown key");
      }
    }
    else if (section == "fom")
    {
      FomConfig &f = cfg.fom;
      if (key == "kind") f.kind = value;
      else if (key == "num_cells") f.num_cells = ctx.Int(value);
      else if (key == "wave_speed") f.wave_speed = ctx.Double(value);
      else if (key == "length") f.length = ctx.Double(value);
      else if (key == "nx") f.lattice.nx = ctx.Int(value);
      else if (key == "ny") f.lattice.ny = ctx.Int(value);
      else if (key == "nz") f.lattice.nz = ctx.Int(value);
      else if (key == "stiffness") f.lattice.stiffness = ctx.Double(value);
      else if (key == "mass") f.lattice.mass = ctx.Double(value);
      else if (key == "clamped_face") f.lattice.clamped_face = AxisFace::Parse(value);
      else if (key == "kick_face") f.lattice.kick_face = AxisFace::Parse(value);
      else if (key == "kick_speed") f.lattice.kick_speed = ctx.Double(value);
      else if (key == "mass_file") f.mass_file = Resolve(base_dir, value);
      else if (key == "stiffness_file") f.stiffness_file = Resolve(base_dir, value);
      else if (key == "q0_file") f.q0_file = Resolve(base_dir, value);
      else if (key == "qdot0_file") f.qdot0_file = Resolve(base_dir, value);
      else if (key == "integrator") f.integrator = value;
      else if (key == "beta") f.beta = ctx.Double(value);
      else if (key == "gamma") f.gamma = ctx.Double(value);
      else if (key == "dt") f.dt = ctx.Double(value);
      else if (key == "t_final") f.t_final = ctx.Double(value);
      else if (key == "sample_every") f.sample_every = ctx.Int(value);
      else ctx.Fail("unknown key");
    }
    else if (section == "basis")
    {
      if (key == "kind")
      {
        std::vector<BasisKind> kinds;
        for (const auto &item : SplitList(value))
        {
          kinds.push_back(ParseBasisKind(item));
        }
        cfg.basis.kinds = Dedupe(kinds, "basis kind",
                                 [](BasisKind k) { return std::string(BasisKindName(k)); },
                                 cfg.warnings);
      }
      else if (key == "n")
      {
        cfg.basis.sizes = Dedupe(ParseSizes(value, ctx), "basis size",
                                 [](Index n) { return std::to_string(n); }, cfg.warnings);
      }
      else if (key == "centered")
      {
        cfg.basis.centered = ctx.Bool(value);
      }
      else
      {
        ctx.Fail("unknown key");
      }
    }
    else if (section == "rom")
    {
      if (key == "variant")
      {
        std::vector<RomVariant> vars;
        for (const auto &item : SplitList(value))
        {
          vars.push_back(ParseRomVariant(item));
        }
        cfg.rom.variants = Dedupe(vars, "ROM variant",
                                  [](RomVariant v) { return std::string(RomVariantName(v)); },
                                  cfg.warnings);
      }
      else if (key == "centered")
      {
        cfg.rom.centered = ctx.Bool(value);
      }
      else
      {
        ctx.Fail("unknown key");
      }
    }
    else if (section == "opinf")
    {
      if (key == "enabled")
      {
        cfg.opinf.enabled = ctx.Bool(value);
      }
      else if (key == "reprojected")
      {
        if (value == "both")
        {
          cfg.opinf.reprojected = {false, true};
        }
        else
        {
          cfg.opinf.reprojected = {ctx.Bool(value)};
        }
      }
      else if (key == "velocity_source")
      {
        cfg.opinf.velocity_source = ParseVelocitySource(value);
      }
      else
      {
        ctx.Fail("unknown key");
      }
    }
    else if (section == "test")
    {
      if (key == "dt") test_dt = ctx.Double(value);
      else if (key == "t_final") test_t_final = ctx.Double(value);
      else ctx.Fail("unknown key");
    }
    else if (section == "diagnose")
    {
      if (key == "trials") cfg.diagnose.trials = ctx.Int(value);
      else if (key == "dim") cfg.diagnose.dim = ctx.Int(value);
      else if (key == "n") cfg.diagnose.n = ctx.Int(value);
      else ctx.Fail("unknown key");
    }
  }
  if (saw_test)
  {
    if (!test_dt || !test_t_final)
    {
      throw Error("config [test] needs both dt and t_final");
    }
    cfg.test = TestGrid{*test_dt, *test_t_final};
  }
  Validate(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path &path)
{
  const std::string text = ReadTextFile(path);
  const std::filesystem::path base = path.has_parent_path() ? path.parent_path() : ".";
  return ParseConfig(text, base);
}

}  // namespace hamred
