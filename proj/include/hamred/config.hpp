// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef HAMRED_CONFIG_HPP
#define HAMRED_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>
#include "hamred/basis.hpp"
#include "hamred/fom.hpp"
#include "hamred/opinf.hpp"
#include "hamred/rom.hpp"

namespace hamred
{

struct FomConfig
{
  // wave | lattice | matrices
  std::string kind = "wave";
  Index num_cells = 500;
  double wave_speed = 0.1;
  double length = 1.0;
  LatticeSpec lattice;
  std::filesystem::path mass_file;
  std::filesystem::path stiffness_file;
  std::filesystem::path q0_file;
  std::filesystem::path qdot0_file;
  // midpoint | newmark
  std::string integrator = "midpoint";
  double beta = 0.25;
  double gamma = 0.5;
  double dt = 0.02;
  double t_final = 10.0;
  Index sample_every = 1;
};

struct BasisConfig
{
  std::vector<BasisKind> kinds{BasisKind::OrdinaryPOD};
  std::vector<Index> sizes{40};
  bool centered = true;
};

struct RomConfig
{
  std::vector<RomVariant> variants{RomVariant::Galerkin, RomVariant::LeastSquaresHam,
                                   RomVariant::ConsistentHam};
  bool centered = true;
};

struct OpInfConfig
{
  bool enabled = false;
  // Any of {false, true}: vanilla and/or re-projected inference.
  std::vector<bool> reprojected{true};
  VelocitySource velocity_source = VelocitySource::Exact;
};

struct TestGrid
{
  double dt = 0.0;
  double t_final = 0.0;
};

struct DiagnoseConfig
{
  Index trials = 100;
  Index dim = 50;
  Index n = 10;
};

struct ExperimentConfig
{
  FomConfig fom;
  BasisConfig basis;
  RomConfig rom;
  OpInfConfig opinf;
  std::optional<TestGrid> test;
  DiagnoseConfig diagnose;
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Non-fatal notes such as removed duplicate list entries.
  std::vector<std::string> warnings;
};

//
// Plain-text config: optional top-level "key = value" lines (output_dir, seed, threads) followed
// by sections [fom], [basis], [rom], [opinf], [test], [diagnose]. '#' and ';' start comments.
// Lists are comma separated; basis sizes also accept "start:stop:step". Relative paths resolve
// against base_dir.
//
ExperimentConfig ParseConfig(const std::string &text, const std::filesystem::path &base_dir);
ExperimentConfig LoadConfig(const std::filesystem::path &path);

}  // namespace hamred

#endif  // HAMRED_CONFIG_HPP
