// Copyright the hamred authors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#include <string>
#include "doctest.h"
#include "hamred/config.hpp"
#include "hamred/io.hpp"
#include "support.hpp"

using namespace hamred;

TEST_CASE("defaults describe the reproductive wave setup")
{
  const ExperimentConfig c = ParseConfig("", ".");
  CHECK(c.fom.kind == "wave");
  CHECK(c.fom.num_cells == 500);
  CHECK(c.fom.wave_speed == 0.1);
  CHECK(c.fom.dt == 0.02);
  CHECK(c.fom.t_final == 10.0);
  CHECK(c.rom.variants.size() == 3);
  CHECK(!c.test.has_value());
  CHECK(c.seed == 0);
  CHECK(c.threads == 1);
  CHECK(c.warnings.empty());
}

TEST_CASE("full config")
{
  const std::string text = R"(# experiment
output_dir = results   ; trailing comment
seed = 42
threads = 3

[fom]
kind = lattice
nx = 4
clamped_face = y-
kick_face = y+
kick_speed = 0.5
integrator = newmark
dt = 0.01
t_final = 2

[basis]
kind = cotangent, pod, cotangent
n = 10:30:10, 40
centered = false

[rom]
variant = consistent_ham
centered = false

[opinf]
enabled = yes
reprojected = both
velocity_source = central2

[test]
dt = 0.02
t_final = 4
)";
  const ExperimentConfig c = ParseConfig(text, "/base");
  CHECK(c.output_dir == std::filesystem::path("/base/results"));
  CHECK(c.seed == 42);
  CHECK(c.threads == 3);
  CHECK(c.fom.kind == "lattice");
  CHECK(c.fom.lattice.nx == 4);
  CHECK(c.fom.lattice.clamped_face == AxisFace{1, false});
  CHECK(c.fom.lattice.kick_speed == 0.5);
  CHECK(c.fom.integrator == "newmark");
  CHECK(c.basis.kinds == std::vector<BasisKind>{BasisKind::CotangentLift, BasisKind::OrdinaryPOD});
  CHECK(c.basis.sizes == std::vector<Index>{10, 20, 30, 40});
  CHECK(!c.basis.centered);
  CHECK(c.rom.variants == std::vector<RomVariant>{RomVariant::ConsistentHam});
  CHECK(c.opinf.enabled);
  CHECK(c.opinf.reprojected == std::vector<bool>{false, true});
  CHECK(c.opinf.velocity_source == VelocitySource::Central2);
  REQUIRE(c.test.has_value());
  CHECK(c.test->dt == 0.02);
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("cotangent") != std::string::npos);
}

TEST_CASE("duplicate sizes and variants are removed with warnings")
{
  const ExperimentConfig c =
      ParseConfig("[basis]\nn = 10, 20, 10\n[rom]\nvariant = galerkin, galerkin\n", ".");
  CHECK(c.basis.sizes == std::vector<Index>{10, 20});
  CHECK(c.rom.variants.size() == 1);
  CHECK(c.warnings.size() == 2);
}

TEST_CASE("empty variant list is allowed")
{
  const ExperimentConfig c = ParseConfig("[rom]\nvariant =\n", ".");
  CHECK(c.rom.variants.empty());
}

TEST_CASE("invalid configs are rejected")
{
  CHECK_THROWS_WITH_AS(ParseConfig("[fom]\nspeed = 1\n", "."), doctest::Contains("unknown key"),
                       Error);
  CHECK_THROWS_AS(ParseConfig("[solver]\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\ndt = 0.1\ndt = 0.2\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\ndt\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[basis]\nn = 11\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[basis]\nn = 10:2:2\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[basis]\nkind = greedy\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\ndt = abc\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\nt_final = 0.3\ndt = 0.2\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\nintegrator = rk4\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("[opinf]\nvelocity_source = spline\n", "."), Error);
  CHECK_THROWS_WITH_AS(ParseConfig("[test]\ndt = 0.01\nt_final = 1\n", "."),
                       doctest::Contains("training dt"), Error);
  CHECK_THROWS_AS(ParseConfig("[test]\ndt = 0.1\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("threads = 0\n", "."), Error);
  CHECK_THROWS_AS(ParseConfig("seed = -1\n", "."), Error);
  CHECK_THROWS_WITH_AS(ParseConfig("[fom]\nkind = matrices\nmass_file = nope.mtx\n"
                                   "stiffness_file = nope.mtx\nq0_file = nope.mtx\n",
                                   "."),
                       doctest::Contains("does not exist"), Error);
  CHECK_THROWS_AS(ParseConfig("[fom]\nkind = matrices\n", "."), Error);
}

TEST_CASE("matrix file paths resolve against the config directory")
{
  hamred::test::TempDir dir("cfg");
  WriteTextFile(dir.Path() / "m.mtx", "%%MatrixMarket matrix coordinate real general\n1 1 1\n1 1 1\n");
  WriteTextFile(dir.Path() / "q.mtx", "%%MatrixMarket matrix array real general\n1 1\n1\n");
  WriteTextFile(dir.Path() / "run.ini", "[fom]\nkind = matrices\nmass_file = m.mtx\n"
                                        "stiffness_file = m.mtx\nq0_file = q.mtx\n");
  const ExperimentConfig c = LoadConfig(dir.Path() / "run.ini");
  CHECK(c.fom.mass_file == dir.Path() / "m.mtx");
  CHECK(c.fom.qdot0_file.empty());
}
