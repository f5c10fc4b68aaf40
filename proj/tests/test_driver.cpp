#include "helpers.hpp"

#include "smpnp/driver.hpp"
#include "smpnp/output.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace smpnp;

namespace {

const char* kSpecies = R"(
[species]
name = Cl
Z = -1
radius = 1.81
c_b = 0.1
D_b = 0.203
[species]
name = Na
Z = 1
v = 3.5914
c_b = 0.1
D_b = 0.133
)";

RunConfig parse(const std::string& text, const std::filesystem::path& base = {})
{
  std::istringstream in(text);
  return parse_config(in, base);
}

RunConfig small_channel(int resolution = 8)
{
  RunConfig cfg;
  cfg.geometry.resolution = resolution;
  cfg.species = paper_species();
  return cfg;
}

}  // namespace

TEST_CASE("config: full example")
{
  const auto cfg = parse(std::string(R"(# comment line
synth_resolution = 10   # trailing comment
synth_box = -15 15 -15 15 -25 25
synth_pore_radius = 4
sigma = -1
omega = 0.35
u_b = 0.5
ring_count = 6
ring_charge = 0.4
ring_radius = 8
ring_z = -3 3
linear_solver = krylov
linear_restart = 40
threads = 2
current_planes = 0 12
output_dir = out
mesh_file = meshes/a.mesh
)") + kSpecies,
                         "/data/run");
  CHECK(cfg.geometry.resolution == 10);
  CHECK(cfg.geometry.box.z1 == -25);
  CHECK(cfg.geometry.pore_radius == 4);
  CHECK(cfg.constants.sigma == -1);
  CHECK(cfg.constants.omega == 0.35);
  CHECK(cfg.constants.u_b == 0.5);
  CHECK(cfg.ring.count == 6);
  CHECK(cfg.ring.z == std::vector<double>{-3, 3});
  CHECK(cfg.linear.method == SolveMethod::KrylovILU0);
  CHECK(cfg.linear.restart == 40);
  CHECK(cfg.threads == 2);
  CHECK(cfg.current_planes == std::vector<double>{0, 12});
  CHECK(cfg.output_dir == std::filesystem::path("/data/run/out"));
  CHECK(cfg.mesh_file == std::filesystem::path("/data/run/meshes/a.mesh"));
  REQUIRE(cfg.species.size() == 2);
  CHECK(cfg.species[0].v == doctest::Approx(24.8384).epsilon(1e-5));
  CHECK(cfg.species[1].v == 3.5914);
  CHECK(cfg.species[1].Z == 1);
}

TEST_CASE("config: defaults")
{
  const auto cfg = parse(kSpecies);
  CHECK(cfg.linear.method == SolveMethod::Direct);
  CHECK(cfg.output_dir == std::filesystem::path("smpnp_out"));
  CHECK(cfg.constants.omega == 0.41);
  CHECK(cfg.constants.exp_cap == 45);
  CHECK(cfg.threads == 1);
  CHECK_FALSE(cfg.mesh_file);
}

TEST_CASE("config: errors name the line")
{
  CHECK_THROWS_WITH_AS(parse("omega = 0.4\nbogus = 1\n" + std::string(kSpecies)),
                       doctest::Contains("line 2: unknown key 'bogus'"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("omega = 0.4\nomega = 0.3\n" + std::string(kSpecies)),
                       doctest::Contains("line 2: duplicate key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("omega = abc\n" + std::string(kSpecies)), doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("omega = 1.5\n" + std::string(kSpecies)), doctest::Contains("omega"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("linear_solver = lu\n" + std::string(kSpecies)), doctest::Contains("line 1"),
                       ConfigError);
  CHECK_THROWS_AS(parse("omega = 0.4\n"), ConfigError);
  CHECK_THROWS_AS(parse("[species]\nname = a\nZ = 1\nc_b = 0.1\nD_b = 0.1\n"), ConfigError);  // no size
  CHECK_THROWS_AS(parse("[species]\nname = a\nZ = 1\nv = 1\nradius = 1\nc_b = 0.1\nD_b = 0.1\n"), ConfigError);
  CHECK_THROWS_AS(parse("[species]\nname = a\nZ = 1\nv = 1\nc_b = 0.1\nD_b = 0.1\ncolor = red\n"), ConfigError);
  CHECK_THROWS_AS(parse("[ions]\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST_CASE("driver: ring atoms")
{
  ChannelGeometry g;
  const auto atoms = ring_atoms({6, -0.5, 8, {-4, 4}}, &g);
  CHECK(atoms.size() == 12);
  for (double q : atoms.charges) CHECK(q == -0.5);
  const double h = (g.box.x2 - g.box.x1) / g.resolution;
  for (const auto& p : atoms.positions) {
    const double cells = (p[0] - g.box.x1) / h - 0.5;
    CHECK(cells == doctest::Approx(std::round(cells)));
  }
  const auto free = ring_atoms({4, 1, 8, {0}}, nullptr);
  CHECK(free.positions[1][1] == doctest::Approx(8));
  CHECK(ring_atoms({0, 1, 8, {0}}, &g).size() == 0);
}

TEST_CASE("driver: problem validation")
{
  auto cfg = small_channel();
  cfg.ring = {6, -1, 0.5, {0}};  // inside the pore
  CHECK_THROWS_AS(make_problem(cfg), std::invalid_argument);
  cfg = small_channel();
  cfg.species[0].v = 0;
  CHECK_THROWS_AS(make_problem(cfg), std::invalid_argument);
  cfg = small_channel();
  cfg.geometry.pore_radius = 20;
  CHECK_THROWS_AS(make_problem(cfg), MeshError);
  cfg = small_channel();
  cfg.membrane_z1 = 0;
  cfg.membrane_z2 = 2;  // buffers overlap
  CHECK_THROWS_AS(make_problem(cfg), std::invalid_argument);
}

TEST_CASE("driver: zero field converges immediately to the bulk")
{
  for (bool reduced : {false, true}) {
    auto cfg = small_channel();
    if (reduced) {
      for (auto& s : cfg.species) s.v = 0;
    }
    const auto p = make_problem(cfg);
    int observed = 0;
    const auto r = solve(*p, [&](const IterateView&) { ++observed; });
    CHECK(r.converged);
    CHECK(r.iterations <= 3);
    CHECK(observed == r.iterations);
    CHECK(r.history.size() == static_cast<std::size_t>(r.iterations));
    CHECK(r.smpbic_converged);
    for (double u : r.u) CHECK(std::abs(u) < 1e-12);
    for (const auto& c : r.c) {
      for (double v : c) {
        if (reduced) {
          CHECK(v == doctest::Approx(0.1).epsilon(1e-13));
        } else {
          CHECK(v == doctest::Approx(0.1).epsilon(1e-10));
        }
      }
    }
    const auto& h = r.history.back();
    CHECK(h.d_phi < 1e-4);
    CHECK(h.d_cbar < 1e-4);
    CHECK(h.d_c < 1e-4);
  }
}

TEST_CASE("driver: negatively charged channel attracts cations into the pore")
{
  auto cfg = small_channel(10);
  cfg.constants.sigma = -1;
  cfg.ring = {6, -0.3, 8, {-4, 4}};
  const auto p = make_problem(cfg);
  const auto r = solve(*p);
  REQUIRE(r.converged);
  CHECK(r.min_concentration > 0);
  CHECK(r.min_water_fraction > 0);
  const auto mean = pore_average(*p, r.c, cfg.geometry.pore_radius, -8, 8);
  // Cl, NO3, Na, K
  CHECK(std::min(mean[2], mean[3]) > std::max(mean[0], mean[1]));
  const auto rows = compute_profiles(*p, r.c, 20, cfg.geometry.pore_radius);
  for (const auto& row : rows) {
    if (row.count == 0 || std::abs(row.z_center) > 8) continue;
    CHECK(row.mean[2] > row.mean[0]);
  }
}

TEST_CASE("output: profiles, convergence, summary and VTK")
{
  auto cfg = small_channel();
  const auto p = make_problem(cfg);
  const auto r = solve(*p);
  REQUIRE(r.converged);

  SUBCASE("uniform concentrations give flat profiles")
  {
    SpeciesFields c(4, std::vector<double>(p->sub.num_vertices(), 0.25));
    const auto rows = compute_profiles(*p, c, 8, std::nullopt);
    for (const auto& row : rows) {
      REQUIRE(row.count > 0);
      for (double m : row.mean) CHECK(m == doctest::Approx(0.25));
    }
    std::size_t total = 0;
    for (const auto& row : rows) total += row.count;
    CHECK(total == p->sub.num_vertices());
  }
  SUBCASE("empty bins are written with count 0")
  {
    const auto rows = compute_profiles(*p, r.c, 120, 1.0);
    bool empty = false;
    for (const auto& row : rows) empty |= row.count == 0 && row.mean.empty();
    CHECK(empty);
    std::ostringstream out;
    write_profiles(out, *p, rows);
    const auto text = out.str();
    CHECK(text.rfind("z_center,c_Cl,c_NO3,c_Na,c_K,count\n", 0) == 0);
    CHECK(text.find(",,,,0\n") != std::string::npos);
    CHECK_THROWS_AS(compute_profiles(*p, r.c, 0, 1.0), std::invalid_argument);
  }
  SUBCASE("convergence and summary")
  {
    std::ostringstream conv, sum;
    write_convergence(conv, r);
    CHECK(conv.str().rfind("k,d_phi,d_cbar,d_c,t_block1,t_block2,t_block3\n1,", 0) == 0);
    write_summary(sum, *p, r);
    CHECK(sum.str().find("converged = true\n") != std::string::npos);
    CHECK(sum.str().find("iterations = 1\n") != std::string::npos);
    CHECK(sum.str().find("final_d_phi = ") != std::string::npos);
  }
  SUBCASE("vtk and files on disk")
  {
    std::ostringstream vtk;
    write_vtk(vtk, *p, r);
    const auto text = vtk.str();
    for (const char* key : {"DATASET UNSTRUCTURED_GRID", "SCALARS region int 1", "SCALARS u double 1",
                            "SCALARS Psi double 1", "SCALARS G_capped double 1", "SCALARS c_Cl double 1",
                            "SCALARS c_K double 1"}) {
      CHECK_MESSAGE(text.find(key) != std::string::npos, key);
    }
    const auto dir = std::filesystem::temp_directory_path() / "smpnp_test_outputs";
    std::filesystem::remove_all(dir);
    cfg.current_planes = {0, 20};
    write_outputs(dir, cfg, *p, r);
    for (const char* f : {"solution.vtk", "profiles.csv", "convergence.csv", "summary.txt"}) {
      CHECK_MESSAGE(std::filesystem::exists(dir / f), f);
    }
    std::ifstream s(dir / "summary.txt");
    std::string all((std::istreambuf_iterator<char>(s)), {});
    CHECK(all.find("current_z0 = ") != std::string::npos);
    std::filesystem::remove_all(dir);
  }
}
