#include "helpers.hpp"

#include "smpnp/driver.hpp"
#include "smpnp/transport.hpp"

#include <doctest.h>

#include <cmath>

using namespace smpnp;

namespace {

const DiffusionProfile kNoMembrane{0, 0, 2, 0.055, false};

SpeciesFields constant_fields(const SpeciesSet& s, std::size_t n)
{
  SpeciesFields c(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) c[i].assign(n, s[i].c_b);
  return c;
}

std::vector<double> linear_u(const SolventSubmesh& sub, double ub, double ut)
{
  double z1 = 1e300, z2 = -1e300;
  for (const auto& v : sub.vertices) {
    z1 = std::min(z1, v[2]);
    z2 = std::max(z2, v[2]);
  }
  std::vector<double> u(sub.num_vertices());
  for (std::size_t m = 0; m < u.size(); ++m) u[m] = ub + (ut - ub) * (sub.vertices[m][2] - z1) / (z2 - z1);
  return u;
}

}  // namespace

TEST_CASE("transport: section area")
{
  const std::array<Vec3, 4> ref{Vec3{0, 0, 0}, Vec3{1, 0, 0}, Vec3{0, 1, 0}, Vec3{0, 0, 1}};
  CHECK(section_area(ref, 0.5) == doctest::Approx(0.125));
  CHECK(section_area(ref, 0.0) == doctest::Approx(0.5));
  CHECK(section_area(ref, 1.5) == 0);
  // Tets of a structured cube cut a full unit square at any interior plane.
  const auto m = testing_support::unit_cube(2);
  for (double z0 : {0.1, 0.25, 0.5, 0.8}) {
    double area = 0;
    for (const auto& t : m.tets) {
      const std::array<Vec3, 4> p{m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]};
      double lo = 1e9, hi = -1e9;
      for (const auto& x : p) {
        lo = std::min(lo, x[2]);
        hi = std::max(hi, x[2]);
      }
      if (lo <= z0 && z0 < hi) area += section_area(p, z0);
    }
    CHECK(area == doctest::Approx(1).epsilon(1e-12));
  }
}

TEST_CASE("transport: diffusion fields follow the profile")
{
  ChannelGeometry g;
  g.resolution = 8;
  const auto mesh = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(mesh);
  const SpeciesSet s(paper_species(), 6.022e-4);
  const DiffusionProfile p{g.membrane_z1, g.membrane_z2, 2, 0.055, true};
  const auto d = diffusion_fields(sub, s, p);
  for (std::size_t i = 0; i < 4; ++i) {
    for (std::size_t m = 0; m < sub.num_vertices(); ++m) CHECK(d[i][m] == p.at(s[i].D_b, sub.vertices[m][2]));
  }
}

TEST_CASE("transport: constant boundary data gives a constant solution")
{
  ChannelGeometry g;
  g.resolution = 8;
  const auto mesh = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(mesh);
  const ModelConstants k;
  const SpeciesSet s(paper_species(), k.gamma);
  const DiffusionProfile p{g.membrane_z1, g.membrane_z2, k.eta, k.theta, true};
  std::mt19937 rng(1);
  const auto u = testing_support::random_vector(rng, sub.num_vertices(), -1, 1);
  const auto c = constant_fields(s, sub.num_vertices());
  const auto bulk = bulk_slotboom(s);
  for (auto method : {SolveMethod::Direct, SolveMethod::KrylovILU0}) {
    const TransportSolver ts(sub, s, k, p, {method});
    const auto all = ts.solve_all(u, c, 2);
    for (std::size_t i = 0; i < 4; ++i) {
      for (double v : all[i]) CHECK(v == doctest::Approx(bulk[i]).epsilon(1e-8));
    }
  }
}

TEST_CASE("transport: pure Laplace between different boundary values is linear in z")
{
  const auto mesh = testing_support::unit_cube(4, 10);
  const auto sub = extract_solvent_submesh(mesh);
  ModelConstants k;
  k.u_b = 1;
  k.u_t = -0.5;
  const SpeciesSet s({{"Na", 1, 0, 0.1, 0.133}}, k.gamma);
  const TransportSolver ts(sub, s, k, kNoMembrane, {SolveMethod::Direct});
  const std::vector<double> u(sub.num_vertices(), 0.0);
  const auto c = constant_fields(s, sub.num_vertices());
  const auto cbar = ts.solve(0, u, c);
  const double gb = 0.1 * std::exp(1.0), gt = 0.1 * std::exp(-0.5);
  for (std::size_t m = 0; m < cbar.size(); ++m) {
    const double z = sub.vertices[m][2];
    CHECK(cbar[m] == doctest::Approx(gb + (gt - gb) * z / 10).epsilon(1e-10));
  }

  // Slab flux: constant −D (ḡ_t − ḡ_b)/L, and the current through every plane is Z·J·area.
  const auto d = diffusion_fields(sub, s, kNoMembrane);
  const SpeciesFields cb{cbar};
  const auto flux = compute_flux(sub, s, 0, cb, cb, u, d, k.exp_cap);
  const double jz = -0.133 * (gt - gb) / 10;
  for (const auto& j : flux.transformed) {
    CHECK(j[2] == doctest::Approx(jz).epsilon(1e-9));
    CHECK(std::abs(j[0]) < 1e-12);
  }
  CHECK(flux.max_difference < 1e-12);  // v = 0, u = 0: J = −D ∇c
  const auto current = cross_section_current(sub, s, {flux.transformed}, std::vector<double>{1, 3.3, 5, 9.9});
  for (double i : current) CHECK(i == doctest::Approx(jz * 100).epsilon(0.02));
  CHECK_THROWS_AS(cross_section_current(sub, s, {flux.transformed}, std::vector<double>{11}), std::invalid_argument);
}

TEST_CASE("transport: equilibrium fluxes vanish")
{
  ChannelGeometry g;
  g.resolution = 8;
  const auto mesh = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(mesh);
  const ModelConstants k;
  const SpeciesSet s(paper_species(), k.gamma);
  const DiffusionProfile p{g.membrane_z1, g.membrane_z2, k.eta, k.theta, true};

  // Equilibrium concentrations for a smooth potential: node systems with bulk targets.
  std::vector<double> u(sub.num_vertices());
  for (std::size_t m = 0; m < u.size(); ++m) {
    const auto& x = sub.vertices[m];
    u[m] = 0.8 * std::exp(-(x[0] * x[0] + x[1] * x[1]) / 50) * std::cos(x[2] / 10);
  }
  const auto bulk = bulk_slotboom(s);
  SpeciesFields targets(4), init(4);
  for (int i = 0; i < 4; ++i) {
    targets[i].assign(u.size(), bulk[i]);
    init[i].assign(u.size(), 0.1);
  }
  const auto c = block2_update(s, targets, u, init, k.exp_cap);
  const auto d = diffusion_fields(sub, s, p);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto flux = compute_flux(sub, s, i, c, targets, u, d, k.exp_cap);
    const double scale = s[i].D_b * s[i].c_b / 40;
    for (const auto& j : flux.transformed) CHECK(norm(j) <= 1e-8 * scale);
  }
  // The Slotboom variables computed from c are the bulk constants.
  for (std::size_t m = 0; m < u.size(); m += 11) {
    std::vector<double> cm(4);
    for (int i = 0; i < 4; ++i) cm[i] = c[i][m];
    const auto cb = slotboom_forward(s, u[m], cm, k.exp_cap);
    for (int i = 0; i < 4; ++i) CHECK(cb[i] == doctest::Approx(bulk[i]).epsilon(1e-8));
  }
}

TEST_CASE("transport: the current changes sign with the applied potential")
{
  const auto mesh = testing_support::unit_cube(5, 20);
  const auto sub = extract_solvent_submesh(mesh);
  const SpeciesSet s(paper_species(), 6.022e-4);
  const auto d = diffusion_fields(sub, s, kNoMembrane);
  std::vector<double> currents;
  for (double sign : {1.0, -1.0}) {
    ModelConstants k;
    k.u_b = sign;
    k.u_t = 0;
    const TransportSolver ts(sub, s, k, kNoMembrane, {SolveMethod::Direct});
    const auto u = linear_u(sub, k.u_b, k.u_t);
    const auto c = constant_fields(s, sub.num_vertices());
    const auto cbar = ts.solve_all(u, c);
    std::vector<std::vector<Vec3>> flux;
    for (std::size_t i = 0; i < 4; ++i) flux.push_back(compute_flux(sub, s, i, c, cbar, u, d, k.exp_cap).transformed);
    const auto cur = cross_section_current(sub, s, flux, std::vector<double>{5, 10, 15});
    // Cations flow down the potential: positive current along +z when u_b > u_t.
    for (double i : cur) CHECK(i * sign > 0);
    currents.push_back(cur[1]);
  }
  CHECK(currents[0] * currents[1] < 0);
}

TEST_CASE("transport: Krylov and Direct agree on a driven channel")
{
  ChannelGeometry g;
  g.resolution = 8;
  const auto mesh = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(mesh);
  ModelConstants k;
  k.u_b = 2;
  const SpeciesSet s(paper_species(), k.gamma);
  const DiffusionProfile p{g.membrane_z1, g.membrane_z2, k.eta, k.theta, true};
  const auto u = linear_u(sub, 2, 0);
  const auto c = constant_fields(s, sub.num_vertices());
  const TransportSolver direct(sub, s, k, p, {SolveMethod::Direct});
  const TransportSolver krylov(sub, s, k, p, {SolveMethod::KrylovILU0, 1e-12, 1e-12});
  for (std::size_t i = 0; i < 4; ++i) {
    const auto a = direct.solve(i, u, c);
    const auto b = krylov.solve(i, u, c);
    double diff = 0, ref = 0;
    for (std::size_t m = 0; m < a.size(); ++m) {
      diff = std::max(diff, std::abs(a[m] - b[m]));
      ref = std::max(ref, std::abs(a[m]));
    }
    CHECK(diff <= 1e-6 * ref);
    const auto gb = direct.boundary_values(i);
    for (std::size_t k2 = 0; k2 < gb.size(); ++k2) CHECK(a[direct.dirichlet_nodes()[k2]] == gb[k2]);
    const auto w = direct.tet_coefficients(i, u, c);
    for (double x : w) CHECK(x > 0);
  }
}
