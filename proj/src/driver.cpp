#include "smpnp/driver.hpp"

#include "smpnp/fem.hpp"
#include "smpnp/transport.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

namespace smpnp {

AtomicCharges ring_atoms(const RingCharges& ring, const ChannelGeometry* grid)
{
  AtomicCharges atoms;
  if (ring.count <= 0) return atoms;
  for (double z : ring.z) {
    for (int j = 0; j < ring.count; ++j) {
      const double a = 2 * M_PI * j / ring.count;
      Vec3 p{ring.radius * std::cos(a), ring.radius * std::sin(a), z};
      if (grid != nullptr) {
        const Box& b = grid->box;
        const double lo[3] = {b.x1, b.y1, b.z1};
        const double hi[3] = {b.x2, b.y2, b.z2};
        for (int d = 0; d < 3; ++d) {
          const double h = (hi[d] - lo[d]) / grid->resolution;
          const int cell = std::clamp(static_cast<int>(std::floor((p[d] - lo[d]) / h)), 0, grid->resolution - 1);
          p[d] = lo[d] + (cell + 0.5) * h;
        }
      }
      atoms.positions.push_back(p);
      atoms.charges.push_back(ring.charge);
    }
  }
  return atoms;
}

std::unique_ptr<Problem> make_problem(const RunConfig& cfg)
{
  LabeledMesh mesh = cfg.mesh_file ? load_mesh(*cfg.mesh_file) : synth_channel_mesh(cfg.geometry);
  AtomicCharges atoms;
  if (cfg.atoms_file) atoms = load_atoms(*cfg.atoms_file);
  const auto ring = ring_atoms(cfg.ring, cfg.mesh_file ? nullptr : &cfg.geometry);
  atoms.positions.insert(atoms.positions.end(), ring.positions.begin(), ring.positions.end());
  atoms.charges.insert(atoms.charges.end(), ring.charges.begin(), ring.charges.end());
  atoms.smear_width = cfg.smear_width;
  return make_problem(std::move(mesh), std::move(atoms), cfg.species, cfg.constants, cfg.linear, cfg.threads,
                      cfg.membrane_z1, cfg.membrane_z2);
}

std::unique_ptr<Problem> make_problem(LabeledMesh mesh, AtomicCharges atoms, std::vector<IonSpecies> species,
                                      const ModelConstants& k, const LinearSolveSpec& linear, int threads,
                                      std::optional<double> membrane_z1, std::optional<double> membrane_z2)
{
  k.validate();
  linear.validate();
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  auto p = std::make_unique<Problem>();
  p->mesh = std::move(mesh);
  validate(p->mesh);
  p->sub = extract_solvent_submesh(p->mesh);
  validate_atoms(p->mesh, atoms);
  p->atoms = std::move(atoms);
  p->species = SpeciesSet(std::move(species), k.gamma);
  p->constants = k;
  p->linear = linear;
  p->threads = threads;

  const double z1 = membrane_z1.value_or(p->mesh.membrane_z1);
  const double z2 = membrane_z2.value_or(p->mesh.membrane_z2);
  p->profile = {z1, z2, k.eta, k.theta, std::isfinite(z1) && std::isfinite(z2)};
  if (p->profile.has_membrane && !(z1 < z2)) throw std::invalid_argument("membrane_z1 must be below membrane_z2");
  p->profile.validate();
  return p;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double damp(SpeciesFields& x, const SpeciesFields& target, double omega, TetMeshView mesh)
{
  double d = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::vector<double> next(x[i].size());
    for (std::size_t m = 0; m < next.size(); ++m) next[m] = x[i][m] + omega * (target[i][m] - x[i][m]);
    d = std::max(d, l2_diff(mesh, next, x[i]));
    x[i] = std::move(next);
  }
  return d;
}

}  // namespace

RunResult solve(const Problem& p, const IterationObserver& observer)
{
  const auto start = Clock::now();
  const auto& k = p.constants;
  const auto& s = p.species;
  const std::size_t n = s.size();
  const std::size_t ns = p.sub.num_vertices();
  RunResult r;

  Electrostatics es(p.mesh, p.sub, k, p.linear);
  r.G = eval_G(p.atoms, k, p.mesh.vertices);
  r.psi = es.solve_psi(p.atoms);
  r.w.resize(r.G.size());
  for (std::size_t m = 0; m < r.w.size(); ++m) r.w[m] = r.G[m] + r.psi[m];
  spdlog::info("Psi solved: {} nodes, {} solvent nodes, {} atoms", p.mesh.num_vertices(), ns, p.atoms.size());

  const ChargeOperator ops{
      [&](const SpeciesFields& c) { return es.solve_phi_tilde(s, c); },
      [&](std::span<const double> kappa, std::span<const double> res) { return es.solve_linearized(kappa, res); }};
  auto init = solve_smpbic(p.mesh, p.sub, r.w, s, k, ops, p.threads);
  r.smpbic_iterations = init.iterations;
  r.smpbic_converged = init.converged;
  if (!init.converged) {
    spdlog::warn("equilibrium initializer stopped after {} sweeps (dq = {:.3e}, dxi = {:.3e})", init.iterations,
                 init.q_diff, init.xi_diff);
  } else {
    spdlog::info("equilibrium initializer converged in {} sweeps", init.iterations);
  }

  const auto bulk = bulk_slotboom(s);
  SpeciesFields cbar(n);
  for (std::size_t i = 0; i < n; ++i) cbar[i].assign(ns, bulk[i]);
  SpeciesFields c = std::move(init.xi);
  std::vector<double> phit = std::move(init.q);

  const TransportSolver transport(p.sub, s, k, p.profile, p.linear);
  const NewtonOptions nopt{k.newton_tol, k.newton_max, 30};

  r.min_concentration = std::numeric_limits<double>::infinity();
  r.min_water_fraction = std::numeric_limits<double>::infinity();
  auto monitor = [&](const SpeciesFields& x) {
    std::array<double, kMaxSpecies> cm{};
    for (std::size_t m = 0; m < ns; ++m) {
      for (std::size_t i = 0; i < n; ++i) {
        cm[i] = x[i][m];
        r.min_concentration = std::min(r.min_concentration, cm[i]);
      }
      r.min_water_fraction = std::min(r.min_water_fraction, s.water_fraction(std::span<const double>(cm.data(), n)));
    }
  };
  monitor(c);

  std::vector<double> u(p.mesh.num_vertices());
  for (int it = 1; it <= k.max_outer; ++it) {
    IterationRecord rec;
    rec.k = it;
    try {
      for (std::size_t m = 0; m < u.size(); ++m) u[m] = r.w[m] + phit[m];
      const auto us = restrict_field(p.sub, u);

      auto t0 = Clock::now();
      const auto pbar = transport.solve_all(us, c, p.threads);
      rec.d_cbar = damp(cbar, pbar, k.omega, p.sub.view());
      rec.t_block1 = seconds_since(t0);

      t0 = Clock::now();
      Block2Stats stats;
      const auto pc = block2_update(s, cbar, us, c, k.exp_cap, nopt, &stats, p.threads);
      rec.d_c = damp(c, pc, k.omega, p.sub.view());
      rec.newton_max_iterations = stats.max_iterations;
      rec.t_block2 = seconds_since(t0);
      monitor(c);

      t0 = Clock::now();
      const auto q = es.solve_phi_tilde(s, c);
      std::vector<double> next(phit.size());
      for (std::size_t m = 0; m < next.size(); ++m) next[m] = phit[m] + k.omega * (q[m] - phit[m]);
      rec.d_phi = l2_diff(p.mesh.view(), next, phit);
      phit = std::move(next);
      rec.t_block3 = seconds_since(t0);
    } catch (const std::exception& e) {
      throw std::runtime_error("outer iteration " + std::to_string(it) + ": " + e.what());
    }

    r.history.push_back(rec);
    r.iterations = it;
    spdlog::debug("iteration {}: dPhi = {:.3e}, dcbar = {:.3e}, dc = {:.3e}", it, rec.d_phi, rec.d_cbar, rec.d_c);
    if (observer) observer({it, cbar, c, phit});
    if (rec.d_phi < k.outer_tol && rec.d_cbar < k.outer_tol && rec.d_c < k.outer_tol) {
      r.converged = true;
      break;
    }
  }

  r.u.resize(r.w.size());
  for (std::size_t m = 0; m < r.u.size(); ++m) r.u[m] = r.w[m] + phit[m];
  r.phi_tilde = std::move(phit);
  r.c = std::move(c);
  r.cbar = std::move(cbar);
  r.wall_time = seconds_since(start);
  if (r.converged) {
    r.message = "converged in " + std::to_string(r.iterations) + " iterations";
  } else {
    r.message = "no convergence after " + std::to_string(r.iterations) + " iterations";
  }
  spdlog::info("{}", r.message);
  return r;
}

}  // namespace smpnp
