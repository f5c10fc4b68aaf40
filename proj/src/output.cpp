#include "smpnp/output.hpp"

#include "smpnp/transport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace smpnp {

void write_vtk(std::ostream& out, const Problem& p, const RunResult& r)
{
  const auto& mesh = p.mesh;
  const std::size_t nv = mesh.num_vertices();
  out << "# vtk DataFile Version 3.0\n"
      << "smpnp solution\n"
      << "ASCII\n"
      << "DATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(10);
  out << "POINTS " << nv << " double\n";
  for (const auto& v : mesh.vertices) out << v[0] << " " << v[1] << " " << v[2] << "\n";
  out << "CELLS " << mesh.num_tets() << " " << 5 * mesh.num_tets() << "\n";
  for (const auto& t : mesh.tets) out << "4 " << t[0] << " " << t[1] << " " << t[2] << " " << t[3] << "\n";
  out << "CELL_TYPES " << mesh.num_tets() << "\n";
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) out << "10\n";

  out << "CELL_DATA " << mesh.num_tets() << "\n"
      << "SCALARS region int 1\nLOOKUP_TABLE default\n";
  for (auto reg : mesh.regions) out << static_cast<int>(reg) << "\n";

  auto scalars = [&](const std::string& name, auto value) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t m = 0; m < nv; ++m) out << value(m) << "\n";
  };
  out << "POINT_DATA " << nv << "\n";
  scalars("u", [&](std::size_t m) { return r.u[m]; });
  scalars("Psi", [&](std::size_t m) { return r.psi[m]; });
  const double cap = p.constants.exp_cap;
  scalars("G_capped", [&](std::size_t m) { return std::clamp(r.G[m], -cap, cap); });
  for (std::size_t i = 0; i < p.species.size(); ++i) {
    scalars("c_" + p.species[i].name, [&](std::size_t m) {
      const int local = p.sub.parent_to_local[m];
      return local < 0 ? -1.0 : r.c[i][local];
    });
  }
}

namespace {

std::pair<double, double> axis(const Box& b) { return {0.5 * (b.x1 + b.x2), 0.5 * (b.y1 + b.y2)}; }

}  // namespace

std::vector<ProfileRow> compute_profiles(const Problem& p, const SpeciesFields& c, int bins,
                                         std::optional<double> mask_radius)
{
  if (bins < 1) throw std::invalid_argument("profiles: bin count must be >= 1");
  const Box& box = p.mesh.box;
  const double radius = mask_radius.value_or(box.diagonal());
  const auto [cx, cy] = axis(box);
  const double h = (box.z2 - box.z1) / bins;
  const std::size_t n = p.species.size();

  std::vector<ProfileRow> rows(bins);
  std::vector<std::vector<double>> sums(bins, std::vector<double>(n, 0.0));
  for (int b = 0; b < bins; ++b) rows[b].z_center = box.z1 + (b + 0.5) * h;
  for (std::size_t m = 0; m < p.sub.num_vertices(); ++m) {
    const Vec3& x = p.sub.vertices[m];
    if ((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy) > radius * radius) continue;
    const int b = std::clamp(static_cast<int>(std::floor((x[2] - box.z1) / h)), 0, bins - 1);
    ++rows[b].count;
    for (std::size_t i = 0; i < n; ++i) sums[b][i] += c[i][m];
  }
  for (int b = 0; b < bins; ++b) {
    if (rows[b].count == 0) continue;
    rows[b].mean.resize(n);
    for (std::size_t i = 0; i < n; ++i) rows[b].mean[i] = sums[b][i] / rows[b].count;
  }
  return rows;
}

std::vector<double> pore_average(const Problem& p, const SpeciesFields& c, double mask_radius, double z_lo,
                                 double z_hi)
{
  const auto [cx, cy] = axis(p.mesh.box);
  std::vector<double> mean(p.species.size(), 0.0);
  std::size_t count = 0;
  for (std::size_t m = 0; m < p.sub.num_vertices(); ++m) {
    const Vec3& x = p.sub.vertices[m];
    if ((x[0] - cx) * (x[0] - cx) + (x[1] - cy) * (x[1] - cy) > mask_radius * mask_radius) continue;
    if (x[2] < z_lo || x[2] > z_hi) continue;
    ++count;
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += c[i][m];
  }
  if (count == 0) throw std::invalid_argument("pore_average: no solvent nodes inside the mask");
  for (double& v : mean) v /= count;
  return mean;
}

void write_profiles(std::ostream& out, const Problem& p, const std::vector<ProfileRow>& rows)
{
  out << "z_center";
  for (const auto& sp : p.species.species()) out << ",c_" << sp.name;
  out << ",count\n" << std::setprecision(10);
  for (const auto& row : rows) {
    out << row.z_center;
    for (std::size_t i = 0; i < p.species.size(); ++i) {
      out << ",";
      if (row.count > 0) out << row.mean[i];
    }
    out << "," << row.count << "\n";
  }
}

void write_convergence(std::ostream& out, const RunResult& r)
{
  out << "k,d_phi,d_cbar,d_c,t_block1,t_block2,t_block3\n" << std::setprecision(8);
  for (const auto& h : r.history) {
    out << h.k << "," << h.d_phi << "," << h.d_cbar << "," << h.d_c << "," << h.t_block1 << "," << h.t_block2 << ","
        << h.t_block3 << "\n";
  }
}

void write_summary(std::ostream& out, const Problem& p, const RunResult& r, std::span<const double> planes,
                   std::span<const double> currents)
{
  out << std::setprecision(10);
  out << "converged = " << (r.converged ? "true" : "false") << "\n";
  out << "iterations = " << r.iterations << "\n";
  out << "message = " << r.message << "\n";
  if (!r.history.empty()) {
    const auto& h = r.history.back();
    out << "final_d_phi = " << h.d_phi << "\n";
    out << "final_d_cbar = " << h.d_cbar << "\n";
    out << "final_d_c = " << h.d_c << "\n";
  }
  out << "initializer_iterations = " << r.smpbic_iterations << "\n";
  out << "initializer_converged = " << (r.smpbic_converged ? "true" : "false") << "\n";
  out << "min_concentration = " << r.min_concentration << "\n";
  out << "min_water_fraction = " << r.min_water_fraction << "\n";
  out << "vertices = " << p.mesh.num_vertices() << "\n";
  out << "tets = " << p.mesh.num_tets() << "\n";
  out << "solvent_vertices = " << p.sub.num_vertices() << "\n";
  out << "atoms = " << p.atoms.size() << "\n";
  out << "omega = " << p.constants.omega << "\n";
  out << "wall_time_s = " << r.wall_time << "\n";
  for (std::size_t k = 0; k < planes.size() && k < currents.size(); ++k) {
    out << "current_z" << planes[k] << " = " << currents[k] << "\n";
  }
}

void write_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const Problem& p, const RunResult& r)
{
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("solution.vtk");
    write_vtk(f, p, r);
  }
  {
    std::optional<double> radius = cfg.pore_mask_radius;
    if (!radius && !cfg.mesh_file && cfg.geometry.shell_radius > 0) radius = cfg.geometry.pore_radius;
    auto f = open("profiles.csv");
    write_profiles(f, p, compute_profiles(p, r.c, cfg.profile_bins, radius));
  }
  {
    auto f = open("convergence.csv");
    write_convergence(f, r);
  }
  std::vector<double> currents;
  if (!cfg.current_planes.empty()) {
    const auto diffusion = diffusion_fields(p.sub, p.species, p.profile);
    const auto us = restrict_field(p.sub, r.u);
    std::vector<std::vector<Vec3>> flux;
    for (std::size_t i = 0; i < p.species.size(); ++i) {
      flux.push_back(compute_flux(p.sub, p.species, i, r.c, r.cbar, us, diffusion, p.constants.exp_cap).transformed);
    }
    currents = cross_section_current(p.sub, p.species, flux, cfg.current_planes);
  }
  auto f = open("summary.txt");
  write_summary(f, p, r, cfg.current_planes, currents);
}

}  // namespace smpnp
