#pragma once

#include "smpnp/driver.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace smpnp {

/// Legacy ASCII unstructured grid with point data u, Psi, G_capped and one
/// concentration per species (−1 outside the solvent).
void write_vtk(std::ostream& out, const Problem& p, const RunResult& r);

struct ProfileRow {
  double z_center = 0;
  std::size_t count = 0;
  std::vector<double> mean;  // empty when count == 0
};

/// Means of each concentration over solvent nodes inside the cylinder
/// x² + y² ≤ R² (about the box axis), binned in z over the box.
std::vector<ProfileRow> compute_profiles(const Problem& p, const SpeciesFields& c, int bins,
                                         std::optional<double> mask_radius);

/// Mean of each species over all masked solvent nodes with z in [z_lo, z_hi].
std::vector<double> pore_average(const Problem& p, const SpeciesFields& c, double mask_radius, double z_lo,
                                 double z_hi);

void write_profiles(std::ostream& out, const Problem& p, const std::vector<ProfileRow>& rows);
void write_convergence(std::ostream& out, const RunResult& r);
void write_summary(std::ostream& out, const Problem& p, const RunResult& r, std::span<const double> planes = {},
                   std::span<const double> currents = {});

/// Writes solution.vtk, profiles.csv, convergence.csv and summary.txt.
void write_outputs(const std::filesystem::path& dir, const RunConfig& cfg, const Problem& p, const RunResult& r);

}  // namespace smpnp
