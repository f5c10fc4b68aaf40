#pragma once

#include "smpnp/mesh.hpp"

#include <random>

namespace testing_support {

/// All-solvent structured cube [0, L]³ with n cells per direction.
inline smpnp::LabeledMesh unit_cube(int n, double L = 1)
{
  smpnp::ChannelGeometry g;
  g.box = {0, L, 0, L, 0, L};
  g.membrane_z1 = 0.25 * L;
  g.membrane_z2 = 0.75 * L;
  g.protein_z1 = 0.25 * L;
  g.protein_z2 = 0.75 * L;
  g.pore_radius = 0;
  g.shell_radius = 0;
  g.resolution = n;
  auto m = smpnp::synth_channel_mesh(g);
  for (auto& r : m.regions) r = smpnp::Region::Solvent;
  std::vector<smpnp::Tri> facets;
  std::vector<smpnp::FacetLabel> labels;
  for (std::size_t f = 0; f < m.facets.size(); ++f) {
    if (m.labels[f] != smpnp::FacetLabel::Dirichlet && m.labels[f] != smpnp::FacetLabel::Neumann) continue;
    facets.push_back(m.facets[f]);
    labels.push_back(m.labels[f]);
  }
  m.facets = std::move(facets);
  m.labels = std::move(labels);
  smpnp::update_extents(m);
  smpnp::validate(m);
  return m;
}

/// Membrane slab spanning the full cross-section, no protein.
inline smpnp::ChannelGeometry slab_geometry(int n)
{
  smpnp::ChannelGeometry g;
  g.box = {-10, 10, -10, 10, -20, 20};
  g.membrane_z1 = -5;
  g.membrane_z2 = 5;
  g.protein_z1 = -8;
  g.protein_z2 = 8;
  g.pore_radius = 0;
  g.shell_radius = 0;
  g.resolution = n;
  return g;
}

inline std::vector<double> random_vector(std::mt19937& rng, std::size_t n, double lo = -1, double hi = 1)
{
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

}  // namespace testing_support
