#include "smpnp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smpnp {

namespace {

void check_geometry(const ChannelGeometry& g)
{
  const Box& b = g.box;
  if (!(b.x1 < b.x2 && b.y1 < b.y2 && b.z1 < b.z2)) throw MeshError("channel geometry: empty box");
  if (!(b.z1 < g.membrane_z1 && g.membrane_z1 < g.membrane_z2 && g.membrane_z2 < b.z2)) {
    throw MeshError("channel geometry: membrane planes must satisfy z1 < Z1 < Z2 < z2");
  }
  if (g.pore_radius < 0 || g.shell_radius < 0) throw MeshError("channel geometry: negative radius");
  if (g.shell_radius > 0 && g.pore_radius >= g.shell_radius) {
    throw MeshError("channel geometry: degenerate protein shell (pore radius >= shell radius)");
  }
  if (g.shell_radius == 0 && g.pore_radius > 0) {
    throw MeshError("channel geometry: pore radius requires a protein shell");
  }
  if (g.shell_radius > 0 && !(g.protein_z1 < g.protein_z2)) {
    throw MeshError("channel geometry: protein z-extent is empty");
  }
  if (g.resolution < 2) throw MeshError("channel geometry: resolution must be at least 2 cells per direction");
}

// Kuhn simplices of the unit cube: one per axis permutation, all sharing
// the main diagonal, which makes the split conforming across cells.
constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
constexpr bool kOddPerm[6] = {false, true, true, false, false, true};

}  // namespace

Region channel_region(const ChannelGeometry& g, const Vec3& p)
{
  const double r = std::hypot(p[0], p[1]);
  const double z = p[2];
  if (g.shell_radius > 0 && g.protein_z1 < z && z < g.protein_z2 && g.pore_radius < r && r < g.shell_radius) {
    return Region::Protein;
  }
  if (g.membrane_z1 < z && z < g.membrane_z2 && (g.shell_radius == 0 || r > g.shell_radius)) {
    return Region::Membrane;
  }
  return Region::Solvent;
}

LabeledMesh synth_channel_mesh(const ChannelGeometry& g)
{
  check_geometry(g);
  const int n = g.resolution;
  const int np = n + 1;
  const Box& b = g.box;

  LabeledMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(np) * np * np);
  for (int k = 0; k < np; ++k) {
    for (int j = 0; j < np; ++j) {
      for (int i = 0; i < np; ++i) {
        // Exact endpoints keep boundary facets exactly on the box planes.
        const double x = i == n ? b.x2 : b.x1 + (b.x2 - b.x1) * i / n;
        const double y = j == n ? b.y2 : b.y1 + (b.y2 - b.y1) * j / n;
        const double z = k == n ? b.z2 : b.z1 + (b.z2 - b.z1) * k / n;
        mesh.vertices.push_back({x, y, z});
      }
    }
  }
  auto vid = [np](int i, int j, int k) { return i + np * (j + np * k); };

  mesh.tets.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        for (int p = 0; p < 6; ++p) {
          int c[3] = {i, j, k};
          Tet tet{};
          tet[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[kPerms[p][s]];
            tet[s + 1] = vid(c[0], c[1], c[2]);
          }
          if (kOddPerm[p]) std::swap(tet[2], tet[3]);
          mesh.tets.push_back(tet);

          Vec3 centroid{0, 0, 0};
          for (int v : tet) centroid = centroid + 0.25 * mesh.vertices[v];
          mesh.regions.push_back(channel_region(g, centroid));
        }
      }
    }
  }

  const FaceAdjacency adj = build_face_adjacency(mesh.tets);
  constexpr int kFaceVerts[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
  for (const auto& face : adj.faces) {
    const auto& t0 = mesh.tets[face.tet0];
    const Tri tri{t0[kFaceVerts[face.local0][0]], t0[kFaceVerts[face.local0][1]], t0[kFaceVerts[face.local0][2]]};
    if (face.tet1 < 0) {
      const bool top_or_bottom = std::all_of(tri.begin(), tri.end(), [&](int v) {
        return mesh.vertices[v][2] == b.z1;
      }) || std::all_of(tri.begin(), tri.end(), [&](int v) { return mesh.vertices[v][2] == b.z2; });
      mesh.facets.push_back(tri);
      mesh.labels.push_back(top_or_bottom ? FacetLabel::Dirichlet : FacetLabel::Neumann);
      continue;
    }
    const Region a = mesh.regions[face.tet0];
    const Region c = mesh.regions[face.tet1];
    if (a == c) continue;
    auto has = [&](Region r) { return a == r || c == r; };
    FacetLabel label = FacetLabel::ProteinMembrane;
    if (has(Region::Solvent)) {
      label = has(Region::Protein) ? FacetLabel::ProteinSolvent : FacetLabel::MembraneSolvent;
    }
    mesh.facets.push_back(tri);
    mesh.labels.push_back(label);
  }

  mesh.box = b;
  update_extents(mesh);
  validate(mesh);
  return mesh;
}

}  // namespace smpnp
