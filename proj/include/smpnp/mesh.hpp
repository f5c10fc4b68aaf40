#pragma once

#include "smpnp/geometry.hpp"

#include <array>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smpnp {

using Tet = std::array<int, 4>;
using Tri = std::array<int, 3>;

// Numeric values are the tags used by the mesh file format.
enum class Region : int { Solvent = 1, Protein = 2, Membrane = 3 };

enum class FacetLabel : int {
  ProteinSolvent = 1,   // Γp
  MembraneSolvent = 2,  // Γm
  ProteinMembrane = 3,  // Γpm
  Dirichlet = 4,        // ΓD, z = z1 or z = z2
  Neumann = 5,          // ΓN, the four side planes
};

const char* to_string(Region r);
const char* to_string(FacetLabel l);

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Box {
  double x1 = 0, x2 = 0, y1 = 0, y2 = 0, z1 = 0, z2 = 0;

  double diagonal() const;
};

/// Vertex and tetrahedron arrays of a P1 mesh, without ownership.
struct TetMeshView {
  std::span<const Vec3> vertices;
  std::span<const Tet> tets;

  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_tets() const { return tets.size(); }
};

/// Tetrahedral partition of the box into solvent, protein and membrane
/// regions, with labeled interface and boundary triangles.
///
/// Immutable after construction; `validate` checks every structural
/// invariant (orientation, facet placement, facet/region consistency).
struct LabeledMesh {
  std::vector<Vec3> vertices;
  std::vector<Tet> tets;
  std::vector<Region> regions;
  std::vector<Tri> facets;
  std::vector<FacetLabel> labels;
  Box box;
  // Membrane planes; NaN when the mesh has no membrane tets.
  double membrane_z1 = 0;
  double membrane_z2 = 0;

  TetMeshView view() const { return {vertices, tets}; }
  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_tets() const { return tets.size(); }

  std::size_t count(Region r) const;
  std::size_t count(FacetLabel l) const;
};

/// Recomputes `box` from the vertex bounding box and the membrane planes
/// from the z-range of the membrane tets.
void update_extents(LabeledMesh& mesh);

/// Throws MeshError naming the first failed check.
void validate(const LabeledMesh& mesh);

/// Unique faces of a tet list with the (one or two) tets sharing each face.
struct FaceAdjacency {
  struct Face {
    Tri key;  // sorted vertex ids
    int tet0 = -1;
    int tet1 = -1;  // -1 for a boundary face
    int local0 = -1;  // local face index in tet0 (face opposite local vertex)
  };
  std::vector<Face> faces;
};

/// Throws MeshError when a face is shared by more than two tets.
FaceAdjacency build_face_adjacency(std::span<const Tet> tets);

// ---------------------------------------------------------------------------
// File I/O: `smpnp-mesh 1` plain text format.

LabeledMesh read_mesh(std::istream& in);
void write_mesh(std::ostream& out, const LabeledMesh& mesh);
LabeledMesh load_mesh(const std::filesystem::path& path);
void save_mesh(const LabeledMesh& mesh, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Structured channel geometry.

struct ChannelGeometry {
  Box box{-20, 20, -20, 20, -30, 30};
  double membrane_z1 = -10;
  double membrane_z2 = 10;
  // Protein z-extent; the shell occupies protein_z1 < z < protein_z2.
  double protein_z1 = -16;
  double protein_z2 = 16;
  double pore_radius = 5;
  double shell_radius = 12;
  int resolution = 12;  // cells per direction
};

/// Kuhn split of a structured hex grid (6 tets per cell) with regions
/// assigned from tet centroids and facets labeled from tet adjacency.
LabeledMesh synth_channel_mesh(const ChannelGeometry& g);

/// Region of a point for the structured channel; points exactly on an
/// interface resolve to Solvent.
Region channel_region(const ChannelGeometry& g, const Vec3& p);

// ---------------------------------------------------------------------------
// Solvent submesh.

enum class SolventBoundary : int {
  Interface = 1,  // Γp ∪ Γm
  Dirichlet = 2,  // ΓD ∩ ∂Ds
  Neumann = 3,    // ΓN ∩ ∂Ds
};

struct SolventSubmesh {
  const LabeledMesh* parent = nullptr;
  std::vector<int> vertex_map;       // local -> parent
  std::vector<int> parent_to_local;  // parent -> local, -1 outside Ds
  std::vector<Vec3> vertices;        // copies of the parent coordinates
  std::vector<Tet> tets;             // local indices
  std::vector<int> parent_tet;
  std::vector<Tri> facets;           // local indices
  std::vector<SolventBoundary> labels;

  TetMeshView view() const { return {vertices, tets}; }
  std::size_t num_vertices() const { return vertices.size(); }
  std::size_t num_tets() const { return tets.size(); }
};

SolventSubmesh extract_solvent_submesh(const LabeledMesh& mesh);

/// Copies parent nodal values at the solvent nodes.
std::vector<double> restrict_field(const SolventSubmesh& sub, std::span<const double> omega_field);

/// Copies solvent values to their parent nodes; zero at every other node.
std::vector<double> prolong_field(const SolventSubmesh& sub, std::span<const double> solvent_field);

}  // namespace smpnp
