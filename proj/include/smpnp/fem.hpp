#pragma once

#include "smpnp/mesh.hpp"
#include "smpnp/sparse.hpp"

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace smpnp {

/// Volume and constant basis-function gradients of a P1 tetrahedron.
struct ElementGeometry {
  double volume = 0;
  std::array<Vec3, 4> grad{};
};

/// Throws MeshError for a degenerate or inverted element.
ElementGeometry p1_element(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d);

/// ∫ ∇φa·∇φb over the element.
std::array<std::array<double, 4>, 4> local_stiffness(const ElementGeometry& e);

/// Caches element geometry and the CSR slot of every local entry so that
/// repeated assembly with new coefficients is a single pass.
class StiffnessAssembler {
 public:
  explicit StiffnessAssembler(TetMeshView mesh);

  /// Σ_T w_T ∫_T ∇φi·∇φj. Throws std::invalid_argument on non-finite weights.
  SparseMatrix assemble(std::span<const double> tet_weights) const;

  std::size_t num_vertices() const { return static_cast<std::size_t>(pattern_.size()); }
  std::span<const ElementGeometry> elements() const { return elements_; }

 private:
  TetMeshView mesh_;
  SparseMatrix pattern_;
  std::vector<ElementGeometry> elements_;
  std::vector<std::array<int, 16>> slots_;
};

SparseMatrix assemble_weighted_stiffness(TetMeshView mesh, std::span<const double> tet_weights);

/// Per-tet value as the mean of the four vertex values.
std::vector<double> tet_weights_from_nodal(TetMeshView mesh, std::span<const double> nodal);

/// Per-tet weight taken from the tet's region.
std::vector<double> region_weights(const LabeledMesh& mesh, double solvent, double protein, double membrane);

struct DirichletSet {
  std::vector<int> nodes;
  std::vector<double> values;

  /// Throws std::invalid_argument for out-of-range or repeated nodes.
  void validate(std::size_t num_vertices) const;
};

/// Sorted unique vertices of the ΓD facets.
std::vector<int> dirichlet_nodes(const LabeledMesh& mesh);
std::vector<int> dirichlet_nodes(const SolventSubmesh& sub);

/// ∫ ρ φi over the tets (all of them, or those of one region), with ρ a P1
/// field integrated exactly through the element mass matrix. Entries at the
/// nodes of `test_space` (if given) are zeroed.
std::vector<double> assemble_load_volume(TetMeshView mesh, std::span<const double> density,
                                         const DirichletSet* test_space = nullptr);
std::vector<double> assemble_load_volume(const LabeledMesh& mesh, Region region, std::span<const double> density,
                                         const DirichletSet* test_space = nullptr);

/// ∫ f φi with a tet rule of the given degree.
std::vector<double> assemble_load_function(TetMeshView mesh, const std::function<double(const Vec3&)>& f,
                                           int degree);

/// ∫ σ φi over the facets carrying `label`. Throws std::invalid_argument if
/// no facet carries it.
std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label, double density);
/// One density value per labeled facet, in facet order.
std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label,
                                          std::span<const double> facet_density);
/// Density given as a function of position, integrated with a triangle rule.
std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label,
                                          const std::function<double(const Vec3&)>& density, int degree);

/// Replaces constrained rows by identity rows and moves the constrained
/// columns to the right-hand side. The sparsity pattern is kept, with
/// explicit zeros, so the result stays symmetric.
void apply_dirichlet(SparseMatrix& a, std::vector<double>& b, const DirichletSet& d);

/// Right-hand side that `apply_dirichlet` would produce, computed from the
/// unconstrained matrix without modifying it.
void lift_dirichlet(const SparseMatrix& unconstrained, std::vector<double>& b, const DirichletSet& d);

/// √(∫ f²) with the exact P1 mass matrix.
double l2_norm(TetMeshView mesh, std::span<const double> f);
double l2_diff(TetMeshView mesh, std::span<const double> f, std::span<const double> g);

/// ∫ f over the mesh.
double integrate(TetMeshView mesh, std::span<const double> f);

/// Barycentric interpolation of a P1 field inside one tet.
double interpolate(TetMeshView mesh, std::span<const double> f, std::size_t tet, const std::array<double, 4>& bary);

}  // namespace smpnp
