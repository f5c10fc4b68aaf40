#pragma once

#include "smpnp/fem.hpp"
#include "smpnp/mesh.hpp"
#include "smpnp/node_solver.hpp"
#include "smpnp/physics.hpp"
#include "smpnp/sparse.hpp"

#include <span>
#include <vector>

namespace smpnp {

/// Nodal diffusion coefficients D_i(z) on the solvent submesh.
SpeciesFields diffusion_fields(const SolventSubmesh& sub, const SpeciesSet& s, const DiffusionProfile& profile);

/// Transformed Nernst–Planck solves on the solvent submesh:
/// ∇·(D̂_i ∇c̄_i) = 0, c̄_i = ḡ_i on ΓD, homogeneous Neumann elsewhere.
class TransportSolver {
 public:
  TransportSolver(const SolventSubmesh& sub, const SpeciesSet& s, const ModelConstants& k,
                  const DiffusionProfile& profile, const LinearSolveSpec& spec);

  /// Per-tet D̂_i from nodal values (vertex mean). Throws std::domain_error
  /// if any entry is not positive.
  std::vector<double> tet_coefficients(std::size_t i, std::span<const double> u, const SpeciesFields& c) const;

  /// Unconstrained operator for species i.
  SparseMatrix operator_matrix(std::size_t i, std::span<const double> u, const SpeciesFields& c) const;

  /// c̄_i for one species; reads only (u, c).
  std::vector<double> solve(std::size_t i, std::span<const double> u, const SpeciesFields& c,
                            SolveStats* stats = nullptr) const;

  /// All species; independent solves, run concurrently when `workers` > 1.
  SpeciesFields solve_all(std::span<const double> u, const SpeciesFields& c, int workers = 1) const;

  std::span<const int> dirichlet_nodes() const { return dnodes_; }
  /// ḡ_i on each ΓD node of the submesh.
  std::vector<double> boundary_values(std::size_t i) const;
  const SpeciesFields& diffusion() const { return diffusion_; }

 private:
  const SolventSubmesh& sub_;
  const SpeciesSet& s_;
  ModelConstants k_;
  LinearSolveSpec spec_;
  StiffnessAssembler assembler_;
  SpeciesFields diffusion_;
  std::vector<int> dnodes_;
  std::vector<double> g_bottom_, g_top_;
  double z_mid_;
};

struct FluxField {
  std::vector<Vec3> direct;       // −D_i[∇c_i + Z_i c_i ∇u + (v_i/v₀) c_i γ Σ v_j ∇c_j / (1 − γ Σ v_j c_j)]
  std::vector<Vec3> transformed;  // −D̂_i ∇c̄_i
  double max_difference = 0;      // max over tets of |direct − transformed|
};

/// Per-tet fluxes of species i from P1 fields on the submesh. Tet values of
/// c, D and u are vertex means.
FluxField compute_flux(const SolventSubmesh& sub, const SpeciesSet& s, std::size_t i, const SpeciesFields& c,
                       const SpeciesFields& cbar, std::span<const double> u, const SpeciesFields& diffusion,
                       double cap);

/// Σ_i Z_i ∫_{z = z0, Ds} J_i·ẑ dS for each plane. A tet contributes when
/// min z ≤ z0 < max z; its cut polygon area multiplies its flux.
std::vector<double> cross_section_current(const SolventSubmesh& sub, const SpeciesSet& s,
                                          const std::vector<std::vector<Vec3>>& flux, std::span<const double> planes);

/// Area of the section of one tet by the plane z = z0.
double section_area(const std::array<Vec3, 4>& p, double z0);

}  // namespace smpnp
