#pragma once

#include "smpnp/fem.hpp"
#include "smpnp/mesh.hpp"
#include "smpnp/node_solver.hpp"
#include "smpnp/physics.hpp"
#include "smpnp/sparse.hpp"

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace smpnp {

/// Fixed atomic charges inside the protein. A positive smear width replaces
/// each point charge by a normalized Gaussian of that standard deviation.
struct AtomicCharges {
  std::vector<Vec3> positions;
  std::vector<double> charges;
  double smear_width = 0;

  std::size_t size() const { return positions.size(); }
};

/// `atoms n_p` followed by n_p lines `x y z z_charge`.
AtomicCharges read_atoms(std::istream& in);
AtomicCharges load_atoms(const std::filesystem::path& path);
void write_atoms(std::ostream& out, const AtomicCharges& atoms);

/// Every atom must lie inside a Protein tet and at least 1e-6 Å from every
/// mesh vertex. Throws std::invalid_argument.
void validate_atoms(const LabeledMesh& mesh, const AtomicCharges& atoms);

inline constexpr double kCollisionDistance = 1e-6;

/// G(r) = α/(4π ε_p) Σ_j z_j / |r − r_j| (or its Gaussian-smeared form).
class CoulombField {
 public:
  CoulombField(const AtomicCharges& atoms, double alpha, double eps_p);

  /// Throws std::invalid_argument if r is within 1e-6 Å of a point charge.
  double value(const Vec3& r) const;
  Vec3 gradient(const Vec3& r) const;

  bool empty() const { return atoms_.size() == 0; }
  const AtomicCharges& atoms() const { return atoms_; }
  /// Charge density α Σ z_j ρ_j(r) of the smeared charges (zero for point charges off the atoms).
  double source(const Vec3& r) const;

 private:
  AtomicCharges atoms_;
  double scale_;  // α / (4π ε_p)
  double alpha_;
};

std::vector<double> eval_G(const AtomicCharges& atoms, const ModelConstants& k, std::span<const Vec3> points);

/// Poisson operator on Ω with the piecewise permittivity, factored once with
/// the ΓD nodes eliminated. Holds references to the mesh and submesh.
class Electrostatics {
 public:
  Electrostatics(const LabeledMesh& mesh, const SolventSubmesh& sub, const ModelConstants& k,
                 const LinearSolveSpec& spec);
  ~Electrostatics();
  Electrostatics(const Electrostatics&) = delete;
  Electrostatics& operator=(const Electrostatics&) = delete;

  /// Correction Ψ with Ψ = g − G on ΓD, so that G + Ψ solves the ion-free
  /// interface problem including the membrane surface charge.
  std::vector<double> solve_psi(const AtomicCharges& atoms, SolveStats* stats = nullptr) const;

  /// q ∈ U₀ with a(q, v) = β Σ_j Z_j ∫_{Ds} c_j v. Fields live on the solvent submesh.
  std::vector<double> solve_phi_tilde(const SpeciesSet& s, const SpeciesFields& c, SolveStats* stats = nullptr) const;

  /// δ ∈ U₀ with a(δ, v) + β ∫_{Ds} κ δ v = a(r, v), the mass term lumped.
  /// κ lives on the solvent submesh, r on Ω.
  std::vector<double> solve_linearized(std::span<const double> kappa, std::span<const double> r,
                                       SolveStats* stats = nullptr) const;

  /// Right-hand side of the Φ̃ problem before Dirichlet lifting.
  std::vector<double> phi_tilde_rhs(const SpeciesSet& s, const SpeciesFields& c) const;

  /// Solves a(x, v) = b(v) with x = values on ΓD.
  std::vector<double> solve_with_boundary(std::vector<double> b, std::span<const double> boundary_values,
                                          SolveStats* stats = nullptr) const;

  const SparseMatrix& unconstrained() const { return a_; }
  const SparseMatrix& constrained() const { return a_d_; }
  std::span<const int> dirichlet_nodes() const { return dnodes_; }
  /// u_b on the bottom face nodes, u_t on the top face nodes.
  std::vector<double> boundary_potential() const;

 private:
  const LabeledMesh& mesh_;
  const SolventSubmesh& sub_;
  ModelConstants k_;
  SparseMatrix a_;
  SparseMatrix a_d_;
  std::vector<int> dnodes_;
  std::vector<char> fixed_;
  std::vector<double> solvent_mass_;  // lumped over solvent tets, Ω-indexed
  LinearSolveSpec spec_;
  std::unique_ptr<LinearSolver> solver_;
};

}  // namespace smpnp
