#pragma once

#include "smpnp/mesh.hpp"
#include "smpnp/physics.hpp"

#include <array>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace smpnp {

/// n × N_h nodal values, one vector per species.
using SpeciesFields = std::vector<std::vector<double>>;

/// F_i(P) = p_i − c̄_i (1 − γ Σ v_j p_j)^{v_i/v₀} E_i at one mesh node, with
/// E_i = e^{−Z_i u} evaluated with a capped exponent.
struct NodeSystem {
  const SpeciesSet* species = nullptr;
  std::array<double, kMaxSpecies> target{};
  std::array<double, kMaxSpecies> boltzmann{};

  static NodeSystem make(const SpeciesSet& s, std::span<const double> target, double u, double cap);
  std::size_t size() const { return species->size(); }
};

/// Throws FeasibilityError if 1 − γ Σ v_j p_j ≤ 0.
std::vector<double> residual(const NodeSystem& sys, std::span<const double> p);

/// Row-major n × n.
std::vector<double> jacobian(const NodeSystem& sys, std::span<const double> p);

/// Solves J(p) x = rhs. J is the identity plus a rank-one term, so the
/// solve uses the Sherman-Morrison formula.
std::vector<double> newton_step(const NodeSystem& sys, std::span<const double> p, std::span<const double> rhs);

struct NewtonOptions {
  double tol = 1e-8;
  int max_iterations = 50;
  int max_halvings = 30;
};

struct NewtonReport {
  bool converged = false;
  int iterations = 0;
  double step_norm = 0;
  bool restarted = false;  // plain Newton failed; restarted from the scalar root
  std::vector<double> p;
};

/// Modified Newton iteration with step halving to stay feasible. An
/// infeasible initial guess is first scaled so that γ Σ v_j p_j ≤ 0.99.
/// If the iteration fails it is restarted from p_i = c̄_i E_i w^{v_i/v₀},
/// with w the root of the scalar water-fraction equation.
NewtonReport newton_solve(const NodeSystem& sys, std::span<const double> p0, const NewtonOptions& opt = {});

class NodeSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root w ∈ (0, 1) of w = 1 − γ Σ v_i c̄_i E_i w^{v_i/v₀}, by bisection in ln w.
double water_fraction_root(const NodeSystem& sys);

struct Block2Stats {
  int max_iterations = 0;
  long total_iterations = 0;
};

/// Solves the node system at every node. Nodes are split across `workers`
/// threads (0 picks the hardware count); output does not depend on it.
/// Throws NodeSolveError naming the first failing node.
SpeciesFields block2_update(const SpeciesSet& s, const SpeciesFields& targets, std::span<const double> u,
                            const SpeciesFields& initial, double cap, const NewtonOptions& opt = {},
                            Block2Stats* stats = nullptr, int workers = 0);

/// −Σ_i Z_i ∂p_i/∂u at every node, for concentrations p that solve the node
/// systems with the given targets. Nonnegative; zero where every exponent is capped.
std::vector<double> charge_susceptibility(const SpeciesSet& s, const SpeciesFields& targets,
                                          std::span<const double> u, const SpeciesFields& p, double cap);

/// Ionic potential solves used by the initializer. Fields on the solvent
/// submesh, potentials on Ω with zero values on ΓD.
struct ChargeOperator {
  /// q̂ with a(q̂, v) = β Σ_j Z_j ∫_{Ds} ξ_j v.
  std::function<std::vector<double>(const SpeciesFields&)> solve;
  /// δ with a(δ, v) + β ∫_{Ds} κ δ v = a(r, v); κ on the solvent submesh.
  std::function<std::vector<double>(std::span<const double>, std::span<const double>)> linearized;
};

struct SmpbicResult {
  std::vector<double> q;  // Ω
  SpeciesFields xi;       // solvent submesh
  int iterations = 0;
  bool converged = false;
  double q_diff = 0;
  double xi_diff = 0;
};

/// Equilibrium initializer: Slotboom variables frozen at their bulk values.
/// Solves q = q̂(ξ(w + q)) by Newton's method on q with a backtracking line
/// search; ξ solves the node systems at the current potential.
SmpbicResult solve_smpbic(const LabeledMesh& mesh, const SolventSubmesh& sub, std::span<const double> w,
                          const SpeciesSet& s, const ModelConstants& k, const ChargeOperator& ops,
                          int workers = 0);

}  // namespace smpnp
