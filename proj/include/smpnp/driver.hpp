#pragma once

#include "smpnp/electrostatics.hpp"
#include "smpnp/mesh.hpp"
#include "smpnp/node_solver.hpp"
#include "smpnp/physics.hpp"
#include "smpnp/sparse.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace smpnp {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Charges placed around the pore axis: `count` atoms evenly spaced in angle
/// on a circle of `radius` in each plane of `z`. On a synthetic mesh each
/// atom is moved to the center of its grid cell.
struct RingCharges {
  int count = 0;
  double charge = 0;
  double radius = 0;
  std::vector<double> z{0.0};
};

struct RunConfig {
  std::optional<std::filesystem::path> mesh_file;
  ChannelGeometry geometry;
  std::optional<std::filesystem::path> atoms_file;
  RingCharges ring;
  double smear_width = 0;
  ModelConstants constants;
  std::optional<double> membrane_z1, membrane_z2;
  std::vector<IonSpecies> species;
  LinearSolveSpec linear{SolveMethod::Direct};
  int threads = 1;
  std::filesystem::path output_dir = "smpnp_out";
  int profile_bins = 60;
  std::optional<double> pore_mask_radius;
  std::vector<double> current_planes;
};

/// Flat `key = value` text with repeated `[species]` blocks. Relative paths
/// are resolved against `base_dir`. Throws ConfigError with the line number.
RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Cl⁻, NO₃⁻, Na⁺, K⁺ at 0.1 mol/L with volumes from their ionic radii.
std::vector<IonSpecies> paper_species();

/// Everything needed by the outer iteration. Not movable: the submesh
/// refers back to the mesh.
struct Problem {
  LabeledMesh mesh;
  SolventSubmesh sub;
  AtomicCharges atoms;
  SpeciesSet species;
  ModelConstants constants;
  DiffusionProfile profile;
  LinearSolveSpec linear;
  int threads = 1;

  Problem() = default;
  Problem(const Problem&) = delete;
  Problem& operator=(const Problem&) = delete;
};

AtomicCharges ring_atoms(const RingCharges& ring, const ChannelGeometry* grid);

/// Builds (or loads) the mesh and atoms and validates the whole setup.
std::unique_ptr<Problem> make_problem(const RunConfig& cfg);
std::unique_ptr<Problem> make_problem(LabeledMesh mesh, AtomicCharges atoms, std::vector<IonSpecies> species,
                                      const ModelConstants& k, const LinearSolveSpec& linear, int threads = 1,
                                      std::optional<double> membrane_z1 = {}, std::optional<double> membrane_z2 = {});

struct IterationRecord {
  int k = 0;
  double d_phi = 0;   // ‖Φ̃^{k+1} − Φ̃ᵏ‖ on Ω
  double d_cbar = 0;  // max_i ‖c̄_i^{k+1} − c̄_iᵏ‖ on Ds
  double d_c = 0;     // max_i ‖c_i^{k+1} − c_iᵏ‖ on Ds
  double t_block1 = 0, t_block2 = 0, t_block3 = 0;  // seconds
  int newton_max_iterations = 0;
};

struct IterateView {
  int k;
  const SpeciesFields& cbar;
  const SpeciesFields& c;
  const std::vector<double>& phi_tilde;
};

struct RunResult {
  bool converged = false;
  int iterations = 0;
  std::string message;

  std::vector<double> G, psi, w, phi_tilde, u;  // Ω
  SpeciesFields c, cbar;                        // solvent submesh
  std::vector<IterationRecord> history;

  int smpbic_iterations = 0;
  bool smpbic_converged = false;
  // Smallest concentration and water fraction over every damped iterate.
  double min_concentration = 0;
  double min_water_fraction = 0;
  double wall_time = 0;
};

using IterationObserver = std::function<void(const IterateView&)>;

/// Ψ once, the equilibrium initializer, then the damped three-block loop.
/// Block failures propagate as std::runtime_error naming the iteration.
RunResult solve(const Problem& p, const IterationObserver& observer = {});

}  // namespace smpnp
