#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace smpnp {

/// Raised when a concentration vector leaves the feasible set
/// (c_i > 0, γ Σ v_j c_j < 1).
class FeasibilityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct IonSpecies {
  std::string name;
  int Z = 0;
  double v = 0;    // ion volume, Å³
  double c_b = 0;  // bulk concentration, mol/L
  double D_b = 0;  // bulk diffusion constant
};

inline constexpr int kMaxSpecies = 8;

/// Ordered species with the size exponents v_i / v₀. Either every v_i is
/// positive, or every v_i is zero (classical PNP, all exponents zero).
class SpeciesSet {
 public:
  SpeciesSet() = default;
  /// Throws std::invalid_argument on bad species data or infeasible bulk.
  SpeciesSet(std::vector<IonSpecies> species, double gamma);

  std::size_t size() const { return species_.size(); }
  const IonSpecies& operator[](std::size_t i) const { return species_[i]; }
  std::span<const IonSpecies> species() const { return species_; }

  double gamma() const { return gamma_; }
  double v0() const { return v0_; }
  bool reduction() const { return reduction_; }
  double exponent(std::size_t i) const { return exponents_[i]; }

  /// 1 − γ Σ v_j c_j
  double water_fraction(std::span<const double> c) const;
  double bulk_water_fraction() const;

 private:
  std::vector<IonSpecies> species_;
  std::vector<double> exponents_;
  double gamma_ = 0;
  double v0_ = 1;
  bool reduction_ = true;
};

double ion_volume_from_radius(double radius);

struct Couplings {
  double alpha, beta, tau, gamma;
};

/// α, β, τ, γ from CODATA constants at temperature T (K).
Couplings couplings_from_physical(double temperature);

struct ModelConstants {
  double alpha = 7042.9399;
  double beta = 4.2414;
  double tau = 4.392;
  double gamma = 6.022e-4;
  double eps_p = 2;
  double eps_m = 2;
  double eps_s = 80;
  double u_b = 0;      // potential on z = z1
  double u_t = 0;      // potential on z = z2
  double sigma = 0;    // membrane surface charge, μC/cm²
  double eta = 2;      // buffer thickness, Å
  double theta = 0.055;
  double exp_cap = 45;
  double omega = 0.41;
  double outer_tol = 1e-4;
  double newton_tol = 1e-8;
  int max_outer = 500;
  int newton_max = 50;

  /// Throws std::invalid_argument naming the offending constant.
  void validate() const;
};

/// exp(x) with x clamped to [−cap, cap].
double capped_exp(double x, double cap);

/// Piecewise diffusion coefficient: D_b outside the membrane slab, θ·D_b in
/// its interior, blended by a cubic smoothstep across buffers of width η at
/// both membrane faces.
struct DiffusionProfile {
  double z1 = 0;
  double z2 = 0;
  double eta = 2;
  double theta = 0.055;
  bool has_membrane = true;

  /// Throws std::invalid_argument if the buffers overlap.
  void validate() const;
  double at(double D_b, double z) const;
};

enum class Surface { Bottom, Top };

/// ḡ_i = c_i^b e^{Z_i u} / (1 − γ Σ v_j c_j^b)^{v_i/v₀} for the boundary
/// potential of the chosen surface.
std::vector<double> boundary_conc(const SpeciesSet& s, const ModelConstants& k, Surface surface);
std::vector<double> boundary_conc(const SpeciesSet& s, double u, double cap);

/// Slotboom variables of the bulk (u = 0).
std::vector<double> bulk_slotboom(const SpeciesSet& s);

/// c̄_i = c_i e^{Z_i u} / (1 − γ Σ v_j c_j)^{v_i/v₀}. Throws FeasibilityError.
std::vector<double> slotboom_forward(const SpeciesSet& s, double u, std::span<const double> c, double cap);

/// D̂_i = D e^{−Z_i u} (1 − γ Σ v_j c_j)^{v_i/v₀}, exponent capped.
double transformed_diffusion(const SpeciesSet& s, std::size_t i, double D, double u, std::span<const double> c,
                             double cap);

/// μ_i / (k_B T): Z_i u + ln(c_i / c_i^b) − (v_i/v₀) ln(1 − γ Σ v_j c_j).
double electrochemical_potential(const SpeciesSet& s, std::size_t i, double u, std::span<const double> c);

/// Throws FeasibilityError if some c_i ≤ 0 or the water fraction is not positive.
void check_feasible(const SpeciesSet& s, std::span<const double> c);

}  // namespace smpnp
