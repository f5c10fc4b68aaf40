#include "smpnp/physics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace smpnp {

SpeciesSet::SpeciesSet(std::vector<IonSpecies> species, double gamma) : species_(std::move(species)), gamma_(gamma)
{
  if (species_.empty()) throw std::invalid_argument("species list is empty");
  if (species_.size() > kMaxSpecies) {
    throw std::invalid_argument("at most " + std::to_string(kMaxSpecies) + " species are supported");
  }
  if (!(gamma_ > 0)) throw std::invalid_argument("gamma must be positive");
  int zeros = 0;
  for (const auto& sp : species_) {
    const std::string who = "species '" + sp.name + "': ";
    if (!(sp.v >= 0) || !std::isfinite(sp.v)) throw std::invalid_argument(who + "ion volume must be >= 0");
    if (!(sp.c_b > 0) || !std::isfinite(sp.c_b)) throw std::invalid_argument(who + "c_b must be positive");
    if (!(sp.D_b > 0) || !std::isfinite(sp.D_b)) throw std::invalid_argument(who + "D_b must be positive");
    if (sp.v == 0) ++zeros;
  }
  if (zeros != 0 && zeros != static_cast<int>(species_.size())) {
    throw std::invalid_argument("ion volumes must be all positive or all zero");
  }
  reduction_ = zeros != 0;
  v0_ = 1;
  exponents_.assign(species_.size(), 0.0);
  if (!reduction_) {
    v0_ = std::min_element(species_.begin(), species_.end(), [](auto& a, auto& b) { return a.v < b.v; })->v;
    for (std::size_t i = 0; i < species_.size(); ++i) exponents_[i] = species_[i].v / v0_;
  }
  if (!(bulk_water_fraction() > 0)) {
    throw std::invalid_argument("bulk concentrations violate gamma * sum(v_j c_j) < 1");
  }
}

double SpeciesSet::water_fraction(std::span<const double> c) const
{
  double s = 0;
  for (std::size_t j = 0; j < species_.size(); ++j) s += species_[j].v * c[j];
  return 1 - gamma_ * s;
}

double SpeciesSet::bulk_water_fraction() const
{
  double s = 0;
  for (const auto& sp : species_) s += sp.v * sp.c_b;
  return 1 - gamma_ * s;
}

double ion_volume_from_radius(double radius) { return 4 * M_PI * radius * radius * radius / 3; }

Couplings couplings_from_physical(double temperature)
{
  constexpr double e_c = 1.602176634e-19;
  constexpr double k_B = 1.380649e-23;
  constexpr double eps0 = 8.8541878128e-12;
  constexpr double N_A = 6.02214076e23;
  const double kT = k_B * temperature;
  return {1e10 * e_c * e_c / (eps0 * kT), N_A * e_c * e_c / (1e17 * eps0 * kT), 1e-12 * e_c / (eps0 * kT),
          1e-27 * N_A};
}

void ModelConstants::validate() const
{
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be positive");
  };
  auto finite = [](double v, const char* name) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(name) + " must be finite");
  };
  positive(alpha, "alpha");
  positive(beta, "beta");
  positive(tau, "tau");
  positive(gamma, "gamma");
  positive(eps_p, "eps_p");
  positive(eps_m, "eps_m");
  positive(eps_s, "eps_s");
  finite(u_b, "u_b");
  finite(u_t, "u_t");
  finite(sigma, "sigma");
  positive(eta, "eta");
  positive(theta, "theta");
  positive(exp_cap, "exp_cap");
  positive(outer_tol, "outer_tol");
  positive(newton_tol, "newton_tol");
  if (!(omega > 0 && omega < 1)) throw std::invalid_argument("omega must lie in (0, 1)");
  if (max_outer < 1) throw std::invalid_argument("max_outer must be >= 1");
  if (newton_max < 1) throw std::invalid_argument("newton_max must be >= 1");
}

double capped_exp(double x, double cap) { return std::exp(std::clamp(x, -cap, cap)); }

void DiffusionProfile::validate() const
{
  if (!has_membrane) return;
  if (!(eta > 0) || !(theta > 0)) throw std::invalid_argument("diffusion profile: eta and theta must be positive");
  if (!(z2 - z1 >= 2 * eta)) {
    std::ostringstream os;
    os << "diffusion profile: buffers of width " << eta << " overlap inside membrane [" << z1 << ", " << z2 << "]";
    throw std::invalid_argument(os.str());
  }
}

double DiffusionProfile::at(double D_b, double z) const
{
  if (!has_membrane || z < z1 || z > z2) return D_b;
  const double D_c = theta * D_b;
  double t;
  if (z < z1 + eta) {
    t = (z - z1) / eta;
  } else if (z > z2 - eta) {
    t = (z2 - z) / eta;
  } else {
    return D_c;
  }
  const double s = t * t * (3 - 2 * t);
  return D_b + (D_c - D_b) * s;
}

std::vector<double> boundary_conc(const SpeciesSet& s, double u, double cap)
{
  const double w = s.bulk_water_fraction();
  std::vector<double> g(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    g[i] = s[i].c_b * capped_exp(s[i].Z * u, cap) / std::pow(w, s.exponent(i));
  }
  return g;
}

std::vector<double> boundary_conc(const SpeciesSet& s, const ModelConstants& k, Surface surface)
{
  return boundary_conc(s, surface == Surface::Bottom ? k.u_b : k.u_t, k.exp_cap);
}

std::vector<double> bulk_slotboom(const SpeciesSet& s)
{
  return boundary_conc(s, 0.0, 1.0);
}

void check_feasible(const SpeciesSet& s, std::span<const double> c)
{
  if (c.size() != s.size()) throw std::invalid_argument("concentration vector length does not match species count");
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(c[i] > 0) || !std::isfinite(c[i])) {
      throw FeasibilityError("concentration of species '" + s[i].name + "' is not positive");
    }
  }
  if (!(s.water_fraction(c) > 0)) throw FeasibilityError("volume fraction violated: gamma * sum(v_j c_j) >= 1");
}

std::vector<double> slotboom_forward(const SpeciesSet& s, double u, std::span<const double> c, double cap)
{
  check_feasible(s, c);
  const double w = s.water_fraction(c);
  std::vector<double> out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = c[i] * capped_exp(s[i].Z * u, cap) / std::pow(w, s.exponent(i));
  return out;
}

double transformed_diffusion(const SpeciesSet& s, std::size_t i, double D, double u, std::span<const double> c,
                             double cap)
{
  check_feasible(s, c);
  return D * capped_exp(-s[i].Z * u, cap) * std::pow(s.water_fraction(c), s.exponent(i));
}

double electrochemical_potential(const SpeciesSet& s, std::size_t i, double u, std::span<const double> c)
{
  check_feasible(s, c);
  return s[i].Z * u + std::log(c[i] / s[i].c_b) - s.exponent(i) * std::log(s.water_fraction(c));
}

}  // namespace smpnp
