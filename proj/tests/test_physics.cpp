#include "smpnp/driver.hpp"
#include "smpnp/physics.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace smpnp;

namespace {

std::vector<IonSpecies> reduced_species()
{
  auto sp = paper_species();
  for (auto& s : sp) s.v = 0;
  return sp;
}

}  // namespace

TEST_CASE("physics: couplings from physical constants match the published values")
{
  const auto c = couplings_from_physical(298.15);
  CHECK(std::abs(c.alpha / 7042.9399 - 1) < 1e-3);
  CHECK(std::abs(c.beta / 4.2414 - 1) < 1e-3);
  CHECK(std::abs(c.tau / 4.392 - 1) < 1e-3);
  CHECK(std::abs(c.gamma / 6.022e-4 - 1) < 1e-4);

  const ModelConstants k;
  CHECK(k.alpha == 7042.9399);
  CHECK(k.beta == 4.2414);
  CHECK(k.tau == 4.392);
  CHECK(k.gamma == 6.022e-4);
  CHECK(k.exp_cap == 45);
  CHECK(k.omega == 0.41);
  CHECK(k.outer_tol == 1e-4);
  CHECK(k.newton_tol == 1e-8);
  CHECK(k.theta == 0.055);
}

TEST_CASE("physics: ion volumes from radii")
{
  const double radii[] = {1.81, 2.64, 0.95, 1.33};
  const double volumes[] = {24.8384, 77.0727, 3.5914, 9.8547};
  for (int i = 0; i < 4; ++i) CHECK(std::abs(ion_volume_from_radius(radii[i]) - volumes[i]) < 1e-3);
  const auto sp = paper_species();
  REQUIRE(sp.size() == 4);
  const char* names[] = {"Cl", "NO3", "Na", "K"};
  const int charges[] = {-1, -1, 1, 1};
  const double d[] = {0.203, 0.190, 0.133, 0.196};
  for (int i = 0; i < 4; ++i) {
    CHECK(sp[i].name == names[i]);
    CHECK(sp[i].Z == charges[i]);
    CHECK(sp[i].c_b == 0.1);
    CHECK(sp[i].D_b == d[i]);
    CHECK(std::abs(sp[i].v - volumes[i]) < 1e-3);
  }
}

TEST_CASE("physics: species set validation")
{
  const SpeciesSet s(paper_species(), 6.022e-4);
  CHECK_FALSE(s.reduction());
  CHECK(s.v0() == doctest::Approx(ion_volume_from_radius(0.95)));
  CHECK(s.exponent(2) == doctest::Approx(1));
  CHECK(s.exponent(1) == doctest::Approx(std::pow(2.64 / 0.95, 3)));

  const SpeciesSet r(reduced_species(), 6.022e-4);
  CHECK(r.reduction());
  for (std::size_t i = 0; i < r.size(); ++i) CHECK(r.exponent(i) == 0);

  auto mixed = paper_species();
  mixed[0].v = 0;
  CHECK_THROWS_AS(SpeciesSet(mixed, 6.022e-4), std::invalid_argument);
  auto crowded = paper_species();
  crowded[1].c_b = 30;  // γ v c ≈ 1.4
  CHECK_THROWS_AS(SpeciesSet(crowded, 6.022e-4), std::invalid_argument);
  auto bad = paper_species();
  bad[0].c_b = 0;
  CHECK_THROWS_AS(SpeciesSet(bad, 6.022e-4), std::invalid_argument);
  bad = paper_species();
  bad[3].D_b = -1;
  CHECK_THROWS_AS(SpeciesSet(bad, 6.022e-4), std::invalid_argument);
  CHECK_THROWS_AS(SpeciesSet({}, 6.022e-4), std::invalid_argument);
}

TEST_CASE("physics: constants validation")
{
  ModelConstants k;
  k.validate();
  k.omega = 1;
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
  k = {};
  k.exp_cap = 0;
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
  k = {};
  k.beta = -1;
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);
}

TEST_CASE("physics: capped exponential")
{
  CHECK(capped_exp(1.5, 45) == std::exp(1.5));
  CHECK(capped_exp(100, 45) == std::exp(45));
  CHECK(capped_exp(-100, 45) == std::exp(-45));
}

TEST_CASE("physics: diffusion profile")
{
  const DiffusionProfile p{-10, 10, 2, 0.055, true};
  p.validate();
  const double db = 0.203, dc = 0.055 * 0.203;
  CHECK(p.at(db, -20) == db);
  CHECK(p.at(db, 20) == db);
  CHECK(p.at(db, 0) == doctest::Approx(dc));
  CHECK(p.at(db, 10 - 1) == doctest::Approx((db + dc) / 2).epsilon(1e-14));
  CHECK(p.at(db, -10 + 1) == doctest::Approx((db + dc) / 2).epsilon(1e-14));
  CHECK(p.at(db, 10) == doctest::Approx(db));
  CHECK(p.at(db, 8) == doctest::Approx(dc));
  // Monotone across the buffer.
  double last = p.at(db, 8);
  for (double z = 8; z <= 10; z += 0.05) {
    CHECK(p.at(db, z) >= last - 1e-15);
    last = p.at(db, z);
  }
  const DiffusionProfile none{0, 0, 2, 0.055, false};
  CHECK(none.at(db, 0) == db);
  CHECK_THROWS_AS((DiffusionProfile{-1, 1, 2, 0.055, true}.validate()), std::invalid_argument);
}

TEST_CASE("physics: boundary Slotboom values")
{
  ModelConstants k;
  const SpeciesSet r(reduced_species(), k.gamma);
  for (double g : boundary_conc(r, k, Surface::Bottom)) CHECK(g == 0.1);

  const SpeciesSet s(paper_species(), k.gamma);
  const double w = 1 - 6.022e-4 * (24.8384 + 77.0727 + 3.5914 + 9.8547) * 0.1;
  const auto g = boundary_conc(s, k, Surface::Top);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(g[i] == doctest::Approx(0.1 / std::pow(w, s.exponent(i))).epsilon(1e-4));
  }
  CHECK(bulk_slotboom(s) == g);

  k.u_t = 0.7;
  const auto g1 = boundary_conc(s, k, Surface::Top);
  k.u_t = 1.4;
  const auto g2 = boundary_conc(s, k, Surface::Top);
  for (std::size_t i = 0; i < 4; ++i) CHECK(g2[i] == doctest::Approx(g1[i] * std::exp(s[i].Z * 0.7)).epsilon(1e-13));
  CHECK(boundary_conc(s, k, Surface::Bottom) == g);
}

TEST_CASE("physics: Slotboom transform")
{
  const SpeciesSet r(reduced_species(), 6.022e-4);
  const std::vector<double> c{0.2, 0.05, 0.3, 0.01};
  const auto cb = slotboom_forward(r, 1.3, c, 45);
  for (std::size_t i = 0; i < 4; ++i) CHECK(cb[i] == doctest::Approx(c[i] * std::exp(r[i].Z * 1.3)).epsilon(1e-14));

  const SpeciesSet cl({{"Cl", -1, 24.8384, 0.1, 0.203}}, 6.022e-4);
  const auto one = slotboom_forward(cl, 0, std::vector<double>{0.1}, 45);
  CHECK(one[0] == doctest::Approx(0.1001498).epsilon(1e-6));

  CHECK_THROWS_AS(slotboom_forward(cl, 0, std::vector<double>{3000}, 45), FeasibilityError);
  CHECK_THROWS_AS(slotboom_forward(cl, 0, std::vector<double>{-1}, 45), FeasibilityError);
}

TEST_CASE("physics: transformed diffusion")
{
  const SpeciesSet r(reduced_species(), 6.022e-4);
  const std::vector<double> c{0.1, 0.1, 0.1, 0.1};
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(transformed_diffusion(r, i, 0.2, 0, c, 45) == 0.2);
    CHECK(transformed_diffusion(r, i, 0.2, 0.5, c, 45) == doctest::Approx(0.2 * std::exp(-r[i].Z * 0.5)));
  }
  const SpeciesSet s(paper_species(), 6.022e-4);
  const double w = s.water_fraction(c);
  CHECK(transformed_diffusion(s, 1, 0.19, 2, c, 45) ==
        doctest::Approx(0.19 * std::exp(2) * std::pow(w, s.exponent(1))).epsilon(1e-14));
  // Capped exponent: |Z u| = 100 behaves as 45.
  CHECK(transformed_diffusion(s, 2, 0.1, 100, c, 45) ==
        doctest::Approx(0.1 * std::exp(-45) * std::pow(w, s.exponent(2))).epsilon(1e-14));
}

TEST_CASE("physics: electrochemical potential")
{
  const SpeciesSet r(reduced_species(), 6.022e-4);
  const std::vector<double> cb{0.1, 0.1, 0.1, 0.1};
  for (std::size_t i = 0; i < 4; ++i) CHECK(electrochemical_potential(r, i, 0, cb) == 0);

  // μ_i = ln(c̄_i / c_i^b): zero exactly when the Slotboom variable equals c_i^b.
  const SpeciesSet s(paper_species(), 6.022e-4);
  const double u = -0.8;
  const std::vector<double> c{0.05, 0.04, 0.3, 0.2};
  const auto cbar = slotboom_forward(s, u, c, 45);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(electrochemical_potential(s, i, u, c) == doctest::Approx(std::log(cbar[i] / s[i].c_b)).epsilon(1e-12));
  }

  // Gradient along a smooth path against central differences.
  auto field = [](double x) {
    return std::pair{0.5 * std::sin(x), std::vector<double>{0.1 + 0.05 * std::cos(x), 0.2 + 0.1 * x * x,
                                                            0.3 * std::exp(-x), 0.15 + 0.02 * x}};
  };
  auto dfield = [](double x) {
    return std::pair{0.5 * std::cos(x),
                     std::vector<double>{-0.05 * std::sin(x), 0.2 * x, -0.3 * std::exp(-x), 0.02}};
  };
  for (double x : {0.1, 0.4, 0.9}) {
    const auto [ux, c0] = field(x);
    const auto [du, dc] = dfield(x);
    const double w = s.water_fraction(c0);
    double dvc = 0;
    for (std::size_t j = 0; j < 4; ++j) dvc += s[j].v * dc[j];
    for (std::size_t i = 0; i < 4; ++i) {
      const double analytic = s[i].Z * du + dc[i] / c0[i] + s.exponent(i) * s.gamma() * dvc / w;
      const double h = 1e-5;
      const auto [up, cp] = field(x + h);
      const auto [um, cm] = field(x - h);
      const double fd =
          (electrochemical_potential(s, i, up, cp) - electrochemical_potential(s, i, um, cm)) / (2 * h);
      CHECK(fd == doctest::Approx(analytic).epsilon(1e-6));
    }
  }
}

TEST_CASE("physics: feasibility checks")
{
  const SpeciesSet s(paper_species(), 6.022e-4);
  check_feasible(s, std::vector<double>{0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_AS(check_feasible(s, std::vector<double>{0.1, 0, 0.1, 0.1}), FeasibilityError);
  CHECK_THROWS_AS(check_feasible(s, std::vector<double>{0.1, 30, 0.1, 0.1}), FeasibilityError);
  CHECK(s.water_fraction(std::vector<double>{0, 0, 0, 0}) == 1);
}
