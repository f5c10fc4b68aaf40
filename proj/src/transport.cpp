#include "smpnp/transport.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace smpnp {

SpeciesFields diffusion_fields(const SolventSubmesh& sub, const SpeciesSet& s, const DiffusionProfile& profile)
{
  profile.validate();
  SpeciesFields d(s.size(), std::vector<double>(sub.num_vertices()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t m = 0; m < sub.num_vertices(); ++m) d[i][m] = profile.at(s[i].D_b, sub.vertices[m][2]);
  }
  return d;
}

TransportSolver::TransportSolver(const SolventSubmesh& sub, const SpeciesSet& s, const ModelConstants& k,
                                 const DiffusionProfile& profile, const LinearSolveSpec& spec)
    : sub_(sub),
      s_(s),
      k_(k),
      spec_(spec),
      assembler_(sub.view()),
      diffusion_(diffusion_fields(sub, s, profile)),
      dnodes_(smpnp::dirichlet_nodes(sub)),
      g_bottom_(boundary_conc(s, k, Surface::Bottom)),
      g_top_(boundary_conc(s, k, Surface::Top)),
      z_mid_(0.5 * (sub.parent->box.z1 + sub.parent->box.z2))
{
  if (dnodes_.empty()) throw MeshError("solvent region does not touch the Dirichlet boundary");
}

std::vector<double> TransportSolver::boundary_values(std::size_t i) const
{
  std::vector<double> g(dnodes_.size());
  for (std::size_t k = 0; k < dnodes_.size(); ++k) {
    g[k] = sub_.vertices[dnodes_[k]][2] < z_mid_ ? g_bottom_[i] : g_top_[i];
  }
  return g;
}

std::vector<double> TransportSolver::tet_coefficients(std::size_t i, std::span<const double> u,
                                                      const SpeciesFields& c) const
{
  const std::size_t nv = sub_.num_vertices();
  if (u.size() != nv || c.size() != s_.size()) throw std::invalid_argument("transport: field shape mismatch");
  std::vector<double> nodal(nv);
  std::array<double, kMaxSpecies> cm{};
  const std::span<const double> cs(cm.data(), s_.size());
  for (std::size_t m = 0; m < nv; ++m) {
    for (std::size_t j = 0; j < s_.size(); ++j) cm[j] = c[j][m];
    nodal[m] = transformed_diffusion(s_, i, diffusion_[i][m], u[m], cs, k_.exp_cap);
  }
  auto w = tet_weights_from_nodal(sub_.view(), nodal);
  for (std::size_t t = 0; t < w.size(); ++t) {
    if (!(w[t] > 0) || !std::isfinite(w[t])) {
      throw std::domain_error("transformed diffusion of species '" + s_[i].name + "' is not positive on tet " +
                              std::to_string(t));
    }
  }
  return w;
}

SparseMatrix TransportSolver::operator_matrix(std::size_t i, std::span<const double> u, const SpeciesFields& c) const
{
  return assembler_.assemble(tet_coefficients(i, u, c));
}

std::vector<double> TransportSolver::solve(std::size_t i, std::span<const double> u, const SpeciesFields& c,
                                           SolveStats* stats) const
{
  SparseMatrix a = operator_matrix(i, u, c);
  std::vector<double> b(sub_.num_vertices(), 0.0);
  const auto g = boundary_values(i);
  apply_dirichlet(a, b, {dnodes_, g});
  auto x = LinearSolver(a, spec_).solve(b, stats);

  const auto [lo, hi] = std::minmax_element(g.begin(), g.end());
  const double slack = 1e-8 * std::max(std::abs(*lo), std::abs(*hi));
  std::size_t outside = 0;
  for (double v : x) outside += (v < *lo - slack || v > *hi + slack);
  if (outside > 0) {
    spdlog::debug("species {}: {} nodes of the Slotboom variable fall outside the boundary data range", s_[i].name,
                  outside);
  }
  return x;
}

SpeciesFields TransportSolver::solve_all(std::span<const double> u, const SpeciesFields& c, int workers) const
{
  const std::size_t n = s_.size();
  SpeciesFields out(n);
  if (workers <= 1 || n == 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = solve(i, u, c);
    return out;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < n; ++i) {
    pool.emplace_back([&, i] {
      try {
        out[i] = solve(i, u, c);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

FluxField compute_flux(const SolventSubmesh& sub, const SpeciesSet& s, std::size_t i, const SpeciesFields& c,
                       const SpeciesFields& cbar, std::span<const double> u, const SpeciesFields& diffusion,
                       double cap)
{
  const std::size_t n = s.size();
  const std::size_t nv = sub.num_vertices();
  if (c.size() != n || cbar.size() != n || diffusion.size() != n || u.size() != nv) {
    throw std::invalid_argument("compute_flux: field shape mismatch");
  }
  FluxField out;
  out.direct.resize(sub.num_tets());
  out.transformed.resize(sub.num_tets());

  std::array<double, kMaxSpecies> cm{};
  std::vector<double> dhat(nv);
  for (std::size_t m = 0; m < nv; ++m) {
    for (std::size_t j = 0; j < n; ++j) cm[j] = c[j][m];
    dhat[m] = transformed_diffusion(s, i, diffusion[i][m], u[m], std::span<const double>(cm.data(), n), cap);
  }

  auto grad = [](const ElementGeometry& e, const Tet& tet, std::span<const double> f) {
    Vec3 g{0, 0, 0};
    for (int a = 0; a < 4; ++a) g = g + f[tet[a]] * e.grad[a];
    return g;
  };
  auto mean = [](const Tet& tet, std::span<const double> f) {
    return 0.25 * (f[tet[0]] + f[tet[1]] + f[tet[2]] + f[tet[3]]);
  };

  for (std::size_t t = 0; t < sub.num_tets(); ++t) {
    const Tet& tet = sub.tets[t];
    const auto e = p1_element(sub.vertices[tet[0]], sub.vertices[tet[1]], sub.vertices[tet[2]], sub.vertices[tet[3]]);
    for (std::size_t j = 0; j < n; ++j) cm[j] = mean(tet, c[j]);
    check_feasible(s, std::span<const double>(cm.data(), n));
    const double w = s.water_fraction(std::span<const double>(cm.data(), n));
    Vec3 crowd{0, 0, 0};
    for (std::size_t j = 0; j < n; ++j) crowd = crowd + s[j].v * grad(e, tet, c[j]);
    const double ci = cm[i];
    const Vec3 drift = (s[i].Z * ci) * grad(e, tet, u);
    const Vec3 steric = (s.exponent(i) * ci * s.gamma() / w) * crowd;
    const double D = mean(tet, diffusion[i]);
    out.direct[t] = -D * (grad(e, tet, c[i]) + drift + steric);
    out.transformed[t] = -mean(tet, dhat) * grad(e, tet, cbar[i]);
    out.max_difference = std::max(out.max_difference, norm(out.direct[t] - out.transformed[t]));
  }
  return out;
}

namespace {

double cross2(const std::array<double, 2>& o, const std::array<double, 2>& a, const std::array<double, 2>& b)
{
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

double hull_area(std::vector<std::array<double, 2>> pts)
{
  if (pts.size() < 3) return 0;
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0;
  std::vector<std::array<double, 2>> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross2(h[k - 2], h[k - 1], p) <= 0) --k;
    h[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lo = k + 1; i-- > 0;) {
    while (k >= lo && cross2(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  double a = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const auto& p = h[i];
    const auto& q = h[(i + 1) % h.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * std::abs(a);
}

}  // namespace

double section_area(const std::array<Vec3, 4>& p, double z0)
{
  std::vector<std::array<double, 2>> pts;
  for (int a = 0; a < 4; ++a) {
    if (p[a][2] == z0) pts.push_back({p[a][0], p[a][1]});
    for (int b = a + 1; b < 4; ++b) {
      const double da = p[a][2] - z0, db = p[b][2] - z0;
      if ((da < 0 && db > 0) || (da > 0 && db < 0)) {
        const double t = da / (da - db);
        pts.push_back({p[a][0] + t * (p[b][0] - p[a][0]), p[a][1] + t * (p[b][1] - p[a][1])});
      }
    }
  }
  return hull_area(std::move(pts));
}

std::vector<double> cross_section_current(const SolventSubmesh& sub, const SpeciesSet& s,
                                          const std::vector<std::vector<Vec3>>& flux, std::span<const double> planes)
{
  if (flux.size() != s.size()) throw std::invalid_argument("cross_section_current: one flux field per species");
  const Box& box = sub.parent->box;
  std::vector<double> current(planes.size(), 0.0);
  for (std::size_t k = 0; k < planes.size(); ++k) {
    const double z0 = planes[k];
    if (!(z0 >= box.z1 && z0 <= box.z2)) {
      throw std::invalid_argument("cross_section_current: plane z = " + std::to_string(z0) + " is outside the box");
    }
    for (std::size_t t = 0; t < sub.num_tets(); ++t) {
      const Tet& tet = sub.tets[t];
      const std::array<Vec3, 4> p{sub.vertices[tet[0]], sub.vertices[tet[1]], sub.vertices[tet[2]],
                                  sub.vertices[tet[3]]};
      double lo = p[0][2], hi = p[0][2];
      for (const auto& v : p) {
        lo = std::min(lo, v[2]);
        hi = std::max(hi, v[2]);
      }
      if (!(lo <= z0 && z0 < hi)) continue;
      const double area = section_area(p, z0);
      double jz = 0;
      for (std::size_t i = 0; i < s.size(); ++i) jz += s[i].Z * flux[i][t][2];
      current[k] += jz * area;
    }
  }
  return current;
}

}  // namespace smpnp
