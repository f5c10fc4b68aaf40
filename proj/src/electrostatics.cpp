#include "smpnp/electrostatics.hpp"

#include "smpnp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace smpnp {

AtomicCharges read_atoms(std::istream& in)
{
  std::string line;
  auto next = [&](const char* what) {
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    throw std::invalid_argument(std::string("atoms file: unexpected end of file reading ") + what);
  };
  next("header");
  std::istringstream head(line);
  std::string tag;
  long count = -1;
  if (!(head >> tag >> count) || tag != "atoms" || count < 0) {
    throw std::invalid_argument("atoms file: expected header 'atoms n_p'");
  }
  AtomicCharges atoms;
  for (long j = 0; j < count; ++j) {
    next("atom");
    std::istringstream ls(line);
    Vec3 p;
    double z;
    std::string extra;
    if (!(ls >> p[0] >> p[1] >> p[2] >> z) || (ls >> extra)) {
      throw std::invalid_argument("atoms file: atom " + std::to_string(j + 1) + " must be 'x y z z_charge'");
    }
    if (!std::isfinite(p[0]) || !std::isfinite(p[1]) || !std::isfinite(p[2]) || !std::isfinite(z)) {
      throw std::invalid_argument("atoms file: atom " + std::to_string(j + 1) + " has non-finite data");
    }
    atoms.positions.push_back(p);
    atoms.charges.push_back(z);
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw std::invalid_argument("atoms file: trailing content after " + std::to_string(count) + " atoms");
    }
  }
  return atoms;
}

AtomicCharges load_atoms(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open atoms file " + path.string());
  try {
    return read_atoms(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void write_atoms(std::ostream& out, const AtomicCharges& atoms)
{
  out << "atoms " << atoms.size() << "\n" << std::setprecision(17);
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const auto& p = atoms.positions[j];
    out << p[0] << " " << p[1] << " " << p[2] << " " << atoms.charges[j] << "\n";
  }
}

void validate_atoms(const LabeledMesh& mesh, const AtomicCharges& atoms)
{
  if (atoms.positions.size() != atoms.charges.size()) throw std::invalid_argument("atoms: positions and charges differ");
  if (atoms.smear_width < 0) throw std::invalid_argument("atoms: smear width must be >= 0");
  for (std::size_t j = 0; j < atoms.size(); ++j) {
    const Vec3& r = atoms.positions[j];
    bool inside = false;
    for (std::size_t t = 0; t < mesh.num_tets() && !inside; ++t) {
      if (mesh.regions[t] != Region::Protein) continue;
      const Tet& tet = mesh.tets[t];
      const Vec3& a = mesh.vertices[tet[0]];
      const Vec3& b = mesh.vertices[tet[1]];
      const Vec3& c = mesh.vertices[tet[2]];
      const Vec3& d = mesh.vertices[tet[3]];
      const double v = signed_volume6(a, b, c, d);
      const double tol = -1e-12 * std::abs(v);
      inside = signed_volume6(r, b, c, d) >= tol && signed_volume6(a, r, c, d) >= tol &&
               signed_volume6(a, b, r, d) >= tol && signed_volume6(a, b, c, r) >= tol;
    }
    if (!inside) {
      std::ostringstream os;
      os << "atom " << j + 1 << " at (" << r[0] << ", " << r[1] << ", " << r[2] << ") is not inside the protein";
      throw std::invalid_argument(os.str());
    }
    for (std::size_t m = 0; m < mesh.num_vertices(); ++m) {
      if (norm(mesh.vertices[m] - r) <= kCollisionDistance) {
        throw std::invalid_argument("atom " + std::to_string(j + 1) + " coincides with mesh vertex " +
                                    std::to_string(m));
      }
    }
  }
}

CoulombField::CoulombField(const AtomicCharges& atoms, double alpha, double eps_p)
    : atoms_(atoms), scale_(alpha / (4 * M_PI * eps_p)), alpha_(alpha)
{
  if (atoms_.positions.size() != atoms_.charges.size()) throw std::invalid_argument("atoms: positions and charges differ");
}

double CoulombField::value(const Vec3& r) const
{
  const double s = atoms_.smear_width;
  double g = 0;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const double d = norm(r - atoms_.positions[j]);
    if (s > 0) {
      const double a = M_SQRT2 * s;
      g += atoms_.charges[j] * (d < 1e-8 * s ? 2 / (std::sqrt(M_PI) * a) : std::erf(d / a) / d);
    } else {
      if (d <= kCollisionDistance) throw std::invalid_argument("G evaluated at an atom position");
      g += atoms_.charges[j] / d;
    }
  }
  return scale_ * g;
}

Vec3 CoulombField::gradient(const Vec3& r) const
{
  const double s = atoms_.smear_width;
  Vec3 g{0, 0, 0};
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const Vec3 x = r - atoms_.positions[j];
    const double d = norm(x);
    double f;  // (dφ/dd) / d
    if (s > 0) {
      if (d < 1e-8 * s) continue;
      const double a = M_SQRT2 * s;
      f = (2 / (std::sqrt(M_PI) * a) * std::exp(-d * d / (a * a)) / d - std::erf(d / a) / (d * d)) / d;
    } else {
      if (d <= kCollisionDistance) throw std::invalid_argument("grad G evaluated at an atom position");
      f = -1 / (d * d * d);
    }
    g = g + (atoms_.charges[j] * f) * x;
  }
  return scale_ * g;
}

double CoulombField::source(const Vec3& r) const
{
  const double s = atoms_.smear_width;
  if (!(s > 0)) return 0;
  const double norm_c = std::pow(2 * M_PI * s * s, -1.5);
  double rho = 0;
  for (std::size_t j = 0; j < atoms_.size(); ++j) {
    const Vec3 x = r - atoms_.positions[j];
    rho += atoms_.charges[j] * norm_c * std::exp(-dot(x, x) / (2 * s * s));
  }
  return alpha_ * rho;
}

std::vector<double> eval_G(const AtomicCharges& atoms, const ModelConstants& k, std::span<const Vec3> points)
{
  const CoulombField field(atoms, k.alpha, k.eps_p);
  std::vector<double> g(points.size(), 0.0);
  if (field.empty()) return g;
  for (std::size_t m = 0; m < points.size(); ++m) g[m] = field.value(points[m]);
  return g;
}

Electrostatics::Electrostatics(const LabeledMesh& mesh, const SolventSubmesh& sub, const ModelConstants& k,
                               const LinearSolveSpec& spec)
    : mesh_(mesh), sub_(sub), k_(k), spec_(spec)
{
  a_ = assemble_weighted_stiffness(mesh.view(), region_weights(mesh, k.eps_s, k.eps_p, k.eps_m));
  dnodes_ = smpnp::dirichlet_nodes(mesh);
  if (dnodes_.empty()) throw MeshError("mesh has no Dirichlet boundary");
  a_d_ = a_;
  std::vector<double> dummy(a_.size(), 0.0);
  apply_dirichlet(a_d_, dummy, {dnodes_, std::vector<double>(dnodes_.size(), 0.0)});
  solver_ = std::make_unique<LinearSolver>(a_d_, spec);
  fixed_.assign(mesh.num_vertices(), 0);
  for (int m : dnodes_) fixed_[m] = 1;
  solvent_mass_.assign(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    if (mesh.regions[t] != Region::Solvent) continue;
    const Tet& tet = mesh.tets[t];
    const double v = p1_element(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]],
                                mesh.vertices[tet[3]])
                         .volume;
    for (int a = 0; a < 4; ++a) solvent_mass_[tet[a]] += v / 4;
  }
}

Electrostatics::~Electrostatics() = default;

std::vector<double> Electrostatics::boundary_potential() const
{
  std::vector<double> g(dnodes_.size());
  const double mid = 0.5 * (mesh_.box.z1 + mesh_.box.z2);
  for (std::size_t k = 0; k < dnodes_.size(); ++k) g[k] = mesh_.vertices[dnodes_[k]][2] < mid ? k_.u_b : k_.u_t;
  return g;
}

std::vector<double> Electrostatics::solve_with_boundary(std::vector<double> b, std::span<const double> values,
                                                        SolveStats* stats) const
{
  DirichletSet d{dnodes_, std::vector<double>(values.begin(), values.end())};
  lift_dirichlet(a_, b, d);
  return solver_->solve(b, stats);
}

std::vector<double> Electrostatics::solve_psi(const AtomicCharges& atoms, SolveStats* stats) const
{
  const CoulombField field(atoms, k_.alpha, k_.eps_p);
  std::vector<double> b(mesh_.num_vertices(), 0.0);

  if (!field.empty()) {
    // Interface jump terms: −(ε_r − ε_p) ∫_{D_r} ∇G·∇v over membrane and solvent.
    const auto rule = tet_rule(5);
    for (std::size_t t = 0; t < mesh_.num_tets(); ++t) {
      const double eps = mesh_.regions[t] == Region::Solvent    ? k_.eps_s
                         : mesh_.regions[t] == Region::Membrane ? k_.eps_m
                                                                : k_.eps_p;
      if (eps == k_.eps_p) continue;
      const Tet& tet = mesh_.tets[t];
      const auto e = p1_element(mesh_.vertices[tet[0]], mesh_.vertices[tet[1]], mesh_.vertices[tet[2]],
                                mesh_.vertices[tet[3]]);
      Vec3 mean{0, 0, 0};
      for (const auto& q : rule) {
        Vec3 x{0, 0, 0};
        for (int a = 0; a < 4; ++a) x = x + q.bary[a] * mesh_.vertices[tet[a]];
        mean = mean + q.weight * field.gradient(x);
      }
      for (int a = 0; a < 4; ++a) b[tet[a]] -= (eps - k_.eps_p) * e.volume * dot(mean, e.grad[a]);
    }
    // Side boundary term: −ε_p ∫_{ΓN} ∂G/∂n v.
    const auto trule = tri_rule(5);
    const Vec3 center{0.5 * (mesh_.box.x1 + mesh_.box.x2), 0.5 * (mesh_.box.y1 + mesh_.box.y2),
                      0.5 * (mesh_.box.z1 + mesh_.box.z2)};
    for (std::size_t f = 0; f < mesh_.facets.size(); ++f) {
      if (mesh_.labels[f] != FacetLabel::Neumann) continue;
      const Tri& tri = mesh_.facets[f];
      const Vec3& p0 = mesh_.vertices[tri[0]];
      const Vec3& p1 = mesh_.vertices[tri[1]];
      const Vec3& p2 = mesh_.vertices[tri[2]];
      Vec3 n = cross(p1 - p0, p2 - p0);
      const double area = 0.5 * norm(n);
      n = (1 / (2 * area)) * n;
      if (dot(n, (1.0 / 3) * (p0 + p1 + p2) - center) < 0) n = -1.0 * n;
      for (const auto& q : trule) {
        const Vec3 x = q.bary[0] * p0 + q.bary[1] * p1 + q.bary[2] * p2;
        const double flux = k_.eps_p * dot(field.gradient(x), n) * q.weight * area;
        for (int a = 0; a < 3; ++a) b[tri[a]] -= flux * q.bary[a];
      }
    }
  }
  if (k_.sigma != 0) {
    const auto s = assemble_surface_load(mesh_, FacetLabel::MembraneSolvent, k_.tau * k_.sigma);
    for (std::size_t m = 0; m < b.size(); ++m) b[m] += s[m];
  }

  auto values = boundary_potential();
  if (!field.empty()) {
    for (std::size_t j = 0; j < dnodes_.size(); ++j) values[j] -= field.value(mesh_.vertices[dnodes_[j]]);
  }
  return solve_with_boundary(std::move(b), values, stats);
}

std::vector<double> Electrostatics::solve_linearized(std::span<const double> kappa, std::span<const double> r,
                                                     SolveStats* stats) const
{
  if (kappa.size() != sub_.num_vertices()) throw std::invalid_argument("solve_linearized: kappa length mismatch");
  if (r.size() != mesh_.num_vertices()) throw std::invalid_argument("solve_linearized: r length mismatch");
  SparseMatrix a = a_d_;
  auto values = a.values();
  for (std::size_t m = 0; m < kappa.size(); ++m) {
    const int g = sub_.vertex_map[m];
    if (fixed_[g]) continue;
    values[a.find(g, g)] += k_.beta * kappa[m] * solvent_mass_[g];
  }
  auto b = a_d_ * r;
  for (int m : dnodes_) b[m] = 0;
  return smpnp::solve(a, b, spec_, stats);
}

std::vector<double> Electrostatics::phi_tilde_rhs(const SpeciesSet& s, const SpeciesFields& c) const
{
  if (c.size() != s.size()) throw std::invalid_argument("solve_phi_tilde: species count mismatch");
  std::vector<double> charge(sub_.num_vertices(), 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (c[i].size() != sub_.num_vertices()) throw std::invalid_argument("solve_phi_tilde: field length mismatch");
    for (std::size_t m = 0; m < charge.size(); ++m) charge[m] += k_.beta * s[i].Z * c[i][m];
  }
  return assemble_load_volume(mesh_, Region::Solvent, prolong_field(sub_, charge));
}

std::vector<double> Electrostatics::solve_phi_tilde(const SpeciesSet& s, const SpeciesFields& c,
                                                    SolveStats* stats) const
{
  return solve_with_boundary(phi_tilde_rhs(s, c), std::vector<double>(dnodes_.size(), 0.0), stats);
}

}  // namespace smpnp
