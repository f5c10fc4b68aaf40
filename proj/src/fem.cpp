#include "smpnp/fem.hpp"

#include "smpnp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace smpnp {

ElementGeometry p1_element(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d)
{
  const Vec3 e1 = b - a, e2 = c - a, e3 = d - a;
  const double det = dot(e1, cross(e2, e3));
  if (!(det > 0) || !std::isfinite(det)) throw MeshError("degenerate or inverted element");
  ElementGeometry g;
  g.volume = det / 6;
  g.grad[1] = (1 / det) * cross(e2, e3);
  g.grad[2] = (1 / det) * cross(e3, e1);
  g.grad[3] = (1 / det) * cross(e1, e2);
  for (int k = 0; k < 3; ++k) g.grad[0][k] = -(g.grad[1][k] + g.grad[2][k] + g.grad[3][k]);
  return g;
}

std::array<std::array<double, 4>, 4> local_stiffness(const ElementGeometry& e)
{
  std::array<std::array<double, 4>, 4> k{};
  for (int i = 0; i < 4; ++i) {
    for (int j = i; j < 4; ++j) k[i][j] = k[j][i] = e.volume * dot(e.grad[i], e.grad[j]);
  }
  return k;
}

StiffnessAssembler::StiffnessAssembler(TetMeshView mesh) : mesh_(mesh)
{
  const int n = static_cast<int>(mesh.num_vertices());
  TripletBuilder tb(n);
  tb.reserve(16 * mesh.num_tets());
  elements_.reserve(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets[t];
    for (int v : tet) {
      if (v < 0 || v >= n) throw MeshError("tet " + std::to_string(t) + " references a missing vertex");
    }
    try {
      elements_.push_back(p1_element(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]],
                                     mesh.vertices[tet[3]]));
    } catch (const MeshError&) {
      throw MeshError("inverted or degenerate element " + std::to_string(t));
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) tb.add(tet[a], tet[b], 0.0);
    }
  }
  pattern_ = tb.build();
  slots_.resize(mesh.num_tets());
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    const Tet& tet = mesh.tets[t];
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) slots_[t][4 * a + b] = pattern_.find(tet[a], tet[b]);
    }
  }
}

SparseMatrix StiffnessAssembler::assemble(std::span<const double> tet_weights) const
{
  if (tet_weights.size() != elements_.size()) throw std::invalid_argument("stiffness: one weight per tet required");
  SparseMatrix k = pattern_;
  auto val = k.values();
  for (std::size_t t = 0; t < elements_.size(); ++t) {
    const double w = tet_weights[t];
    if (!std::isfinite(w)) throw std::invalid_argument("stiffness: non-finite weight on tet " + std::to_string(t));
    const auto& e = elements_[t];
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) val[slots_[t][4 * a + b]] += w * e.volume * dot(e.grad[a], e.grad[b]);
    }
  }
  return k;
}

SparseMatrix assemble_weighted_stiffness(TetMeshView mesh, std::span<const double> tet_weights)
{
  return StiffnessAssembler(mesh).assemble(tet_weights);
}

std::vector<double> tet_weights_from_nodal(TetMeshView mesh, std::span<const double> nodal)
{
  if (nodal.size() != mesh.num_vertices()) throw std::invalid_argument("nodal weights: length mismatch");
  std::vector<double> w(mesh.num_tets());
  for (std::size_t t = 0; t < w.size(); ++t) {
    const Tet& tet = mesh.tets[t];
    w[t] = 0.25 * (nodal[tet[0]] + nodal[tet[1]] + nodal[tet[2]] + nodal[tet[3]]);
  }
  return w;
}

std::vector<double> region_weights(const LabeledMesh& mesh, double solvent, double protein, double membrane)
{
  std::vector<double> w(mesh.num_tets());
  for (std::size_t t = 0; t < w.size(); ++t) {
    switch (mesh.regions[t]) {
      case Region::Solvent: w[t] = solvent; break;
      case Region::Protein: w[t] = protein; break;
      case Region::Membrane: w[t] = membrane; break;
    }
  }
  return w;
}

void DirichletSet::validate(std::size_t num_vertices) const
{
  if (nodes.size() != values.size()) throw std::invalid_argument("DirichletSet: nodes and values differ in length");
  std::vector<char> seen(num_vertices, 0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const int i = nodes[k];
    if (i < 0 || static_cast<std::size_t>(i) >= num_vertices) {
      throw std::invalid_argument("DirichletSet: node " + std::to_string(i) + " out of range");
    }
    if (seen[i]) throw std::invalid_argument("DirichletSet: node " + std::to_string(i) + " repeated");
    seen[i] = 1;
    if (!std::isfinite(values[k])) throw std::invalid_argument("DirichletSet: non-finite boundary value");
  }
}

namespace {

std::vector<int> sorted_unique(std::vector<int> v)
{
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

void check_length(std::size_t got, std::size_t want, const char* what)
{
  if (got != want) {
    throw std::invalid_argument(std::string(what) + ": field length " + std::to_string(got) + " does not match " +
                                std::to_string(want) + " vertices");
  }
}

template <typename Pred>
std::vector<double> load_volume(TetMeshView mesh, std::span<const double> rho, Pred use_tet, const DirichletSet* d)
{
  check_length(rho.size(), mesh.num_vertices(), "volume load");
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t t = 0; t < mesh.num_tets(); ++t) {
    if (!use_tet(t)) continue;
    const Tet& tet = mesh.tets[t];
    const Vec3& p0 = mesh.vertices[tet[0]];
    const double vol = signed_volume6(p0, mesh.vertices[tet[1]], mesh.vertices[tet[2]], mesh.vertices[tet[3]]) / 6;
    const double sum = rho[tet[0]] + rho[tet[1]] + rho[tet[2]] + rho[tet[3]];
    for (int a = 0; a < 4; ++a) b[tet[a]] += vol / 20 * (sum + rho[tet[a]]);
  }
  if (d != nullptr) {
    for (int i : d->nodes) b.at(i) = 0;
  }
  return b;
}

std::vector<std::size_t> labeled_facets(const LabeledMesh& mesh, FacetLabel label)
{
  std::vector<std::size_t> out;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    if (mesh.labels[f] == label) out.push_back(f);
  }
  if (out.empty()) throw std::invalid_argument(std::string("surface load: unknown label ") + to_string(label));
  return out;
}

}  // namespace

std::vector<int> dirichlet_nodes(const LabeledMesh& mesh)
{
  std::vector<int> v;
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    if (mesh.labels[f] == FacetLabel::Dirichlet) v.insert(v.end(), mesh.facets[f].begin(), mesh.facets[f].end());
  }
  return sorted_unique(std::move(v));
}

std::vector<int> dirichlet_nodes(const SolventSubmesh& sub)
{
  std::vector<int> v;
  for (std::size_t f = 0; f < sub.facets.size(); ++f) {
    if (sub.labels[f] == SolventBoundary::Dirichlet) v.insert(v.end(), sub.facets[f].begin(), sub.facets[f].end());
  }
  return sorted_unique(std::move(v));
}

std::vector<double> assemble_load_volume(TetMeshView mesh, std::span<const double> density,
                                         const DirichletSet* test_space)
{
  return load_volume(mesh, density, [](std::size_t) { return true; }, test_space);
}

std::vector<double> assemble_load_volume(const LabeledMesh& mesh, Region region, std::span<const double> density,
                                         const DirichletSet* test_space)
{
  return load_volume(mesh.view(), density, [&](std::size_t t) { return mesh.regions[t] == region; }, test_space);
}

std::vector<double> assemble_load_function(TetMeshView mesh, const std::function<double(const Vec3&)>& f,
                                           int degree)
{
  const auto rule = tet_rule(degree);
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (const Tet& tet : mesh.tets) {
    const Vec3* p[4] = {&mesh.vertices[tet[0]], &mesh.vertices[tet[1]], &mesh.vertices[tet[2]],
                        &mesh.vertices[tet[3]]};
    const double vol = signed_volume6(*p[0], *p[1], *p[2], *p[3]) / 6;
    for (const auto& q : rule) {
      Vec3 x{0, 0, 0};
      for (int a = 0; a < 4; ++a) x = x + q.bary[a] * *p[a];
      const double fx = f(x) * q.weight * vol;
      for (int a = 0; a < 4; ++a) b[tet[a]] += fx * q.bary[a];
    }
  }
  return b;
}

std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label, double density)
{
  const auto facets = labeled_facets(mesh, label);
  std::vector<double> b(mesh.num_vertices(), 0.0);
  if (density == 0.0) return b;
  for (std::size_t f : facets) {
    const Tri& tri = mesh.facets[f];
    const double share = density * triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]) / 3;
    for (int v : tri) b[v] += share;
  }
  return b;
}

std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label,
                                          std::span<const double> facet_density)
{
  const auto facets = labeled_facets(mesh, label);
  if (facet_density.size() != facets.size()) throw std::invalid_argument("surface load: one density per labeled facet");
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t k = 0; k < facets.size(); ++k) {
    const Tri& tri = mesh.facets[facets[k]];
    const double share =
        facet_density[k] * triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]], mesh.vertices[tri[2]]) / 3;
    for (int v : tri) b[v] += share;
  }
  return b;
}

std::vector<double> assemble_surface_load(const LabeledMesh& mesh, FacetLabel label,
                                          const std::function<double(const Vec3&)>& density, int degree)
{
  const auto facets = labeled_facets(mesh, label);
  const auto rule = tri_rule(degree);
  std::vector<double> b(mesh.num_vertices(), 0.0);
  for (std::size_t f : facets) {
    const Tri& tri = mesh.facets[f];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& bb = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double area = triangle_area(a, bb, c);
    for (const auto& q : rule) {
      const Vec3 x = q.bary[0] * a + q.bary[1] * bb + q.bary[2] * c;
      const double fx = density(x) * q.weight * area;
      for (int k = 0; k < 3; ++k) b[tri[k]] += fx * q.bary[k];
    }
  }
  return b;
}

void apply_dirichlet(SparseMatrix& a, std::vector<double>& b, const DirichletSet& d)
{
  const int n = a.size();
  check_length(b.size(), n, "apply_dirichlet");
  d.validate(n);
  if (d.nodes.empty()) return;
  lift_dirichlet(a, b, d);
  std::vector<char> fixed(n, 0);
  for (int i : d.nodes) fixed[i] = 1;
  const auto off = a.row_offsets();
  const auto col = a.columns();
  auto val = a.values();
  for (int i = 0; i < n; ++i) {
    for (int p = off[i]; p < off[i + 1]; ++p) {
      if (fixed[i]) {
        val[p] = col[p] == i ? 1.0 : 0.0;
      } else if (fixed[col[p]]) {
        val[p] = 0.0;
      }
    }
    if (fixed[i] && a.find(i, i) < 0) throw std::invalid_argument("apply_dirichlet: missing diagonal entry");
  }
}

void lift_dirichlet(const SparseMatrix& a, std::vector<double>& b, const DirichletSet& d)
{
  const int n = a.size();
  check_length(b.size(), n, "lift_dirichlet");
  if (d.nodes.empty()) return;
  std::vector<char> fixed(n, 0);
  std::vector<double> g(n, 0.0);
  for (std::size_t k = 0; k < d.nodes.size(); ++k) {
    fixed.at(d.nodes[k]) = 1;
    g[d.nodes[k]] = d.values[k];
  }
  const auto off = a.row_offsets();
  const auto col = a.columns();
  const auto val = a.values();
  for (int i = 0; i < n; ++i) {
    if (fixed[i]) {
      b[i] = g[i];
      continue;
    }
    for (int p = off[i]; p < off[i + 1]; ++p) {
      if (fixed[col[p]]) b[i] -= val[p] * g[col[p]];
    }
  }
}

double l2_norm(TetMeshView mesh, std::span<const double> f)
{
  check_length(f.size(), mesh.num_vertices(), "l2_norm");
  double s = 0;
  for (const Tet& tet : mesh.tets) {
    const double vol =
        signed_volume6(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]], mesh.vertices[tet[3]]) / 6;
    double sum = 0, sq = 0;
    for (int v : tet) {
      sum += f[v];
      sq += f[v] * f[v];
    }
    s += vol / 20 * (sq + sum * sum);
  }
  return std::sqrt(std::max(s, 0.0));
}

double l2_diff(TetMeshView mesh, std::span<const double> f, std::span<const double> g)
{
  check_length(f.size(), mesh.num_vertices(), "l2_diff");
  check_length(g.size(), mesh.num_vertices(), "l2_diff");
  std::vector<double> d(f.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = f[i] - g[i];
  return l2_norm(mesh, d);
}

double integrate(TetMeshView mesh, std::span<const double> f)
{
  check_length(f.size(), mesh.num_vertices(), "integrate");
  double s = 0;
  for (const Tet& tet : mesh.tets) {
    const double vol =
        signed_volume6(mesh.vertices[tet[0]], mesh.vertices[tet[1]], mesh.vertices[tet[2]], mesh.vertices[tet[3]]) / 6;
    s += vol * 0.25 * (f[tet[0]] + f[tet[1]] + f[tet[2]] + f[tet[3]]);
  }
  return s;
}

double interpolate(TetMeshView mesh, std::span<const double> f, std::size_t tet, const std::array<double, 4>& bary)
{
  const Tet& t = mesh.tets[tet];
  return bary[0] * f[t[0]] + bary[1] * f[t[1]] + bary[2] * f[t[2]] + bary[3] * f[t[3]];
}

}  // namespace smpnp
