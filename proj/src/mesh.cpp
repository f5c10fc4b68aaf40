#include "smpnp/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace smpnp {

const char* to_string(Region r)
{
  switch (r) {
    case Region::Solvent: return "Solvent";
    case Region::Protein: return "Protein";
    case Region::Membrane: return "Membrane";
  }
  return "?";
}

const char* to_string(FacetLabel l)
{
  switch (l) {
    case FacetLabel::ProteinSolvent: return "Gamma_p";
    case FacetLabel::MembraneSolvent: return "Gamma_m";
    case FacetLabel::ProteinMembrane: return "Gamma_pm";
    case FacetLabel::Dirichlet: return "Gamma_D";
    case FacetLabel::Neumann: return "Gamma_N";
  }
  return "?";
}

double Box::diagonal() const
{
  return std::sqrt((x2 - x1) * (x2 - x1) + (y2 - y1) * (y2 - y1) + (z2 - z1) * (z2 - z1));
}

std::size_t LabeledMesh::count(Region r) const
{
  return static_cast<std::size_t>(std::count(regions.begin(), regions.end(), r));
}

std::size_t LabeledMesh::count(FacetLabel l) const
{
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), l));
}

void update_extents(LabeledMesh& mesh)
{
  constexpr double inf = std::numeric_limits<double>::infinity();
  Box b{inf, -inf, inf, -inf, inf, -inf};
  for (const auto& v : mesh.vertices) {
    b.x1 = std::min(b.x1, v[0]);
    b.x2 = std::max(b.x2, v[0]);
    b.y1 = std::min(b.y1, v[1]);
    b.y2 = std::max(b.y2, v[1]);
    b.z1 = std::min(b.z1, v[2]);
    b.z2 = std::max(b.z2, v[2]);
  }
  mesh.box = b;

  double zlo = inf, zhi = -inf;
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    if (mesh.regions[t] != Region::Membrane) continue;
    for (int v : mesh.tets[t]) {
      zlo = std::min(zlo, mesh.vertices[v][2]);
      zhi = std::max(zhi, mesh.vertices[v][2]);
    }
  }
  if (zlo > zhi) {
    zlo = zhi = std::numeric_limits<double>::quiet_NaN();
  }
  mesh.membrane_z1 = zlo;
  mesh.membrane_z2 = zhi;
}

namespace {

// Face opposite local vertex k.
constexpr int kFaceVerts[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};

Tri sorted(Tri t)
{
  std::sort(t.begin(), t.end());
  return t;
}

}  // namespace

FaceAdjacency build_face_adjacency(std::span<const Tet> tets)
{
  struct Entry {
    Tri key;
    int tet;
    int local;
  };
  std::vector<Entry> entries;
  entries.reserve(tets.size() * 4);
  for (std::size_t t = 0; t < tets.size(); ++t) {
    for (int f = 0; f < 4; ++f) {
      Tri tri{tets[t][kFaceVerts[f][0]], tets[t][kFaceVerts[f][1]], tets[t][kFaceVerts[f][2]]};
      entries.push_back({sorted(tri), static_cast<int>(t), f});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.key != b.key ? a.key < b.key : a.tet < b.tet;
  });

  FaceAdjacency adj;
  adj.faces.reserve(entries.size() / 2 + 16);
  for (std::size_t i = 0; i < entries.size();) {
    std::size_t j = i + 1;
    while (j < entries.size() && entries[j].key == entries[i].key) ++j;
    if (j - i > 2) {
      throw MeshError("face (" + std::to_string(entries[i].key[0]) + "," + std::to_string(entries[i].key[1]) +
                      "," + std::to_string(entries[i].key[2]) + ") shared by more than two tets");
    }
    FaceAdjacency::Face face;
    face.key = entries[i].key;
    face.tet0 = entries[i].tet;
    face.local0 = entries[i].local;
    if (j - i == 2) face.tet1 = entries[i + 1].tet;
    adj.faces.push_back(face);
    i = j;
  }
  return adj;
}

namespace {

const FaceAdjacency::Face* find_face(const FaceAdjacency& adj, const Tri& key)
{
  auto it = std::lower_bound(adj.faces.begin(), adj.faces.end(), key,
                             [](const FaceAdjacency::Face& f, const Tri& k) { return f.key < k; });
  if (it == adj.faces.end() || it->key != key) return nullptr;
  return &*it;
}

bool all_near(const LabeledMesh& m, const Tri& f, int axis, double value, double tol)
{
  return std::all_of(f.begin(), f.end(), [&](int v) { return std::abs(m.vertices[v][axis] - value) <= tol; });
}

bool on_dirichlet_plane(const LabeledMesh& m, const Tri& f, double tol)
{
  return all_near(m, f, 2, m.box.z1, tol) || all_near(m, f, 2, m.box.z2, tol);
}

bool on_side_plane(const LabeledMesh& m, const Tri& f, double tol)
{
  return all_near(m, f, 0, m.box.x1, tol) || all_near(m, f, 0, m.box.x2, tol) ||
         all_near(m, f, 1, m.box.y1, tol) || all_near(m, f, 1, m.box.y2, tol);
}

bool region_pair_is(Region a, Region b, Region x, Region y)
{
  return (a == x && b == y) || (a == y && b == x);
}

[[noreturn]] void fail(const std::string& what) { throw MeshError("invalid mesh: " + what); }

}  // namespace

void validate(const LabeledMesh& m)
{
  const auto nv = static_cast<int>(m.vertices.size());
  if (m.regions.size() != m.tets.size()) fail("region count differs from tet count");
  if (m.labels.size() != m.facets.size()) fail("label count differs from facet count");

  for (std::size_t t = 0; t < m.tets.size(); ++t) {
    for (int v : m.tets[t]) {
      if (v < 0 || v >= nv) fail("tet " + std::to_string(t) + " has vertex index out of range");
    }
    const int r = static_cast<int>(m.regions[t]);
    if (r < 1 || r > 3) fail("unknown region tag " + std::to_string(r) + " on tet " + std::to_string(t));
    const auto& tet = m.tets[t];
    const double vol6 =
        signed_volume6(m.vertices[tet[0]], m.vertices[tet[1]], m.vertices[tet[2]], m.vertices[tet[3]]);
    if (!(vol6 > 0)) fail("inverted tet " + std::to_string(t) + " (non-positive signed volume)");
  }

  const FaceAdjacency adj = build_face_adjacency(m.tets);
  const double tol = 1e-9 * std::max(1.0, m.box.diagonal());

  std::vector<int> labeled_by(adj.faces.size(), -1);
  for (std::size_t i = 0; i < m.facets.size(); ++i) {
    const Tri& f = m.facets[i];
    for (int v : f) {
      if (v < 0 || v >= nv) fail("facet " + std::to_string(i) + " has vertex index out of range");
    }
    const int l = static_cast<int>(m.labels[i]);
    if (l < 1 || l > 5) fail("unknown facet label " + std::to_string(l) + " on facet " + std::to_string(i));

    const auto* face = find_face(adj, sorted(f));
    if (face == nullptr) fail("facet " + std::to_string(i) + " is not a face of any tet");
    const auto slot = static_cast<std::size_t>(face - adj.faces.data());
    if (labeled_by[slot] >= 0) {
      fail("facet " + std::to_string(i) + " duplicates facet " + std::to_string(labeled_by[slot]));
    }
    labeled_by[slot] = static_cast<int>(i);

    const bool boundary = face->tet1 < 0;
    const std::string id = "facet " + std::to_string(i) + " (" + to_string(m.labels[i]) + ")";
    switch (m.labels[i]) {
      case FacetLabel::Dirichlet:
        if (!boundary) fail(id + " is not on the boundary");
        if (!on_dirichlet_plane(m, f, tol)) fail(id + " does not lie on z = z1 or z = z2");
        break;
      case FacetLabel::Neumann:
        if (!boundary) fail(id + " is not on the boundary");
        if (!on_side_plane(m, f, tol)) fail(id + " does not lie on a side plane");
        break;
      case FacetLabel::ProteinSolvent:
      case FacetLabel::MembraneSolvent:
      case FacetLabel::ProteinMembrane: {
        if (boundary) fail(id + " is on the boundary, expected an interface");
        const Region a = m.regions[face->tet0];
        const Region b = m.regions[face->tet1];
        const bool ok = m.labels[i] == FacetLabel::ProteinSolvent
                            ? region_pair_is(a, b, Region::Protein, Region::Solvent)
                        : m.labels[i] == FacetLabel::MembraneSolvent
                            ? region_pair_is(a, b, Region::Membrane, Region::Solvent)
                            : region_pair_is(a, b, Region::Protein, Region::Membrane);
        if (!ok) fail(id + " separates " + to_string(a) + " from " + to_string(b));
        break;
      }
    }
  }

  for (std::size_t s = 0; s < adj.faces.size(); ++s) {
    const auto& face = adj.faces[s];
    const bool needs_label = face.tet1 < 0 || m.regions[face.tet0] != m.regions[face.tet1];
    if (needs_label && labeled_by[s] < 0) {
      fail(std::string(face.tet1 < 0 ? "unlabeled boundary face" : "unlabeled interface face") + " of tet " +
           std::to_string(face.tet0));
    }
  }
}

SolventSubmesh extract_solvent_submesh(const LabeledMesh& mesh)
{
  SolventSubmesh sub;
  sub.parent = &mesh;
  sub.parent_to_local.assign(mesh.num_vertices(), -1);

  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    if (mesh.regions[t] != Region::Solvent) continue;
    Tet local{};
    for (int k = 0; k < 4; ++k) {
      const int p = mesh.tets[t][k];
      if (sub.parent_to_local[p] < 0) {
        sub.parent_to_local[p] = static_cast<int>(sub.vertex_map.size());
        sub.vertex_map.push_back(p);
        sub.vertices.push_back(mesh.vertices[p]);
      }
      local[k] = sub.parent_to_local[p];
    }
    sub.tets.push_back(local);
    sub.parent_tet.push_back(static_cast<int>(t));
  }
  if (sub.tets.empty()) throw MeshError("mesh has no Solvent tets");

  // Boundary faces of Ds come from parent facets that touch a solvent tet
  // on exactly one side.
  const FaceAdjacency adj = build_face_adjacency(mesh.tets);
  for (std::size_t i = 0; i < mesh.facets.size(); ++i) {
    const auto* face = find_face(adj, sorted(mesh.facets[i]));
    const bool s0 = face != nullptr && mesh.regions[face->tet0] == Region::Solvent;
    const bool s1 = face != nullptr && face->tet1 >= 0 && mesh.regions[face->tet1] == Region::Solvent;
    if (s0 == s1) continue;

    SolventBoundary tag{};
    switch (mesh.labels[i]) {
      case FacetLabel::ProteinSolvent:
      case FacetLabel::MembraneSolvent: tag = SolventBoundary::Interface; break;
      case FacetLabel::Dirichlet: tag = SolventBoundary::Dirichlet; break;
      case FacetLabel::Neumann: tag = SolventBoundary::Neumann; break;
      case FacetLabel::ProteinMembrane: continue;
    }
    Tri local{};
    for (int k = 0; k < 3; ++k) local[k] = sub.parent_to_local[mesh.facets[i][k]];
    sub.facets.push_back(local);
    sub.labels.push_back(tag);
  }
  return sub;
}

std::vector<double> restrict_field(const SolventSubmesh& sub, std::span<const double> omega_field)
{
  if (omega_field.size() != sub.parent_to_local.size()) {
    throw std::invalid_argument("restrict_field: field length " + std::to_string(omega_field.size()) +
                                " does not match parent node count " +
                                std::to_string(sub.parent_to_local.size()));
  }
  std::vector<double> out(sub.vertex_map.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = omega_field[sub.vertex_map[i]];
  return out;
}

std::vector<double> prolong_field(const SolventSubmesh& sub, std::span<const double> solvent_field)
{
  if (solvent_field.size() != sub.vertex_map.size()) {
    throw std::invalid_argument("prolong_field: field length " + std::to_string(solvent_field.size()) +
                                " does not match solvent node count " + std::to_string(sub.vertex_map.size()));
  }
  std::vector<double> out(sub.parent_to_local.size(), 0.0);
  for (std::size_t i = 0; i < solvent_field.size(); ++i) out[sub.vertex_map[i]] = solvent_field[i];
  return out;
}

}  // namespace smpnp
