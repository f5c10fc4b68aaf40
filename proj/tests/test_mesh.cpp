#include "helpers.hpp"

#include "smpnp/fem.hpp"
#include "smpnp/mesh.hpp"

#include <doctest.h>

#include <set>
#include <sstream>

using namespace smpnp;
using testing_support::unit_cube;

namespace {

const char* kCubeFile = R"(smpnp-mesh 1
vertices 8
0 0 0
1 0 0
0 1 0
1 1 0
0 0 1
1 0 1
0 1 1
1 1 1
tets 6
0 1 3 7 1
0 1 7 5 1
0 5 7 4 1
0 3 2 7 1
0 2 6 7 1
0 6 4 7 1
facets 12
0 3 1 4
0 2 3 4
4 5 7 4
4 7 6 4
0 1 5 5
0 5 4 5
2 6 7 5
2 7 3 5
0 4 6 5
0 6 2 5
1 3 7 5
1 7 5 5
)";

}  // namespace

TEST_CASE("mesh: minimal cube file loads")
{
  std::istringstream in(kCubeFile);
  const auto m = read_mesh(in);
  CHECK(m.num_vertices() == 8);
  CHECK(m.num_tets() == 6);
  CHECK(m.count(Region::Solvent) == 6);
  CHECK(m.count(FacetLabel::Dirichlet) == 4);
  CHECK(m.box.z2 == 1.0);
}

TEST_CASE("mesh: unknown region tag is rejected")
{
  std::string text = kCubeFile;
  text.replace(text.find("0 1 3 7 1"), 9, "0 1 3 7 7");
  std::istringstream in(text);
  CHECK_THROWS_WITH_AS(read_mesh(in), doctest::Contains("unknown region tag"), MeshError);
}

TEST_CASE("mesh: parse errors carry a line number")
{
  std::string text = kCubeFile;
  text.replace(text.find("1 1 0"), 5, "1 x 0");
  std::istringstream in(text);
  CHECK_THROWS_WITH_AS(read_mesh(in), doctest::Contains("line 6"), MeshError);
}

TEST_CASE("mesh: inverted tet is rejected")
{
  std::string text = kCubeFile;
  text.replace(text.find("0 1 3 7 1"), 9, "1 0 3 7 1");
  std::istringstream in(text);
  CHECK_THROWS_AS(read_mesh(in), MeshError);
}

TEST_CASE("mesh: save/load round trip on the synthetic channel is byte-identical")
{
  ChannelGeometry g;
  g.resolution = 6;
  const auto m = synth_channel_mesh(g);
  std::ostringstream a;
  write_mesh(a, m);
  std::istringstream in(a.str());
  const auto back = read_mesh(in);
  std::ostringstream b;
  write_mesh(b, back);
  CHECK(a.str() == b.str());
  CHECK(back.num_tets() == m.num_tets());
}

TEST_CASE("mesh: structured counts 6·n³ tets and (n+1)³ vertices")
{
  const auto m = unit_cube(4, 10);
  CHECK(m.num_tets() == 384);
  CHECK(m.num_vertices() == 125);
  double vol = 0;
  for (const auto& t : m.tets) {
    vol += signed_volume6(m.vertices[t[0]], m.vertices[t[1]], m.vertices[t[2]], m.vertices[t[3]]) / 6;
  }
  CHECK(vol == doctest::Approx(1000).epsilon(1e-12));
}

TEST_CASE("mesh: slab geometry has no protein and a full membrane")
{
  const auto m = synth_channel_mesh(testing_support::slab_geometry(8));
  CHECK(m.count(Region::Protein) == 0);
  CHECK(m.count(Region::Membrane) > 0);
  CHECK(m.count(FacetLabel::ProteinSolvent) == 0);
  CHECK(m.count(FacetLabel::MembraneSolvent) > 0);
  validate(m);
}

TEST_CASE("mesh: default channel has every facet label")
{
  ChannelGeometry g;
  const auto m = synth_channel_mesh(g);
  for (auto l : {FacetLabel::ProteinSolvent, FacetLabel::MembraneSolvent, FacetLabel::ProteinMembrane,
                 FacetLabel::Dirichlet, FacetLabel::Neumann}) {
    CHECK_MESSAGE(m.count(l) > 0, to_string(l));
  }
  // Every region-changing interior face is labeled and vice versa.
  const auto adj = build_face_adjacency(m.tets);
  std::set<Tri> labeled;
  for (auto f : m.facets) {
    std::sort(f.begin(), f.end());
    labeled.insert(f);
  }
  std::size_t expected = 0;
  for (const auto& f : adj.faces) {
    const bool boundary = f.tet1 < 0;
    const bool interface = !boundary && m.regions[f.tet0] != m.regions[f.tet1];
    if (boundary || interface) {
      ++expected;
      CHECK(labeled.count(f.key) == 1);
    }
  }
  CHECK(expected == m.facets.size());
}

TEST_CASE("mesh: submesh of an all-solvent cube is the cube")
{
  const auto m = unit_cube(3);
  const auto sub = extract_solvent_submesh(m);
  CHECK(sub.num_vertices() == m.num_vertices());
  CHECK(sub.num_tets() == m.num_tets());
  for (std::size_t k = 0; k < sub.num_vertices(); ++k) CHECK(sub.vertices[k] == m.vertices[sub.vertex_map[k]]);
  for (const auto l : sub.labels) CHECK(l != SolventBoundary::Interface);
}

TEST_CASE("mesh: channel submesh invariants")
{
  ChannelGeometry g;
  g.resolution = 8;
  const auto m = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(m);
  CHECK(sub.num_tets() == m.count(Region::Solvent));
  std::set<int> seen(sub.vertex_map.begin(), sub.vertex_map.end());
  CHECK(seen.size() == sub.vertex_map.size());
  for (std::size_t k = 0; k < sub.num_vertices(); ++k) {
    CHECK(sub.parent_to_local[sub.vertex_map[k]] == static_cast<int>(k));
    CHECK(sub.vertices[k] == m.vertices[sub.vertex_map[k]]);
  }
  for (std::size_t t = 0; t < sub.num_tets(); ++t) {
    const int pt = sub.parent_tet[t];
    CHECK(m.regions[pt] == Region::Solvent);
    for (int a = 0; a < 4; ++a) CHECK(sub.vertex_map[sub.tets[t][a]] == m.tets[pt][a]);
  }
  // Boundary facets of the submesh carry exactly one tag each.
  const auto adj = build_face_adjacency(sub.tets);
  std::size_t boundary = 0;
  for (const auto& f : adj.faces) boundary += f.tet1 < 0;
  CHECK(boundary == sub.facets.size());
  std::size_t interface = 0;
  for (auto l : sub.labels) interface += l == SolventBoundary::Interface;
  CHECK(interface == m.count(FacetLabel::ProteinSolvent) + m.count(FacetLabel::MembraneSolvent));
}

TEST_CASE("mesh: isolated solvent islands still give a valid submesh")
{
  auto m = unit_cube(2);
  for (std::size_t t = 0; t < m.num_tets(); ++t) m.regions[t] = t % 7 == 0 ? Region::Solvent : Region::Protein;
  const auto sub = extract_solvent_submesh(m);
  CHECK(sub.num_tets() == m.count(Region::Solvent));
}

TEST_CASE("mesh: restrict and prolong")
{
  ChannelGeometry g;
  g.resolution = 6;
  const auto m = synth_channel_mesh(g);
  const auto sub = extract_solvent_submesh(m);
  std::mt19937 rng(1);
  const auto fs = testing_support::random_vector(rng, sub.num_vertices());
  CHECK(restrict_field(sub, prolong_field(sub, fs)) == fs);

  const auto one = prolong_field(sub, std::vector<double>(sub.num_vertices(), 1.0));
  for (std::size_t k = 0; k < m.num_vertices(); ++k) CHECK(one[k] == (sub.parent_to_local[k] >= 0 ? 1.0 : 0.0));

  // ∫_{Ds} P(f)·v on Ω equals ∫_{Ds} f·R(v) on the submesh.
  const auto v = testing_support::random_vector(rng, m.num_vertices());
  const auto lhs_load = assemble_load_volume(m, Region::Solvent, prolong_field(sub, fs));
  double lhs = 0;
  for (std::size_t k = 0; k < v.size(); ++k) lhs += lhs_load[k] * v[k];
  const auto rhs_load = assemble_load_volume(sub.view(), fs);
  const auto rv = restrict_field(sub, v);
  double rhs = 0;
  for (std::size_t k = 0; k < rv.size(); ++k) rhs += rhs_load[k] * rv[k];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
}
