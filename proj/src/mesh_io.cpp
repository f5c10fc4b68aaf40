#include "smpnp/mesh.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace smpnp {

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  // Next non-blank line; throws at end of input.
  std::istringstream next(const char* expecting)
  {
    std::string line;
    while (std::getline(in_, line)) {
      ++number_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw MeshError("line " + std::to_string(number_ + 1) + ": unexpected end of file, expected " + expecting);
  }

  [[noreturn]] void error(const std::string& what) const
  {
    throw MeshError("line " + std::to_string(number_) + ": " + what);
  }

  int number() const { return number_; }

 private:
  std::istream& in_;
  int number_ = 0;
};

template <typename... T>
bool read_exact(std::istringstream& ss, T&... values)
{
  (ss >> ... >> values);
  if (!ss) return false;
  std::string rest;
  return !(ss >> rest);
}

std::size_t read_count(LineReader& lines, const std::string& keyword)
{
  auto ss = lines.next(keyword.c_str());
  std::string word;
  long long n = -1;
  if (!read_exact(ss, word, n) || word != keyword || n < 0) {
    lines.error("expected '" + keyword + " <count>'");
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

LabeledMesh read_mesh(std::istream& in)
{
  LineReader lines(in);
  {
    auto ss = lines.next("header");
    std::string magic;
    int version = 0;
    if (!read_exact(ss, magic, version) || magic != "smpnp-mesh" || version != 1) {
      lines.error("expected header 'smpnp-mesh 1'");
    }
  }

  LabeledMesh mesh;
  const std::size_t nv = read_count(lines, "vertices");
  mesh.vertices.resize(nv);
  for (auto& v : mesh.vertices) {
    auto ss = lines.next("vertex");
    if (!read_exact(ss, v[0], v[1], v[2])) lines.error("expected 'x y z'");
  }

  const std::size_t nt = read_count(lines, "tets");
  mesh.tets.resize(nt);
  mesh.regions.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    auto ss = lines.next("tet");
    int region = 0;
    auto& tet = mesh.tets[t];
    if (!read_exact(ss, tet[0], tet[1], tet[2], tet[3], region)) lines.error("expected 'i0 i1 i2 i3 region'");
    if (region < 1 || region > 3) lines.error("unknown region tag " + std::to_string(region));
    for (int v : tet) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) lines.error("vertex index " + std::to_string(v) + " out of range");
    }
    mesh.regions[t] = static_cast<Region>(region);
  }

  const std::size_t nf = read_count(lines, "facets");
  mesh.facets.resize(nf);
  mesh.labels.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    auto ss = lines.next("facet");
    int label = 0;
    auto& tri = mesh.facets[f];
    if (!read_exact(ss, tri[0], tri[1], tri[2], label)) lines.error("expected 'i0 i1 i2 label'");
    if (label < 1 || label > 5) lines.error("unknown facet label " + std::to_string(label));
    for (int v : tri) {
      if (v < 0 || static_cast<std::size_t>(v) >= nv) lines.error("vertex index " + std::to_string(v) + " out of range");
    }
    mesh.labels[f] = static_cast<FacetLabel>(label);
  }

  std::string trailing;
  if (in >> trailing) {
    throw MeshError("line " + std::to_string(lines.number() + 1) + ": unexpected trailing content '" + trailing + "'");
  }

  update_extents(mesh);
  validate(mesh);
  return mesh;
}

void write_mesh(std::ostream& out, const LabeledMesh& mesh)
{
  char buf[128];
  out << "smpnp-mesh 1\n";
  out << "vertices " << mesh.vertices.size() << '\n';
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", v[0], v[1], v[2]);
    out << buf;
  }
  out << "tets " << mesh.tets.size() << '\n';
  for (std::size_t t = 0; t < mesh.tets.size(); ++t) {
    const auto& k = mesh.tets[t];
    out << k[0] << ' ' << k[1] << ' ' << k[2] << ' ' << k[3] << ' ' << static_cast<int>(mesh.regions[t]) << '\n';
  }
  out << "facets " << mesh.facets.size() << '\n';
  for (std::size_t f = 0; f < mesh.facets.size(); ++f) {
    const auto& k = mesh.facets[f];
    out << k[0] << ' ' << k[1] << ' ' << k[2] << ' ' << static_cast<int>(mesh.labels[f]) << '\n';
  }
}

LabeledMesh load_mesh(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open mesh file " + path.string());
  try {
    return read_mesh(in);
  } catch (const MeshError& e) {
    throw MeshError(path.string() + ": " + e.what());
  }
}

void save_mesh(const LabeledMesh& mesh, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out) throw MeshError("cannot write mesh file " + path.string());
  write_mesh(out, mesh);
  if (!out) throw MeshError("write failed for " + path.string());
}

}  // namespace smpnp
