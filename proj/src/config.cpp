#include "smpnp/driver.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <set>
#include <sstream>

namespace smpnp {

namespace {

std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Ctx {
  int line = 0;
  [[noreturn]] void fail(const std::string& msg) const
  {
    throw ConfigError("line " + std::to_string(line) + ": " + msg);
  }
};

double to_double(const Ctx& ctx, const std::string& key, const std::string& v)
{
  double x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end || !std::isfinite(x)) ctx.fail("'" + key + "' expects a number, got '" + v + "'");
  return x;
}

int to_int(const Ctx& ctx, const std::string& key, const std::string& v)
{
  int x = 0;
  const char* end = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || ptr != end) ctx.fail("'" + key + "' expects an integer, got '" + v + "'");
  return x;
}

std::vector<double> to_list(const Ctx& ctx, const std::string& key, const std::string& v)
{
  std::istringstream is(v);
  std::vector<double> out;
  std::string tok;
  while (is >> tok) out.push_back(to_double(ctx, key, tok));
  return out;
}

using Setter = std::function<void(const Ctx&, const std::string& key, const std::string& value)>;

Setter real(double& target)
{
  return [&target](const Ctx& c, const std::string& k, const std::string& v) { target = to_double(c, k, v); };
}

Setter integer(int& target)
{
  return [&target](const Ctx& c, const std::string& k, const std::string& v) { target = to_int(c, k, v); };
}

Setter optional_real(std::optional<double>& target)
{
  return [&target](const Ctx& c, const std::string& k, const std::string& v) { target = to_double(c, k, v); };
}

struct SpeciesBlock {
  int line = 0;
  IonSpecies sp;
  std::optional<double> radius;
  std::set<std::string> seen;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& v)
{
  std::filesystem::path p(v);
  return p.is_absolute() || base.empty() ? p : base / p;
}

}  // namespace

std::vector<IonSpecies> paper_species()
{
  return {
      {"Cl", -1, ion_volume_from_radius(1.81), 0.1, 0.203},
      {"NO3", -1, ion_volume_from_radius(2.64), 0.1, 0.190},
      {"Na", 1, ion_volume_from_radius(0.95), 0.1, 0.133},
      {"K", 1, ion_volume_from_radius(1.33), 0.1, 0.196},
  };
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir)
{
  RunConfig cfg;
  auto& k = cfg.constants;
  auto& g = cfg.geometry;

  std::map<std::string, Setter> global{
      {"mesh_file", [&](const Ctx&, const std::string&, const std::string& v) { cfg.mesh_file = resolve(base_dir, v); }},
      {"atoms_file", [&](const Ctx&, const std::string&, const std::string& v) { cfg.atoms_file = resolve(base_dir, v); }},
      {"output_dir", [&](const Ctx&, const std::string&, const std::string& v) { cfg.output_dir = resolve(base_dir, v); }},
      {"synth_box",
       [&](const Ctx& c, const std::string& key, const std::string& v) {
         const auto b = to_list(c, key, v);
         if (b.size() != 6) c.fail("'synth_box' expects six numbers: x1 x2 y1 y2 z1 z2");
         g.box = {b[0], b[1], b[2], b[3], b[4], b[5]};
       }},
      {"synth_membrane_z1", real(g.membrane_z1)},
      {"synth_membrane_z2", real(g.membrane_z2)},
      {"synth_protein_z1", real(g.protein_z1)},
      {"synth_protein_z2", real(g.protein_z2)},
      {"synth_pore_radius", real(g.pore_radius)},
      {"synth_shell_radius", real(g.shell_radius)},
      {"synth_resolution", integer(g.resolution)},
      {"ring_count", integer(cfg.ring.count)},
      {"ring_charge", real(cfg.ring.charge)},
      {"ring_radius", real(cfg.ring.radius)},
      {"ring_z", [&](const Ctx& c, const std::string& key, const std::string& v) {
         cfg.ring.z = to_list(c, key, v);
         if (cfg.ring.z.empty()) c.fail("'ring_z' needs at least one value");
       }},
      {"smear_width", real(cfg.smear_width)},
      {"alpha", real(k.alpha)},
      {"beta", real(k.beta)},
      {"tau", real(k.tau)},
      {"gamma", real(k.gamma)},
      {"eps_p", real(k.eps_p)},
      {"eps_m", real(k.eps_m)},
      {"eps_s", real(k.eps_s)},
      {"u_b", real(k.u_b)},
      {"u_t", real(k.u_t)},
      {"sigma", real(k.sigma)},
      {"eta", real(k.eta)},
      {"theta", real(k.theta)},
      {"exp_cap", real(k.exp_cap)},
      {"omega", real(k.omega)},
      {"outer_tol", real(k.outer_tol)},
      {"newton_tol", real(k.newton_tol)},
      {"max_outer", integer(k.max_outer)},
      {"newton_max", integer(k.newton_max)},
      {"membrane_z1", optional_real(cfg.membrane_z1)},
      {"membrane_z2", optional_real(cfg.membrane_z2)},
      {"linear_solver",
       [&](const Ctx& c, const std::string&, const std::string& v) {
         if (v == "direct") {
           cfg.linear.method = SolveMethod::Direct;
         } else if (v == "krylov") {
           cfg.linear.method = SolveMethod::KrylovILU0;
         } else {
           c.fail("'linear_solver' must be 'direct' or 'krylov'");
         }
       }},
      {"linear_abs_tol", real(cfg.linear.abs_tol)},
      {"linear_rel_tol", real(cfg.linear.rel_tol)},
      {"linear_max_iterations", integer(cfg.linear.max_iterations)},
      {"linear_restart", integer(cfg.linear.restart)},
      {"threads", integer(cfg.threads)},
      {"profile_bins", integer(cfg.profile_bins)},
      {"pore_mask_radius", optional_real(cfg.pore_mask_radius)},
      {"current_planes", [&](const Ctx& c, const std::string& key, const std::string& v) {
         cfg.current_planes = to_list(c, key, v);
       }},
  };

  std::vector<SpeciesBlock> blocks;
  std::set<std::string> seen;
  Ctx ctx;
  std::string raw;
  while (std::getline(in, raw)) {
    ++ctx.line;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line != "[species]") ctx.fail("unknown section " + line);
      blocks.push_back({});
      blocks.back().line = ctx.line;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) ctx.fail("expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) ctx.fail("missing key");
    if (value.empty()) ctx.fail("missing value for '" + key + "'");

    if (blocks.empty()) {
      const auto it = global.find(key);
      if (it == global.end()) ctx.fail("unknown key '" + key + "'");
      if (!seen.insert(key).second) ctx.fail("duplicate key '" + key + "'");
      it->second(ctx, key, value);
      continue;
    }
    auto& b = blocks.back();
    if (!b.seen.insert(key).second) ctx.fail("duplicate key '" + key + "' in [species]");
    if (key == "name") {
      b.sp.name = value;
    } else if (key == "Z") {
      b.sp.Z = to_int(ctx, key, value);
    } else if (key == "v") {
      b.sp.v = to_double(ctx, key, value);
    } else if (key == "radius") {
      b.radius = to_double(ctx, key, value);
    } else if (key == "c_b") {
      b.sp.c_b = to_double(ctx, key, value);
    } else if (key == "D_b") {
      b.sp.D_b = to_double(ctx, key, value);
    } else {
      ctx.fail("unknown key '" + key + "' in [species]");
    }
  }

  for (auto& b : blocks) {
    ctx.line = b.line;
    for (const char* req : {"name", "Z", "c_b", "D_b"}) {
      if (!b.seen.count(req)) ctx.fail(std::string("[species] block is missing '") + req + "'");
    }
    const bool has_v = b.seen.count("v") != 0;
    if (has_v == b.radius.has_value()) ctx.fail("[species] block needs exactly one of 'v' or 'radius'");
    if (b.radius) {
      if (!(*b.radius >= 0)) ctx.fail("species radius must be >= 0");
      b.sp.v = ion_volume_from_radius(*b.radius);
    }
    cfg.species.push_back(b.sp);
  }
  if (cfg.species.empty()) throw ConfigError("config defines no [species] blocks");
  if (cfg.threads < 1) throw ConfigError("'threads' must be >= 1");
  if (cfg.profile_bins < 1) throw ConfigError("'profile_bins' must be >= 1");
  if (cfg.ring.count < 0) throw ConfigError("'ring_count' must be >= 0");
  if (cfg.pore_mask_radius && !(*cfg.pore_mask_radius > 0)) throw ConfigError("'pore_mask_radius' must be positive");
  try {
    cfg.constants.validate();
    cfg.linear.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  try {
    return parse_config(in, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace smpnp
