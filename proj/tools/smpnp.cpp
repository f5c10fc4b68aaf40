#include "smpnp/driver.hpp"
#include "smpnp/output.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <iostream>

namespace {

int run(const std::string& config_path, bool verbose)
{
  if (verbose) spdlog::set_level(spdlog::level::debug);
  const auto cfg = smpnp::load_config(config_path);
  const auto problem = smpnp::make_problem(cfg);
  const auto result = smpnp::solve(*problem);
  smpnp::write_outputs(cfg.output_dir, cfg, *problem, result);
  std::cout << result.message << "\n"
            << "outputs written to " << cfg.output_dir.string() << "\n";
  return result.converged ? 0 : 2;
}

int check(const std::string& config_path)
{
  const auto cfg = smpnp::load_config(config_path);
  const auto problem = smpnp::make_problem(cfg);
  const auto& m = problem->mesh;
  std::cout << "config ok\n"
            << "vertices " << m.num_vertices() << ", tets " << m.num_tets() << " (solvent "
            << m.count(smpnp::Region::Solvent) << ", protein " << m.count(smpnp::Region::Protein) << ", membrane "
            << m.count(smpnp::Region::Membrane) << ")\n"
            << "species " << problem->species.size() << ", atoms " << problem->atoms.size() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Size-modified Poisson-Nernst-Planck ion channel solver"};
  app.require_subcommand(1);

  std::string config_path;
  bool verbose = false;
  auto* run_cmd = app.add_subcommand("run", "solve the model described by a config file");
  run_cmd->add_option("--config", config_path, "config file")->required();
  run_cmd->add_flag("-v,--verbose", verbose, "log every outer iteration");

  auto* check_cmd = app.add_subcommand("check", "validate a config file, its mesh and its atoms");
  check_cmd->add_option("--config", config_path, "config file")->required();

  smpnp::ChannelGeometry g;
  std::string out_path;
  std::vector<double> box;
  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  mesh_cmd->require_subcommand(1);
  auto* synth = mesh_cmd->add_subcommand("synth", "write a structured channel mesh");
  synth->add_option("--out", out_path, "output mesh file")->required();
  synth->add_option("--resolution", g.resolution, "cells per direction")->capture_default_str();
  synth->add_option("--pore-radius", g.pore_radius, "pore radius")->capture_default_str();
  synth->add_option("--shell-radius", g.shell_radius, "protein shell radius, 0 for a plain slab")->capture_default_str();
  synth->add_option("--membrane-z1", g.membrane_z1, "membrane bottom plane")->capture_default_str();
  synth->add_option("--membrane-z2", g.membrane_z2, "membrane top plane")->capture_default_str();
  synth->add_option("--protein-z1", g.protein_z1, "protein bottom")->capture_default_str();
  synth->add_option("--protein-z2", g.protein_z2, "protein top")->capture_default_str();
  synth->add_option("--box", box, "x1 x2 y1 y2 z1 z2")->expected(6);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*run_cmd) return run(config_path, verbose);
    if (*check_cmd) return check(config_path);
    if (*synth) {
      if (!box.empty()) g.box = {box[0], box[1], box[2], box[3], box[4], box[5]};
      const auto mesh = smpnp::synth_channel_mesh(g);
      smpnp::save_mesh(mesh, out_path);
      std::cout << "wrote " << out_path << ": " << mesh.num_vertices() << " vertices, " << mesh.num_tets()
                << " tets\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
