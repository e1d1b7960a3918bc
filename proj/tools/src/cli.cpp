#include <exception>
#include <ostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "steklov/errors.hpp"
#include "steklov/parallel.hpp"
#include "steklov_cli/cli.hpp"

namespace steklov::cli {

namespace {

void add_domain_options(CLI::App* cmd, DomainArgs& d, std::string& h_text) {
  cmd->add_option("--gen", d.generation, "Prefractal generation")->capture_default_str();
  cmd->add_option("--length", d.length, "Side length of the square")->capture_default_str();
  cmd->add_option("--refine", d.refine, "Refinement level r (grid pitch * 2^-r); overrides --h");
  cmd->add_option("--h", h_text, "Target mesh size, e.g. 1/64")->capture_default_str();
  cmd->add_option("--gamma", d.gamma, "Gamma tags: all or a list of fractal,lateral,top")->capture_default_str();
  cmd->add_option("--measure", d.measure, "Boundary measure")
      ->check(CLI::IsMember({"arclength", "selfsimilar"}))
      ->capture_default_str();
  cmd->add_option("--mass", d.mass, "Total mass of the self-similar measure")->capture_default_str();
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Laplacian, Robin and Dirichlet-to-Neumann experiments on Minkowski prefractal domains", "steklov_lab"};
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(tool_version()));

  Common common;
  std::string out_dir = ".";
  app.add_option("--threads", common.threads, "Worker threads (default: STEKLOV_LAB_THREADS or 1)");
  app.add_flag("--deterministic", common.deterministic, "Single-threaded run without timestamps or timings");
  auto* seed_opt = app.add_option("--seed", common.seed, "Seed for random start vectors and data");

  GeometryArgs geo;
  auto* geometry = app.add_subcommand("geometry", "Write prefractal chain and domain JSON");
  geometry->add_option("--fractal", geo.fractal, "Fractal family")->capture_default_str();
  geometry->add_option("--gen", geo.generation, "Generation")->capture_default_str();
  geometry->add_option("--length", geo.length, "Side length")->capture_default_str();
  geometry->add_option("--out", geo.out, "Output file (relative paths go under --dir)")->capture_default_str();
  geometry->add_option("--dir", out_dir, "Output directory")->capture_default_str();

  SolveArgs solve;
  std::string solve_h = "1/64";
  auto* solve_cmd = app.add_subcommand("solve", "Boundary value problem or eigenpairs on a prefractal domain");
  add_domain_options(solve_cmd, solve.domain, solve_h);
  solve_cmd->add_option("--bc", solve.bc, "Boundary condition")
      ->required()
      ->check(CLI::IsMember({"dirichlet", "neumann", "robin"}));
  solve_cmd->add_option("--alpha", solve.alpha, "Robin coefficient")->capture_default_str();
  solve_cmd->add_option("--k", solve.k, "Shift k in -Laplace + k (boundary value mode)")->capture_default_str();
  solve_cmd->add_option("--s", solve.s, "Imaginary boundary coefficient (boundary value mode)")->capture_default_str();
  solve_cmd->add_option("--eigs", solve.eigs, "Number of eigenpairs; 0 solves a boundary value problem")
      ->capture_default_str();
  solve_cmd->add_option("--data", solve.data, "Boundary data function: 1, x, y, x^2, xy, y^2")->capture_default_str();
  solve_cmd->add_option("--pgm-width", solve.pgm_width, "Heatmap width in pixels")->capture_default_str();
  solve_cmd->add_flag("!--no-figures", solve.figures, "Skip the |phi| heatmaps");
  solve_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  DtnArgs dtn;
  std::string dtn_h = "1/64";
  auto* dtn_cmd = app.add_subcommand("dtn", "Dirichlet-to-Neumann operator, its spectrum and resolvent check");
  dtn_cmd->add_option("--shape", dtn.shape, "disk or prefractal")
      ->check(CLI::IsMember({"disk", "prefractal"}))
      ->capture_default_str();
  dtn_cmd->add_option("--sides", dtn.sides, "Polygon sides for the disk")->capture_default_str();
  dtn_cmd->add_option("--rings", dtn.rings, "Radial layers for the disk (0: automatic)")->capture_default_str();
  add_domain_options(dtn_cmd, dtn.domain, dtn_h);
  dtn_cmd->add_option("--k", dtn.k, "Shift k")->capture_default_str();
  dtn_cmd->add_option("--eigs", dtn.eigs, "Eigenvalues to report (0: all)")->capture_default_str();
  dtn_cmd->add_option("--s", dtn.s_values, "Resolvent parameters")->delimiter(',')->capture_default_str();
  dtn_cmd->add_option("--samples", dtn.samples, "Random data vectors per s")->capture_default_str();
  dtn_cmd->add_flag("--matrix", dtn.matrix, "Also write S as Matrix Market");
  dtn_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  ConvergeArgs conv;
  auto* conv_cmd = app.add_subcommand("converge", "Cross-generation spectral convergence study");
  conv_cmd->add_option("--config", conv.config_file, "Study configuration JSON");
  conv_cmd->add_option("--gens", conv.gens, "Generations, a:b or a list (default 1:4)");
  conv_cmd->add_option("--alpha", conv.alpha, "Robin coefficient (default 0.1)");
  conv_cmd->add_option("--measure", conv.measure, "Boundary measure (default selfsimilar)")->check(CLI::IsMember({"arclength", "selfsimilar"}));
  conv_cmd->add_option("--gamma", conv.gamma, "Gamma tags for the arclength measure");
  conv_cmd->add_option("--h", conv.h, "Target mesh size (default 1/128)");
  conv_cmd->add_option("--eigs", conv.eigs, "Eigenpairs per generation (default 30)");
  conv_cmd->add_option("--length", conv.length, "Side length");
  conv_cmd->add_option("--mac-resolution", conv.mac_resolution, "MAC sampling grid per axis");
  conv_cmd->add_flag("--figures", conv.figures, "Write |phi| heatmaps of the localized modes");
  conv_cmd->add_option("--pgm-width", conv.pgm_width, "Heatmap width in pixels")->capture_default_str();
  conv_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  MeasureArgs meas;
  std::vector<double> radii;
  auto* meas_cmd = app.add_subcommand("measure", "Upper-regularity report for a boundary measure");
  meas_cmd->add_option("--kind", meas.kind, "arclength or selfsimilar")
      ->check(CLI::IsMember({"arclength", "selfsimilar"}))
      ->capture_default_str();
  meas_cmd->add_option("--gen", meas.generation, "Generation")->capture_default_str();
  meas_cmd->add_option("--length", meas.length, "Side length")->capture_default_str();
  meas_cmd->add_option("--gamma", meas.gamma, "Gamma tags for the arclength measure")->capture_default_str();
  meas_cmd->add_option("--d", meas.d, "Regularity exponent (default: the measure's own)");
  meas_cmd->add_option("--radii", radii, "Ball radii in (0, 1]")->delimiter(',');
  meas_cmd->add_option("--stride", meas.stride, "Use every stride-th edge for ball centres")->capture_default_str();
  meas_cmd->add_option("--mass", meas.mass, "Total mass of the self-similar measure")->capture_default_str();
  meas_cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : static_cast<int>(ExitCode::kUsage);
  }

  try {
    common.out_dir = out_dir;
    common.seed_given = seed_opt->count() > 0;
    if (common.deterministic) {
      set_thread_count(1);
    } else if (common.threads > 0) {
      set_thread_count(common.threads);
    }
    if (*geometry) return cmd_geometry(geo, common, out);
    if (*solve_cmd) {
      if (!solve.domain.refine) solve.domain.h = parse_number(solve_h);
      return cmd_solve(solve, common, out);
    }
    if (*dtn_cmd) {
      if (!dtn.domain.refine) dtn.domain.h = parse_number(dtn_h);
      return cmd_dtn(dtn, common, out);
    }
    if (*conv_cmd) return cmd_converge(conv, common, out);
    if (*meas_cmd) {
      meas.radii = radii;
      return cmd_measure(meas, common, out);
    }
  } catch (const std::exception& e) {
    err << "steklov_lab: error: " << e.what() << '\n';
    if (const auto* ex = dynamic_cast<const SpectralExclusionError*>(&e); ex && ex->offending_eigenvalue()) {
      err << "steklov_lab: offending eigenvalue " << *ex->offending_eigenvalue() << '\n';
    }
    return static_cast<int>(exit_code_for(e));
  }
  return static_cast<int>(ExitCode::kUsage);
}

}  // namespace steklov::cli
