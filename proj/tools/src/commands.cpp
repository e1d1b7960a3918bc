#include "commands.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <memory>
#include <random>
#include <sstream>

#include "steklov/errors.hpp"
#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/io.hpp"
#include "steklov/measure.hpp"
#include "steklov/mesh.hpp"
#include "steklov/spectral.hpp"
#include "steklov/steklov.hpp"

namespace steklov::cli {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string tags_to_string(TagSet tags) {
  std::string s;
  for (BoundaryTag t : {BoundaryTag::kFractal, BoundaryTag::kLateral, BoundaryTag::kTop}) {
    if (!tags.contains(t)) continue;
    if (!s.empty()) s += ',';
    s += to_string(t);
  }
  return s;
}

fs::path prepare_dir(const Common& c) {
  std::error_code ec;
  fs::create_directories(c.out_dir, ec);
  if (ec) throw ArgumentError("cannot create output directory " + c.out_dir.string() + ": " + ec.message());
  return c.out_dir;
}

template <class Writer>
void write_file(const fs::path& path, bool binary, Writer&& w) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw ArgumentError("cannot open " + path.string() + " for writing");
  w(os);
  if (!os) throw NumericalError("write to " + path.string() + " failed");
}

std::string vtk_title(const std::string& command, const RunRecord& rec, const Common& c) {
  std::string t = "steklov_lab " + command + " config_hash=" + rec.hash();
  if (!c.deterministic) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    t += " generated=";
    t += buf;
  }
  return t;
}

PrefractalSpec prefractal_spec(int generation, double length) {
  PrefractalSpec spec;
  spec.generation = generation;
  spec.base_length = length;
  spec.validate();
  return spec;
}

nlohmann::json domain_config(const DomainArgs& d) {
  nlohmann::json j = {{"generation", d.generation}, {"length", d.length}, {"gamma", tags_to_string(parse_tags(d.gamma))},
                      {"measure", d.measure}, {"mass", d.mass}};
  if (d.refine) {
    j["refine"] = *d.refine;
  } else {
    j["h"] = d.h;
  }
  return j;
}

struct BuiltProblem {
  PrefractalSpec spec;
  std::shared_ptr<const OperatorSet> ops;
  int refinement = 0;
  std::string mesh_id;
  std::vector<std::string> warnings;
};

BuiltProblem build_prefractal_problem(const DomainArgs& d) {
  BuiltProblem b;
  b.spec = prefractal_spec(d.generation, d.length);
  if (d.refine) {
    if (*d.refine < 0) throw ArgumentError("--refine must be >= 0");
    b.refinement = *d.refine;
  } else {
    std::string warning;
    b.refinement = refinement_for(d.generation, d.length, d.h, 2'000'000, &warning);
    if (!warning.empty()) b.warnings.push_back(warning);
  }
  const DomainPolygon domain = build_domain(b.spec);
  const TriMesh mesh = mesh_polyomino(domain, b.refinement);
  const MeasureKind kind = measure_kind_from_string(d.measure);
  const BoundaryMeasure mu =
      kind == MeasureKind::kArclength ? arclength_measure(mesh, parse_tags(d.gamma)) : selfsimilar_measure(b.spec, mesh, d.mass);
  b.ops = std::make_shared<const OperatorSet>(assemble(mesh, mu));
  std::ostringstream id;
  id << "minkowski-g" << d.generation << "-r" << b.refinement;
  b.mesh_id = id.str();
  return b;
}

int test_function_index(const std::string& name) {
  for (int i = 0; i < kTestFamilySize; ++i) {
    if (name == test_function_name(i)) return i;
  }
  throw ArgumentError("unknown data function '" + name + "' (use 1, x, y, x^2, xy or y^2)");
}

Field sample_on(const OperatorSet& ops, const std::vector<int>& vertices, int fn) {
  Field f(static_cast<Eigen::Index>(vertices.size()));
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    f[static_cast<Eigen::Index>(i)] = test_function(fn, ops.mesh->vertices[static_cast<std::size_t>(vertices[i])]);
  }
  return f;
}

std::string mode_name(const std::string& prefix, std::size_t i) {
  std::ostringstream s;
  s << prefix << std::setw(3) << std::setfill('0') << i;
  return s.str();
}

int heatmap_height(const TriMesh& mesh, int width) {
  Vec2 lo = mesh.vertices.front(), hi = lo;
  for (const Vec2& p : mesh.vertices) {
    lo = {std::min(lo.x, p.x), std::min(lo.y, p.y)};
    hi = {std::max(hi.x, p.x), std::max(hi.y, p.y)};
  }
  return std::max(1, static_cast<int>(std::lround(width * (hi.y - lo.y) / (hi.x - lo.x))));
}

void write_heatmap(const fs::path& path, const MeshLocator& loc, const Field& phi, int width, const std::string& comment) {
  const int height = heatmap_height(loc.mesh(), width);
  const auto px = modulus_heatmap(loc, phi, width, height);
  write_file(path, true, [&](std::ostream& os) { io::write_pgm(os, width, height, px, comment); });
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

}  // namespace

int cmd_geometry(const GeometryArgs& a, const Common& c, std::ostream& out) {
  if (a.fractal != "minkowski") throw ArgumentError("unsupported fractal family '" + a.fractal + "'");
  const PrefractalSpec spec = prefractal_spec(a.generation, a.length);
  RunRecord rec("geometry", {{"fractal", a.fractal}, {"generation", a.generation}, {"length", a.length}}, c);
  const PolyChain chain = generate_minkowski(spec);
  const DomainPolygon domain = build_domain(spec);
  const nlohmann::json meta = {{"config_hash", rec.hash()}, {"generation", a.generation}, {"length", a.length}};

  fs::path path(a.out);
  if (path.is_relative()) path = prepare_dir(c) / path;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  rec.add_output(path);
  rec.set_note("segments", chain.segment_count());
  rec.set_note("area", domain.area);
  nlohmann::json doc = {{"version", io::kFormatVersion},
                        {"kind", "prefractal"},
                        {"config_hash", rec.hash()},
                        {"chain", io::to_json(chain, meta)},
                        {"domain", io::to_json(domain, meta)},
                        {"record", rec.to_json()}};
  io::write_text_file(path.string(), doc.dump(2) + "\n");
  out << "geometry: generation " << a.generation << ", " << chain.segment_count() << " segments, area "
      << std::setprecision(17) << domain.area << " -> " << path.string() << '\n';
  return 0;
}

int cmd_solve(const SolveArgs& a, const Common& c, std::ostream& out) {
  const auto t0 = Clock::now();
  if (a.bc != "dirichlet" && a.bc != "neumann" && a.bc != "robin") {
    throw ArgumentError("--bc must be dirichlet, neumann or robin");
  }
  if (a.eigs < 0) throw ArgumentError("--eigs must be >= 0");
  if (a.eigs > 0 && (a.k != 0.0 || a.s != 0.0)) {
    throw ArgumentError("--k and --s apply to boundary value solves (--eigs 0) only");
  }
  nlohmann::json cfg = {{"domain", domain_config(a.domain)}, {"bc", a.bc}, {"alpha", a.bc == "robin" ? a.alpha : 0.0},
                        {"k", a.k}, {"s", a.s}, {"eigs", a.eigs}};
  if (a.eigs == 0) cfg["data"] = a.data;
  if (a.eigs > 0 && a.figures) cfg["pgm_width"] = a.pgm_width;
  RunRecord rec("solve", cfg, c);
  const fs::path dir = prepare_dir(c);

  const BuiltProblem prob = build_prefractal_problem(a.domain);
  const OperatorSet& ops = *prob.ops;
  rec.set_note("mesh_id", prob.mesh_id);
  rec.set_note("vertices", ops.vertex_count());
  rec.set_note("gamma_dofs", ops.gamma_count());
  if (!prob.warnings.empty()) rec.set_note("warnings", prob.warnings);
  rec.set_timing("setup", seconds_since(t0));
  const std::string title = vtk_title("solve", rec, c);

  if (a.eigs > 0) {
    const auto t1 = Clock::now();
    EigenOptions opt;
    opt.seed = c.seed;
    Spectrum spec = a.bc == "dirichlet" ? dirichlet_spectrum(ops, a.eigs, opt)
                                        : robin_spectrum(ops, a.bc == "robin" ? a.alpha : 0.0, a.eigs, opt);
    spec.problem.mesh_id = prob.mesh_id;
    rec.set_timing("eigensolve", seconds_since(t1));
    rec.set_residual("max_eigen_residual", max_of(spec.residual_norms));
    rec.set_note("restarts", spec.restarts);

    const fs::path csv = dir / "spectrum.csv";
    write_file(csv, false, [&](std::ostream& os) {
      write_spectrum_csv(os, spec, "config_hash=" + rec.hash() + "\nbc=" + a.bc + " mesh=" + prob.mesh_id);
    });
    rec.add_output(csv);

    const Eigen::MatrixXd& vecs = *spec.eigenvectors;
    std::vector<std::vector<double>> store(static_cast<std::size_t>(vecs.cols()));
    std::vector<std::string> names(store.size());
    std::vector<io::PointField> fields;
    for (std::size_t i = 0; i < store.size(); ++i) {
      const auto col = vecs.col(static_cast<Eigen::Index>(i));
      store[i].assign(col.data(), col.data() + col.size());
      names[i] = mode_name("mode_", i);
    }
    for (std::size_t i = 0; i < store.size(); ++i) fields.push_back({names[i], store[i]});
    const fs::path vtk = dir / "modes.vtk";
    write_file(vtk, false, [&](std::ostream& os) { io::write_vtk(os, *ops.mesh, title, fields); });
    rec.add_output(vtk);

    if (a.figures) {
      const MeshLocator loc(ops.mesh);
      for (std::size_t i = 0; i < store.size(); ++i) {
        const fs::path pgm = dir / (names[i] + ".pgm");
        std::ostringstream comment;
        comment << "|phi_" << i << "| eigenvalue=" << std::setprecision(17) << spec.eigenvalues[i]
                << " config_hash=" << rec.hash();
        write_heatmap(pgm, loc, vecs.col(static_cast<Eigen::Index>(i)), a.pgm_width, comment.str());
        rec.add_output(pgm);
      }
    }
    out << "solve: " << a.bc << " spectrum on " << prob.mesh_id << " (" << ops.vertex_count() << " vertices)\n";
    out << std::setprecision(10);
    for (std::size_t i = 0; i < spec.size(); ++i) out << "  " << i << "  " << spec.eigenvalues[i] << '\n';
  } else {
    const auto t1 = Clock::now();
    const int fn = test_function_index(a.data);
    std::vector<io::PointField> fields;
    std::vector<double> re, im, mod;
    if (a.bc == "dirichlet") {
      const Field f = sample_on(ops, ops.dofmap.boundary, fn);
      const Field u = solve_dirichlet(ops, a.k, f);
      const NormalDerivative nd = normal_derivative(ops, u, a.k);
      rec.set_residual("normal_derivative_off_gamma", nd.off_gamma);
      rec.set_note("off_gamma_flagged", nd.off_gamma_flagged);
      re.assign(u.data(), u.data() + u.size());
      fields.push_back({"u", re});
    } else {
      const double alpha = a.bc == "robin" ? a.alpha : 0.0;
      const Field h = sample_on(ops, ops.dofmap.robin, fn);
      const ComplexField u = solve_robin(ops, alpha, a.k, a.s, h);
      rec.set_residual("robin_relative_residual", robin_residual(ops, alpha, a.k, a.s, h, u));
      for (Eigen::Index i = 0; i < u.size(); ++i) {
        re.push_back(u[i].real());
        im.push_back(u[i].imag());
        mod.push_back(std::abs(u[i]));
      }
      fields = {{"u_real", re}, {"u_imag", im}, {"u_modulus", mod}};
    }
    rec.set_timing("solve", seconds_since(t1));
    const fs::path vtk = dir / "solution.vtk";
    write_file(vtk, false, [&](std::ostream& os) { io::write_vtk(os, *ops.mesh, title, fields); });
    rec.add_output(vtk);
    out << "solve: " << a.bc << " boundary value problem on " << prob.mesh_id << " -> " << vtk.string() << '\n';
  }
  rec.set_timing("total", seconds_since(t0));
  const fs::path record = dir / "record.json";
  rec.add_output(record);
  rec.write(record);
  return 0;
}

int cmd_dtn(const DtnArgs& a, const Common& c, std::ostream& out) {
  const auto t0 = Clock::now();
  nlohmann::json cfg = {{"shape", a.shape}, {"k", a.k}, {"eigs", a.eigs}, {"s", a.s_values}, {"samples", a.samples}};
  std::shared_ptr<const OperatorSet> ops;
  std::string mesh_id;
  if (a.shape == "disk") {
    if (a.sides < 3) throw ArgumentError("--sides must be >= 3");
    cfg["sides"] = a.sides;
    cfg["rings"] = a.rings;
    const TriMesh mesh = mesh_disk(a.sides, a.rings);
    ops = std::make_shared<const OperatorSet>(assemble(mesh, arclength_measure(mesh, TagSet::all())));
    mesh_id = "disk-" + std::to_string(a.sides);
  } else if (a.shape == "prefractal") {
    cfg["domain"] = domain_config(a.domain);
    BuiltProblem prob = build_prefractal_problem(a.domain);
    ops = prob.ops;
    mesh_id = prob.mesh_id;
  } else {
    throw ArgumentError("--shape must be disk or prefractal");
  }
  if (a.samples < 0) throw ArgumentError("--samples must be >= 0");
  RunRecord rec("dtn", cfg, c);
  const fs::path dir = prepare_dir(c);
  rec.set_note("mesh_id", mesh_id);
  rec.set_note("vertices", ops->vertex_count());

  const auto t1 = Clock::now();
  const SteklovOperator st = build_steklov(ops, a.k);
  rec.set_timing("schur_complement", seconds_since(t1));
  Spectrum spec = steklov_spectrum(st, a.eigs);
  spec.problem.mesh_id = mesh_id;
  rec.set_residual("max_eigen_residual", max_of(spec.residual_norms));
  rec.set_residual("raw_asymmetry", st.raw_asymmetry);

  const fs::path csv = dir / "steklov_spectrum.csv";
  write_file(csv, false, [&](std::ostream& os) {
    std::ostringstream comment;
    comment << "config_hash=" << rec.hash() << "\nsteklov k=" << std::setprecision(17) << a.k << " mesh=" << mesh_id;
    write_spectrum_csv(os, spec, comment.str());
  });
  rec.add_output(csv);

  std::mt19937_64 rng(c.seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  nlohmann::json checks = nlohmann::json::array();
  double worst = 0.0;
  for (double s : a.s_values) {
    for (int i = 0; i < a.samples; ++i) {
      Field h(st.gamma_count());
      for (Eigen::Index j = 0; j < h.size(); ++j) h[j] = uni(rng);
      const double e = resolvent_check(st, s, h);
      worst = std::max(worst, e);
      checks.push_back({{"s", s}, {"sample", i}, {"relative_error", e}});
    }
  }
  rec.set_residual("max_resolvent_discrepancy", worst);
  const double one_norm = trace_norm(*ops, Field::Ones(ops->boundary_count()));
  const nlohmann::json report = {{"version", 1},
                                 {"config_hash", rec.hash()},
                                 {"k", a.k},
                                 {"gamma_dofs", st.gamma_count()},
                                 {"raw_asymmetry", st.raw_asymmetry},
                                 {"lowest_eigenvalue", spec.eigenvalues.empty() ? 0.0 : spec.eigenvalues.front()},
                                 {"trace_norm_of_one", one_norm},
                                 {"checks", checks},
                                 {"max_relative_error", worst}};
  const fs::path rj = dir / "resolvent.json";
  io::write_text_file(rj.string(), report.dump(2) + "\n");
  rec.add_output(rj);

  if (a.matrix) {
    const fs::path mtx = dir / "steklov.mtx";
    write_file(mtx, false, [&](std::ostream& os) { write_steklov_matrix(os, st, "config_hash=" + rec.hash()); });
    rec.add_output(mtx);
  }
  rec.set_timing("total", seconds_since(t0));
  const fs::path record = dir / "record.json";
  rec.add_output(record);
  rec.write(record);

  out << "dtn: " << mesh_id << ", k = " << a.k << ", " << st.gamma_count() << " Gamma dofs\n" << std::setprecision(10);
  for (std::size_t i = 0; i < spec.size() && i < 10; ++i) out << "  " << i << "  " << spec.eigenvalues[i] << '\n';
  out << "  resolvent identity: max relative discrepancy " << worst << '\n';
  return 0;
}

int cmd_converge(const ConvergeArgs& a, const Common& c, std::ostream& out) {
  const auto t0 = Clock::now();
  ConvergenceConfig cfg;
  if (!a.config_file.empty()) cfg = convergence_config_from_json(io::read_json_file(a.config_file));
  if (a.config_file.empty() || c.seed_given) cfg.seed = c.seed;
  if (a.gens) cfg.generations = parse_int_list(*a.gens);
  if (a.alpha) cfg.alpha = *a.alpha;
  if (a.measure) cfg.measure = measure_kind_from_string(*a.measure);
  if (a.gamma) cfg.gamma = parse_tags(*a.gamma);
  if (a.h) cfg.target_h = parse_number(*a.h);
  if (a.eigs) cfg.eig_count = *a.eigs;
  if (a.length) cfg.base_length = *a.length;
  if (a.mac_resolution) cfg.mac_resolution = *a.mac_resolution;

  Common common = c;
  common.seed = cfg.seed;
  nlohmann::json hashed = {{"study", to_json(cfg)}};
  if (a.figures) hashed["pgm_width"] = a.pgm_width;
  RunRecord rec("converge", hashed, common);
  const fs::path dir = prepare_dir(c);

  const ConvergenceReport report = convergence_study(cfg);
  rec.set_timing("study", seconds_since(t0));

  for (const auto& g : report.generations) {
    const fs::path csv = dir / ("spectrum_g" + std::to_string(g.generation) + ".csv");
    write_file(csv, false, [&](std::ostream& os) {
      write_spectrum_csv(os, g.spectrum, "config_hash=" + rec.hash() + "\nmesh=" + g.spectrum.problem.mesh_id);
    });
    rec.add_output(csv);
    rec.set_residual("max_eigen_residual_g" + std::to_string(g.generation), max_of(g.spectrum.residual_norms));
    rec.set_timing("generation_" + std::to_string(g.generation), g.seconds);
    if (a.figures) {
      const MeshLocator loc(g.ops->mesh);
      for (const auto& m : g.localized) {
        const fs::path pgm = dir / (mode_name("g" + std::to_string(g.generation) + "_mode_", static_cast<std::size_t>(m.index)) + ".pgm");
        std::ostringstream comment;
        comment << "|phi_" << m.index << "| generation=" << g.generation << " eigenvalue=" << std::setprecision(17)
                << m.eigenvalue << " config_hash=" << rec.hash();
        write_heatmap(pgm, loc, g.spectrum.eigenvectors->col(m.index), a.pgm_width, comment.str());
        rec.add_output(pgm);
      }
    }
  }
  nlohmann::json doc = to_json(report, !c.deterministic);
  doc["config_hash"] = rec.hash();
  const fs::path rj = dir / "report.json";
  io::write_text_file(rj.string(), doc.dump(2) + "\n");
  rec.add_output(rj);
  rec.set_note("warnings", report.warnings);
  rec.set_timing("total", seconds_since(t0));
  const fs::path record = dir / "record.json";
  rec.add_output(record);
  rec.write(record);

  out << "converge: generations";
  for (int g : cfg.generations) out << ' ' << g;
  out << ", alpha = " << cfg.alpha << ", measure " << to_string(cfg.measure) << '\n' << std::setprecision(6);
  for (const auto& g : report.generations) {
    out << "  g" << g.generation << ": r=" << g.refinement << " h=" << g.h << " vertices=" << g.vertices
        << " median PR=" << g.localization.median_pr << " localized=" << g.localized.size() << '\n';
  }
  for (const auto& p : report.pairs) {
    out << "  g" << p.generation_a << "-g" << p.generation_b << ": best localized MAC=" << p.best_localized.mac
        << " d_H=" << p.boundary_hausdorff << " symdiff=" << p.symmetric_difference
        << " spectral d_H=" << p.spectral_hausdorff << '\n';
  }
  for (const auto& w : report.warnings) out << "  warning: " << w << '\n';
  return 0;
}

int cmd_measure(const MeasureArgs& a, const Common& c, std::ostream& out) {
  const auto t0 = Clock::now();
  const PrefractalSpec spec = prefractal_spec(a.generation, a.length);
  const MeasureKind kind = measure_kind_from_string(a.kind);
  if (a.stride < 1) throw ArgumentError("--stride must be >= 1");
  std::vector<double> radii = a.radii;
  if (radii.empty()) {
    const int levels = std::max(2 * a.generation, 6);
    for (int j = 0; j <= levels; ++j) radii.push_back(std::ldexp(1.0, -j));
  }
  const TriMesh skeleton = boundary_skeleton(build_domain(spec));
  const BoundaryMeasure mu = kind == MeasureKind::kArclength ? arclength_measure(skeleton, parse_tags(a.gamma))
                                                             : selfsimilar_measure(spec, skeleton, a.mass);
  const double d = a.d.value_or(mu.d);
  nlohmann::json cfg = {{"kind", a.kind}, {"generation", a.generation}, {"length", a.length}, {"d", d},
                        {"radii", radii}, {"stride", a.stride}};
  if (kind == MeasureKind::kArclength) {
    cfg["gamma"] = tags_to_string(parse_tags(a.gamma));
  } else {
    cfg["mass"] = a.mass;
  }
  RunRecord rec("measure", cfg, c);
  const fs::path dir = prepare_dir(c);
  const RegularityReport rep = check_upper_regularity(mu, d, radii, CenterSampling{a.stride});
  nlohmann::json doc = {{"version", 1},
                        {"config_hash", rec.hash()},
                        {"kind", a.kind},
                        {"generation", a.generation},
                        {"total_mass", mu.total_mass},
                        {"edges", mu.edges.size()},
                        {"regularity", to_json(rep)}};
  const fs::path rj = dir / "regularity.json";
  io::write_text_file(rj.string(), doc.dump(2) + "\n");
  rec.add_output(rj);
  rec.set_timing("total", seconds_since(t0));
  const fs::path record = dir / "record.json";
  rec.add_output(record);
  rec.write(record);
  out << "measure: " << a.kind << " on generation " << a.generation << ", d = " << d << std::setprecision(10)
      << ", c_d = " << rep.c_d << " (worst r = " << rep.worst_radius << ", growth " << rep.growth << ")"
      << (rep.irregular ? ", irregular" : "") << (rep.outside_trace_regime ? ", outside trace regime" : "") << '\n';
  return 0;
}

}  // namespace steklov::cli
