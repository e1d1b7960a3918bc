#include "steklov/convergence.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "steklov/errors.hpp"
#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"
#include "steklov/parallel.hpp"
#include "steklov/spatial.hpp"

namespace steklov {

namespace {

std::vector<SegmentGrid::Segment> fractal_segments(const DomainPolygon& d) {
  std::vector<SegmentGrid::Segment> segs;
  for (std::size_t i = d.fractal_first; i < d.fractal_last; ++i) {
    segs.emplace_back(d.vertices[i], d.vertices[(i + 1) % d.vertices.size()]);
  }
  return segs;
}

PrefractalSpec spec_for(const ConvergenceConfig& c, int g) {
  PrefractalSpec spec;
  spec.generation = g;
  spec.base_length = c.base_length;
  spec.validate();
  return spec;
}

}  // namespace

nlohmann::json to_json(const ConvergenceConfig& c) {
  nlohmann::json gamma = nlohmann::json::array();
  for (BoundaryTag tag : {BoundaryTag::kFractal, BoundaryTag::kLateral, BoundaryTag::kTop}) {
    if (c.gamma.contains(tag)) gamma.push_back(std::string(to_string(tag)));
  }
  return {{"generations", c.generations},
          {"alpha", c.alpha},
          {"measure", std::string(to_string(c.measure))},
          {"gamma", gamma},
          {"target_h", c.target_h},
          {"eig_count", c.eig_count},
          {"base_length", c.base_length},
          {"mac_resolution", c.mac_resolution},
          {"spectral_cutoff", c.spectral_cutoff},
          {"symdiff_grid", c.symdiff_grid},
          {"max_vertices", c.max_vertices},
          {"seed", c.seed},
          {"localization_factor", c.localization_factor},
          {"adjacency", c.adjacency}};
}

ConvergenceConfig convergence_config_from_json(const nlohmann::json& doc) {
  ConvergenceConfig c;
  try {
    if (doc.contains("generations")) c.generations = doc.at("generations").get<std::vector<int>>();
    if (doc.contains("alpha")) c.alpha = doc.at("alpha").get<double>();
    if (doc.contains("measure")) c.measure = measure_kind_from_string(doc.at("measure").get<std::string>());
    if (doc.contains("gamma")) {
      c.gamma = TagSet{};
      for (const auto& t : doc.at("gamma")) c.gamma.insert(boundary_tag_from_string(t.get<std::string>()));
    }
    if (doc.contains("target_h")) c.target_h = doc.at("target_h").get<double>();
    if (doc.contains("eig_count")) c.eig_count = doc.at("eig_count").get<int>();
    if (doc.contains("base_length")) c.base_length = doc.at("base_length").get<double>();
    if (doc.contains("mac_resolution")) c.mac_resolution = doc.at("mac_resolution").get<int>();
    if (doc.contains("spectral_cutoff")) c.spectral_cutoff = doc.at("spectral_cutoff").get<double>();
    if (doc.contains("symdiff_grid")) c.symdiff_grid = doc.at("symdiff_grid").get<int>();
    if (doc.contains("max_vertices")) c.max_vertices = doc.at("max_vertices").get<std::size_t>();
    if (doc.contains("seed")) c.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("localization_factor")) c.localization_factor = doc.at("localization_factor").get<double>();
    if (doc.contains("adjacency")) c.adjacency = doc.at("adjacency").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ArgumentError(std::string("convergence config: ") + e.what());
  }
  return c;
}

int refinement_for(int generation, double base_length, double target_h, std::size_t max_vertices, std::string* warning) {
  if (!(target_h > 0.0)) throw ArgumentError("target mesh size must be positive");
  const double pitch = base_length * std::pow(4.0, -generation);
  int r = std::max(0, static_cast<int>(std::ceil(std::log2(pitch / target_h) - 1e-9)));
  auto estimate = [&](int rr) {
    const double n = base_length / (pitch * std::pow(2.0, -rr));
    return n * n;
  };
  const int wanted = r;
  while (r > 0 && estimate(r) > static_cast<double>(max_vertices)) --r;
  if (r != wanted && warning) {
    std::ostringstream msg;
    msg << "generation " << generation << ": refinement downgraded from " << wanted << " to " << r
        << " (mesh size " << pitch * std::pow(2.0, -r) << " > target " << target_h << ")";
    *warning = msg.str();
  }
  return r;
}

GenerationResult run_generation(const ConvergenceConfig& config, int generation) {
  const auto t0 = std::chrono::steady_clock::now();
  GenerationResult res;
  res.generation = generation;
  const PrefractalSpec spec = spec_for(config, generation);
  const DomainPolygon domain = build_domain(spec);
  std::string warning;
  res.refinement = refinement_for(generation, config.base_length, config.target_h, config.max_vertices, &warning);
  if (!warning.empty()) res.warnings.push_back(warning);
  const TriMesh mesh = mesh_polyomino(domain, res.refinement);
  res.h = mesh.h;
  res.vertices = mesh.vertex_count();

  const BoundaryMeasure mu = config.measure == MeasureKind::kArclength ? arclength_measure(mesh, config.gamma)
                                                                       : selfsimilar_measure(spec, mesh, 1.0);
  auto ops = std::make_shared<const OperatorSet>(assemble(mesh, mu));
  res.ops = ops;

  EigenOptions opt;
  opt.seed = config.seed;
  res.spectrum = robin_spectrum(*ops, config.alpha, config.eig_count, opt);
  std::ostringstream id;
  id << "minkowski-g" << generation << "-r" << res.refinement;
  res.spectrum.problem.mesh_id = id.str();
  res.localization = localization(res.spectrum, *ops);

  const SegmentGrid chain(fractal_segments(domain));
  for (const auto& m : res.localization.modes) res.fractal_gaps.push_back(chain.nearest_distance(m.centroid));
  const double pr_limit = res.localization.median_pr / config.localization_factor;
  for (std::size_t i = 0; i < res.localization.modes.size(); ++i) {
    const double pr = res.localization.modes[i].participation_ratio;
    if (pr <= pr_limit && res.fractal_gaps[i] <= config.adjacency * config.base_length) {
      res.localized.push_back({static_cast<int>(i), res.spectrum.eigenvalues[i], pr, res.fractal_gaps[i]});
    }
  }
  res.moments = chain_moments(spec, 1.0);
  res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

ConvergenceReport convergence_study(const ConvergenceConfig& config) {
  if (config.generations.empty()) throw ArgumentError("convergence_study: no generations");
  if (config.eig_count < 1) throw ArgumentError("convergence_study: eig_count must be >= 1");
  for (int g : config.generations) spec_for(config, g);
  ConvergenceReport rep;
  rep.config = config;
  rep.generations.resize(config.generations.size());
  parallel_for(config.generations.size(), [&](std::size_t begin, std::size_t end, int) {
    for (std::size_t i = begin; i < end; ++i) rep.generations[i] = run_generation(config, config.generations[i]);
  });
  for (const auto& g : rep.generations) rep.warnings.insert(rep.warnings.end(), g.warnings.begin(), g.warnings.end());

  for (std::size_t i = 0; i + 1 < rep.generations.size(); ++i) {
    const GenerationResult& a = rep.generations[i];
    const GenerationResult& b = rep.generations[i + 1];
    PairResult p;
    p.generation_a = a.generation;
    p.generation_b = b.generation;
    const MeshLocator la(a.ops->mesh), lb(b.ops->mesh);
    p.mac = match_modes(la, *a.spectrum.eigenvectors, lb, *b.spectrum.eigenvectors, config.mac_resolution);
    p.spectral_hausdorff = spectral_hausdorff(a.spectrum.eigenvalues, b.spectrum.eigenvalues, config.spectral_cutoff);
    const PrefractalSpec sa = spec_for(config, a.generation), sb = spec_for(config, b.generation);
    const PolyChain ca = generate_minkowski(sa), cb = generate_minkowski(sb);
    const double spacing = 0.25 * std::min(sa.segment_length(), sb.segment_length());
    p.boundary_hausdorff = hausdorff_distance(ca, cb, spacing);
    p.symmetric_difference = symmetric_difference_area(build_domain(sa), build_domain(sb), config.symdiff_grid);
    for (const auto& ma : a.localized) {
      for (const auto& mb : b.localized) {
        const double m = p.mac.mac(ma.index, mb.index);
        if (m > p.best_localized.mac) p.best_localized = {ma.index, mb.index, m};
      }
    }
    for (int k = 0; k < kTestFamilySize; ++k) {
      p.moment_difference[static_cast<std::size_t>(k)] =
          std::abs(b.moments[static_cast<std::size_t>(k)] - a.moments[static_cast<std::size_t>(k)]);
    }
    rep.pairs.push_back(std::move(p));
  }
  return rep;
}

ScaleFit fit_global_scale(std::span<const double> computed, std::span<const double> reference) {
  if (computed.size() != reference.size() || computed.empty()) {
    throw ArgumentError("fit_global_scale: need equally many computed and reference values");
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < computed.size(); ++i) {
    if (reference[i] == 0.0) throw ArgumentError("fit_global_scale: zero reference value");
    const double q = computed[i] / reference[i];
    num += q;
    den += q * q;
  }
  if (den == 0.0) throw ArgumentError("fit_global_scale: all computed values are zero");
  ScaleFit fit;
  fit.scale = num / den;
  for (std::size_t i = 0; i < computed.size(); ++i) {
    const double e = fit.scale * computed[i] / reference[i] - 1.0;
    fit.relative_errors.push_back(e);
    fit.max_abs_error = std::max(fit.max_abs_error, std::abs(e));
  }
  return fit;
}

nlohmann::json to_json(const ConvergenceReport& report, bool include_timings) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : report.generations) {
    std::ostringstream csv;
    write_spectrum_csv(csv, g.spectrum);
    nlohmann::json modes = nlohmann::json::array();
    for (std::size_t i = 0; i < g.localization.modes.size(); ++i) {
      const auto& m = g.localization.modes[i];
      modes.push_back({{"index", i},
                       {"pr", m.participation_ratio},
                       {"support_fraction", m.support_fraction},
                       {"centroid", {m.centroid.x, m.centroid.y}},
                       {"box", {m.box_min.x, m.box_min.y, m.box_max.x, m.box_max.y}},
                       {"fractal_gap", g.fractal_gaps[i]}});
    }
    nlohmann::json localized = nlohmann::json::array();
    for (const auto& l : g.localized) {
      localized.push_back({{"index", l.index}, {"eigenvalue", l.eigenvalue}, {"pr", l.participation_ratio}, {"fractal_gap", l.fractal_gap}});
    }
    nlohmann::json moments = nlohmann::json::object();
    for (int k = 0; k < kTestFamilySize; ++k) moments[test_function_name(k)] = g.moments[static_cast<std::size_t>(k)];
    nlohmann::json j = {{"generation", g.generation},
                        {"refinement", g.refinement},
                        {"h", g.h},
                        {"vertices", g.vertices},
                        {"mesh_id", g.spectrum.problem.mesh_id},
                        {"spectrum_csv", csv.str()},
                        {"eigenvalues", g.spectrum.eigenvalues},
                        {"median_pr", g.localization.median_pr},
                        {"modes", modes},
                        {"localized", localized},
                        {"moments", moments},
                        {"warnings", g.warnings}};
    if (include_timings) j["seconds"] = g.seconds;
    gens.push_back(std::move(j));
  }
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& p : report.pairs) {
    nlohmann::json mac = nlohmann::json::array();
    for (Eigen::Index i = 0; i < p.mac.mac.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(p.mac.mac.cols()));
      for (Eigen::Index j = 0; j < p.mac.mac.cols(); ++j) row[static_cast<std::size_t>(j)] = p.mac.mac(i, j);
      mac.push_back(row);
    }
    nlohmann::json matches = nlohmann::json::array();
    for (const auto& m : p.mac.matches) matches.push_back({m.a, m.b, m.mac});
    nlohmann::json md = nlohmann::json::object();
    for (int k = 0; k < kTestFamilySize; ++k) md[test_function_name(k)] = p.moment_difference[static_cast<std::size_t>(k)];
    pairs.push_back({{"generations", {p.generation_a, p.generation_b}},
                     {"mac", mac},
                     {"matches", matches},
                     {"sample_points", p.mac.sample_points},
                     {"best_localized", {{"a", p.best_localized.a}, {"b", p.best_localized.b}, {"mac", p.best_localized.mac}}},
                     {"spectral_hausdorff", p.spectral_hausdorff},
                     {"boundary_hausdorff", p.boundary_hausdorff},
                     {"symmetric_difference", p.symmetric_difference},
                     {"moment_difference", md}});
  }
  return {{"version", 1},
          {"config", to_json(report.config)},
          {"generations", gens},
          {"pairs", pairs},
          {"warnings", report.warnings}};
}

}  // namespace steklov
