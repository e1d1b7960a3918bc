#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "steklov/convergence.hpp"
#include "steklov_cli/cli.hpp"

namespace steklov::cli {

struct DomainArgs {
  int generation = 0;
  double length = 1.0;
  std::optional<int> refine;
  double h = 1.0 / 64.0;
  std::string gamma = "all";
  std::string measure = "arclength";
  double mass = 1.0;
};

struct GeometryArgs {
  std::string fractal = "minkowski";
  int generation = 0;
  double length = 1.0;
  std::string out = "geometry.json";
};

struct SolveArgs {
  DomainArgs domain;
  std::string bc;
  double alpha = 0.0;
  double k = 0.0;
  double s = 0.0;
  int eigs = 0;
  std::string data = "x";
  int pgm_width = 256;
  bool figures = true;
};

struct DtnArgs {
  std::string shape = "disk";
  int sides = 256;
  int rings = 0;
  DomainArgs domain;
  double k = 1.0;
  int eigs = 10;
  std::vector<double> s_values{0.1, 1.0, 10.0};
  int samples = 5;
  bool matrix = false;
};

/// Unset fields keep the value from --config (or the library default).
struct ConvergeArgs {
  std::string config_file;
  std::optional<std::string> gens;
  std::optional<double> alpha;
  std::optional<std::string> measure;
  std::optional<std::string> gamma;
  std::optional<std::string> h;
  std::optional<int> eigs;
  std::optional<double> length;
  std::optional<int> mac_resolution;
  bool figures = false;
  int pgm_width = 256;
};

struct MeasureArgs {
  std::string kind = "selfsimilar";
  int generation = 4;
  double length = 1.0;
  std::string gamma = "fractal";
  std::optional<double> d;
  std::vector<double> radii;
  std::size_t stride = 1;
  double mass = 1.0;
};

int cmd_geometry(const GeometryArgs& a, const Common& c, std::ostream& out);
int cmd_solve(const SolveArgs& a, const Common& c, std::ostream& out);
int cmd_dtn(const DtnArgs& a, const Common& c, std::ostream& out);
int cmd_converge(const ConvergeArgs& a, const Common& c, std::ostream& out);
int cmd_measure(const MeasureArgs& a, const Common& c, std::ostream& out);

/// "a/b" or a plain number.
double parse_number(const std::string& text);
TagSet parse_tags(const std::string& text);

}  // namespace steklov::cli
