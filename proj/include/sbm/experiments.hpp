#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sbm/mms.hpp"

namespace sbm::experiments {

using json = nlohmann::ordered_json;

enum class Kind {
  h_convergence,
  p_convergence,
  conditioning,
  aligned_verification,
  random_embedding_assessment,
  robin_consistency_delta,
  robin_limits,
  mixed_dirichlet_neumann,
  ap_cascade,
  lebesgue_table,
  vandermonde_1d
};

Kind parse_kind(const std::string& s);
std::string to_string(Kind k);
std::string to_string(WeakForm f);
std::string to_string(BcKind b);

struct Config {
  Kind kind = Kind::h_convergence;
  // empty lists and unset options pick the experiment default
  std::vector<Method> methods;
  std::vector<WeakForm> forms;
  BcKind bc = BcKind::dirichlet;
  std::vector<RobinVariant> robin;
  std::vector<double> eps;
  std::vector<double> lc;
  std::vector<int> p;
  std::uint64_t seed = 1;
  GammaScaling gamma_scaling = GammaScaling::avg;
  std::string mms;  // manufactured solution preset
  // -1 picks 0 for Dirichlet, 1 otherwise
  double alpha = -1;
  // aligned disk fixtures instead of a background square
  std::optional<bool> aligned;
  bool neumann_penalty = false;
  bool symmetric_dirichlet = false;
  std::optional<bool> conditioning;
  int svd_limit = 2000;
  int circles = 30;
  double delta = 1.0;
  std::string limit = "dirichlet";
  // optional Gmsh mesh replacing the generated one (single-mesh experiments)
  std::string mesh_file;
  int threads = 0;  // 0: hardware concurrency
};

// rejects empty ladders and combinations the experiment cannot run
void validate(const Config& c);

// default ladders and method lists for a kind; explicit entries in `c` are kept
Config with_defaults(Config c);

struct Result {
  json rows = json::array();
  json summary = json::object();
};

Result run(const Config& c);

json config_to_json(const Config& c);
// <prefix>.csv and <prefix>.json, plus <prefix>.dat when `dat` is set
void write_outputs(const Config& c, const Result& r, const std::string& prefix, bool dat);

// fixtures shared with the tests
constexpr double kDiskRadius = 0.375;
TriMesh aligned_disk_mesh(Method m, double lc, std::uint64_t seed = 1);
// mesh radius used by the aligned fixture of method m
double aligned_radius(Method m, double lc);

// slope over the leading points that keep dropping by at least `drop` per step
double truncated_slope(const std::vector<double>& x, const std::vector<double>& y, double drop = 10.0);

} // namespace sbm::experiments
