#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oracles.hpp"
#include "sbm/experiments.hpp"

using namespace sbm;
namespace ex = sbm::experiments;
namespace fs = std::filesystem;

namespace {

ex::Config base(ex::Kind k) {
  ex::Config c;
  c.kind = k;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "sbm_tests";
  fs::create_directories(d);
  return d;
}

const ex::json* find_fit(const ex::json& fits, const std::string& method, const std::string& form, int P) {
  for (const auto& f : fits)
    if (f["method"] == method && f["form"] == form && f["P"] == P) return &f;
  return nullptr;
}

} // namespace

TEST_SUITE("experiment_cli") {

TEST_CASE("infeasible specs are rejected") {
  auto rejects = [](ex::Config c) {
    c = ex::with_defaults(c);
    return c;
  };
  ex::Config c = rejects(base(ex::Kind::h_convergence));
  CHECK_NOTHROW(ex::validate(c));
  ex::Config e = c;
  e.p.clear();
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.lc.clear();
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.p = {0};
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.p = {kMaxOrder + 1};
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.lc = {0.1, -0.1};
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.mms = "unknown";
  CHECK_THROWS_AS(ex::validate(e), Error);
  e = c;
  e.aligned = true;
  e.mesh_file = "x.msh";
  CHECK_THROWS_AS(ex::validate(e), Error);

  ex::Config r = base(ex::Kind::random_embedding_assessment);
  r.methods = {Method::cbm, Method::sbm_i};
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(r)), Error);
  ex::Config m = base(ex::Kind::mixed_dirichlet_neumann);
  m.methods = {Method::cbm};
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(m)), Error);
  m = base(ex::Kind::mixed_dirichlet_neumann);
  m.eps = {1e-10};
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(m)), Error);
  ex::Config a = base(ex::Kind::ap_cascade);
  a.robin = {RobinVariant::inconsistent};
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(a)), Error);
  a = base(ex::Kind::ap_cascade);
  a.limit = "sideways";
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(a)), Error);
  ex::Config rb = base(ex::Kind::h_convergence);
  rb.bc = BcKind::robin;
  rb.eps = {0.0};
  CHECK_THROWS_AS(ex::validate(ex::with_defaults(rb)), Error);
  CHECK_THROWS_AS(ex::parse_kind("nope"), Error);
}

TEST_CASE("CBM Dirichlet P1 h-convergence rate") {
  ex::Config c = base(ex::Kind::h_convergence);
  c.methods = {Method::cbm};
  c.p = {1};
  const ex::Result r = ex::run(c);
  const auto* f = find_fit(r.summary["fits"], "CBM", "aubin", 1);
  REQUIRE(f != nullptr);
  const double rate = (*f)["rate"];
  CHECK(rate >= 1.7);
  CHECK(rate <= 2.3);
  CHECK(r.rows.size() == 3);
}

TEST_CASE("CSV bytes are reproducible and independent of the thread count") {
  ex::Config c = base(ex::Kind::h_convergence);
  c.methods = {Method::sbm_e, Method::sbm_i};
  c.forms = {WeakForm::nitsche, WeakForm::aubin};
  c.lc = {0.2, 0.1};
  c.p = {1, 3};
  c.conditioning = true;
  const fs::path d = scratch_dir();
  std::vector<std::string> csv;
  for (int threads : {1, 1, 4}) {
    c.threads = threads;
    const ex::Result r = ex::run(c);
    const std::string prefix = (d / ("repro" + std::to_string(csv.size()))).string();
    ex::write_outputs(ex::with_defaults(c), r, prefix, true);
    csv.push_back(slurp(prefix + ".csv"));
    const ex::json j = ex::json::parse(slurp(prefix + ".json"));
    CHECK(j["config"]["seed"] == 1);
    CHECK(j["rows"][0].contains("wall_time_s"));
    CHECK(fs::exists(prefix + ".dat"));
  }
  CHECK(csv[0] == csv[1]);
  CHECK(csv[0] == csv[2]);
  CHECK(csv[0].find("wall_time") == std::string::npos);
  // canonical row order: method, form, lc, P
  CHECK(csv[0].find("SBM-e,nitsche") < csv[0].find("SBM-e,aubin"));
  CHECK(csv[0].find("SBM-e") < csv[0].find("SBM-i"));
}

TEST_CASE("Lebesgue table matches the tabulated interior column") {
  const double table[10] = {1.00, 1.67, 2.11, 2.66, 3.12, 3.70, 4.27, 4.96, 5.74, 6.67};
  const ex::Result r = ex::run(base(ex::Kind::lebesgue_table));
  REQUIRE(r.rows.size() == 10);
  for (int i = 0; i < 10; ++i) {
    CHECK(r.rows[i]["P"] == i + 1);
    CHECK(oracle::sig3(r.rows[i]["lambda_interp"].get<double>()) == table[i]);
  }
}

TEST_CASE("Robin limits bracket the Dirichlet and Neumann references") {
  ex::Config c = base(ex::Kind::robin_limits);
  c.methods = {Method::cbm};
  c.p = {2};
  const ex::Result r = ex::run(c);
  int checked = 0;
  for (const auto& row : r.rows) {
    if (!row.contains("rel_diff_dirichlet") || row["rel_diff_dirichlet"].is_null()) continue;
    const double eps = row["eps"];
    if (eps < 1e-5) CHECK(row["rel_diff_dirichlet"].get<double>() < 1e-6);
    if (eps > 1e5) CHECK(row["rel_diff_neumann"].get<double>() < 1e-6);
    if (eps == 1.0) {
      CHECK(row["rel_diff_dirichlet"].get<double>() > 1e-6);
      CHECK(row["rel_diff_neumann"].get<double>() > 1e-6);
    }
    ++checked;
  }
  CHECK(checked == 6);
}

TEST_CASE("single random circle gives the sample as its statistics") {
  ex::Config c = base(ex::Kind::random_embedding_assessment);
  c.circles = 1;
  c.p = {2};
  c.methods = {Method::sbm_i};
  const ex::Result r = ex::run(c);
  REQUIRE(r.rows.size() == 1);
  const auto& s = r.summary["statistics"][0];
  CHECK(s["n"] == 1);
  CHECK(s["median_log10_error"].get<double>() == doctest::Approx(std::log10(r.rows[0]["error_l1"].get<double>())));
  CHECK(s["median_log10_kappa"].get<double>() == doctest::Approx(std::log10(r.rows[0]["kappa"].get<double>())));
  CHECK(s["variance_log10_error"].get<double>() == 0.0);
  // centres keep the 2 l_c margin
  const double lo = ex::kDiskRadius + 2 * 0.15, hi = 2 - lo;
  CHECK(r.rows[0]["cx"].get<double>() >= lo);
  CHECK(r.rows[0]["cy"].get<double>() <= hi);
}

TEST_CASE("mixed Dirichlet-Neumann problem on the square with a hole") {
  ex::Config c = base(ex::Kind::mixed_dirichlet_neumann);
  c.methods = {Method::sbm_i};
  c.lc = {1.0 / 8};
  c.p = {2, 4, 6};
  const ex::Result r = ex::run(c);
  std::map<std::pair<std::string, int>, double> err;
  for (const auto& row : r.rows) err[{row["form"], row["P"]}] = row["error_l1"];
  for (const char* f : {"aubin", "nitsche"}) {
    // golden value from the desk run: more than 5 orders
    CHECK(std::log10(err[{f, 2}] / err[{f, 6}]) >= 3.0);
    CHECK(err[{f, 4}] < err[{f, 2}]);
  }
  for (int P : {2, 4, 6}) CHECK(std::abs(std::log10(err[{"aubin", P}] / err[{"nitsche", P}])) <= 1.0);

  // swapped conditions
  c.eps = {1e10, 1e-10};
  c.forms = {WeakForm::aubin};
  const ex::Result s = ex::run(c);
  CHECK(s.rows.back()["error_l1"].get<double>() < s.rows.front()["error_l1"].get<double>());
  CHECK(s.rows.back()["error_l1"].get<double>() < 1e-4);
}

TEST_CASE("Vandermonde study rows") {
  const ex::Result r = ex::run(base(ex::Kind::vandermonde_1d));
  const auto& per = r.summary["per_P"];
  REQUIRE(per.size() == 9);
  for (const auto& p : per) {
    CHECK(p["monotone_on_0_2"] == true);
    CHECK(p["singular_hits"] == p["P"]);
  }
}

TEST_CASE("truncated slope stops at the floor") {
  const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
  CHECK(ex::truncated_slope(eps, {1e-3, 1e-6, 1e-9, 1e-12}) == doctest::Approx(3.0));
  CHECK(ex::truncated_slope(eps, {1e-3, 1e-6, 1e-9, 0.9e-9}) == doctest::Approx(3.0));
}

}
