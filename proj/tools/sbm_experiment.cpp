// command-line driver for the experiment harness
#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sbm/experiments.hpp"
#include "sbm/kernels.hpp"

using namespace sbm;
namespace ex = sbm::experiments;

namespace {

template <class T, class F>
std::vector<T> map_all(const std::vector<std::string>& in, F&& f) {
  std::vector<T> out;
  for (const auto& s : in) out.push_back(f(s));
  return out;
}

Method method_arg(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return parse_method(s);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shifted boundary spectral element experiments"};
  std::string kind = "h_convergence", bc = "dirichlet", out = "result", gamma = "avg", isa;
  std::vector<std::string> methods, forms, robin;
  ex::Config cfg;
  bool dat = false, aligned = false, background = false, kappa = false, no_kappa = false, quiet = false;

  app.add_option("--experiment", kind, "experiment kind")
      ->check(CLI::IsMember({"h_convergence", "p_convergence", "conditioning", "aligned_verification",
                             "random_embedding_assessment", "robin_consistency_delta", "robin_limits",
                             "mixed_dirichlet_neumann", "ap_cascade", "lebesgue_table", "vandermonde_1d"}));
  app.add_option("--method", methods, "CBM, SBM-e, SBM-ei, SBM-i (repeatable)");
  app.add_option("--form", forms, "nitsche or aubin (repeatable)")->check(CLI::IsMember({"nitsche", "aubin"}));
  app.add_option("--bc", bc, "dirichlet, neumann or robin")->check(CLI::IsMember({"dirichlet", "neumann", "robin"}));
  app.add_option("--robin", robin, "Robin formulation (repeatable)")
      ->check(CLI::IsMember({"inconsistent", "nitsche_corrected_coeffs", "nitsche_full_condition", "aubin"}));
  app.add_option("--eps", cfg.eps, "Robin eps values");
  app.add_option("--lc-ladder", cfg.lc, "characteristic lengths");
  app.add_option("--p-ladder", cfg.p, "polynomial orders");
  app.add_option("--seed", cfg.seed, "mesher / sampling seed");
  app.add_option("--out", out, "output prefix (writes .csv and .json)");
  app.add_flag("--dat", dat, "also write a whitespace separated .dat table");
  app.add_option("--gamma-scaling", gamma, "avg or local-h")->check(CLI::IsMember({"avg", "local-h"}));
  app.add_option("--mms", cfg.mms, "manufactured solution preset (canonical, draft)");
  app.add_option("--alpha", cfg.alpha, "reaction coefficient (default 0 for Dirichlet, else 1)");
  app.add_flag("--aligned", aligned, "aligned disk fixtures");
  app.add_flag("--background", background, "circle embedded in a background square mesh");
  app.add_flag("--kappa", kappa, "compute condition numbers");
  app.add_flag("--no-kappa", no_kappa, "skip condition numbers");
  app.add_option("--svd-limit", cfg.svd_limit, "largest system for an exact SVD condition number");
  app.add_flag("--neumann-penalty", cfg.neumann_penalty, "Neumann form with the symmetric penalty term");
  app.add_flag("--symmetric-dirichlet", cfg.symmetric_dirichlet, "symmetric Dirichlet variant");
  app.add_option("--circles", cfg.circles, "number of random circles");
  app.add_option("--delta", cfg.delta, "Robin data perturbation");
  app.add_option("--limit", cfg.limit, "AP cascade limit")->check(CLI::IsMember({"dirichlet", "neumann"}));
  app.add_option("--mesh", cfg.mesh_file, "Gmsh mesh used instead of the generated one");
  app.add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
  app.add_option("--isa", isa, "force kernel variant")->check(CLI::IsMember({"scalar", "avx2"}));
  app.add_flag("--quiet", quiet, "no summary on stdout");
  CLI11_PARSE(app, argc, argv);

  try {
    if (!isa.empty()) kernels::force_isa(isa == "avx2" ? kernels::Isa::avx2 : kernels::Isa::scalar);
    cfg.kind = ex::parse_kind(kind);
    cfg.bc = parse_bc(bc);
    cfg.methods = map_all<Method>(methods, method_arg);
    cfg.forms = map_all<WeakForm>(forms, parse_form);
    cfg.robin = map_all<RobinVariant>(robin, parse_robin);
    cfg.gamma_scaling = gamma == "avg" ? GammaScaling::avg : GammaScaling::local_h;
    if (aligned && background) throw Error("--aligned and --background are exclusive");
    if (aligned) cfg.aligned = true;
    if (background) cfg.aligned = false;
    if (kappa && no_kappa) throw Error("--kappa and --no-kappa are exclusive");
    if (kappa) cfg.conditioning = true;
    if (no_kappa) cfg.conditioning = false;
    cfg = ex::with_defaults(cfg);
    ex::validate(cfg);
    const ex::Result r = ex::run(cfg);
    ex::write_outputs(cfg, r, out, dat);
    if (!quiet) std::cout << r.summary.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
