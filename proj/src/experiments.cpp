#include "sbm/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <thread>

#include "sbm/linear_solver.hpp"
#include "sbm/rng.hpp"

namespace sbm::experiments {

namespace {

const Vec2 kCenter(0.5, 0.5);

const std::vector<std::pair<Kind, std::string>> kKinds = {
    {Kind::h_convergence, "h_convergence"},
    {Kind::p_convergence, "p_convergence"},
    {Kind::conditioning, "conditioning"},
    {Kind::aligned_verification, "aligned_verification"},
    {Kind::random_embedding_assessment, "random_embedding_assessment"},
    {Kind::robin_consistency_delta, "robin_consistency_delta"},
    {Kind::robin_limits, "robin_limits"},
    {Kind::mixed_dirichlet_neumann, "mixed_dirichlet_neumann"},
    {Kind::ap_cascade, "ap_cascade"},
    {Kind::lebesgue_table, "lebesgue_table"},
    {Kind::vandermonde_1d, "vandermonde_1d"},
};

template <class F>
void parallel_for(int n, int threads, F&& fn) {
  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errs(threads);
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i; (i = next++) < n;) fn(i);
      } catch (...) {
        errs[t] = std::current_exception();
        next = n;
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errs)
    if (e) std::rethrow_exception(e);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

RobinVariant variant_for(WeakForm f) {
  return f == WeakForm::aubin ? RobinVariant::aubin : RobinVariant::nitsche_full_condition;
}

WeakForm form_for(RobinVariant v) { return v == RobinVariant::aubin ? WeakForm::aubin : WeakForm::nitsche; }

double alpha_of(const Config& c, BcKind bc) {
  if (c.alpha >= 0) return c.alpha;
  return bc == BcKind::dirichlet ? 0.0 : 1.0;
}

BoundaryProblem make_problem(const Config& c, const Manufactured& mms, BcKind bc, WeakForm form,
                             double eps, double alpha) {
  BoundaryProblem p = mms_problem(mms, bc, alpha, eps);
  p.form = form;
  p.gamma_scaling = c.gamma_scaling;
  p.dirichlet = c.symmetric_dirichlet ? DirichletVariant::symmetric : DirichletVariant::nonsymmetric;
  p.neumann = c.neumann_penalty ? NeumannVariant::with_symmetric_penalty : NeumannVariant::plain;
  p.robin = c.robin.empty() ? variant_for(form) : c.robin.front();
  return p;
}

void put_stats(json& row, const SurrogateDomain& dom, int ndof) {
  row["n_elm"] = static_cast<int>(dom.active_elements.size());
  row["ndof"] = ndof;
  row["h_min"] = dom.stats.h_min;
  row["h_avg"] = dom.stats.h_avg;
  row["h_max"] = dom.stats.h_max;
}

void put_kappa(json& row, const SpMat& A, int svd_limit) {
  const Conditioning k = condition_number(A, svd_limit);
  row["kappa"] = k.value;
  row["kappa_exact"] = k.exact_2norm;
}

double max_normal_defect(const SurrogateDomain& dom) {
  double m = 0.0;
  for (const auto& se : dom.edges)
    for (const auto& bp : se.qp) m = std::max(m, 1.0 - se.nbar.dot(bp.n));
  return m;
}

TriMesh generated_mesh(const Config& c, Method m, double lc) {
  if (!c.mesh_file.empty()) return read_gmsh(c.mesh_file);
  MesherOptions o;
  o.seed = c.seed;
  if (*c.aligned) return aligned_disk_mesh(m, lc, c.seed);
  if (m == Method::cbm) return mesh_disk(kCenter, kDiskRadius, lc, o);
  return mesh_rectangle(Vec2(0, 0), Vec2(1, 1), lc, o);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  if (n == 0) return std::numeric_limits<double>::quiet_NaN();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double variance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / (v.size() - 1);
}

// ---- convergence family -------------------------------------------------

struct ConvCell {
  Method method;
  WeakForm form;
  int P;
  double lc, eps;
};

Result run_convergence(const Config& c) {
  const Manufactured mms = Manufactured::preset(c.mms);
  const Circle circ(kCenter, kDiskRadius);
  const bool by_p = c.kind == Kind::p_convergence;
  const bool want_kappa = *c.conditioning;
  std::vector<double> epss = c.bc == BcKind::robin ? c.eps : std::vector<double>{0.0};
  std::vector<ConvCell> cells;
  for (Method m : c.methods)
    for (WeakForm f : c.forms)
      for (double eps : epss) {
        if (by_p) {
          for (double lc : c.lc)
            for (int P : c.p) cells.push_back({m, f, P, lc, eps});
        } else {
          for (int P : c.p)
            for (double lc : c.lc) cells.push_back({m, f, P, lc, eps});
        }
      }
  std::vector<json> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const ConvCell& k = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    const TriMesh mesh = generated_mesh(c, k.method, k.lc);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &circ, k.method, k.P);
    const BoundaryProblem prob = make_problem(c, mms, c.bc, k.form, k.eps, alpha_of(c, c.bc));
    const AssembledSystem sys = assemble(dom, ref, prob);
    const Vec u = solve(sys.A, sys.b);
    json row;
    row["method"] = to_string(k.method);
    row["form"] = to_string(k.form);
    row["bc"] = to_string(c.bc);
    if (c.bc == BcKind::robin) {
      row["robin"] = sbm::to_string(prob.robin);
      row["eps"] = k.eps;
    }
    row["P"] = k.P;
    row["lc"] = k.lc;
    put_stats(row, dom, sys.dofs.ndof);
    row["error_l1"] = l1_error(dom, ref, sys.dofs, u, [&](const Vec2& x) { return mms.u(x); });
    row["residual_l1"] = residual_l1(sys, interpolate(sys.dofs, [&](const Vec2& x) { return mms.u(x); }));
    if (want_kappa) put_kappa(row, sys.A, c.svd_limit);
    row["mapping_fallbacks"] = dom.mapping_fallbacks;
    row["wall_time_s"] = seconds_since(t0);
    rows[i] = row;
  });
  Result r;
  for (auto& row : rows) r.rows.push_back(row);

  // fitted rates / slopes per curve
  json fits = json::array();
  for (Method m : c.methods)
    for (WeakForm f : c.forms)
      for (double eps : epss) {
        if (by_p) {
          for (double lc : c.lc) {
            json e = {{"method", to_string(m)}, {"form", to_string(f)}, {"lc", lc}};
            if (c.bc == BcKind::robin) e["eps"] = eps;
            json errs = json::array();
            for (size_t i = 0; i < cells.size(); ++i)
              if (cells[i].method == m && cells[i].form == f && cells[i].lc == lc && cells[i].eps == eps)
                errs.push_back({{"P", cells[i].P}, {"error_l1", rows[i]["error_l1"]}});
            e["errors"] = errs;
            fits.push_back(e);
          }
          continue;
        }
        for (int P : c.p) {
          std::vector<double> h, err, kap;
          for (size_t i = 0; i < cells.size(); ++i)
            if (cells[i].method == m && cells[i].form == f && cells[i].P == P && cells[i].eps == eps) {
              h.push_back(rows[i]["h_max"].get<double>());
              err.push_back(rows[i]["error_l1"].get<double>());
              if (want_kappa) kap.push_back(rows[i]["kappa"].get<double>());
            }
          json e = {{"method", to_string(m)}, {"form", to_string(f)}, {"P", P}};
          if (c.bc == BcKind::robin) e["eps"] = eps;
          if (h.size() >= 2) {
            e["rate"] = fit_rate(h, err, 3);
            if (want_kappa) e["kappa_slope"] = fit_slope(h, kap);
          }
          fits.push_back(e);
        }
      }
  r.summary[by_p ? "curves" : "fits"] = fits;
  return r;
}

// ---- random embedding ---------------------------------------------------

Result run_random_embedding(const Config& c) {
  const double L = 2.0, lc = c.lc.front();
  const Manufactured mms = Manufactured::preset(c.mms, L, L);
  MesherOptions o;
  o.seed = c.seed;
  const TriMesh mesh = c.mesh_file.empty() ? mesh_rectangle(Vec2(0, 0), Vec2(L, L), lc, o) : read_gmsh(c.mesh_file);
  const double lo = kDiskRadius + 2 * lc, hi = L - kDiskRadius - 2 * lc;
  SplitMix64 rng(c.seed);
  std::vector<Vec2> centers;
  int resampled = 0;
  while (static_cast<int>(centers.size()) < c.circles) {
    const double x = rng.uniform(lo, hi);
    const double y = rng.uniform(lo, hi);
    const Vec2 ctr(x, y);
    bool ok = true;
    const Circle circ(ctr, kDiskRadius);
    for (Method m : c.methods) {
      try {
        build_surrogate(mesh, &circ, m, 1);
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) centers.push_back(ctr);
    else ++resampled;
    require(resampled < 100 * c.circles + 100, "random embedding: cannot place circles");
  }

  struct Cell {
    int circle;
    Method method;
    int P;
  };
  std::vector<Cell> cells;
  for (int i = 0; i < c.circles; ++i)
    for (Method m : c.methods)
      for (int P : c.p) cells.push_back({i, m, P});
  const WeakForm form = c.forms.front();
  std::vector<json> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const Cell& k = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    const Circle circ(centers[k.circle], kDiskRadius);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &circ, k.method, k.P);
    const BoundaryProblem prob = make_problem(c, mms, c.bc, form, c.eps.empty() ? 1.0 : c.eps.front(),
                                              alpha_of(c, c.bc));
    const AssembledSystem sys = assemble(dom, ref, prob);
    const Vec u = solve(sys.A, sys.b);
    json row;
    row["circle"] = k.circle;
    row["cx"] = centers[k.circle].x();
    row["cy"] = centers[k.circle].y();
    row["method"] = to_string(k.method);
    row["form"] = to_string(form);
    row["bc"] = to_string(c.bc);
    row["P"] = k.P;
    row["lc"] = lc;
    put_stats(row, dom, sys.dofs.ndof);
    row["error_l1"] = l1_error(dom, ref, sys.dofs, u, [&](const Vec2& x) { return mms.u(x); });
    put_kappa(row, sys.A, c.svd_limit);
    row["wall_time_s"] = seconds_since(t0);
    rows[i] = row;
  });
  Result r;
  for (auto& row : rows) r.rows.push_back(row);
  json stats = json::array();
  for (Method m : c.methods)
    for (int P : c.p) {
      std::vector<double> le, lk;
      for (size_t i = 0; i < cells.size(); ++i)
        if (cells[i].method == m && cells[i].P == P) {
          le.push_back(std::log10(rows[i]["error_l1"].get<double>()));
          lk.push_back(std::log10(rows[i]["kappa"].get<double>()));
        }
      stats.push_back({{"method", to_string(m)},
                       {"P", P},
                       {"n", le.size()},
                       {"median_log10_error", median(le)},
                       {"variance_log10_error", variance(le)},
                       {"median_log10_kappa", median(lk)},
                       {"variance_log10_kappa", variance(lk)}});
    }
  r.summary["statistics"] = stats;
  r.summary["resampled"] = resampled;
  return r;
}

// ---- Robin experiments --------------------------------------------------

Result run_delta(const Config& c) {
  const Manufactured mms = Manufactured::preset(c.mms);
  const Circle circ(kCenter, kDiskRadius);
  const double eps = c.eps.front(), delta = c.delta;
  struct Cell {
    Method method;
    RobinVariant variant;
    double lc;
    int P;
  };
  std::vector<Cell> cells;
  for (Method m : c.methods)
    for (RobinVariant v : c.robin)
      for (double lc : c.lc)
        for (int P : c.p) cells.push_back({m, v, lc, P});
  std::vector<json> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const Cell& k = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    const TriMesh mesh = generated_mesh(c, k.method, k.lc);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &circ, k.method, k.P);
    BoundaryProblem prob = make_problem(c, mms, BcKind::robin, form_for(k.variant), eps, alpha_of(c, BcKind::robin));
    prob.robin = k.variant;
    SegmentCondition& sc = prob.segments.at(0);
    const BoundaryField u0 = sc.value, q0 = sc.flux;
    sc.value = [u0, delta](const Vec2& x, const Vec2& n, int s) { return u0(x, n, s) - delta; };
    sc.flux = [q0, delta, eps](const Vec2& x, const Vec2& n, int s) { return q0(x, n, s) + delta / eps; };
    const AssembledSystem sys = assemble(dom, ref, prob);
    const Vec u = solve(sys.A, sys.b);
    json row;
    row["method"] = to_string(k.method);
    row["robin"] = sbm::to_string(k.variant);
    row["eps"] = eps;
    row["delta"] = delta;
    row["P"] = k.P;
    row["lc"] = k.lc;
    put_stats(row, dom, sys.dofs.ndof);
    row["max_one_minus_nbar_n"] = max_normal_defect(dom);
    row["residual_l1"] = residual_l1(sys, interpolate(sys.dofs, [&](const Vec2& x) { return mms.u(x); }));
    row["error_l1"] = l1_error(dom, ref, sys.dofs, u, [&](const Vec2& x) { return mms.u(x); });
    row["wall_time_s"] = seconds_since(t0);
    rows[i] = row;
  });
  Result r;
  for (auto& row : rows) r.rows.push_back(row);
  json out = json::array();
  for (Method m : c.methods)
    for (RobinVariant v : c.robin) {
      std::vector<double> h, plateau, defect;
      json levels = json::array();
      for (double lc : c.lc) {
        double best = std::numeric_limits<double>::infinity(), last = 0, hm = 0, df = 0;
        int plast = -1;
        for (size_t i = 0; i < cells.size(); ++i) {
          const Cell& k = cells[i];
          if (k.method != m || k.variant != v || k.lc != lc) continue;
          const double res = rows[i]["residual_l1"].get<double>();
          best = std::min(best, res);
          if (k.P > plast) {
            plast = k.P;
            last = res;
          }
          hm = rows[i]["h_max"].get<double>();
          df = rows[i]["max_one_minus_nbar_n"].get<double>();
        }
        h.push_back(hm);
        plateau.push_back(best);
        defect.push_back(df);
        levels.push_back({{"lc", lc}, {"h_max", hm}, {"plateau_residual", best},
                          {"residual_at_max_P", last}, {"max_P", plast}, {"max_one_minus_nbar_n", df}});
      }
      json e = {{"method", to_string(m)}, {"robin", sbm::to_string(v)}, {"levels", levels}};
      if (h.size() >= 2) {
        e["plateau_slope"] = fit_rate(h, plateau, 3);
        e["normal_defect_slope"] = fit_rate(h, defect, 3);
      }
      out.push_back(e);
    }
  r.summary["variants"] = out;
  return r;
}

// symmetric Dirichlet / Neumann problems that a consistent Robin form tends to
BoundaryProblem limit_problem(const BoundaryProblem& robin, BcKind kind) {
  BoundaryProblem p = robin;
  p.form = form_for(robin.robin);
  p.dirichlet = DirichletVariant::symmetric;
  p.neumann = robin.robin == RobinVariant::aubin ? NeumannVariant::plain : NeumannVariant::with_symmetric_penalty;
  for (auto& [seg, sc] : p.segments) sc.kind = kind;
  return p;
}

Result run_robin_limits(const Config& c) {
  const Manufactured mms = Manufactured::preset(c.mms);
  const Circle circ(kCenter, kDiskRadius);
  struct Cell {
    Method method;
    RobinVariant variant;
    double lc;
    int P;
  };
  std::vector<Cell> cells;
  for (Method m : c.methods)
    for (RobinVariant v : c.robin)
      for (double lc : c.lc)
        for (int P : c.p) cells.push_back({m, v, lc, P});
  std::vector<std::vector<json>> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const Cell& k = cells[i];
    const TriMesh mesh = generated_mesh(c, k.method, k.lc);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &circ, k.method, k.P);
    const double alpha = alpha_of(c, BcKind::robin);
    auto exact = [&](const Vec2& x) { return mms.u(x); };
    BoundaryProblem base = make_problem(c, mms, BcKind::robin, form_for(k.variant), 1.0, alpha);
    base.robin = k.variant;
    const BoundaryProblem dp = limit_problem(base, BcKind::dirichlet);
    const BoundaryProblem np_ = limit_problem(base, BcKind::neumann);
    const AssembledSystem ds = assemble(dom, ref, dp);
    const AssembledSystem ns = assemble(dom, ref, np_);
    const Vec ud = solve(ds.A, ds.b), un = solve(ns.A, ns.b);
    const double nd = l1_norm(dom, ref, ds.dofs, ud), nn = l1_norm(dom, ref, ns.dofs, un);
    auto base_row = [&](const std::string& bc) {
      json row;
      row["method"] = to_string(k.method);
      row["robin"] = sbm::to_string(k.variant);
      row["bc"] = bc;
      row["P"] = k.P;
      row["lc"] = k.lc;
      put_stats(row, dom, ds.dofs.ndof);
      return row;
    };
    json rd = base_row("dirichlet");
    rd["eps"] = 0.0;
    rd["error_l1"] = l1_error(dom, ref, ds.dofs, ud, exact);
    rows[i].push_back(rd);
    json rn = base_row("neumann");
    rn["eps"] = std::numeric_limits<double>::infinity();
    rn["error_l1"] = l1_error(dom, ref, ns.dofs, un, exact);
    rows[i].push_back(rn);
    for (double eps : c.eps) {
      BoundaryProblem rp = base;
      rp.segments.at(0).eps = [eps](const Vec2&) { return eps; };
      const AssembledSystem rs = assemble(dom, ref, rp);
      const Vec ur = solve(rs.A, rs.b);
      json row = base_row("robin");
      row["eps"] = eps;
      row["error_l1"] = l1_error(dom, ref, rs.dofs, ur, exact);
      row["rel_diff_dirichlet"] = l1_norm(dom, ref, rs.dofs, Vec(ur - ud)) / nd;
      row["rel_diff_neumann"] = l1_norm(dom, ref, rs.dofs, Vec(ur - un)) / nn;
      rows[i].push_back(row);
    }
  });
  Result r;
  for (auto& rs : rows)
    for (auto& row : rs) r.rows.push_back(row);
  return r;
}

Result run_mixed(const Config& c) {
  const double L = 2.0;
  const Manufactured mms = Manufactured::preset(c.mms, L, L);
  auto outer = std::make_shared<Rectangle>(Vec2(0.25, 0.25), Vec2(1.75, 1.75), 0);
  auto inner = std::make_shared<Circle>(Vec2(1, 1), kDiskRadius, 1);
  const Difference geom(outer, inner);
  const double eps_out = c.eps.at(0), eps_in = c.eps.at(1);
  struct Cell {
    Method method;
    WeakForm form;
    double lc;
    int P;
  };
  std::vector<Cell> cells;
  for (Method m : c.methods)
    for (WeakForm f : c.forms)
      for (double lc : c.lc)
        for (int P : c.p) cells.push_back({m, f, lc, P});
  std::vector<json> rows(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const Cell& k = cells[i];
    const auto t0 = std::chrono::steady_clock::now();
    MesherOptions o;
    o.seed = c.seed;
    const TriMesh mesh = c.mesh_file.empty() ? mesh_rectangle(Vec2(0, 0), Vec2(L, L), k.lc, o) : read_gmsh(c.mesh_file);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &geom, k.method, k.P);
    BoundaryProblem prob = make_problem(c, mms, BcKind::robin, k.form, eps_out, alpha_of(c, BcKind::robin));
    prob.robin = c.robin.empty() ? variant_for(k.form) : c.robin.front();
    SegmentCondition in = prob.segments.at(0);
    in.eps = [eps_in](const Vec2&) { return eps_in; };
    prob.segments[1] = in;
    const AssembledSystem sys = assemble(dom, ref, prob);
    const Vec u = solve(sys.A, sys.b);
    json row;
    row["method"] = to_string(k.method);
    row["form"] = to_string(k.form);
    row["robin"] = sbm::to_string(prob.robin);
    row["eps_outer"] = eps_out;
    row["eps_inner"] = eps_in;
    row["P"] = k.P;
    row["lc"] = k.lc;
    put_stats(row, dom, sys.dofs.ndof);
    row["error_l1"] = l1_error(dom, ref, sys.dofs, u, [&](const Vec2& x) { return mms.u(x); });
    row["residual_l1"] = residual_l1(sys, interpolate(sys.dofs, [&](const Vec2& x) { return mms.u(x); }));
    if (*c.conditioning) put_kappa(row, sys.A, c.svd_limit);
    row["wall_time_s"] = seconds_since(t0);
    rows[i] = row;
  });
  Result r;
  for (auto& row : rows) r.rows.push_back(row);
  return r;
}

Result run_ap(const Config& c) {
  const Manufactured mms = Manufactured::preset(c.mms);
  const Circle circ(kCenter, kDiskRadius);
  const bool dir = c.limit == "dirichlet";
  struct Cell {
    Method method;
    RobinVariant variant;
    double lc;
    int P;
  };
  std::vector<Cell> cells;
  for (Method m : c.methods)
    for (RobinVariant v : c.robin)
      for (double lc : c.lc)
        for (int P : c.p) cells.push_back({m, v, lc, P});
  std::vector<std::vector<json>> rows(cells.size());
  std::vector<json> fits(cells.size());
  parallel_for(static_cast<int>(cells.size()), c.threads, [&](int i) {
    const Cell& k = cells[i];
    const TriMesh mesh = generated_mesh(c, k.method, k.lc);
    const ReferenceElement ref(k.P);
    const SurrogateDomain dom = build_surrogate(mesh, &circ, k.method, k.P);
    BoundaryProblem base = make_problem(c, mms, BcKind::robin, form_for(k.variant), 1.0, alpha_of(c, BcKind::robin));
    base.robin = k.variant;
    SegmentCondition& sc = base.segments.at(0);
    // physical data: no flux in the Dirichlet limit, no value in the Neumann limit
    if (dir) sc.flux = [](const Vec2&, const Vec2&, int) { return 0.0; };
    else sc.value = [](const Vec2&, const Vec2&, int) { return 0.0; };
    const CascadeResult cr = dir ? dirichlet_cascade(dom, ref, base) : neumann_cascade(dom, ref, base);
    std::vector<double> xs, r0, r1, r2;
    for (double eps : c.eps) {
      BoundaryProblem rp = base;
      rp.segments.at(0).eps = [eps](const Vec2&) { return eps; };
      const AssembledSystem sys = assemble(dom, ref, rp);
      const Vec u = solve(sys.A, sys.b);
      const double s = dir ? eps : 1.0 / eps;
      const Vec d0 = u - cr.u0;
      const Vec d1 = d0 - s * cr.u1;
      const Vec d2 = d1 - s * s * cr.u2;
      json row;
      row["method"] = to_string(k.method);
      row["robin"] = sbm::to_string(k.variant);
      row["limit"] = c.limit;
      row["P"] = k.P;
      row["lc"] = k.lc;
      put_stats(row, dom, sys.dofs.ndof);
      row["eps"] = eps;
      row["r0"] = l1_norm(dom, ref, sys.dofs, d0);
      row["r1"] = l1_norm(dom, ref, sys.dofs, d1);
      row["r2"] = l1_norm(dom, ref, sys.dofs, d2);
      xs.push_back(s);
      r0.push_back(row["r0"].get<double>());
      r1.push_back(row["r1"].get<double>());
      r2.push_back(row["r2"].get<double>());
      rows[i].push_back(row);
    }
    json f = {{"method", to_string(k.method)}, {"robin", sbm::to_string(k.variant)}, {"P", k.P}, {"lc", k.lc}};
    if (xs.size() >= 2) {
      f["slope_r0"] = fit_slope(xs, r0);
      f["slope_r1"] = fit_slope(xs, r1);
      f["slope_r2"] = fit_slope(xs, r2);
      f["slope_r2_truncated"] = truncated_slope(xs, r2);
    }
    fits[i] = f;
  });
  Result r;
  for (auto& rs : rows)
    for (auto& row : rs) r.rows.push_back(row);
  r.summary["fits"] = fits;
  return r;
}

// ---- basis studies ------------------------------------------------------

Result run_lebesgue(const Config& c) {
  Result r;
  std::vector<json> rows(c.p.size());
  parallel_for(static_cast<int>(c.p.size()), c.threads, [&](int i) {
    const ReferenceElement ref(c.p[i]);
    rows[i] = {{"P", c.p[i]}, {"lambda_interp", lebesgue_interpolation(ref)},
               {"lambda_extrap", lebesgue_extrapolation(ref)}};
  });
  for (auto& row : rows) r.rows.push_back(row);
  return r;
}

Result run_vandermonde(const Config& c) {
  Result r;
  json per_p = json::array();
  for (int P : c.p) {
    const std::vector<double> x = gauss_lobatto_nodes(P);
    std::set<double> grid;
    for (int i = 1; i <= 200; ++i) grid.insert(-2.0 + 0.02 * i);
    // shifts that land on a retained node
    for (int i = 0; i < P; ++i) grid.insert(x[i] - 1.0);
    bool monotone = true;
    double prev = 0.0, k2 = 0.0;
    int singular_hits = 0;
    for (double rs : grid) {
      const double k = shifted_vandermonde_condition(P, rs);
      bool hit = false;
      for (int i = 0; i < P; ++i) hit = hit || rs == x[i] - 1.0;
      if (hit && std::isinf(k)) ++singular_hits;
      if (rs > 0) {
        if (prev > 0 && !(k > prev)) monotone = false;
        prev = k;
      }
      if (std::abs(rs - 2.0) < 1e-12) k2 = k;
      r.rows.push_back({{"P", P}, {"r_star", rs}, {"kappa", k}, {"hits_node", hit}});
    }
    per_p.push_back({{"P", P}, {"monotone_on_0_2", monotone}, {"kappa_at_2", k2},
                     {"singular_hits", singular_hits}, {"node_hits", P}});
  }
  r.summary["per_P"] = per_p;
  return r;
}

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number()) {
    const double d = v.get<double>();
    if (std::isinf(d)) return d > 0 ? "inf" : "-inf";
    if (std::isnan(d)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", d);
    return buf;
  }
  return v.dump();
}

// json cannot carry inf / nan; they are written as strings
json sanitize(const json& v) {
  if (v.is_object() || v.is_array()) {
    json out = v;
    for (auto it = out.begin(); it != out.end(); ++it) *it = sanitize(*it);
    return out;
  }
  if (v.is_number_float() && !std::isfinite(v.get<double>())) return csv_cell(v);
  return v;
}

} // namespace

Kind parse_kind(const std::string& s) {
  for (const auto& [k, name] : kKinds)
    if (name == s) return k;
  throw Error("unknown experiment '" + s + "'");
}

std::string to_string(Kind k) {
  for (const auto& [kk, name] : kKinds)
    if (kk == k) return name;
  return "?";
}

std::string to_string(WeakForm f) { return f == WeakForm::aubin ? "aubin" : "nitsche"; }

std::string to_string(BcKind b) {
  switch (b) {
    case BcKind::dirichlet: return "dirichlet";
    case BcKind::neumann: return "neumann";
    case BcKind::robin: return "robin";
  }
  return "?";
}

double aligned_radius(Method m, double lc) {
  if (m == Method::cbm) return kDiskRadius;
  return m == Method::sbm_e ? kDiskRadius - lc / 4 : kDiskRadius + lc / 4;
}

TriMesh aligned_disk_mesh(Method m, double lc, std::uint64_t seed) {
  MesherOptions o;
  o.seed = seed;
  return mesh_disk(kCenter, aligned_radius(m, lc), lc, o);
}

double truncated_slope(const std::vector<double>& x, const std::vector<double>& y, double drop) {
  std::vector<size_t> idx(x.size());
  for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return x[a] > x[b]; });
  std::vector<double> xs{x[idx[0]]}, ys{y[idx[0]]};
  for (size_t i = 1; i < idx.size(); ++i) {
    if (!(ys.back() / y[idx[i]] >= drop)) break;
    xs.push_back(x[idx[i]]);
    ys.push_back(y[idx[i]]);
  }
  if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return fit_slope(xs, ys);
}

Config with_defaults(Config c) {
  auto set_methods = [&](std::vector<Method> m) {
    if (c.methods.empty()) c.methods = std::move(m);
  };
  auto set_lc = [&](std::vector<double> v) {
    if (c.lc.empty()) c.lc = std::move(v);
  };
  auto set_p = [&](std::vector<int> v) {
    if (c.p.empty()) c.p = std::move(v);
  };
  auto set_eps = [&](std::vector<double> v) {
    if (c.eps.empty()) c.eps = std::move(v);
  };
  auto set_robin = [&](std::vector<RobinVariant> v) {
    if (c.robin.empty()) c.robin = std::move(v);
  };
  const bool forms_given = !c.forms.empty();
  if (c.forms.empty()) c.forms = {WeakForm::aubin};
  // smooth k = 1 data where the canonical ladder would be pre-asymptotic
  const bool smooth = c.kind == Kind::aligned_verification || c.kind == Kind::robin_consistency_delta ||
                      c.kind == Kind::mixed_dirichlet_neumann || c.kind == Kind::ap_cascade;
  if (c.mms.empty()) c.mms = smooth ? "draft" : "canonical";
  const std::vector<Method> all{Method::cbm, Method::sbm_e, Method::sbm_ei, Method::sbm_i};
  switch (c.kind) {
    case Kind::h_convergence:
      set_methods(all);
      set_lc({0.1, 0.05, 0.025});
      set_p({1, 2, 3, 4});
      set_eps({1.0});
      if (!c.aligned) c.aligned = false;
      if (!c.conditioning) c.conditioning = false;
      break;
    case Kind::aligned_verification:
      set_methods(all);
      set_lc({0.2, 0.1, 0.05});
      set_p({1, 2, 3, 4});
      set_eps({1.0});
      if (!c.aligned) c.aligned = true;
      if (!c.conditioning) c.conditioning = true;
      break;
    case Kind::p_convergence:
      set_methods(all);
      set_lc({0.15, 0.05});
      set_p({1, 2, 3, 4, 5, 6, 7, 8});
      set_eps({1.0});
      if (!c.aligned) c.aligned = false;
      if (!c.conditioning) c.conditioning = true;
      break;
    case Kind::conditioning:
      set_methods({Method::cbm, Method::sbm_i});
      set_lc({0.2, 0.1, 0.07, 0.05});
      set_p({2});
      set_eps({1.0});
      if (!c.aligned) c.aligned = true;
      c.conditioning = true;
      break;
    case Kind::random_embedding_assessment:
      set_methods({Method::sbm_e, Method::sbm_ei, Method::sbm_i});
      set_lc({0.15});
      set_p({3, 5});
      set_eps({1.0});
      if (!c.aligned) c.aligned = false;
      c.conditioning = true;
      break;
    case Kind::robin_consistency_delta:
      set_methods({Method::sbm_i});
      set_lc({1.0 / 8, 1.0 / 16, 1.0 / 32});
      set_p({1, 2, 3, 4, 5, 6, 7, 8});
      set_eps({1.0});
      set_robin({RobinVariant::inconsistent, RobinVariant::nitsche_corrected_coeffs,
                 RobinVariant::nitsche_full_condition, RobinVariant::aubin});
      if (!c.aligned) c.aligned = true;
      if (!c.conditioning) c.conditioning = false;
      break;
    case Kind::robin_limits:
      set_methods({Method::cbm, Method::sbm_i});
      set_lc({0.1});
      set_p({2, 5});
      set_eps({1e-10, 1.0, 1e10});
      set_robin({RobinVariant::nitsche_full_condition, RobinVariant::aubin});
      if (!c.aligned) c.aligned = true;
      if (!c.conditioning) c.conditioning = false;
      break;
    case Kind::mixed_dirichlet_neumann:
      set_methods({Method::sbm_e, Method::sbm_i});
      if (!forms_given && c.robin.empty()) c.forms = {WeakForm::aubin, WeakForm::nitsche};
      set_lc({1.0 / 8, 1.0 / 16, 1.0 / 32});
      set_p({1, 2, 3, 4, 5, 6, 7, 8});
      set_eps({1e-10, 1e10});
      if (!c.aligned) c.aligned = false;
      if (!c.conditioning) c.conditioning = false;
      break;
    case Kind::ap_cascade:
      set_methods({Method::sbm_i});
      set_lc({1.0 / 8});
      set_p({6});
      set_eps(c.limit == "neumann" ? std::vector<double>{1e2, 1e3, 1e4} : std::vector<double>{1e-2, 1e-3, 1e-4});
      set_robin({RobinVariant::nitsche_full_condition, RobinVariant::aubin});
      if (!c.aligned) c.aligned = true;
      if (!c.conditioning) c.conditioning = false;
      break;
    case Kind::lebesgue_table:
      set_p({1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
      break;
    case Kind::vandermonde_1d:
      set_p({1, 2, 3, 4, 5, 6, 7, 8, 9});
      break;
  }
  if (!c.aligned) c.aligned = false;
  if (!c.conditioning) c.conditioning = false;
  return c;
}

void validate(const Config& c) {
  require(!c.p.empty(), "experiment: empty P ladder");
  for (int P : c.p) require(P >= 1 && P <= kMaxOrder, "experiment: P out of range");
  if (c.kind == Kind::lebesgue_table || c.kind == Kind::vandermonde_1d) return;
  require(!c.lc.empty(), "experiment: empty l_c ladder");
  for (double lc : c.lc) require(lc > 0, "experiment: l_c must be positive");
  require(!c.methods.empty() && !c.forms.empty(), "experiment: no method or form selected");
  (void)Manufactured::preset(c.mms);
  const bool has_cbm = std::find(c.methods.begin(), c.methods.end(), Method::cbm) != c.methods.end();
  switch (c.kind) {
    case Kind::random_embedding_assessment:
      require(!has_cbm, "random_embedding_assessment: CBM has no embedding, use SBM-e/SBM-ei/SBM-i");
      require(c.circles >= 1, "random_embedding_assessment: need at least one circle");
      require(c.bc != BcKind::robin || !c.eps.empty(), "random_embedding_assessment: Robin needs --eps");
      break;
    case Kind::mixed_dirichlet_neumann:
      require(!has_cbm, "mixed_dirichlet_neumann: no conforming mesh for the square with a hole, CBM unsupported");
      require(c.eps.size() == 2, "mixed_dirichlet_neumann: --eps takes exactly two values (outer, inner)");
      break;
    case Kind::robin_consistency_delta:
    case Kind::robin_limits:
    case Kind::ap_cascade:
      require(!c.robin.empty() && !c.eps.empty(), "robin experiment: no formulation or eps");
      for (double e : c.eps) require(e > 0, "robin experiment: eps must be positive");
      if (c.kind == Kind::ap_cascade)
        require(c.limit == "dirichlet" || c.limit == "neumann", "ap_cascade: limit is dirichlet or neumann");
      if (c.kind != Kind::robin_limits)
        for (RobinVariant v : c.robin)
          require(c.kind != Kind::ap_cascade || v != RobinVariant::inconsistent,
                  "ap_cascade: the inconsistent formulation is not asymptotic preserving");
      break;
    default:
      if (c.bc == BcKind::robin) require(!c.eps.empty(), "experiment: Robin needs --eps");
      break;
  }
  if (c.bc == BcKind::robin || c.kind == Kind::mixed_dirichlet_neumann)
    for (double e : c.eps) require(e > 0, "experiment: eps must be positive");
  if (c.aligned.value_or(false) && !c.mesh_file.empty())
    throw Error("experiment: a mesh file cannot be combined with aligned fixtures");
}

Result run(const Config& in) {
  const Config c = with_defaults(in);
  validate(c);
  switch (c.kind) {
    case Kind::h_convergence:
    case Kind::p_convergence:
    case Kind::conditioning:
    case Kind::aligned_verification: return run_convergence(c);
    case Kind::random_embedding_assessment: return run_random_embedding(c);
    case Kind::robin_consistency_delta: return run_delta(c);
    case Kind::robin_limits: return run_robin_limits(c);
    case Kind::mixed_dirichlet_neumann: return run_mixed(c);
    case Kind::ap_cascade: return run_ap(c);
    case Kind::lebesgue_table: return run_lebesgue(c);
    case Kind::vandermonde_1d: return run_vandermonde(c);
  }
  throw Error("experiment: unhandled kind");
}

json config_to_json(const Config& c) {
  json j;
  j["experiment"] = to_string(c.kind);
  json m = json::array();
  for (Method x : c.methods) m.push_back(to_string(x));
  j["methods"] = m;
  json f = json::array();
  for (WeakForm x : c.forms) f.push_back(to_string(x));
  j["forms"] = f;
  j["bc"] = to_string(c.bc);
  json rv = json::array();
  for (RobinVariant x : c.robin) rv.push_back(sbm::to_string(x));
  j["robin"] = rv;
  j["eps"] = c.eps;
  j["lc_ladder"] = c.lc;
  j["p_ladder"] = c.p;
  j["seed"] = c.seed;
  j["gamma_scaling"] = c.gamma_scaling == GammaScaling::avg ? "avg" : "local-h";
  j["mms"] = c.mms;
  j["alpha"] = c.alpha;
  j["aligned"] = c.aligned.value_or(false);
  j["neumann_penalty"] = c.neumann_penalty;
  j["symmetric_dirichlet"] = c.symmetric_dirichlet;
  j["conditioning"] = c.conditioning.value_or(false);
  j["circles"] = c.circles;
  j["delta"] = c.delta;
  j["limit"] = c.limit;
  if (!c.mesh_file.empty()) j["mesh_file"] = c.mesh_file;
  return sanitize(j);
}

void write_outputs(const Config& c, const Result& r, const std::string& prefix, bool dat) {
  std::vector<std::string> cols;
  for (const auto& row : r.rows)
    for (auto it = row.begin(); it != row.end(); ++it)
      if (it.key() != "wall_time_s" && std::find(cols.begin(), cols.end(), it.key()) == cols.end())
        cols.push_back(it.key());
  auto table = [&](const std::string& path, char sep, const std::string& lead) {
    std::ofstream out(path);
    require(static_cast<bool>(out), "cannot write " + path);
    out << lead;
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? std::string(1, sep) : "") << cols[i];
    out << "\n";
    for (const auto& row : r.rows) {
      for (size_t i = 0; i < cols.size(); ++i) {
        if (i) out << sep;
        const std::string cell = row.contains(cols[i]) ? csv_cell(row[cols[i]]) : (sep == ' ' ? "-" : "");
        out << cell;
      }
      out << "\n";
    }
  };
  table(prefix + ".csv", ',', "");
  if (dat) table(prefix + ".dat", ' ', "# ");
  json j;
  j["schema"] = 1;
  j["config"] = config_to_json(c);
  j["summary"] = sanitize(r.summary);
  j["rows"] = sanitize(r.rows);
  std::ofstream out(prefix + ".json");
  require(static_cast<bool>(out), "cannot write " + prefix + ".json");
  out << j.dump(2) << "\n";
}

} // namespace sbm::experiments
