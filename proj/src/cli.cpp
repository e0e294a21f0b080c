#include "relbif/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "relbif/stability.hpp"

namespace relbif {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- formatting

std::string num17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

std::string vec_str(const Vec& v, bool exact = true) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    s += exact ? num17(v(i)) : sci(v(i));
  }
  return s + "]";
}

std::string mat_str(const Mat& M, const std::string& indent) {
  if (M.size() == 0) return indent + "(empty " + std::to_string(M.rows()) + "x" + std::to_string(M.cols()) + ")\n";
  std::string s;
  for (Eigen::Index i = 0; i < M.rows(); ++i) s += indent + vec_str(M.row(i).transpose(), false) + "\n";
  return s;
}

struct Report {
  std::ostringstream os;
  void section(const std::string& name) { os << "[" << name << "]\n"; }
  void kv(const std::string& k, const std::string& v) { os << k << ": " << v << "\n"; }
  void kv(const std::string& k, double v) { kv(k, sci(v)); }
  void matrix(const std::string& k, const Mat& M) { os << k << ":\n" << mat_str(M, "  "); }
  void blank() { os << "\n"; }
};

// ---------------------------------------------------------------- config

std::vector<double> read_vec(const json& j, const std::string& field) {
  if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
  std::vector<double> v;
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ConfigError(field + "[" + std::to_string(i) + "]", "expected a number");
    v.push_back(j[i].get<double>());
  }
  return v;
}

Mat read_mat(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected a nonempty array of rows");
  std::vector<std::vector<double>> rows;
  for (size_t i = 0; i < j.size(); ++i) {
    rows.push_back(read_vec(j[i], field + "[" + std::to_string(i) + "]"));
    if (rows.back().size() != rows.front().size() || rows.front().empty())
      throw ConfigError(field + "[" + std::to_string(i) + "]", "rows must have equal nonzero length");
  }
  Mat M(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t k = 0; k < rows[i].size(); ++k) M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return M;
}

double read_num(const json& j, const std::string& field) {
  if (!j.is_number()) throw ConfigError(field, "expected a number");
  return j.get<double>();
}

int read_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) throw ConfigError(field, "expected an integer");
  return j.get<int>();
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(where.empty() ? "config" : where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(where.empty() ? it.key() : where + "." + it.key(), "unknown key");
  }
}

DiffScheme read_scheme(const json& j, const std::string& field) {
  check_keys(j, field, {"step_rel", "order", "richardson_levels"});
  DiffScheme s;
  if (j.contains("step_rel")) s.step_rel = read_num(j["step_rel"], field + ".step_rel");
  if (j.contains("order")) s.order = read_int(j["order"], field + ".order");
  if (j.contains("richardson_levels")) s.richardson_levels = read_int(j["richardson_levels"], field + ".richardson_levels");
  if (!(s.step_rel > 0.0) || (s.order != 2 && s.order != 4) || s.richardson_levels < 0)
    throw ConfigError(field, "invalid difference scheme");
  return s;
}

void read_numerics(const json& j, RunConfig& cfg) {
  Numerics& n = cfg.num;
  struct RealField {
    const char* key;
    double* dst;
  };
  struct IntField {
    const char* key;
    int* dst;
  };
  struct SchemeField {
    const char* key;
    DiffScheme* dst;
  };
  const RealField reals[] = {{"tol_alg", &n.tol_alg},       {"tol_rank", &n.tol_rank},   {"tol_geo", &n.tol_geo},
                             {"tol_inv", &n.tol_inv},       {"tol_H", &n.tol_H},         {"tol_Z", &n.tol_Z},
                             {"tau_switch", &n.tau_switch}, {"tol_match", &n.tol_match}, {"tol_newton", &n.tol_newton},
                             {"tol_eig", &n.tol_eig}};
  const IntField ints[] = {{"geo_steps", &n.geo_steps},
                           {"max_newton", &n.max_newton},
                           {"n_steps", &n.n_steps},
                           {"min_step_pow", &n.min_step_pow},
                           {"n_small", &n.n_small}};
  const SchemeField schemes[] = {{"metric_scheme", &n.metric_scheme},     {"space_scheme", &n.space_scheme},
                                 {"blowup_scheme", &n.blowup_scheme},     {"jacobian_scheme", &n.jacobian_scheme},
                                 {"newton_scheme", &n.newton_scheme},     {"slope_scheme", &n.slope_scheme}};
  if (!j.is_object()) throw ConfigError("numerics", "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = it.key(), field = "numerics." + key;
    bool known = false;
    for (const auto& f : reals)
      if (key == f.key) {
        *f.dst = read_num(*it, field);
        if (!(*f.dst > 0.0)) throw ConfigError(field, "must be positive");
        cfg.overrides.push_back(key + " = " + num17(*f.dst));
        known = true;
      }
    for (const auto& f : ints)
      if (key == f.key) {
        *f.dst = read_int(*it, field);
        if (*f.dst < 1) throw ConfigError(field, "must be a positive integer");
        cfg.overrides.push_back(key + " = " + std::to_string(*f.dst));
        known = true;
      }
    for (const auto& f : schemes)
      if (key == f.key) {
        *f.dst = read_scheme(*it, field);
        cfg.overrides.push_back(key + " = {" + num17(f.dst->step_rel) + ", " + std::to_string(f.dst->order) + ", " +
                                std::to_string(f.dst->richardson_levels) + "}");
        known = true;
      }
    if (!known) throw ConfigError(field, "unknown key");
  }
}

// ---------------------------------------------------------------- pipeline

struct Context {
  RunConfig cfg;
  ChartSystem sys;
  SymmetryAnalysis an;
};

Context make_context(const RunConfig& cfg) {
  Context ctx;
  ctx.cfg = cfg;
  try {
    ctx.sys = make_system(cfg.system, cfg.params);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::UnknownSystem) throw ConfigError("system.name", e.what());
    if (e.code() == ErrorCode::BadParams) throw ConfigError("system.params", e.what());
    throw;
  }
  LieAlgebraSpec& alg = ctx.sys.algebra;
  const Eigen::Index d = alg.dim;
  if (!cfg.structure_constants.empty()) {
    if (static_cast<Eigen::Index>(cfg.structure_constants.size()) != d)
      throw ConfigError("system.algebra.structure_constants", "expected " + std::to_string(d) + " blocks");
    for (const Mat& c : cfg.structure_constants)
      if (c.rows() != d || c.cols() != d)
        throw ConfigError("system.algebra.structure_constants", "blocks must be " + std::to_string(d) + "x" +
                                                                    std::to_string(d));
    alg.c = cfg.structure_constants;
  }
  if (cfg.inner.size()) {
    if (cfg.inner.rows() != d || cfg.inner.cols() != d)
      throw ConfigError("system.algebra.inner", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
    alg.inner = cfg.inner;
  }
  if (cfg.torus.size()) {
    if (cfg.torus.rows() != d) throw ConfigError("system.algebra.torus", "columns must have " + std::to_string(d) + " entries");
    alg.torus = cfg.torus;
  }
  if (!validate_algebra(alg, cfg.num.tol_alg).ok)
    throw ConfigError("system.algebra", "structure constants, inner product or torus fail validation");
  ctx.an = analyze_symmetry(ctx.sys, cfg.num);
  return ctx;
}

struct Job {
  int index = 0;
  std::vector<double> mu1c;
  BetaFamily fam;
  SliceChart slice;
  LSData ls;
  Seed seed;
  Branch branch;
  BranchVerification ver;
  bool seeded = false, continued = false, stability_done = false;
  std::string error;  // "Name: message"
  std::string stability_note;
};

BetaFamily family_for(const Context& ctx, const std::vector<double>& mu1c, int index) {
  const SymmetryAnalysis& an = ctx.an;
  const int d = an.dim();
  const std::string gfield = "bifurcation.mu1_grid[" + std::to_string(index) + "]";
  if (static_cast<Eigen::Index>(mu1c.size()) != an.m1.cols())
    throw ConfigError(gfield, "expected " + std::to_string(an.m1.cols()) + " m1 coordinates");
  if (an.p() == 0) throw ConfigError("system", "q_e has trivial isotropy; there is nothing to bifurcate from");
  Vec mu1 = Vec::Zero(d);
  for (size_t i = 0; i < mu1c.size(); ++i) mu1 += mu1c[i] * an.m1.col(static_cast<Eigen::Index>(i));
  Vec theta;
  if (ctx.cfg.theta1.empty()) {
    theta = ctx.cfg.theta1_scale * an.m0.col(0);
  } else {
    if (static_cast<int>(ctx.cfg.theta1.size()) != d)
      throw ConfigError("bifurcation.theta1", "expected a number or " + std::to_string(d) + " covector entries");
    theta = Eigen::Map<const Vec>(ctx.cfg.theta1.data(), d);
  }
  try {
    return make_family(an, mu1, Vec::Zero(d), theta);
  } catch (const Error& e) {
    throw ConfigError("bifurcation.theta1", e.what());
  }
}

Vec config_v0(const Context& ctx) {
  if (!ctx.cfg.has_v0) throw ConfigError("bifurcation.v0", "missing");
  if (static_cast<int>(ctx.cfg.v0.size()) != ctx.sys.n)
    throw ConfigError("bifurcation.v0", "expected " + std::to_string(ctx.sys.n) + " entries");
  return Eigen::Map<const Vec>(ctx.cfg.v0.data(), ctx.sys.n);
}

std::pair<Vec, Vec> seed_guess(const Context& ctx, const SliceChart& slice) {
  Vec u = Vec::Zero(slice.dim_U), c = Vec::Zero(ctx.an.k2.cols());
  u(0) = 1.0;
  if (ctx.cfg.has_seed_u) {
    if (static_cast<int>(ctx.cfg.seed_u.size()) != slice.dim_U)
      throw ConfigError("bifurcation.seed_guess.u", "expected " + std::to_string(slice.dim_U) + " entries");
    u = Eigen::Map<const Vec>(ctx.cfg.seed_u.data(), slice.dim_U);
  }
  if (ctx.cfg.has_seed_mu2) {
    if (static_cast<Eigen::Index>(ctx.cfg.seed_mu2.size()) != c.size())
      throw ConfigError("bifurcation.seed_guess.mu2", "expected " + std::to_string(c.size()) + " entries");
    c = Eigen::Map<const Vec>(ctx.cfg.seed_mu2.data(), c.size());
  }
  return {u, c};
}

// Seed stage; relbif errors are recorded in the job, config errors propagate.
void run_seed(const Context& ctx, Job& job) {
  job.fam = family_for(ctx, job.mu1c, job.index);
  const Vec v0 = config_v0(ctx);
  try {
    job.slice = make_slice(ctx.sys, ctx.an, v0, job.fam, ctx.cfg.num);
    job.ls = ls_data(ctx.sys, ctx.an, job.slice.v0, job.fam, ctx.cfg.num);
  } catch (const Error& e) {
    job.error = e.what();
    return;
  }
  const auto guess = seed_guess(ctx, job.slice);
  try {
    job.seed = find_seed(ctx.sys, ctx.an, job.fam, job.slice, guess.first, guess.second, ctx.cfg.num);
    job.seeded = true;
  } catch (const Error& e) {
    job.error = e.what();
  }
}

void run_branch(const Context& ctx, Job& job) {
  run_seed(ctx, job);
  if (!job.seeded) return;
  try {
    job.branch = continue_branch(ctx.sys, ctx.an, job.fam, job.slice, job.seed, ctx.cfg.tau_max, ctx.cfg.n_steps,
                                 ctx.cfg.num);
    job.continued = true;
    job.ver = verify_branch(ctx.sys, ctx.an, job.branch, ctx.cfg.horizon, ctx.cfg.num);
    if (ctx.an.k2.cols() == 0) {
      branch_stability(ctx.sys, ctx.an, job.slice, job.branch, ctx.cfg.num);
      job.stability_done = true;
    } else {
      job.stability_note = "not computed (nonabelian group)";
    }
  } catch (const Error& e) {
    job.error = e.what();
  }
}

void for_each_job(std::vector<Job>& jobs, int threads, const std::function<void(Job&)>& fn) {
  if (threads <= 1 || jobs.size() <= 1) {
    for (Job& j : jobs) fn(j);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::exception_ptr> errors(jobs.size());
  std::vector<std::thread> pool;
  const size_t nt = std::min<size_t>(static_cast<size_t>(threads), jobs.size());
  for (size_t t = 0; t < nt; ++t)
    pool.emplace_back([&] {
      for (size_t i = next++; i < jobs.size(); i = next++) {
        try {
          fn(jobs[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<Job> make_jobs(const Context& ctx) {
  std::vector<Job> jobs;
  std::vector<std::vector<double>> grid = ctx.cfg.mu1_grid;
  if (grid.empty()) grid.push_back(std::vector<double>(static_cast<size_t>(ctx.an.m1.cols()), 0.0));
  for (size_t i = 0; i < grid.size(); ++i) {
    Job j;
    j.index = static_cast<int>(i);
    j.mu1c = grid[i];
    jobs.push_back(std::move(j));
  }
  return jobs;
}

// ---------------------------------------------------------------- sections

bool section_verify(const Context& ctx, Report& rep) {
  const Numerics& num = ctx.cfg.num;
  const SystemCheck sc = check_system(ctx.sys, 10, 7, num);
  const IdentityReport ir = verify_identities(ctx.sys, 50, 11, num);
  const LieValidation lv = validate_algebra(ctx.sys.algebra, num.tol_alg);
  const HypothesisReport hr = check_hypothesis_H(ctx.sys, ctx.an, num);
  const MontaldiReport mr = check_montaldi(ctx.sys, ctx.an, num);
  const double tol_id = 1e-7;
  const bool ids_ok = ir.max_residual() <= tol_id;
  const bool iso_ok = ctx.sys.declared_isotropy.size() == 0 || ctx.an.isotropy_mismatch <= 1e-8;
  const bool pass = sc.ok && lv.ok && ids_ok && hr.pass && mr.pass && iso_ok;
  rep.section("verify");
  rep.kv("algebra_ok", lv.ok ? "yes" : "no");
  rep.kv("generator_linearity", sc.linearity);
  rep.kv("potential_invariance", sc.potential_invariance);
  rep.kv("metric_invariance", sc.metric_invariance);
  rep.kv("identity_samples", std::to_string(ir.samples));
  rep.kv("useful_identity_max", ir.useful_identity);
  rep.kv("infinitesimal_equivariance_max", ir.infinitesimal_equivariance);
  if (ir.has_group_action) {
    rep.kv("finite_equivariance_max", ir.finite_equivariance);
    rep.kv("generator_relation_max", ir.generator_relation);
  } else {
    rep.kv("finite_equivariance_max", "skipped (no group action)");
  }
  rep.kv("hypothesis_H_residual", hr.residual);
  rep.kv("hypothesis_H", hr.pass ? "pass" : "fail");
  rep.kv("montaldi_grad_V", mr.grad_V);
  rep.kv("montaldi_torus_pairing", mr.torus_pairing);
  rep.kv("montaldi", mr.pass ? "pass" : "fail");
  rep.kv("declared_isotropy_mismatch", ctx.an.isotropy_mismatch);
  rep.kv("status", pass ? "PASS" : "FAIL");
  rep.blank();
  return pass;
}

void section_analyze(const Context& ctx, Report& rep) {
  const SymmetryAnalysis& an = ctx.an;
  rep.section("analysis");
  rep.kv("dim_g", std::to_string(an.dim()));
  rep.kv("dim_k0", std::to_string(an.k0.cols()));
  rep.kv("dim_k1", std::to_string(an.k1.cols()));
  rep.kv("dim_k2", std::to_string(an.k2.cols()));
  rep.kv("q_e", vec_str(an.q_e));
  rep.kv("inertia_singular_values", vec_str(an.singular_values, false));
  rep.kv("kernel_sigma_max", an.kernel_sigma);
  rep.kv("range_sigma_min", an.range_sigma);
  rep.kv("spectral_gap", std::isinf(an.spectral_gap()) ? std::string("inf") : sci(an.spectral_gap()));
  rep.matrix("I_qe", an.I_qe);
  rep.matrix("k0", an.k0);
  rep.matrix("k1", an.k1);
  rep.matrix("k2", an.k2);
  rep.matrix("P_big", an.P_big);
  rep.matrix("P1", an.P1);
  rep.matrix("P2", an.P2);
  rep.matrix("Ihat_inv", an.Ihat_inv);
  const Mat kb = an.k();
  rep.kv("P_idempotence", max_abs(an.P_big * an.P_big - an.P_big));
  rep.kv("P1_plus_P2_minus_P", max_abs(an.P1 + an.P2 - an.P_big));
  rep.kv("Ihat_inverse_residual", kb.cols() ? max_abs(an.Ihat_inv * an.P_big * an.I_qe * kb - kb) : 0.0);
  rep.kv("m1_vs_I_k1", subspace_distance(an.Kinv * an.m1, an.Kinv * an.I_qe * an.k1, an.K));
  rep.kv("m2_vs_I_k2", subspace_distance(an.Kinv * an.m2, an.Kinv * an.I_qe * an.k2, an.K));
  rep.blank();
}

void section_seed(const Job& job, Report& rep) {
  rep.section("seed " + std::to_string(job.index));
  Vec c = Eigen::Map<const Vec>(job.mu1c.data(), static_cast<Eigen::Index>(job.mu1c.size()));
  rep.kv("mu1", vec_str(c));
  if (job.slice.dim_U > 0) {
    rep.kv("v0", vec_str(job.slice.v0));
    rep.kv("dim_U", std::to_string(job.slice.dim_U));
    rep.matrix("basis_U", job.slice.basis_U);
    rep.matrix("A", job.ls.A);
    rep.kv("B", vec_str(job.ls.Bvec, false));
    rep.kv("det_A_equilibrated", job.ls.detA);
    rep.kv("xi0", vec_str(job.ls.xi0));
    rep.kv("eta_mu", vec_str(job.ls.eta_mu));
  }
  if (job.seeded) {
    rep.kv("u0", vec_str(job.seed.u));
    rep.kv("mu2_0", vec_str(job.seed.mu2));
    rep.kv("newton_iterations", std::to_string(job.seed.iterations));
    rep.kv("seed_residual", job.seed.residual);
    rep.matrix("Delta", job.seed.delta);
    rep.kv("det_Delta", num17(job.seed.delta_det));
  }
  rep.kv("status", job.error.empty() ? std::string("ok") : "failed (" + job.error + ")");
  rep.blank();
}

void section_branch(const Context& ctx, const Job& job, Report& rep) {
  rep.section("branch " + std::to_string(job.index));
  Vec c = Eigen::Map<const Vec>(job.mu1c.data(), static_cast<Eigen::Index>(job.mu1c.size()));
  rep.kv("mu1", vec_str(c));
  rep.kv("csv", "branch_mu1_" + std::to_string(job.index) + ".csv");
  if (job.continued) {
    const auto& pts = job.branch.points;
    double rf = 0.0, rg = 0.0, ratio = INFINITY, cond = 0.0;
    for (const auto& p : pts) {
      rf = std::max(rf, p.res_F);
      rg = std::max(rg, p.res_G);
      if (p.tau > 0.0) {
        ratio = std::min(ratio, p.min_generator / p.tau);
        cond = std::max(cond, p.split_cond);
      }
    }
    rep.kv("points", std::to_string(pts.size()));
    rep.kv("tau_reached", num17(pts.back().tau));
    rep.kv("max_res_F", rf);
    rep.kv("max_res_G", rg);
    rep.kv("root_isotropy_generator", pts.front().min_generator);
    rep.kv("min_generator_over_tau", std::isinf(ratio) ? std::string("n/a") : sci(ratio));
    rep.kv("max_splitting_condition", cond);
    rep.kv("amended_criterion_max", job.ver.max_amended);
    rep.kv("augmented_criterion_root", job.ver.tau0_augmented);
    rep.kv("dynamic_check", job.ver.dynamic_run ? (job.ver.dynamic_ok ? "pass" : "fail") : "skipped");
    rep.kv("dynamic_max_deviation", job.ver.max_deviation);
    rep.kv("torus_coadjoint_residual", job.ver.max_isotropy_ad);
    if (job.stability_done) {
      const Branch& b = job.branch;
      rep.kv("stability_tau0", stability_name(pts.front().stability));
      rep.kv("stability_hypothesis", b.tau0_positive ? "holds" : "fails");
      if (b.tau0_positive) {
        bool small_ok = true;
        for (size_t i = 1; i < pts.size() && i <= static_cast<size_t>(ctx.cfg.num.n_small); ++i)
          small_ok = small_ok && pts[i].stability == Stability::PositiveDefinite;
        rep.kv("small_tau_stable", small_ok ? "yes" : "no (finding)");
      }
      rep.kv("first_class_change_tau", b.first_change_tau < 0.0 ? std::string("none") : num17(b.first_change_tau));
    } else {
      rep.kv("stability", job.stability_note.empty() ? std::string("not computed") : job.stability_note);
    }
  }
  rep.kv("status", job.error.empty() ? std::string("ok") : "failed (" + job.error + ")");
  rep.blank();
}

void section_summary(const std::vector<Job>& jobs, Report& rep) {
  rep.section("summary");
  int ok = 0, prefix = 0;
  bool contiguous = true;
  std::string failed;
  for (const Job& j : jobs) {
    const bool good = j.continued && j.error.empty();
    ok += good;
    if (good && contiguous) ++prefix;
    if (!good) {
      contiguous = false;
      failed += (failed.empty() ? "" : ", ") + std::to_string(j.index);
    }
  }
  rep.kv("branches_requested", std::to_string(jobs.size()));
  rep.kv("branches_succeeded", std::to_string(ok));
  rep.kv("largest_successful_grid_prefix", std::to_string(prefix));
  rep.kv("failed_indices", failed.empty() ? std::string("none") : failed);
  rep.blank();
}

// ---------------------------------------------------------------- csv

std::string csv_header(const Context& ctx, const Job& job) {
  std::string h = "tau";
  auto cols = [&](const char* name, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) h += std::string(",") + name + "_" + std::to_string(i);
  };
  cols("u", job.slice.dim_U);
  cols("mu1", ctx.an.m1.cols());
  cols("mu2", ctx.an.m2.cols());
  cols("q", ctx.sys.n);
  cols("zeta", ctx.an.dim());
  cols("beta", ctx.an.dim());
  return h + ",res_F,res_G,stability";
}

void write_csv(const Context& ctx, const Job& job, const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  f << csv_header(ctx, job) << "\n";
  auto put = [&](const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) f << "," << num17(v(i));
  };
  for (const BranchPoint& p : job.branch.points) {
    f << num17(p.tau);
    put(p.u);
    put(mu1_coords(ctx.an, p.mu1));
    put(mu2_coords(ctx.an, p.mu2));
    put(p.q);
    put(p.zeta);
    put(p.beta_val);
    f << "," << num17(p.res_F) << "," << num17(p.res_G) << "," << stability_name(p.stability) << "\n";
  }
  if (!f) throw Error(ErrorCode::BadInput, "could not write " + path.string());
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(cur);
  return out;
}

// Recomputes the stability column of an existing branch table; returns the number of changed flags.
int restabilize_csv(const Context& ctx, Job& job, const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::BadInput, "missing branch table " + path.string());
  std::string header, line;
  std::getline(f, header);
  if (header != csv_header(ctx, job)) throw Error(ErrorCode::BadInput, "unexpected columns in " + path.string());
  std::vector<std::string> rows;
  while (std::getline(f, line))
    if (!line.empty()) rows.push_back(line);
  f.close();
  int changed = 0;
  std::string out = header + "\n";
  for (const std::string& row : rows) {
    const auto cells = split(row, ',');
    const double tau = std::stod(cells.at(0));
    Vec u(job.slice.dim_U);
    for (int i = 0; i < job.slice.dim_U; ++i) u(i) = std::stod(cells.at(1 + static_cast<size_t>(i)));
    const Stability s = classify_definiteness(hessian_F_U(ctx.sys, ctx.an, job.fam, job.slice, tau, u, ctx.cfg.num),
                                              ctx.cfg.num.tol_eig);
    const std::string name = stability_name(s);
    if (cells.back() != name) ++changed;
    out += row.substr(0, row.rfind(',') + 1) + name + "\n";
  }
  std::ofstream w(path, std::ios::binary);
  w << out;
  return changed;
}

// ---------------------------------------------------------------- driver

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) throw Error(ErrorCode::BadInput, "could not write " + path.string());
}

void header(const Context& ctx, Report& rep, const std::string& command) {
  rep.section("run");
  rep.kv("command", command);
  rep.kv("system", ctx.cfg.system);
  std::string ps;
  for (const auto& kv : ctx.cfg.params) ps += (ps.empty() ? "" : ", ") + kv.first + " = " + num17(kv.second);
  rep.kv("params", ps.empty() ? std::string("defaults") : ps);
  rep.kv("config_overrides", ctx.cfg.overrides.empty() ? std::string("none") : std::to_string(ctx.cfg.overrides.size()));
  for (const auto& o : ctx.cfg.overrides) rep.os << "  " << o << "\n";
  rep.blank();
}

}  // namespace

// ---------------------------------------------------------------- public

RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("json", e.what());
  }
  RunConfig cfg;
  check_keys(j, "", {"system", "numerics", "bifurcation", "outputs"});
  if (!j.contains("system")) throw ConfigError("system", "missing");
  const json& s = j["system"];
  check_keys(s, "system", {"name", "params", "chart_radius", "algebra"});
  if (!s.contains("name") || !s["name"].is_string()) throw ConfigError("system.name", "expected a string");
  cfg.system = s["name"].get<std::string>();
  if (s.contains("params")) {
    if (!s["params"].is_object()) throw ConfigError("system.params", "expected an object");
    for (auto it = s["params"].begin(); it != s["params"].end(); ++it)
      cfg.params[it.key()] = read_num(*it, "system.params." + it.key());
  }
  if (s.contains("algebra")) {
    const json& a = s["algebra"];
    check_keys(a, "system.algebra", {"structure_constants", "inner", "torus"});
    if (a.contains("structure_constants")) {
      const json& c = a["structure_constants"];
      if (!c.is_array()) throw ConfigError("system.algebra.structure_constants", "expected an array of matrices");
      for (size_t k = 0; k < c.size(); ++k)
        cfg.structure_constants.push_back(
            read_mat(c[k], "system.algebra.structure_constants[" + std::to_string(k) + "]"));
    }
    if (a.contains("inner")) cfg.inner = read_mat(a["inner"], "system.algebra.inner");
    // torus basis is given as a list of vectors
    if (a.contains("torus")) cfg.torus = read_mat(a["torus"], "system.algebra.torus").transpose();
    for (auto it = a.begin(); it != a.end(); ++it) cfg.overrides.push_back("algebra." + it.key() + " from config");
  }
  if (s.contains("chart_radius")) cfg.params["chart_radius"] = read_num(s["chart_radius"], "system.chart_radius");
  if (j.contains("numerics")) read_numerics(j["numerics"], cfg);
  cfg.n_steps = cfg.num.n_steps;
  if (j.contains("bifurcation")) {
    const json& b = j["bifurcation"];
    check_keys(b, "bifurcation", {"v0", "theta1", "mu1_grid", "tau_max", "n_steps", "seed_guess", "horizon"});
    if (b.contains("v0")) {
      cfg.v0 = read_vec(b["v0"], "bifurcation.v0");
      cfg.has_v0 = true;
    }
    if (b.contains("theta1")) {
      if (b["theta1"].is_number())
        cfg.theta1_scale = b["theta1"].get<double>();
      else
        cfg.theta1 = read_vec(b["theta1"], "bifurcation.theta1");
    }
    if (b.contains("mu1_grid")) {
      const json& g = b["mu1_grid"];
      if (!g.is_array()) throw ConfigError("bifurcation.mu1_grid", "expected an array");
      for (size_t i = 0; i < g.size(); ++i) {
        const std::string field = "bifurcation.mu1_grid[" + std::to_string(i) + "]";
        if (g[i].is_number())
          cfg.mu1_grid.push_back({g[i].get<double>()});
        else
          cfg.mu1_grid.push_back(read_vec(g[i], field));
      }
    }
    if (b.contains("tau_max")) {
      cfg.tau_max = read_num(b["tau_max"], "bifurcation.tau_max");
      if (cfg.tau_max < 0.0) throw ConfigError("bifurcation.tau_max", "must be nonnegative");
    }
    if (b.contains("n_steps")) {
      cfg.n_steps = read_int(b["n_steps"], "bifurcation.n_steps");
      if (cfg.n_steps < 0) throw ConfigError("bifurcation.n_steps", "must be nonnegative");
    }
    if (b.contains("horizon")) cfg.horizon = read_num(b["horizon"], "bifurcation.horizon");
    if (b.contains("seed_guess")) {
      const json& sg = b["seed_guess"];
      check_keys(sg, "bifurcation.seed_guess", {"u", "mu2"});
      if (sg.contains("u")) {
        cfg.seed_u = read_vec(sg["u"], "bifurcation.seed_guess.u");
        cfg.has_seed_u = true;
      }
      if (sg.contains("mu2")) {
        cfg.seed_mu2 = read_vec(sg["mu2"], "bifurcation.seed_guess.mu2");
        cfg.has_seed_mu2 = true;
      }
    }
  }
  if (j.contains("outputs")) {
    const json& o = j["outputs"];
    check_keys(o, "outputs", {"dir"});
    if (o.contains("dir")) {
      if (!o["dir"].is_string()) throw ConfigError("outputs.dir", "expected a string");
      cfg.out_dir = o["dir"].get<std::string>();
    }
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("config", "cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void apply_seed_guess(RunConfig& cfg, const std::string& guess) {
  for (const std::string& part : split(guess, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("--seed-guess", "expected key=value in '" + part + "'");
    const std::string key = part.substr(0, eq), vals = part.substr(eq + 1);
    std::vector<double> v;
    for (const std::string& x : split(vals, ':')) {
      try {
        size_t used = 0;
        v.push_back(std::stod(x, &used));
        if (used != x.size()) throw std::invalid_argument(x);
      } catch (const std::exception&) {
        throw ConfigError("--seed-guess", "not a number: '" + x + "'");
      }
    }
    if (key == "u") {
      cfg.seed_u = v;
      cfg.has_seed_u = true;
    } else if (key == "mu2") {
      cfg.seed_mu2 = v;
      cfg.has_seed_mu2 = true;
    } else {
      throw ConfigError("--seed-guess", "unknown key '" + key + "'");
    }
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Branches of relative equilibria bifurcating from a symmetric relative equilibrium"};
  app.require_subcommand(1);
  std::string config_path, out_dir, seed_text;
  int threads = 1;
  app.add_option("--config", config_path, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory (overrides outputs.dir)");
  app.add_option("--threads", threads, "worker threads for the mu1 grid")->check(CLI::PositiveNumber);
  app.add_option("--seed-guess", seed_text, "seed guess, e.g. u=1.3:0,mu2=0");
  std::string positional;
  const char* names[] = {"verify", "analyze", "seed", "branch", "stability", "all"};
  for (const char* n : names) app.add_subcommand(n)->fallthrough()->add_option("config", positional, "JSON configuration file");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  if (config_path.empty()) config_path = positional;
  if (config_path.empty()) {
    err << "config error: no configuration file given\n";
    return 1;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!seed_text.empty()) apply_seed_guess(cfg, seed_text);
    const Context ctx = make_context(cfg);
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);

    Report rep;
    header(ctx, rep, command);
    int code = 0;
    const bool all = command == "all";

    if (command == "verify" || all) {
      if (!section_verify(ctx, rep)) code = 2;
    }
    if (command == "analyze" || all) section_analyze(ctx, rep);

    std::vector<Job> jobs;
    std::string first_error;
    if (command == "seed") {
      jobs = make_jobs(ctx);
      for_each_job(jobs, threads, [&](Job& j) { run_seed(ctx, j); });
      for (const Job& j : jobs) section_seed(j, rep);
    }
    if (command == "branch" || all) {
      jobs = make_jobs(ctx);
      for_each_job(jobs, threads, [&](Job& j) { run_branch(ctx, j); });
      for (const Job& j : jobs) {
        section_seed(j, rep);
        section_branch(ctx, j, rep);
        if (j.continued) write_csv(ctx, j, dir / ("branch_mu1_" + std::to_string(j.index) + ".csv"));
      }
      section_summary(jobs, rep);
    }
    if (command == "stability" || all) {
      if (ctx.an.k2.cols() > 0) {
        if (!all) throw Error(ErrorCode::NonAbelian, "stability classification requires an abelian group");
        rep.section("stability");
        rep.kv("status", "skipped (nonabelian group)");
        rep.blank();
      } else {
        std::vector<Job> sj = make_jobs(ctx);
        std::vector<int> changed(sj.size(), -1);
        for_each_job(sj, threads, [&](Job& j) {
          if (all && !(jobs[static_cast<size_t>(j.index)].continued)) return;
          j.fam = family_for(ctx, j.mu1c, j.index);
          j.slice = make_slice(ctx.sys, ctx.an, config_v0(ctx), j.fam, ctx.cfg.num);
          changed[static_cast<size_t>(j.index)] =
              restabilize_csv(ctx, j, dir / ("branch_mu1_" + std::to_string(j.index) + ".csv"));
        });
        rep.section("stability");
        for (size_t i = 0; i < sj.size(); ++i)
          rep.kv("branch_" + std::to_string(i),
                 changed[i] < 0 ? std::string("skipped")
                                : (changed[i] == 0 ? std::string("flags reproduced")
                                                   : std::to_string(changed[i]) + " flags changed"));
        rep.blank();
      }
    }
    for (const Job& j : jobs)
      if (!j.error.empty() && first_error.empty()) first_error = j.error;

    const std::string text = rep.os.str();
    write_text(dir / "analysis.txt", text);
    out << text;
    if (!first_error.empty()) {
      err << "numerical failure: " << first_error << "\n";
      return 3;
    }
    if (code == 2) err << "verification failure\n";
    return code;
  } catch (const ConfigError& e) {
    err << "config error: " << e.field << ": " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const fs::filesystem_error& e) {
    err << "config error: outputs.dir: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace relbif
