#include "snewton/harness.hpp"

#include "snewton/errors.hpp"
#include "snewton/oracle.hpp"
#include "snewton/solvers.hpp"
#include "snewton/stability.hpp"
#include "snewton/trace_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <sstream>

#ifndef SNEWTON_PRESET_DIR
#define SNEWTON_PRESET_DIR "presets"
#endif

namespace snewton {

namespace {

ScalarLink parse_link(const std::string& name) {
  if (name == "logistic") return ScalarLink::logistic();
  if (name == "exp_shift") return ScalarLink::exp_shift();
  throw ConfigError("problem.link: expected logistic or exp_shift, got '" + name + "'");
}

// f* as the lowest value seen by an adaptive Newton run to tiny decrements.
double bootstrap_f_star(const CompositeObjective& F, const Vector& x0) {
  SolverConfig c;
  c.max_iter = 500;
  c.decrement_tol = 1e-14;
  c.backtracking = BacktrackingParams{};
  const SolveTrace tr = backtracking_newton(F, x0, c);
  double best = kInf;
  for (const auto& r : tr.records())
    if (std::isfinite(r.composite_value)) best = std::min(best, r.composite_value);
  if (!std::isfinite(best)) throw std::runtime_error("could not bootstrap f*");
  return best;
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return format_double(v);
}

nlohmann::json opt(const std::optional<double>& v) { return v ? num(*v) : nlohmann::json(nullptr); }

std::optional<double> gap_of(const IterationRecord& r, double f_star) {
  if (!std::isfinite(r.composite_value)) return std::nullopt;
  return r.composite_value - f_star;
}

// Consecutive accepted gap ratios while the gap stays above the floor.
std::vector<double> step_factors(const SolveTrace& tr, double f_star, double floor) {
  std::vector<double> out;
  std::optional<double> prev;
  for (const auto& r : tr.records()) {
    if (!r.accepted) continue;
    const auto g = gap_of(r, f_star);
    if (!g || !(*g > floor)) {
      if (prev && g) out.push_back(std::max(0.0, *g) / *prev);
      break;
    }
    if (prev) out.push_back(*g / *prev);
    prev = g;
  }
  return out;
}

SamplerConfig sampler_of(const ExperimentConfig& cfg) {
  SamplerConfig s = cfg.probe.sampler;
  s.seed = cfg.seed;
  return s;
}

double prior_eta(const ProblemInstance& p, const LevelSetDomain& dom, const ApproxScheme& scheme,
                 std::uint64_t seed, int pairs) {
  if (scheme.kind == ApproxScheme::Kind::exact_hessian || scheme.kind == ApproxScheme::Kind::hessian_free)
    return 1.0;
  HessianApproximator approx(p.F.smooth, scheme, seed);
  std::vector<EtaSample> samples;
  for (auto& pr : sample_pairs(dom, std::min(pairs, 2000), seed)) samples.push_back({0, pr.u, pr.v});
  return estimate_eta(*p.F.smooth, approx, samples).estimate;
}

struct BoundInputs {
  double D = kNaN;
  double c = kNaN;
  double d = kNaN;
  double path_c = kNaN;
  double eta_prior = kNaN;
  double needed_sigma = kNaN;
};

BoundInputs measure_bound_inputs(const ExperimentConfig& cfg, const RunSpec& run, const ProblemInstance& p) {
  BoundInputs b;
  const std::string& bound = cfg.theory.bound;
  if (bound == "none" || bound == "power_even") return b;
  const LevelSetDomain dom = problem_domain(p, run.cfg.norm, cfg.seed);
  const Objective& f = *p.F.smooth;
  const SamplerConfig s = sampler_of(cfg);
  b.D = dom.diameter_estimate();
  if (bound == "exact_newton") {
    b.c = estimate_global_c(f, dom, s).estimate;
    b.needed_sigma = b.c;
  } else if (bound == "trust_region") {
    b.d = estimate_local_d(f, dom, run.cfg.norm, cfg.theory.r, s).estimate;
    b.needed_sigma = b.d;
  } else if (bound == "approx_prox") {
    b.d = estimate_local_d(f, dom, run.cfg.norm, cfg.theory.r, s).estimate;
    b.eta_prior = prior_eta(p, dom, run.cfg.approx, cfg.seed, s.pairs);
    b.needed_sigma = b.eta_prior * b.d;
  } else if (bound == "affine_invariant") {
    b.path_c = estimate_path_c(f, dom, run.gamma, s).estimate;
    b.eta_prior = prior_eta(p, dom, run.cfg.approx, cfg.seed, s.pairs);
    b.needed_sigma = b.eta_prior * b.path_c;
  }
  return b;
}

nlohmann::json theorem_bound(const ExperimentConfig& cfg, const RunOutcome& out, const BoundInputs& in,
                             const ProblemInstance& p, const std::vector<double>& factors) {
  const std::string& bound = cfg.theory.bound;
  if (bound == "none") return nullptr;
  const double sigma = out.spec.cfg.sigma;
  const double theta = out.spec.cfg.theta;
  const double eta = out.trace.eta().value_or(1.0);
  const double tol = 1e-12 * std::max(1.0, sigma);
  double predicted = kNaN;
  bool pre = false;
  nlohmann::json constants;
  constants["sigma"] = num(sigma);
  if (bound == "power_even") {
    const int k = p.link && p.link->kind() == ScalarLink::Kind::power_even ? p.link->k() : 0;
    if (k < 1) throw ConfigError("theory.bound = power_even needs the power_even problem");
    predicted = newton_ratio_power_even(k);
    pre = out.spec.solver == "exact_newton" && sigma == 1.0;
    constants["k"] = k;
  } else if (bound == "exact_newton") {
    predicted = 1.0 - 1.0 / (in.c * sigma);
    pre = sigma + tol >= in.c;
    constants["c"] = num(in.c);
  } else if (bound == "trust_region") {
    predicted = 1.0 - cfg.theory.r / (in.D * sigma * in.d);
    pre = sigma + tol >= in.d;
    constants["r"] = num(cfg.theory.r);
    constants["D"] = num(in.D);
    constants["d_r"] = num(in.d);
  } else if (bound == "approx_prox") {
    predicted = 1.0 - theta * cfg.theory.r / (in.D * eta * sigma * in.d);
    pre = sigma + tol >= eta * in.d;
    constants["r"] = num(cfg.theory.r);
    constants["D"] = num(in.D);
    constants["d_r"] = num(in.d);
    constants["eta"] = num(eta);
    constants["eta_prior"] = num(in.eta_prior);
    constants["theta"] = num(theta);
  } else if (bound == "affine_invariant") {
    predicted = 1.0 - theta * out.spec.gamma / (eta * sigma * in.path_c);
    pre = sigma + tol >= eta * in.path_c;
    constants["gamma"] = num(out.spec.gamma);
    constants["c_gamma"] = num(in.path_c);
    constants["eta"] = num(eta);
    constants["eta_prior"] = num(in.eta_prior);
    constants["theta"] = num(theta);
  }
  nlohmann::json j;
  j["bound"] = bound;
  j["predicted"] = num(predicted);
  if (factors.empty()) {
    j["measured"] = nullptr;
    j["holds"] = nullptr;
  } else {
    const double measured = *std::max_element(factors.begin(), factors.end());
    j["measured"] = num(measured);
    j["holds"] = measured <= predicted + 0.01;
  }
  j["sigma_precondition_met"] = pre;
  j["constants"] = std::move(constants);
  return j;
}

double default_gd_step(const ProblemInstance& p, std::uint64_t seed) {
  const LevelSetDomain dom = problem_domain(p, NormSpec::l2(), seed);
  double L = p.F.smooth->hessian(p.x0).matrix().selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
  for (const auto& x : sample_points(dom, 256, seed, 1)) {
    const Matrix H = p.F.smooth->hessian(x).matrix();
    L = std::max(L, H.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff());
  }
  if (!(L > 0)) throw ConfigError("gradient_descent: cannot derive a step from a zero Hessian; set solver.step");
  return 1.0 / L;
}

void require_smooth(const ProblemInstance& p, const std::string& solver) {
  if (p.F.nonsmooth.kind() != ProxTerm::Kind::zero)
    throw ConfigError(solver + " handles smooth problems only; use approx_prox or backtracking");
}

SolveTrace dispatch(const RunSpec& run, const ProblemInstance& p) {
  const auto& f = *p.F.smooth;
  const std::string& s = run.solver;
  if (s == "exact_newton") {
    require_smooth(p, s);
    return exact_newton(f, p.x0, run.cfg);
  }
  if (s == "trust_region") {
    require_smooth(p, s);
    return trust_region_newton(f, p.x0, run.cfg);
  }
  if (s == "line_search_newton") {
    require_smooth(p, s);
    return exact_line_search_newton(f, p.x0, run.cfg);
  }
  if (s == "approx_prox") return approx_prox_newton(p.F, p.x0, run.cfg);
  if (s == "backtracking") return backtracking_newton(p.F, p.x0, run.cfg);
  if (s == "affine_invariant_tr") return affine_invariant_tr(p.F, p.x0, run.gamma, run.cfg);
  if (s == "gradient_descent") return gradient_descent_baseline(p.F, p.x0, run.step, run.cfg);
  throw ConfigError("unknown solver '" + s + "'");
}

nlohmann::json run_summary(const ExperimentConfig& cfg, const RunOutcome& out, const ProblemInstance& p,
                           const BoundInputs& in) {
  const SolveTrace& tr = out.trace;
  nlohmann::json j;
  j["id"] = out.spec.id;
  j["solver"] = out.spec.solver;
  j["status"] = to_string(tr.status());
  j["sigma"] = num(out.spec.cfg.sigma);
  j["failure"] = out.failure ? nlohmann::json(*out.failure) : nlohmann::json(nullptr);
  j["warnings"] = tr.warnings();
  j["eta"] = opt(tr.eta());
  if (tr.empty()) return j;
  j["iterations"] = tr.last().iter;
  j["final_F"] = num(tr.last().composite_value);
  j["final_gap"] = num(tr.last().composite_value - p.f_star);
  int rejected = 0;
  for (const auto& r : tr.records()) rejected += r.accepted ? 0 : 1;
  j["unsuccessful_iterations"] = rejected;

  // first accepted step after the start
  j["first_step_ratio"] = nullptr;
  j["f_increase_at_step1"] = nullptr;
  const auto& recs = tr.records();
  for (std::size_t i = 1; i < recs.size(); ++i) {
    if (!recs[i].accepted) continue;
    const auto g0 = gap_of(recs[0], p.f_star), g1 = gap_of(recs[i], p.f_star);
    if (g0 && g1 && *g0 > 0) j["first_step_ratio"] = num(*g1 / *g0);
    j["f_increase_at_step1"] = !(recs[i].composite_value <= recs[0].composite_value);
    break;
  }

  const auto factors = step_factors(tr, p.f_star, cfg.report.noise_floor);
  try {
    const RateFit fit = fit_rate(tr, p.f_star, cfg.report.tail_fraction, cfg.report.noise_floor);
    j["rate_fit"] = {{"per_step_factors", fit.per_step_factors},
                     {"geometric_factor", num(fit.geometric_factor)},
                     {"r_squared", num(fit.r_squared)},
                     {"points_used", fit.points_used}};
    j["rate_fit_error"] = nullptr;
  } catch (const std::invalid_argument& e) {
    j["rate_fit"] = nullptr;
    j["rate_fit_error"] = e.what();
  }
  j["theorem_bound"] = theorem_bound(cfg, out, in, p, factors);
  return j;
}

std::string iter_cell(const std::optional<int>& v, const char* missing) {
  return v ? std::to_string(*v) : std::string(missing);
}

}  // namespace

ProblemInstance build_problem(const ProblemSpec& spec) {
  ProblemInstance p;
  if (spec.libsvm) {
    std::optional<ProxTerm> reg;
    if (spec.regularizer == "l1") {
      if (!(spec.params.lambda > 0)) throw ConfigError("problem.regularizer = l1 needs problem.lambda > 0");
      reg = ProxTerm::l1(spec.params.lambda);
    } else if (spec.regularizer == "box") {
      if (!spec.params.box) throw ConfigError("problem.regularizer = box needs problem.box.lo/hi");
      reg = ProxTerm::box(spec.params.box->lo, spec.params.box->hi);
    }
    auto obj = load_libsvm(*spec.libsvm, spec.normalize, parse_link(spec.link), {}, reg);
    p.name = "libsvm:" + spec.libsvm->filename().string();
    p.F = CompositeObjective{obj, reg ? *reg : ProxTerm::zero()};
    p.x0 = Vector::Zero(obj->dim());
    if (reg && reg->is_indicator()) {
      p.x0 = reg->prox(p.x0, 1.0);
      p.region = spec.params.box;
    }
  } else {
    ZooProblem z = make_zoo(spec.zoo, spec.params);
    p.name = z.name;
    p.F = z.F;
    p.x0 = z.x0;
    p.region = z.region;
    p.link = z.link;
  }
  const Index n = p.F.dim();
  if (p.region && p.region->dim() != n) throw ConfigError("problem box has the wrong dimension");
  if (spec.x0) {
    if (spec.x0->size() != n) throw ConfigError("problem.x0 has dimension " + std::to_string(spec.x0->size()) +
                                                ", expected " + std::to_string(n));
    p.x0 = *spec.x0;
  }
  if (spec.region) {
    if (spec.region->dim() != n) throw ConfigError("problem.region has the wrong dimension");
    p.region = spec.region;
  }
  if (!std::isfinite(p.F.value(p.x0))) throw ConfigError("F(x0) is not finite");

  if (spec.f_star) {
    p.f_star = *spec.f_star;
    p.f_star_source = "config";
  } else if (auto fs = p.F.f_star()) {
    p.f_star = *fs;
    p.f_star_source = "known";
  } else {
    p.f_star = bootstrap_f_star(p.F, p.x0);
    p.f_star_source = "bootstrap";
  }
  return p;
}

LevelSetDomain problem_domain(const ProblemInstance& p, const NormSpec& norm, std::uint64_t seed) {
  if (p.region) return LevelSetDomain::box(p.F, *p.region, norm);
  return LevelSetDomain::level_set(p.F, p.x0, norm, std::nullopt, std::nullopt, seed);
}

nlohmann::json probe_stability(const ExperimentConfig& cfg, const ProblemInstance& p) {
  const LevelSetDomain dom = problem_domain(p, cfg.probe.norm, cfg.seed);
  const Objective& f = *p.F.smooth;
  const SamplerConfig s = sampler_of(cfg);
  const double D = dom.diameter_estimate();
  const auto wants = [&](const char* c) {
    return std::find(cfg.probe.constants.begin(), cfg.probe.constants.end(), c) != cfg.probe.constants.end();
  };

  nlohmann::json j;
  j["schema_version"] = 1;
  j["problem"] = p.name;
  j["norm"] = cfg.probe.norm.name();
  j["diameter"] = num(D);
  j["seed"] = cfg.seed;
  j["pairs"] = s.pairs;
  nlohmann::json predicted = nlohmann::json::object();

  if (wants("c")) {
    StabilityReport rep = estimate_global_c(f, dom, s);
    if (p.link && p.region && p.F.dim() == 1) {
      rep.analytic_bound = application_bound(*p.link, p.region->lo[0], p.region->hi[0]);
    } else if (const auto& cond = f.info().analytic_stability) {
      rep.analytic_bound = analytic_bound(*cond, D);
    }
    j["global_c"] = report_to_json(rep);
    predicted["exact_newton"] = {{"sigma", num(rep.estimate)},
                                 {"factor", num(1.0 - 1.0 / (rep.estimate * rep.estimate))}};
  }
  if (wants("d")) {
    const auto curve = estimate_local_d_curve(f, dom, cfg.probe.norm, cfg.probe.r_grid, s);
    nlohmann::json arr = nlohmann::json::array(), pred = nlohmann::json::array();
    std::vector<double> dv;
    for (const auto& rep : curve) {
      arr.push_back(report_to_json(rep));
      dv.push_back(rep.estimate);
      pred.push_back({{"r", num(rep.parameter)},
                      {"sigma", num(rep.estimate)},
                      {"factor", num(1.0 - rep.parameter / (D * rep.estimate * rep.estimate))}});
    }
    j["r_grid"] = cfg.probe.r_grid;
    j["local_d"] = std::move(arr);
    const double r_star = optimal_radius(dv, cfg.probe.r_grid);
    j["r_star"] = num(r_star);
    predicted["trust_region"] = std::move(pred);
    for (std::size_t i = 0; i < dv.size(); ++i)
      if (cfg.probe.r_grid[i] == r_star)
        predicted["trust_region_at_r_star"] = {
            {"r", num(r_star)}, {"sigma", num(dv[i])}, {"factor", num(1.0 - r_star / (D * dv[i] * dv[i]))}};
  }
  if (wants("path_c")) {
    const auto curve = estimate_path_c_curve(f, dom, cfg.probe.gamma_grid, s);
    nlohmann::json arr = nlohmann::json::array(), pred = nlohmann::json::array();
    for (const auto& rep : curve) {
      arr.push_back(report_to_json(rep));
      pred.push_back({{"gamma", num(rep.parameter)},
                      {"sigma", num(rep.estimate)},
                      {"factor", num(1.0 - rep.parameter / (rep.estimate * rep.estimate))}});
    }
    j["gamma_grid"] = cfg.probe.gamma_grid;
    j["path_c"] = std::move(arr);
    predicted["affine_invariant"] = std::move(pred);
  }
  j["predicted"] = std::move(predicted);
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write) {
  const ProblemInstance p = build_problem(cfg.problem);
  ExperimentResult res;
  nlohmann::json runs = nlohmann::json::array();

  for (const RunSpec& spec0 : cfg.runs) {
    RunOutcome out{spec0, SolveTrace(spec0.solver), std::nullopt, nullptr};
    RunSpec& run = out.spec;
    const BoundInputs in = measure_bound_inputs(cfg, run, p);
    if (run.sigma_auto) {
      if (!std::isfinite(in.needed_sigma))
        throw ConfigError("run '" + run.id + "': sigma = auto needs theory.bound (exact_newton, trust_region, "
                          "approx_prox or affine_invariant)");
      run.cfg.sigma = in.needed_sigma * run.sigma_scale;
    }
    if (cfg.theory.bound == "approx_prox" || cfg.theory.bound == "affine_invariant") run.cfg.monitor_eta = true;
    if (run.solver == "gradient_descent" && run.step == 0.0) run.step = default_gd_step(p, cfg.seed);
    run.cfg.f_star = p.f_star;

    try {
      out.trace = dispatch(run, p);
    } catch (const TracedFailure& e) {
      out.trace = e.trace();
      out.failure = e.what();
      out.trace.set_status(SolveStatus::numerical_failure);
    } catch (const InnerSolverError& e) {
      out.failure = e.what();
      out.trace.set_status(SolveStatus::numerical_failure);
    }
    if (out.trace.status() == SolveStatus::numerical_failure) res.exit_code = kExitNumerical;
    out.summary = run_summary(cfg, out, p, in);
    runs.push_back(out.summary);
    res.runs.push_back(std::move(out));
  }

  nlohmann::json report;
  report["schema_version"] = 1;
  report["name"] = cfg.name;
  report["problem"] = p.name;
  report["seed"] = cfg.seed;
  report["f_star"] = num(p.f_star);
  report["f_star_source"] = p.f_star_source;
  report["noise_floor"] = num(cfg.report.noise_floor);
  report["runs"] = runs;
  if (res.runs.size() == 1 && runs[0].contains("rate_fit") && !runs[0]["rate_fit"].is_null())
    report["geometric_factor"] = runs[0]["rate_fit"]["geometric_factor"];
  res.report = report;

  if (cfg.probe.enabled) res.stability = probe_stability(cfg, p);

  if (write) {
    const auto& dir = cfg.output_dir;
    for (const auto& out : res.runs) {
      const auto sub = res.runs.size() == 1 ? dir : dir / out.spec.id;
      write_atomic(sub / "trace.csv", trace_to_csv(out.trace));
      write_atomic(sub / "trace.json", trace_to_json(out.trace).dump(2) + "\n");
    }
    write_atomic(dir / "report.json", res.report.dump(2) + "\n");
    if (res.stability) write_atomic(dir / "stability.json", res.stability->dump(2) + "\n");
  }
  return res;
}

CompareTable compare_experiments(const std::vector<ExperimentConfig>& cfgs) {
  if (cfgs.size() < 2) throw ConfigError("compare needs at least two configs");
  for (const auto& c : cfgs)
    if (c.problem.fingerprint != cfgs.front().problem.fingerprint)
      throw ConfigError("compare: configs describe different problems ('" + cfgs.front().name + "' vs '" +
                        c.name + "')");

  CompareTable t;
  for (const auto& c : cfgs) {
    const ExperimentResult res = run_experiment(c, false);
    const double f_star = res.report["f_star"].is_number() ? res.report["f_star"].get<double>() : kNaN;
    for (const auto& out : res.runs) {
      CompareRow row{c.name, out.spec.id, out.spec.solver, {}};
      for (std::size_t k = 0; k < kCompareThresholds.size(); ++k) {
        for (const auto& r : out.trace.records()) {
          if (!r.accepted) continue;
          const auto g = gap_of(r, f_star);
          if (g && *g <= kCompareThresholds[k]) {
            row.iterations[k] = r.iter;
            break;
          }
        }
      }
      t.rows.push_back(std::move(row));
    }
  }

  const std::vector<std::string> head{"config", "run", "solver", "iters_gap_1e-3", "iters_gap_1e-6", "iters_gap_1e-9"};
  std::vector<std::vector<std::string>> cells;
  std::ostringstream csv;
  for (std::size_t i = 0; i < head.size(); ++i) csv << (i ? "," : "") << head[i];
  csv << "\n";
  for (const auto& r : t.rows) {
    csv << r.config << "," << r.run << "," << r.solver;
    std::vector<std::string> line{r.config, r.run, r.solver};
    for (const auto& it : r.iterations) {
      csv << "," << iter_cell(it, "");
      line.push_back(iter_cell(it, "-"));
    }
    csv << "\n";
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t i = 0; i < head.size(); ++i) {
    width[i] = head[i].size();
    for (const auto& l : cells) width[i] = std::max(width[i], l[i].size());
  }
  std::ostringstream txt;
  auto emit = [&](const std::vector<std::string>& l) {
    for (std::size_t i = 0; i < l.size(); ++i) {
      if (i) txt << "  ";
      if (i < 3) txt << std::left << std::setw(static_cast<int>(width[i])) << l[i];
      else txt << std::right << std::setw(static_cast<int>(width[i])) << l[i];
    }
    txt << "\n";
  };
  emit(head);
  for (const auto& l : cells) emit(l);
  t.csv = csv.str();
  t.text = txt.str();
  return t;
}

std::filesystem::path preset_dir() { return SNEWTON_PRESET_DIR; }

std::vector<std::string> preset_names() {
  std::vector<std::string> out;
  if (!std::filesystem::is_directory(preset_dir())) return out;
  for (const auto& e : std::filesystem::directory_iterator(preset_dir()))
    if (e.path().extension() == ".cfg") out.push_back(e.path().stem().string());
  std::sort(out.begin(), out.end());
  return out;
}

std::filesystem::path preset_path(const std::string& name) {
  const auto p = preset_dir() / (name + ".cfg");
  if (!std::filesystem::exists(p)) throw ConfigError("unknown preset '" + name + "'");
  return p;
}

// ---------------------------------------------------------------------------
// Command line

namespace {

struct Sources {
  std::vector<std::string> configs;
  std::vector<std::string> presets;
  std::vector<std::string> positional;
  std::optional<int> k;
  std::vector<std::string> sets;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_source_flags(CLI::App* sub, Sources& s, bool many) {
  if (many) {
    sub->add_option("--config", s.configs, "Config file (repeatable)");
    sub->add_option("--preset", s.presets, "Preset name (repeatable)");
  } else {
    sub->add_option("--config", s.configs, "Config file")->expected(1);
    sub->add_option("--preset", s.presets, "Preset name")->expected(1);
  }
  sub->add_option("targets", s.positional, "Preset names or config paths");
  sub->add_option("--k", s.k, "Sets problem.k");
  sub->add_option("--set", s.sets, "Override a key: --set solver.sigma=2");
  sub->add_option("--out", s.out, "Output directory");
  sub->add_option("--seed", s.seed, "Seed (overrides the config)");
}

std::vector<KeyValueConfig> load_sources(const Sources& s, bool apply_out) {
  std::vector<KeyValueConfig> out;
  for (const auto& c : s.configs) out.push_back(KeyValueConfig::load(c));
  for (const auto& p : s.presets) out.push_back(KeyValueConfig::load(preset_path(p)));
  for (const auto& t : s.positional) {
    const auto as_preset = preset_dir() / (t + ".cfg");
    if (std::filesystem::exists(t) && !std::filesystem::is_directory(t)) out.push_back(KeyValueConfig::load(t));
    else if (std::filesystem::exists(as_preset)) out.push_back(KeyValueConfig::load(as_preset));
    else throw ConfigError("'" + t + "' is neither a config file nor a preset");
  }
  if (out.empty()) throw ConfigError("no config given (use --config PATH or --preset NAME)");
  for (auto& kv : out) {
    if (s.k) kv.set("problem.k", std::to_string(*s.k));
    for (const auto& a : s.sets) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + a + "'");
      kv.set(a.substr(0, eq), a.substr(eq + 1));
    }
    if (s.seed) kv.set("seed", std::to_string(*s.seed));
    if (apply_out && !s.out.empty()) kv.set("output.dir", s.out);
  }
  return out;
}

void print_summary(const ExperimentResult& res, const std::filesystem::path& dir) {
  for (const auto& j : res.report["runs"]) {
    std::cout << j["id"].get<std::string>() << " (" << j["solver"].get<std::string>()
              << "): " << j["status"].get<std::string>();
    if (j.contains("iterations")) std::cout << ", " << j["iterations"] << " iterations";
    if (j.contains("final_gap")) std::cout << ", final gap " << j["final_gap"];
    if (j.contains("rate_fit") && !j["rate_fit"].is_null())
      std::cout << ", geometric factor " << j["rate_fit"]["geometric_factor"];
    const auto& tb = j.value("theorem_bound", nlohmann::json(nullptr));
    if (!tb.is_null()) std::cout << ", measured " << tb["measured"] << " vs predicted " << tb["predicted"];
    std::cout << "\n";
    if (!j["failure"].is_null()) std::cout << "  failure: " << j["failure"].get<std::string>() << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Newton solvers with stable-Hessian step sizes, stability probes and rate checks", "snewton"};
  app.require_subcommand(1);
  Sources run_s, cmp_s, probe_s;
  auto* run = app.add_subcommand("run", "Run the solvers of one experiment");
  add_source_flags(run, run_s, false);
  auto* cmp = app.add_subcommand("compare", "Iterations-to-gap table over several configs");
  add_source_flags(cmp, cmp_s, true);
  auto* probe = app.add_subcommand("probe", "Estimate stability constants and predicted rates");
  add_source_flags(probe, probe_s, false);
  auto* presets = app.add_subcommand("presets", "Shipped experiment presets");
  auto* list = presets->add_subcommand("list", "List preset names");
  presets->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (list->parsed()) {
      for (const auto& n : preset_names()) std::cout << n << "\n";
      return kExitOk;
    }
    if (run->parsed()) {
      auto kvs = load_sources(run_s, true);
      if (kvs.size() != 1) throw ConfigError("run takes exactly one config");
      const ExperimentConfig cfg = parse_experiment(kvs[0]);
      const ExperimentResult res = run_experiment(cfg, true);
      print_summary(res, cfg.output_dir);
      return res.exit_code;
    }
    if (probe->parsed()) {
      auto kvs = load_sources(probe_s, true);
      if (kvs.size() != 1) throw ConfigError("probe takes exactly one config");
      const ExperimentConfig cfg = parse_experiment(kvs[0]);
      const ProblemInstance p = build_problem(cfg.problem);
      const auto j = probe_stability(cfg, p);
      write_atomic(cfg.output_dir / "stability.json", j.dump(2) + "\n");
      if (j.contains("global_c")) std::cout << "c = " << j["global_c"]["estimate"] << "\n";
      if (j.contains("r_star")) std::cout << "r* = " << j["r_star"] << "\n";
      std::cout << "wrote " << (cfg.output_dir / "stability.json").string() << "\n";
      return kExitOk;
    }
    if (cmp->parsed()) {
      auto kvs = load_sources(cmp_s, false);
      std::vector<ExperimentConfig> cfgs;
      for (const auto& kv : kvs) cfgs.push_back(parse_experiment(kv));
      const CompareTable t = compare_experiments(cfgs);
      const std::filesystem::path dir = cmp_s.out.empty() ? std::filesystem::path("out/compare") : std::filesystem::path(cmp_s.out);
      write_atomic(dir / "compare.csv", t.csv);
      write_atomic(dir / "compare.txt", t.text);
      std::cout << t.text;
      return kExitOk;
    }
  } catch (const InsufficientSamples& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSamples;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const EmptyDataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace snewton
