#include "snewton/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#ifndef SNEWTON_DATA_DIR
#define SNEWTON_DATA_DIR "data"
#endif

namespace snewton {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = lower(trim(text));
  if (t == "inf" || t == "+inf") return kInf;
  if (t == "-inf") return -kInf;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(t, &used);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  if (used != t.size() || std::isnan(v)) throw ConfigError(key + ": expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Index>(i)] = v[i];
  return out;
}

std::filesystem::path resolve_file(const KeyValueConfig& kv, const std::string& key) {
  const std::filesystem::path p = kv.get(key);
  if (p.is_absolute()) {
    if (!std::filesystem::exists(p)) throw ConfigError(key + ": file not found: " + p.string());
    return p;
  }
  const auto local = kv.base_dir() / p;
  if (std::filesystem::exists(local)) return local;
  const auto shipped = std::filesystem::path(SNEWTON_DATA_DIR) / p;
  if (std::filesystem::exists(shipped)) return shipped;
  throw ConfigError(key + ": file not found: " + p.string());
}

std::optional<Box> read_box(const KeyValueConfig& kv, const std::string& prefix) {
  const bool lo = kv.has(prefix + ".lo"), hi = kv.has(prefix + ".hi");
  if (!lo && !hi) return std::nullopt;
  if (lo != hi) throw ConfigError(prefix + ": both .lo and .hi are required");
  Box b{to_vector(kv.get_list(prefix + ".lo")), to_vector(kv.get_list(prefix + ".hi"))};
  if (b.lo.size() != b.hi.size() || b.lo.size() == 0)
    throw ConfigError(prefix + ": .lo and .hi must have the same nonzero length");
  if ((b.lo.array() > b.hi.array()).any()) throw ConfigError(prefix + ": lo must not exceed hi");
  return b;
}

ProblemSpec parse_problem(const KeyValueConfig& kv) {
  ProblemSpec p;
  std::ostringstream fp;
  if (kv.has("problem.libsvm")) {
    if (kv.has("problem.zoo")) throw ConfigError("problem.zoo and problem.libsvm are exclusive");
    p.libsvm = resolve_file(kv, "problem.libsvm");
    p.link = kv.get_or("problem.link", "logistic");
    p.normalize = kv.get_bool("problem.normalize", true);
    p.regularizer = kv.get_or("problem.regularizer", "none");
    if (p.regularizer != "none" && p.regularizer != "l1" && p.regularizer != "box")
      throw ConfigError("problem.regularizer: expected none, l1 or box");
    fp << "libsvm=" << std::filesystem::weakly_canonical(*p.libsvm).string() << ";link=" << p.link
       << ";normalize=" << p.normalize << ";reg=" << p.regularizer;
  } else {
    if (!kv.has("problem.zoo")) throw ConfigError("problem.zoo or problem.libsvm is required");
    p.zoo = kv.get("problem.zoo");
    const auto names = zoo_names();
    if (std::find(names.begin(), names.end(), p.zoo) == names.end())
      throw ConfigError("problem.zoo: unknown problem '" + p.zoo + "'");
    if (kv.has("problem.data")) p.params.data_path = resolve_file(kv, "problem.data");
    fp << "zoo=" << p.zoo;
  }
  p.params.k = kv.get_int("problem.k", p.params.k);
  p.params.q = kv.get_double("problem.q", p.params.q);
  p.params.lambda = kv.get_double("problem.lambda", p.params.lambda);
  p.params.box = read_box(kv, "problem.box");
  if (p.params.k < 1) throw ConfigError("problem.k must be >= 1");
  if (kv.has("problem.x0")) p.x0 = to_vector(kv.get_list("problem.x0"));
  p.region = read_box(kv, "problem.region");
  const std::string fs = kv.get_or("problem.f_star", "auto");
  if (lower(fs) != "auto") p.f_star = to_double("problem.f_star", fs);

  fp << ";k=" << p.params.k << ";q=" << p.params.q << ";lambda=" << p.params.lambda;
  if (p.params.box) fp << ";box=" << p.params.box->lo.transpose() << "|" << p.params.box->hi.transpose();
  if (!p.params.data_path.empty()) fp << ";data=" << std::filesystem::weakly_canonical(p.params.data_path).string();
  if (p.x0) fp << ";x0=" << p.x0->transpose();
  p.fingerprint = fp.str();
  return p;
}

// Run keys: run.<id>.<key>, falling back to solver.<key>.
struct RunKeys {
  const KeyValueConfig& kv;
  std::string id;

  std::string key(const std::string& k) const {
    const std::string own = "run." + id + "." + k;
    return kv.has(own) ? own : "solver." + k;
  }
  bool has(const std::string& k) const { return kv.has(key(k)); }
  std::string str(const std::string& k, const std::string& d) const { return kv.get_or(key(k), d); }
  double num(const std::string& k, double d) const { return kv.get_double(key(k), d); }
  int integer(const std::string& k, int d) const { return kv.get_int(key(k), d); }
  bool flag(const std::string& k, bool d) const { return kv.get_bool(key(k), d); }
};

RunSpec parse_run(const KeyValueConfig& kv, const std::string& id, std::uint64_t seed) {
  RunKeys rk{kv, id};
  RunSpec r;
  r.id = id;
  r.solver = rk.str("name", "exact_newton");
  if (r.solver.empty()) throw ConfigError("run '" + id + "': solver name missing (solver.name)");
  const auto& names = solver_names();
  if (std::find(names.begin(), names.end(), r.solver) == names.end())
    throw ConfigError("run '" + id + "': unknown solver '" + r.solver + "'");

  SolverConfig& c = r.cfg;
  const std::string sigma = rk.str("sigma", "1");
  if (lower(sigma) == "auto") {
    r.sigma_auto = true;
  } else {
    c.sigma = to_double(rk.key("sigma"), sigma);
    if (!(c.sigma > 0) || !std::isfinite(c.sigma)) throw ConfigError(rk.key("sigma") + " must be positive");
  }
  r.sigma_scale = rk.num("sigma_scale", 1.0);
  c.radius = rk.num("radius", kInf);
  if (!(c.radius > 0)) throw ConfigError(rk.key("radius") + " must be positive");
  c.norm = parse_norm(rk.str("norm", "l2"));
  c.theta = rk.num("theta", 1.0);
  if (!(c.theta > 0 && c.theta <= 1)) throw ConfigError(rk.key("theta") + " must lie in (0, 1]");
  c.max_iter = rk.integer("max_iter", c.max_iter);
  c.gap_tol = rk.num("gap_tol", c.gap_tol);
  c.decrement_tol = rk.num("decrement_tol", c.decrement_tol);
  c.inner_max_iter = rk.integer("inner_max_iter", c.inner_max_iter);
  c.approx = parse_approx(rk.str("approx", "exact"));
  c.monitor_eta = rk.flag("monitor_eta", false);
  if (rk.has("declared_c")) c.declared_c = rk.num("declared_c", 1.0);
  c.seed = seed;
  if (rk.flag("backtracking", r.solver == "backtracking")) {
    BacktrackingParams bt;
    bt.sigma0 = rk.num("bt.sigma0", bt.sigma0);
    bt.zeta1 = rk.num("bt.zeta1", bt.zeta1);
    bt.zeta2 = rk.num("bt.zeta2", bt.zeta2);
    bt.eta1 = rk.num("bt.eta1", bt.eta1);
    bt.eta2 = rk.num("bt.eta2", bt.eta2);
    bt.ceiling = rk.num("bt.ceiling", bt.ceiling);
    try {
      bt.validate();
    } catch (const std::exception& e) {
      throw ConfigError("run '" + id + "': " + e.what());
    }
    c.backtracking = bt;
  }
  r.gamma = rk.num("gamma", 1.0);
  if (!(r.gamma > 0 && r.gamma <= 1)) throw ConfigError(rk.key("gamma") + " must lie in (0, 1]");
  r.step = rk.num("step", 0.0);
  if (r.step < 0) throw ConfigError(rk.key("step") + " must be nonnegative");
  return r;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig kv;
  kv.source_ = source;
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source + ":" + std::to_string(no) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(no) + ": empty key");
    if (kv.values_.count(key)) throw ConfigError(source + ":" + std::to_string(no) + ": duplicate key '" + key + "'");
    kv.values_[key] = value;
  }
  return kv;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  auto kv = parse(ss.str(), path.string());
  kv.base_dir_ = path.parent_path();
  return kv;
}

void KeyValueConfig::set(const std::string& key, const std::string& value) {
  if (trim(key).empty()) throw ConfigError("override with empty key");
  values_[trim(key)] = trim(value);
}

bool KeyValueConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::string KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("missing key '" + key + "'");
  used_.insert(key);
  return it->second;
}

std::string KeyValueConfig::get_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  return has(key) ? to_double(key, get(key)) : fallback;
}

int KeyValueConfig::get_int(const std::string& key, int fallback) const {
  if (!has(key)) return fallback;
  const double v = to_double(key, get(key));
  if (v != std::floor(v) || std::abs(v) > 2e9) throw ConfigError(key + ": expected an integer");
  return static_cast<int>(v);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = lower(get(key));
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false");
}

std::vector<double> KeyValueConfig::get_list(const std::string& key, std::vector<double> fallback) const {
  if (!has(key)) return fallback;
  std::vector<double> out;
  for (const auto& w : split_list(get(key))) out.push_back(to_double(key, w));
  return out;
}

std::vector<std::string> KeyValueConfig::get_words(const std::string& key,
                                                   std::vector<std::string> fallback) const {
  return has(key) ? split_list(get(key)) : fallback;
}

std::vector<std::string> KeyValueConfig::unused_keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.size() > 20 || !std::all_of(t.begin(), t.end(), [](char ch) { return ch >= '0' && ch <= '9'; }))
    throw ConfigError("seed must be a nonnegative integer, got '" + text + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw ConfigError("seed out of range: " + text);
  }
}

NormSpec parse_norm(const std::string& name) {
  const std::string n = lower(trim(name));
  if (n == "l2") return NormSpec::l2();
  if (n == "linf") return NormSpec::linf();
  throw ConfigError("unknown norm '" + name + "' (expected l2 or linf)");
}

ApproxScheme parse_approx(const std::string& text) {
  const std::string t = lower(trim(text));
  const auto colon = t.find(':');
  const std::string kind = t.substr(0, colon);
  const std::string arg = colon == std::string::npos ? "" : t.substr(colon + 1);
  auto count = [&](const char* what) {
    if (arg.empty()) throw ConfigError(std::string("approx ") + what + " needs a count, e.g. " + what + ":2");
    const double v = to_double("approx", arg);
    if (v < 1 || v != std::floor(v)) throw ConfigError("approx count must be a positive integer");
    return static_cast<int>(v);
  };
  if (kind == "exact") return ApproxScheme::exact();
  if (kind == "sketch") return ApproxScheme::sketch(count("sketch"));
  if (kind == "block_diag") return ApproxScheme::block_diag(count("block_diag"));
  if (kind == "hessian_free") return arg.empty() ? ApproxScheme::hessian_free() : ApproxScheme::hessian_free(to_double("approx", arg));
  throw ConfigError("unknown approx '" + text + "'");
}

const std::vector<std::string>& solver_names() {
  static const std::vector<std::string> names{"exact_newton",        "trust_region",     "approx_prox",
                                              "backtracking",        "affine_invariant_tr",
                                              "gradient_descent",    "line_search_newton"};
  return names;
}

ExperimentConfig parse_experiment(const KeyValueConfig& kv) {
  ExperimentConfig e;
  e.name = kv.get_or("name", "experiment");
  e.seed = parse_seed(kv.get_or("seed", "0"));
  e.problem = parse_problem(kv);

  const auto ids = kv.get_words("runs", {"main"});
  if (ids.empty()) throw ConfigError("runs: at least one run id is required");
  for (const auto& id : ids) {
    if (std::count(ids.begin(), ids.end(), id) > 1) throw ConfigError("runs: duplicate id '" + id + "'");
    e.runs.push_back(parse_run(kv, id, e.seed));
  }

  e.probe.enabled = kv.get_bool("stability.enabled", false);
  e.probe.constants = kv.get_words("stability.constants", e.probe.constants);
  for (const auto& c : e.probe.constants)
    if (c != "c" && c != "d" && c != "path_c") throw ConfigError("stability.constants: unknown constant '" + c + "'");
  e.probe.sampler.pairs = kv.get_int("stability.pairs", e.probe.sampler.pairs);
  e.probe.sampler.grid_1d = kv.get_bool("stability.grid_1d", true);
  e.probe.sampler.grid_resolution = kv.get_double("stability.grid_resolution", 0.0);
  e.probe.sampler.min_valid = kv.get_int("stability.min_valid", e.probe.sampler.min_valid);
  e.probe.sampler.seed = e.seed;
  e.probe.r_grid = kv.get_list("stability.r_grid", {0.125, 0.25, 0.5, 1.0, 2.0, 4.0});
  e.probe.gamma_grid = kv.get_list("stability.gamma_grid", {0.25, 0.5, 0.75, 1.0});
  e.probe.norm = parse_norm(kv.get_or("stability.norm", "l2"));
  for (double r : e.probe.r_grid)
    if (!(r > 0)) throw ConfigError("stability.r_grid entries must be positive");
  for (double g : e.probe.gamma_grid)
    if (!(g > 0 && g <= 1)) throw ConfigError("stability.gamma_grid entries must lie in (0, 1]");

  e.theory.bound = kv.get_or("theory.bound", "none");
  static const std::vector<std::string> bounds{"none", "exact_newton", "trust_region", "approx_prox",
                                               "affine_invariant", "power_even"};
  if (std::find(bounds.begin(), bounds.end(), e.theory.bound) == bounds.end())
    throw ConfigError("theory.bound: unknown bound '" + e.theory.bound + "'");
  e.theory.r = kv.get_double("theory.r", kNaN);
  if ((e.theory.bound == "trust_region" || e.theory.bound == "approx_prox") && !(e.theory.r > 0))
    throw ConfigError("theory.r is required for the " + e.theory.bound + " bound");

  e.report.tail_fraction = kv.get_double("report.tail_fraction", e.report.tail_fraction);
  e.report.noise_floor = kv.get_double("report.noise_floor", e.report.noise_floor);
  e.output_dir = kv.get_or("output.dir", "out/" + e.name);

  if (const auto unused = kv.unused_keys(); !unused.empty()) {
    std::string msg = "unknown or unused keys:";
    for (const auto& k : unused) msg += " " + k;
    throw ConfigError(msg);
  }
  return e;
}

}  // namespace snewton
