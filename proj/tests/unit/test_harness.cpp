#include <doctest.h>

#include "snewton/config.hpp"
#include "snewton/harness.hpp"
#include "snewton/trace_io.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace snewton;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "snewton_test_harness" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// runs the command-line tool, returns its exit status
int cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SNEWTON_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

fs::path write_cfg(const fs::path& dir, const std::string& name, const std::string& body) {
  const auto p = dir / name;
  std::ofstream(p) << body;
  return p;
}

ExperimentConfig parse_text(const std::string& text) { return parse_experiment(KeyValueConfig::parse(text)); }

}  // namespace

TEST_CASE("key-value parsing") {
  const auto kv = KeyValueConfig::parse("# c\na = 1\n\nb.c = x y # tail\nlist = 1, 2,3\n");
  CHECK(kv.get("a") == "1");
  CHECK(kv.get("b.c") == "x y");
  CHECK(kv.get_list("list") == std::vector<double>{1, 2, 3});
  CHECK(kv.get_words("b.c") == std::vector<std::string>{"x", "y"});
  CHECK(kv.get_double("missing", 7.0) == 7.0);
  CHECK_THROWS_AS(KeyValueConfig::parse("a = 1\na = 2\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(kv.get("missing"), ConfigError);
}

TEST_CASE("experiment parsing: defaults, overrides and errors") {
  const auto cfg = parse_text("problem.zoo = exp_shift\nsolver.name = trust_region\nsolver.radius = 0.5\n"
                              "solver.sigma = 2\nseed = 42\n");
  REQUIRE(cfg.runs.size() == 1);
  CHECK(cfg.runs[0].solver == "trust_region");
  CHECK(cfg.runs[0].cfg.radius == 0.5);
  CHECK(cfg.runs[0].cfg.sigma == 2.0);
  CHECK(cfg.seed == 42);

  const auto multi = parse_text("problem.zoo = quadratic\nruns = a b\nsolver.name = exact_newton\n"
                                "run.b.name = gradient_descent\nrun.b.step = 0.1\n");
  REQUIRE(multi.runs.size() == 2);
  CHECK(multi.runs[0].solver == "exact_newton");
  CHECK(multi.runs[1].solver == "gradient_descent");
  CHECK(multi.runs[1].step == 0.1);

  CHECK_THROWS_AS(parse_text("problem.zoo = quadratic\nsolver.name = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("problem.zoo = quadratic\nsolver.sigmaa = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("problem.zoo = nope\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("problem.libsvm = /does/not/exist.libsvm\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("problem.zoo = quadratic\ntheory.bound = trust_region\n"), ConfigError);
  CHECK_THROWS_AS(parse_text("problem.zoo = quadratic\nsolver.sigma = -1\n"), ConfigError);

  CHECK(parse_seed("123") == 123u);
  CHECK_THROWS_AS(parse_seed("-1"), ConfigError);
  CHECK_THROWS_AS(parse_seed("1e3"), ConfigError);
  CHECK(parse_approx("sketch:4").kind == ApproxScheme::Kind::sketch);
  CHECK(parse_approx("block_diag:2").blocks == 2);
  CHECK(parse_approx("hessian_free:1e-8").cg_tol == 1e-8);
  CHECK_THROWS_AS(parse_approx("lbfgs"), ConfigError);
  CHECK_THROWS_AS(parse_norm("l3"), ConfigError);
}

TEST_CASE("every preset parses and lists") {
  const auto names = preset_names();
  for (const char* want : {"counterexample-power-even", "line-search-vs-trust-region", "stepsize-necessity",
                           "rate-exact-newton-entropy", "rate-trust-region-exp-shift", "rate-approx-prox-l1-logistic",
                           "rate-affine-invariant-box-logistic", "logistic-libsvm-demo"}) {
    CHECK_MESSAGE(std::find(names.begin(), names.end(), want) != names.end(), want);
  }
  for (const auto& n : names) CHECK_NOTHROW(parse_experiment(KeyValueConfig::load(preset_path(n))));
}

TEST_CASE("trace csv format") {
  SolveTrace tr("x");
  IterationRecord r;
  r.x = Vector::Zero(1);
  r.f_value = 1.5;
  r.composite_value = 1.5;
  r.sigma = 2;
  tr.append(r);
  r.iter = 1;
  r.gap = 0.25;
  r.rho = 0.5;
  r.accepted = false;
  tr.append(r);
  const std::string csv = trace_to_csv(tr);
  CHECK(csv == "iter,f,F,gap,step_norm,sigma,rho,accepted\n0,1.5,1.5,,0,2,,1\n1,1.5,1.5,0.25,0,2,0.5,0\n");
}

TEST_CASE("run: power-even preset reports 16/81") {
  const auto out = scratch("power_even");
  CHECK(cli("run counterexample-power-even --k 2 --out " + out.string()) == 0);
  const auto rep = read_json(out / "report.json");
  CHECK(rep["schema_version"] == 1);
  CHECK(std::abs(rep["geometric_factor"].get<double>() - 16.0 / 81.0) <= 1e-9);
  const auto& tb = rep["runs"][0]["theorem_bound"];
  CHECK(tb.contains("measured"));
  CHECK(tb.contains("predicted"));
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "trace.json"));
}

TEST_CASE("run: line search versus trust region at k = 20") {
  const auto out = scratch("ls_tr");
  CHECK(cli("run line-search-vs-trust-region --k 20 --out " + out.string()) == 0);
  const auto rep = read_json(out / "report.json");
  REQUIRE(rep["runs"].size() == 2);
  for (const auto& r : rep["runs"]) {
    const double ratio = r["first_step_ratio"];
    if (r["solver"] == "line_search_newton") CHECK(ratio > 0.99);
    else CHECK(ratio < 0.75);
    CHECK(fs::exists(out / r["id"].get<std::string>() / "trace.csv"));
  }
}

TEST_CASE("run: step-size necessity at k = 5") {
  const auto out = scratch("stepsize");
  CHECK(cli("run stepsize-necessity --k 5 --out " + out.string()) == 0);
  const auto rep = read_json(out / "report.json");
  bool saw_full = false, saw_bt = false;
  for (const auto& r : rep["runs"]) {
    if (r["solver"] == "backtracking") {
      saw_bt = true;
      CHECK(r["unsuccessful_iterations"].get<int>() >= 1);
      CHECK(r["status"] == "converged");
    } else {
      saw_full = true;
      CHECK(r["f_increase_at_step1"] == true);
    }
  }
  CHECK(saw_full);
  CHECK(saw_bt);
}

TEST_CASE("run: identical config and seed give byte-identical traces") {
  const auto a = scratch("det_a"), b = scratch("det_b");
  CHECK(cli("run logistic-libsvm-demo --seed 7 --out " + a.string()) == 0);
  CHECK(cli("run logistic-libsvm-demo --seed 7 --out " + b.string()) == 0);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (e.path().filename() != "trace.csv") continue;
    const auto rel = fs::relative(e.path(), a);
    CHECK_MESSAGE(slurp(e.path()) == slurp(b / rel), rel.string());
  }
}

TEST_CASE("run: exit codes") {
  const auto dir = scratch("exit");
  const auto bad = write_cfg(dir, "bad.cfg", "problem.zoo = quadratic\nsolver.bogus = 1\n");
  CHECK(cli("run --config " + bad.string() + " --out " + (dir / "o1").string()) == 2);
  CHECK(cli("run --config " + (dir / "missing.cfg").string()) == 2);
  CHECK(cli("run no-such-preset") == 2);
  CHECK(cli("frobnicate") == 2);

  // sigma = 2 after the first rejection is above the 1.5 ceiling
  const auto fail = write_cfg(dir, "fail.cfg",
                              "problem.zoo = neg_exp_linear\nproblem.k = 5\nsolver.name = backtracking\n"
                              "solver.bt.ceiling = 1.5\n");
  CHECK(cli("run --config " + fail.string() + " --out " + (dir / "o2").string()) == 3);
  CHECK(fs::exists(dir / "o2" / "trace.csv"));
  CHECK(fs::exists(dir / "o2" / "report.json"));

  const auto few = write_cfg(dir, "few.cfg",
                             "problem.zoo = logistic_fixture\nstability.enabled = true\nstability.pairs = 3\n");
  CHECK(cli("probe --config " + few.string() + " --out " + (dir / "o3").string()) == 4);
}

TEST_CASE("run: rate presets report measured and predicted factors") {
  for (const char* n : {"rate-exact-newton-entropy", "rate-trust-region-exp-shift", "rate-approx-prox-l1-logistic", "rate-affine-invariant-box-logistic",
                        "counterexample-power-even"}) {
    const auto cfg = parse_experiment(KeyValueConfig::load(preset_path(n)));
    const auto res = run_experiment(cfg, false);
    CHECK_MESSAGE(res.exit_code == 0, n);
    for (const auto& r : res.report["runs"]) {
      const auto& tb = r["theorem_bound"];
      REQUIRE_MESSAGE(tb.is_object(), n);
      CHECK_MESSAGE(tb["measured"].is_number(), n);
      CHECK_MESSAGE(tb["predicted"].is_number(), n);
      if (tb["sigma_precondition_met"] == true)
        CHECK_MESSAGE(tb["measured"].get<double>() <= tb["predicted"].get<double>() + 0.01, n);
    }
  }
}

TEST_CASE("probe: exp_shift d(r) follows e^r and r* = 1/2") {
  const auto out = scratch("probe_exp");
  CHECK(cli("probe probe-exp-shift --out " + out.string()) == 0);
  const auto st = read_json(out / "stability.json");
  CHECK(st["schema_version"] == 1);
  const auto& grid = st["r_grid"];
  const auto& curve = st["local_d"];
  REQUIRE(grid.size() == curve.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double r = grid[i];
    const double want = std::exp(std::min(r, 4.0));
    CHECK(curve[i]["estimate"].get<double>() == doctest::Approx(want).epsilon(0.01));
  }
  CHECK(st["r_star"].get<double>() == doctest::Approx(0.5));
  CHECK(st["predicted"].contains("exact_newton"));
  CHECK(st["predicted"].contains("trust_region"));
}

TEST_CASE("probe: quadratic constants are all 1") {
  const auto dir = scratch("probe_quad");
  const auto cfg = write_cfg(dir, "q.cfg", "problem.zoo = quadratic\nstability.enabled = true\nstability.pairs = 2000\n");
  CHECK(cli("probe --config " + cfg.string() + " --out " + (dir / "o").string()) == 0);
  const auto st = read_json(dir / "o" / "stability.json");
  CHECK(st["global_c"]["estimate"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& d : st["local_d"]) CHECK(d["estimate"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& c : st["path_c"]) CHECK(c["estimate"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("probe: entropy gives c near 4 and a Newton factor near 15/16") {
  const auto cfg = parse_text("problem.zoo = entropy\nstability.enabled = true\n");
  const auto p = build_problem(cfg.problem);
  const auto st = probe_stability(cfg, p);
  const double c = st["global_c"]["estimate"];
  CHECK(c >= 3.99);
  CHECK(c <= 4.0 * (1 + 1e-6));
  CHECK(st["predicted"]["exact_newton"]["factor"].get<double>() == doctest::Approx(15.0 / 16.0).epsilon(1e-3));
}

TEST_CASE("compare: Newton dominates gradient descent; reruns are identical") {
  const auto out = scratch("cmp");
  CHECK(cli("compare --preset compare-fixture-newton --preset compare-fixture-gd --out " + out.string()) == 0);
  CHECK(fs::exists(out / "compare.csv"));
  CHECK(fs::exists(out / "compare.txt"));

  const auto nt = parse_experiment(KeyValueConfig::load(preset_path("compare-fixture-newton")));
  const auto gd = parse_experiment(KeyValueConfig::load(preset_path("compare-fixture-gd")));
  const auto table = compare_experiments({nt, gd});
  REQUIRE(table.rows.size() == 2);
  for (std::size_t k = 0; k < 3; ++k) {
    REQUIRE(table.rows[0].iterations[k]);
    if (table.rows[1].iterations[k]) CHECK(*table.rows[0].iterations[k] < *table.rows[1].iterations[k]);
  }
  const auto same = compare_experiments({nt, nt});
  CHECK(same.rows[0].iterations == same.rows[1].iterations);
  CHECK(compare_experiments({nt, gd}).csv == table.csv);
}

TEST_CASE("compare: Theta = 0.5 costs at most 1/Theta times the iterations when sigma >= eta d(r)") {
  // below that regime the exact run turns superlinear and the ratio is not bounded by 1/Theta
  for (const std::string sigma : {"auto", "2", "4", "8"}) {
    const std::string base = "problem.zoo = logistic_fixture\nproblem.lambda = 0.05\nsolver.name = approx_prox\n"
                             "solver.sigma = " + sigma + "\nsolver.radius = 0.5\nsolver.max_iter = 3000\n"
                             "solver.gap_tol = 1e-12\nsolver.decrement_tol = 0\ntheory.bound = approx_prox\n"
                             "theory.r = 0.5\n";
    const auto exact = parse_text("name = t1\n" + base);
    const auto half = parse_text("name = t05\n" + base + "solver.theta = 0.5\n");
    const auto table = compare_experiments({exact, half});
    REQUIRE(table.rows.size() == 2);
    for (std::size_t k = 0; k < 3; ++k) {
      REQUIRE(table.rows[0].iterations[k]);
      REQUIRE(table.rows[1].iterations[k]);
      const int a = *table.rows[0].iterations[k], b = *table.rows[1].iterations[k];
      CHECK_MESSAGE(b >= a, "sigma " << sigma);
      CHECK_MESSAGE(b <= 2 * a, "sigma " << sigma);
    }
  }
}

TEST_CASE("compare: mismatched problems are rejected") {
  const auto a = parse_text("problem.zoo = quadratic\n");
  const auto b = parse_text("problem.zoo = exp_shift\n");
  CHECK_THROWS_AS(compare_experiments({a, b}), ConfigError);
  CHECK_THROWS_AS(compare_experiments({a}), ConfigError);
  CHECK(cli("compare --preset compare-fixture-newton --preset rate-trust-region-exp-shift --out " +
            scratch("cmp_bad").string()) == 2);
}
