// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Tolerances are pinned in code next to each check.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ergolab/ergolab.hpp"

using namespace ergolab;
namespace fs = std::filesystem;

namespace {

int failures = 0;
std::vector<std::string> notes;

void expect(bool ok, const std::string& what) {
  if (!ok) {
    ++failures;
    notes.push_back(what);
  }
}

struct Criterion {
  int index;
  std::string title;
  int failures_before;
  std::chrono::steady_clock::time_point start;

  Criterion(int i, std::string t)
      : index(i), title(std::move(t)), failures_before(failures),
        start(std::chrono::steady_clock::now()) {}

  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }

  ~Criterion() {
    bool ok = failures == failures_before;
    std::printf("[%s] %d. %s (%.1f s)\n", ok ? "PASS" : "FAIL", index,
                title.c_str(), seconds());
    for (std::size_t i = static_cast<std::size_t>(failures_before);
         i < notes.size(); ++i)
      std::printf("       - %s\n", notes[i].c_str());
    std::fflush(stdout);
  }
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

CircleMap doubling() { return make_map(MapFamily::linear, {2, 0.0}); }
CircleMap tripling() { return make_map(MapFamily::linear, {3, 0.0}); }
CircleMap smooth01() { return make_map(MapFamily::smooth_perturbed, {2, 0.1}); }

double l1_distance(const GridMeasure& a, const GridMeasure& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.k; ++i) s += std::fabs(a.mass[i] - b.mass[i]);
  return s;
}

// ---------------------------------------------------------------------------

void criterion1() {
  Criterion c(1, "doubling-map oracle suite");
  auto map = doubling();
  const double log2 = std::log(2.0);

  auto mu = seeded_empirical_measure(map, 1, 1000000, 0);
  auto est = entropy_estimate(map, mu, branch_partition(map), 10);
  expect(std::fabs(est.entropy_est - log2) <= 0.05 * log2,
         "entropy " + fmt(est.entropy_est) + " not within 5% of log 2");

  auto rep = pesin_residual(map, mu, est);
  expect(std::fabs(rep.residual) < 0.05,
         "pesin residual " + fmt(rep.residual) + " not below 0.05");

  auto pressure = pressure_estimate(map, 256, 256, 2);
  expect(std::fabs(pressure.pressure) < 1e-9,
         "|pressure| " + fmt(std::fabs(pressure.pressure)) + " not below 1e-9");

  expect(c.seconds() < 60.0, "runtime exceeded 60 s");
}

void criterion2() {
  Criterion c(2, "tripling map entropy and stationary vector");
  auto map = tripling();
  const double log3 = std::log(3.0);

  auto mu = seeded_empirical_measure(map, 2, 1000000, 0);
  auto est = entropy_estimate(map, mu, branch_partition(map), 8);
  expect(std::fabs(est.entropy_est - log3) <= 0.05 * log3,
         "entropy " + fmt(est.entropy_est) + " not within 5% of log 3");

  auto matrix = ulam_matrix(map, 243, 256, 2);
  auto pi = stationary_measure(matrix);
  double l1 = l1_distance(pi, uniform_grid(243));
  expect(l1 <= 1e-6, "stationary L1 distance " + fmt(l1) + " above 1e-6");
}

void criterion3() {
  Criterion c(3, "atomic-measure exclusion");
  auto map = doubling();
  const double log2 = std::log(2.0);

  auto atom = dirac(0.0);
  auto est = entropy_estimate(map, atom, branch_partition(map), 8,
                              MeasureKind::exact);
  auto rep = pesin_residual(map, atom, est);
  expect(std::fabs(rep.residual - log2) <= 1e-9,
         "atomic residual " + fmt(rep.residual) + " not log 2 within 1e-9");

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto report = srb_like_candidates(map, 100, 20000, 128, 0.05, seed, 0, 0.1, 2);
    expect(!report.candidates.empty(),
           "seed " + std::to_string(seed) + ": scan produced no candidates");
    for (const auto& cand : report.candidates) {
      expect(!(cand.atomic_profile && cand.srb_like),
             "seed " + std::to_string(seed) +
                 ": atomic-profile candidate flagged SRB-like");
    }
  }
}

void criterion4() {
  double worst_seen = 1e9;
  {
  Criterion c(4, "Ruelle inequality over 100 seeded (map, x0) pairs");
  std::vector<CircleMap> maps;
  maps.push_back(doubling());
  maps.push_back(tripling());
  maps.push_back(smooth01());
  maps.push_back(make_map(MapFamily::smooth_perturbed, {2, 0.05}));
  maps.push_back(make_map(MapFamily::smooth_perturbed, {3, 0.15}));
  maps.push_back(make_map(MapFamily::smooth_perturbed, {2, 0.2}));
  maps.push_back(make_map(MapFamily::nonhoelder, {2, 0.05}));
  maps.push_back(make_map(MapFamily::nonhoelder, {2, 0.03}));
  maps.push_back(make_map(MapFamily::nonhoelder, {3, 0.05}));
  maps.push_back(make_map(MapFamily::linear, {4, 0.0}));

  const std::size_t n = 200000;
  double worst = 1e9;
  for (std::size_t pair = 0; pair < 100; ++pair) {
    const auto& map = maps[pair % maps.size()];
    auto mu = seeded_empirical_measure(map, 1000 + pair, n, 50);
    auto q = auto_q_max(map.degree(), n);
    auto est = entropy_estimate(map, mu, branch_partition(map), q);
    auto rep = pesin_residual(map, mu, est);
    worst = std::min(worst, rep.residual);
    if (rep.residual < -0.05) {
      expect(false, "pair " + std::to_string(pair) + ": residual " +
                        fmt(rep.residual) + " below -0.05");
    }
  }
  worst_seen = worst;
  }
  std::printf("       worst residual %s\n", fmt(worst_seen).c_str());
}

void criterion5() {
  Criterion c(5, "equilibrium-state cross-validation on smooth_perturbed");
  auto map = smooth01();

  auto report = srb_like_candidates(map, 200, 1000000, 1024, 0.05, 5, 0, 0.1, 2);
  expect(report.candidates.size() == 1,
         "expected a unique candidate, got " +
             std::to_string(report.candidates.size()));
  if (!report.candidates.empty()) {
    const auto& cand = report.candidates[0];
    auto matrix = ulam_matrix(map, 1024, 256, 2);
    auto pi = stationary_measure(matrix);
    double l1 = l1_distance(cand.measure, pi);
    expect(l1 <= 0.05, "candidate vs Ulam L1 " + fmt(l1) + " above 0.05");
    expect(std::fabs(cand.pesin.residual) < 0.05,
           "candidate residual " + fmt(cand.pesin.residual) + " not below 0.05");
  }

  double prev = 1e9;
  for (std::size_t k : {256UL, 512UL, 1024UL}) {
    auto est = pressure_estimate(map, k, 256, 2);
    double mag = std::fabs(est.pressure);
    expect(mag < 0.05, "|pressure| " + fmt(mag) + " at k=" + std::to_string(k) +
                           " not below 0.05");
    expect(mag <= 1.1 * prev, "|pressure| not decreasing at k=" + std::to_string(k));
    prev = mag;
  }
}

void criterion6() {
  Criterion c(6, "weak* metric axioms and truncation control");
  auto map = smooth01();
  TestFamily family(map, 32);
  TestFamily f16(map, 16);
  auto rng = make_rng(606);

  auto random_grid = [&](std::size_t k) {
    std::vector<double> mass(k);
    double total = 0.0;
    for (double& m : mass) {
      m = uniform01(rng) + 1e-6;
      total += m;
    }
    for (double& m : mass) m /= total;
    double fix = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) fix += mass[i];
    mass.back() = 1.0 - fix;
    return make_grid(k, std::move(mass));
  };

  for (int trial = 0; trial < 100; ++trial) {
    auto a = random_grid(64);
    auto b = random_grid(64);
    auto cmeas = random_grid(64);
    double ab = weak_star_distance(a, b, family);
    double ba = weak_star_distance(b, a, family);
    double ac = weak_star_distance(a, cmeas, family);
    double cb = weak_star_distance(cmeas, b, family);
    expect(ab >= 0.0, "negativity violated");
    expect(std::fabs(ab - ba) <= 1e-12, "symmetry violated");
    expect(weak_star_distance(a, a, family) <= 1e-12, "identity violated");
    expect(ab <= ac + cb + 1e-12, "triangle inequality violated");

    double d16 = weak_star_distance(a, b, f16);
    expect(std::fabs(d16 - ab) <= std::pow(2.0, -15.0) * family.phi0_sup(),
           "truncation error above 2^-15 sup|phi_0|");
  }
}

void criterion7() {
  Criterion c(7, "deviation decay experiment on the doubling map");
  auto map = doubling();
  auto points = deviation_decay(map, uniform_grid(256), 0.2, 0.05,
                                {100, 1000, 10000, 100000}, 500, 7, 2);
  for (std::size_t i = 1; i < points.size(); ++i) {
    double p = points[i - 1].fraction;
    double sigma = std::sqrt(std::max(p * (1.0 - p), 1e-12) / 500.0);
    expect(points[i].fraction <= p + 2.0 * sigma + 1e-12,
           "fraction increased beyond 2 sigma at n=" + std::to_string(points[i].n));
  }
  expect(points.back().fraction <= 0.05,
         "final fraction " + fmt(points.back().fraction) + " above 0.05");
  expect(c.seconds() < 300.0, "runtime exceeded 5 min");
}

// --- criterion 8: byte-identical CLI reruns --------------------------------

int run_cli(const std::string& args) {
  std::string cmd = std::string(ERGOLAB_BIN) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return status < 0 ? -1 : WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void criterion8() {
  Criterion c(8, "byte-identical CLI reruns for every subcommand");
  fs::path root = fs::path(ERGOLAB_TEST_TMP) / "acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);
  json map_spec{{"family", "smooth_perturbed"}, {"degree", 2}, {"c", 0.1}};
  fs::path out = root / "out";

  struct Step {
    std::string name;
    json cfg;
    std::vector<std::string> files;
  };
  std::vector<Step> steps = {
      {"simulate",
       json{{"map", map_spec}, {"x0", "random"}, {"n", 20000}, {"grid_k", 64},
            {"seed", 21}, {"output_dir", out.string()}},
       {"histogram.csv", "simulate.json"}},
      {"entropy",
       json{{"map", map_spec}, {"x0", "random"}, {"n", 100000}, {"q_max", 8},
            {"seed", 22}, {"output_dir", out.string()}},
       {"pesin.json"}},
      {"ulam",
       json{{"map", map_spec}, {"k", 64}, {"seed", 23},
            {"output_dir", out.string()}},
       {"ulam_matrix.csv", "stationary.csv", "pressure.json"}},
      {"srb-scan",
       json{{"map", map_spec}, {"sample_count", 100}, {"n", 20000},
            {"grid_k", 64}, {"seed", 24}, {"output_dir", out.string()}},
       {"srb_report.json"}},
      {"decay",
       json{{"map", map_spec}, {"r", 0.2}, {"epsilon", 0.05},
            {"n_list", {100, 1000}}, {"sample_count", 60},
            {"reference", "lebesgue"}, {"reference_k", 64}, {"seed", 25},
            {"output_dir", out.string()}},
       {"decay.csv", "decay.json"}},
  };

  for (const auto& step : steps) {
    fs::path cfg_path = root / (step.name + ".json");
    write_json_file(cfg_path, step.cfg);
    std::vector<std::string> first;
    for (int run = 0; run < 2; ++run) {
      int code = run_cli(step.name + " --config " + cfg_path.string());
      expect(code == 0, step.name + " exited with code " + std::to_string(code));
      if (code != 0) return;
      if (run == 0) {
        for (const auto& f : step.files) first.push_back(slurp(out / f));
      } else {
        for (std::size_t i = 0; i < step.files.size(); ++i)
          expect(slurp(out / step.files[i]) == first[i],
                 step.name + ": " + step.files[i] + " differs between runs");
      }
    }
  }

  json report_cfg{{"inputs",
                   {(out / "decay.csv").string(), (out / "pressure.json").string(),
                    (out / "srb_report.json").string()}},
                  {"output_dir", (root / "report").string()}};
  fs::path cfg_path = root / "report.json";
  write_json_file(cfg_path, report_cfg);
  std::vector<std::string> first;
  for (int run = 0; run < 2; ++run) {
    int code = run_cli("report --config " + cfg_path.string());
    expect(code == 0, "report exited with code " + std::to_string(code));
    if (code != 0) return;
    std::string summary = slurp(root / "report" / "summary.json");
    std::string merged = slurp(root / "report" / "decay_curves.csv");
    if (run == 0) {
      first = {summary, merged};
    } else {
      expect(summary == first[0], "report: summary.json differs between runs");
      expect(merged == first[1], "report: decay_curves.csv differs between runs");
    }
  }
}

}  // namespace

int main() {
  std::printf("ergolab acceptance suite\n");
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  std::printf("%s: %d failure(s)\n", failures == 0 ? "OK" : "FAILED", failures);
  return failures == 0 ? 0 : 1;
}
