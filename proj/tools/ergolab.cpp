// Experiment runner: every library operation behind a subcommand that reads a
// JSON config, runs deterministically under a fixed seed, and emits CSV/JSON
// artifacts with the resolved config embedded for provenance.

#include <cctype>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ergolab/ergolab.hpp"

namespace fs = std::filesystem;
using ergolab::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  std::size_t threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& opt) {
  cmd->add_option("--config", opt.config_path, "JSON config file")->required();
  cmd->add_option("--seed", opt.seed, "override the config seed")
      ->each([&](const std::string&) { opt.seed_set = true; });
  cmd->add_option("--out", opt.out_dir, "override the config output_dir");
  cmd->add_option("--threads", opt.threads,
                  "worker threads (0 = available parallelism)");
}

void require_keys(const json& cfg, const std::set<std::string>& allowed) {
  if (!cfg.is_object()) throw ergolab::ConfigError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    (void)value;
    if (!allowed.count(key))
      throw ergolab::ConfigError("unknown config key '" + key + "'");
  }
}

json load_config(const CommonOptions& opt, const std::set<std::string>& allowed) {
  json cfg = ergolab::read_json_file(opt.config_path);
  require_keys(cfg, allowed);
  if (opt.seed_set) cfg["seed"] = opt.seed;
  if (!cfg.contains("seed")) cfg["seed"] = 0;
  if (!opt.out_dir.empty()) cfg["output_dir"] = opt.out_dir;
  if (!cfg.contains("output_dir")) cfg["output_dir"] = ".";
  return cfg;
}

template <class T>
T get_required(const json& cfg, const std::string& key) {
  if (!cfg.contains(key))
    throw ergolab::ConfigError("missing config key '" + key + "'");
  try {
    return cfg.at(key).get<T>();
  } catch (const json::exception&) {
    throw ergolab::ConfigError("config key '" + key + "' has the wrong type");
  }
}

fs::path ensure_out_dir(const json& cfg) {
  fs::path dir = cfg.at("output_dir").get<std::string>();
  fs::create_directories(dir);
  return dir;
}

ergolab::CircleMap map_from_config(const json& cfg) {
  if (!cfg.contains("map")) throw ergolab::ConfigError("missing config key 'map'");
  return ergolab::parse_map_spec(cfg.at("map"));
}

// x0 is either a number or the string "random" (seeded typical draw).
ergolab::InitialCondition initial_from_config(const json& cfg, std::uint64_t seed) {
  if (!cfg.contains("x0")) throw ergolab::ConfigError("missing config key 'x0'");
  const json& x0 = cfg.at("x0");
  if (x0.is_number()) return ergolab::InitialCondition::point(x0.get<double>());
  if (x0.is_string() && x0.get<std::string>() == "random")
    return ergolab::InitialCondition::seeded(seed);
  throw ergolab::ConfigError("x0 must be a number or \"random\"");
}

json provenance(const json& cfg, const ergolab::CircleMap& map) {
  json p = cfg;
  p["map"] = ergolab::map_spec_json(map);  // resolved, including defaults
  return p;
}

int run_simulate(const CommonOptions& opt) {
  json cfg = load_config(opt, {"map", "x0", "n", "burn_in", "grid_k", "seed",
                               "output_dir"});
  auto map = map_from_config(cfg);
  auto n = get_required<std::size_t>(cfg, "n");
  auto burn_in = cfg.value("burn_in", std::size_t{0});
  auto grid_k = cfg.value("grid_k", std::size_t{256});
  auto seed = cfg.at("seed").get<std::uint64_t>();
  cfg["burn_in"] = burn_in;
  cfg["grid_k"] = grid_k;
  auto ic = initial_from_config(cfg, seed);
  if (n < 1) throw ergolab::ConfigError("n must be >= 1");

  ergolab::OrbitStream os(map, ic);
  os.skip(burn_in);
  std::vector<double> counts(grid_k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    counts[ergolab::grid_cell(os.next(), grid_k)] += 1.0;
  for (double& c : counts) c /= static_cast<double>(n);
  auto hist = ergolab::make_grid(grid_k, std::move(counts));

  fs::path dir = ensure_out_dir(cfg);
  json prov = provenance(cfg, map);
  ergolab::write_grid_csv(dir / "histogram.csv", hist, prov);
  json doc{{"type", "simulate"},
           {"config", prov},
           {"histogram", ergolab::grid_json(hist)}};
  ergolab::write_json_file(dir / "simulate.json", doc);
  std::cout << "simulate: wrote " << (dir / "histogram.csv").string() << " and "
            << (dir / "simulate.json").string() << "\n";
  return 0;
}

int run_entropy(const CommonOptions& opt) {
  json cfg = load_config(opt, {"map", "x0", "n", "burn_in", "q_max", "base_k",
                               "offset", "exact_measure", "seed", "output_dir"});
  auto map = map_from_config(cfg);
  auto n = get_required<std::size_t>(cfg, "n");
  auto burn_in = cfg.value("burn_in", std::size_t{0});
  auto seed = cfg.at("seed").get<std::uint64_t>();
  auto base_k = cfg.value("base_k", std::size_t{0});
  auto offset = cfg.value("offset", 0.0);
  bool exact = cfg.value("exact_measure", false);
  auto q_max = cfg.value("q_max", std::size_t{0});
  if (q_max == 0) q_max = ergolab::auto_q_max(map.degree(), n);
  cfg["burn_in"] = burn_in;
  cfg["q_max"] = q_max;
  cfg["base_k"] = base_k;
  cfg["offset"] = offset;
  cfg["exact_measure"] = exact;
  auto ic = initial_from_config(cfg, seed);

  ergolab::EmpiricalMeasure mu =
      ic.kind == ergolab::InitialCondition::Kind::point
          ? ergolab::empirical_measure(map, ic.x0, n, burn_in)
          : ergolab::seeded_empirical_measure(map, seed, n, burn_in);
  ergolab::Partition base = base_k == 0 ? ergolab::branch_partition(map)
                                        : ergolab::make_partition(base_k, offset);
  auto kind = exact ? ergolab::MeasureKind::exact : ergolab::MeasureKind::monte_carlo;
  auto est = ergolab::entropy_estimate(map, mu, base, q_max, kind);
  auto rep = ergolab::pesin_residual(map, mu, est);

  fs::path dir = ensure_out_dir(cfg);
  json prov = provenance(cfg, map);
  json doc = ergolab::pesin_json(rep);
  doc["type"] = "pesin_report";
  doc["config"] = prov;
  doc["map"] = ergolab::map_spec_json(map);
  doc["measure_provenance"] = json{{"x0", cfg.at("x0")},
                                   {"n", n},
                                   {"burn_in", burn_in},
                                   {"seed", seed}};
  ergolab::write_json_file(dir / "pesin.json", doc);
  std::cout << "entropy: lyapunov=" << rep.lyapunov
            << " entropy_est=" << rep.entropy_est << " residual=" << rep.residual
            << "\n";
  return 0;
}

int run_ulam(const CommonOptions& opt) {
  json cfg = load_config(opt, {"map", "k", "samples_per_cell", "seed", "output_dir"});
  auto map = map_from_config(cfg);
  auto k = get_required<std::size_t>(cfg, "k");
  auto samples = cfg.value("samples_per_cell", std::size_t{256});
  cfg["samples_per_cell"] = samples;
  if (k < 16) throw ergolab::ConfigError("ulam: k must be >= 16");

  auto matrix = ergolab::ulam_matrix(map, k, samples, opt.threads);
  auto pi = ergolab::stationary_measure(matrix);
  auto est = ergolab::pressure_from_stationary(map, matrix, pi);

  fs::path dir = ensure_out_dir(cfg);
  json prov = provenance(cfg, map);
  ergolab::write_matrix_csv(dir / "ulam_matrix.csv", matrix, prov);
  ergolab::write_grid_csv(dir / "stationary.csv", pi, prov);
  json doc = ergolab::pressure_json(est);
  doc["type"] = "pressure_estimate";
  doc["config"] = prov;
  ergolab::write_json_file(dir / "pressure.json", doc);
  std::cout << "ulam: k=" << k << " pressure=" << est.pressure << "\n";
  return 0;
}

int run_srb_scan(const CommonOptions& opt) {
  json cfg = load_config(opt, {"map", "sample_count", "n", "grid_k",
                               "epsilon_cluster", "q_max", "flag_threshold",
                               "ulam_k", "seed", "output_dir"});
  auto map = map_from_config(cfg);
  auto sample_count = get_required<std::size_t>(cfg, "sample_count");
  auto n = get_required<std::size_t>(cfg, "n");
  auto grid_k = cfg.value("grid_k", std::size_t{256});
  auto eps = cfg.value("epsilon_cluster", 0.05);
  auto q_max = cfg.value("q_max", std::size_t{0});
  auto flag_threshold = cfg.value("flag_threshold", 0.1);
  auto ulam_k = cfg.value("ulam_k", std::size_t{0});
  auto seed = cfg.at("seed").get<std::uint64_t>();
  cfg["grid_k"] = grid_k;
  cfg["epsilon_cluster"] = eps;
  cfg["q_max"] = q_max;
  cfg["flag_threshold"] = flag_threshold;
  cfg["ulam_k"] = ulam_k;

  auto report = ergolab::srb_like_candidates(map, sample_count, n, grid_k, eps,
                                             seed, q_max, flag_threshold,
                                             opt.threads);
  fs::path dir = ensure_out_dir(cfg);
  json prov = provenance(cfg, map);
  json doc = ergolab::srb_report_json(report);
  doc["type"] = "srb_like_report";
  doc["config"] = prov;
  doc["map"] = ergolab::map_spec_json(map);
  if (ulam_k >= 16) {
    auto est = ergolab::pressure_estimate(map, ulam_k, 256, opt.threads);
    doc["ulam"] = ergolab::pressure_json(est);
  }
  ergolab::write_json_file(dir / "srb_report.json", doc);
  std::cout << "srb-scan: " << report.candidates.size() << " candidate(s), "
            << report.non_convergent << " non-convergent sample(s)\n";
  return 0;
}

int run_decay(const CommonOptions& opt) {
  json cfg = load_config(opt, {"map", "r", "epsilon", "n_list", "sample_count",
                               "reference", "reference_k", "seed", "output_dir"});
  auto map = map_from_config(cfg);
  auto r = get_required<double>(cfg, "r");
  auto epsilon = get_required<double>(cfg, "epsilon");
  auto n_list = get_required<std::vector<std::size_t>>(cfg, "n_list");
  auto sample_count = get_required<std::size_t>(cfg, "sample_count");
  auto reference = cfg.value("reference", std::string("ulam"));
  auto reference_k = cfg.value("reference_k", std::size_t{256});
  auto seed = cfg.at("seed").get<std::uint64_t>();
  cfg["reference"] = reference;
  cfg["reference_k"] = reference_k;
  if (n_list.empty()) throw ergolab::ConfigError("decay: n_list is empty");
  if (!(r > 0.0) || !(epsilon > 0.0) || epsilon >= r / 2.0)
    throw ergolab::ConfigError("decay: need 0 < epsilon < r/2");

  ergolab::GridMeasure ref = ergolab::uniform_grid(reference_k);
  if (reference == "ulam") {
    auto matrix = ergolab::ulam_matrix(map, reference_k, 256, opt.threads);
    ref = ergolab::stationary_measure(matrix);
  } else if (reference != "lebesgue") {
    throw ergolab::ConfigError("decay: reference must be \"ulam\" or \"lebesgue\"");
  }

  auto points = ergolab::deviation_decay(map, ref, r, epsilon, n_list,
                                         sample_count, seed, opt.threads);
  fs::path dir = ensure_out_dir(cfg);
  json prov = provenance(cfg, map);
  ergolab::write_decay_csv(dir / "decay.csv", points, prov);
  json rows = json::array();
  for (const auto& p : points)
    rows.push_back(json{{"n", p.n}, {"fraction", p.fraction}, {"bound", p.bound}});
  json doc{{"type", "decay"}, {"config", prov}, {"points", rows}};
  ergolab::write_json_file(dir / "decay.json", doc);
  std::cout << "decay: final fraction=" << points.back().fraction << "\n";
  return 0;
}

// Merges prior artifacts into one summary JSON plus a combined plot-ready CSV
// of every decay curve found among the inputs.
int run_report(const CommonOptions& opt) {
  json cfg = load_config(opt, {"inputs", "seed", "output_dir"});
  auto inputs = get_required<std::vector<std::string>>(cfg, "inputs");
  if (inputs.empty()) throw ergolab::ConfigError("report: inputs is empty");

  json entries = json::array();
  std::string decay_rows;
  for (const auto& input : inputs) {
    fs::path path(input);
    if (!fs::exists(path)) throw ergolab::ConfigError("report: missing input " + input);
    json entry{{"path", input}};
    if (path.extension() == ".json") {
      json doc = ergolab::read_json_file(path);
      entry["kind"] = doc.value("type", std::string("unknown"));
      for (const auto& key :
           {"pressure", "residual", "entropy_est", "lyapunov", "markov_entropy"}) {
        if (doc.contains(key) && doc[key].is_number())
          entry[key] = doc[key].get<double>();
      }
      if (doc.contains("candidates"))
        entry["candidates"] = doc["candidates"].size();
    } else {
      std::ifstream in(path, std::ios::binary);
      std::string line;
      std::string kind = "csv";
      std::size_t rows = 0;
      bool decay = false;
      while (std::getline(in, line)) {
        if (line.rfind("# ergolab ", 0) == 0) {
          kind = line.substr(10);
          decay = kind == "decay_curve";
        } else if (!line.empty() && line[0] != '#' &&
                   line.find(',') != std::string::npos &&
                   (std::isdigit(static_cast<unsigned char>(line[0])) != 0)) {
          ++rows;
          if (decay) decay_rows += input + "," + line + "\n";
        }
      }
      entry["kind"] = kind;
      entry["rows"] = rows;
    }
    entries.push_back(entry);
  }

  fs::path dir = ensure_out_dir(cfg);
  json doc{{"type", "report"}, {"config", cfg}, {"inputs", entries}};
  ergolab::write_json_file(dir / "summary.json", doc);
  ergolab::write_text_file(dir / "decay_curves.csv",
                           "source,n,fraction,analytic_bound\n" + decay_rows);
  std::cout << "report: summarized " << inputs.size() << " input(s)\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ergolab: numerical experiments on expanding circle maps"};
  app.require_subcommand(1);

  CommonOptions opts[6];
  auto* simulate = app.add_subcommand("simulate", "orbit histogram of one initial state");
  auto* entropy = app.add_subcommand("entropy", "partition entropy and Lyapunov residual");
  auto* ulam = app.add_subcommand("ulam", "transfer-operator discretization and pressure");
  auto* srb_scan = app.add_subcommand("srb-scan", "cluster terminal empirical measures");
  auto* decay = app.add_subcommand("decay", "deviation fractions against a reference");
  auto* report = app.add_subcommand("report", "merge prior outputs into a summary");
  add_common(simulate, opts[0]);
  add_common(entropy, opts[1]);
  add_common(ulam, opts[2]);
  add_common(srb_scan, opts[3]);
  add_common(decay, opts[4]);
  add_common(report, opts[5]);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (simulate->parsed()) return run_simulate(opts[0]);
    if (entropy->parsed()) return run_entropy(opts[1]);
    if (ulam->parsed()) return run_ulam(opts[2]);
    if (srb_scan->parsed()) return run_srb_scan(opts[3]);
    if (decay->parsed()) return run_decay(opts[4]);
    if (report->parsed()) return run_report(opts[5]);
  } catch (const ergolab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ergolab::BadParams& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ergolab::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ergolab::json::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ergolab::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
