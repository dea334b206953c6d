// tkmerge command-line tool: fit / monitor / simulate / bench / eval.
//
// Exit codes: 0 ok, 2 input error, 3 algorithmic failure, 4 config error.

#include "tkmerge/csv.hpp"
#include "tkmerge/datagen.hpp"
#include "tkmerge/metrics.hpp"
#include "tkmerge/monitor.hpp"
#include "tkmerge/pipeline.hpp"
#include "tkmerge/rng.hpp"

#include "svg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace tkmerge;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
}

// Runs fn(0..count-1) on up to `jobs` threads; results must go into
// preallocated per-index slots. Rethrows the first failure.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, std::min(jobs, count));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

struct CommonOpts {
  std::string out_dir = "tkmerge_out";
  std::uint64_t seed = 0;
  int n_starts = 20;
  int max_iter = 100;
  double tol = 1e-8;
  int jobs = 1;
  bool svg = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("-o,--out", o.out_dir, "Output directory");
  cmd->add_option("--seed", o.seed, "RNG seed");
  cmd->add_option("--n-starts", o.n_starts, "Restarts per fit");
  cmd->add_option("--max-iter", o.max_iter, "Concentration step limit");
  cmd->add_option("--tol", o.tol, "Relative convergence tolerance");
  cmd->add_option("--jobs", o.jobs, "Parallel replications (timings need --jobs 1)");
  cmd->add_flag("--svg", o.svg, "Also write static SVG plots");
}

json common_echo(const CommonOpts& o) {
  return {{"out", o.out_dir},   {"seed", o.seed}, {"n_starts", o.n_starts},
          {"max_iter", o.max_iter}, {"tol", o.tol},   {"jobs", o.jobs},
          {"svg", o.svg}};
}

fs::path prepare_out_dir(const CommonOpts& o) {
  fs::path dir(o.out_dir);
  fs::create_directories(dir);
  return dir;
}

// Methods compared throughout the benchmark commands.
struct MethodSetup {
  int K = 1;
  int k = 1;              // inflated components for the merge pipeline
  double alpha = 0.0;
  double r_tclust = 1000;  // liberal factor for standalone TCLUST runs
};

MethodSetup scenario_setup(ScenarioId id, const SyntheticDataset& ds) {
  MethodSetup s;
  s.K = ds.truth.k_groups;
  const std::int64_t total = static_cast<std::int64_t>(ds.truth.labels.size());
  std::int64_t m = 0;
  for (int l : ds.truth.labels) m += (l == 0);
  if (id == ScenarioId::s1 || id == ScenarioId::s2) {
    s.k = 2 * s.K;
    s.alpha = static_cast<double>(m) / static_cast<double>(total);
  } else {
    s.k = std::max(s.K + 1, default_k(total, KHeuristic::two_K_log_n, s.K));
    s.alpha = recommended_alpha(m, total - m);
  }
  const std::int64_t keep = retained_count(total, s.alpha);
  s.k = static_cast<int>(std::min<std::int64_t>(s.k, keep));
  return s;
}

struct MethodRun {
  std::string method;
  int rep = 0;
  double ari_value = 0.0;
  double seconds = 0.0;
  std::vector<int> labels;
};

// tk-merge, tk-means and TCLUST on one dataset with shared settings.
std::vector<MethodRun> run_methods(const SyntheticDataset& ds, const MethodSetup& setup,
                                   const CommonOpts& o, int rep, std::uint64_t rep_seed) {
  std::vector<MethodRun> rows;

  FitConfig cfg;
  cfg.K = setup.K;
  cfg.k = setup.k;
  cfg.alpha = setup.alpha;
  cfg.n_starts = o.n_starts;
  cfg.max_iter = o.max_iter;
  cfg.tol = o.tol;
  cfg.seed = rep_seed;

  {
    const PipelineResult res = fit_tk_merge(ds.data, cfg);
    rows.push_back({"tkmerge", rep, ari(res.final_partition, ds.truth), res.wall_time_s,
                    res.final_partition.labels});
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const TkmFit fit =
        fit_tkmeans(ds.data, setup.K, setup.alpha, o.n_starts, o.max_iter, o.tol, rep_seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({"tkmeans", rep, ari(fit.partition, ds.truth), secs, fit.partition.labels});
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    const TclustFit fit = fit_tclust(ds.data, setup.K, setup.alpha, setup.r_tclust, o.n_starts,
                                     o.max_iter, o.tol, rep_seed);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back({"tclust", rep, ari(fit.partition, ds.truth), secs, fit.partition.labels});
  }
  return rows;
}

double percentage_gain(double t_i, double t_tclust) {
  return std::abs(t_i - t_tclust) / t_tclust * 100.0;
}

// ---------------------------------------------------------------- fit ----

struct FitOpts {
  std::string input;
  std::string method = "tkm";
  int K = 0;
  int k = 0;
  std::string k_heuristic;
  double alpha = 0.0;
  double r = -1.0;  // resolved by method when unset
  std::string linkage = "single";
  std::string metric = "euclid";
  int n_mc = 10000;
  CommonOpts common;
};

int cmd_fit(const FitOpts& opt) {
  const DataMatrix data = read_csv(opt.input);
  const auto warnings = validate_data(data);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';

  if (opt.K < 1) throw ConfigError("--K must be >= 1");
  if ((opt.k > 0) == !opt.k_heuristic.empty()) {
    throw ConfigError("exactly one of --k or --k-heuristic is required");
  }

  FitConfig cfg;
  cfg.K = opt.K;
  cfg.alpha = opt.alpha;
  cfg.metric = parse_metric(opt.metric);
  cfg.linkage = parse_linkage(opt.linkage);
  cfg.n_starts = opt.common.n_starts;
  cfg.max_iter = opt.common.max_iter;
  cfg.tol = opt.common.tol;
  cfg.seed = opt.common.seed;
  cfg.n_mc = opt.n_mc;

  const bool is_tc = opt.method == "tc";
  if (!is_tc && opt.method != "tkm") throw ConfigError("--method must be tkm or tc");
  cfg.r = opt.r > 0 ? opt.r : (is_tc ? 64.0 : 1.0);
  if (!is_tc) cfg.r = 1.0;

  std::string k_note;
  if (opt.k > 0) {
    cfg.k = opt.k;
  } else {
    cfg.k = std::max(opt.K + 1,
                     default_k(data.n(), parse_k_heuristic(opt.k_heuristic), opt.K));
    const std::int64_t keep = retained_count(data.n(), cfg.alpha);
    if (cfg.k > keep) {
      cfg.k = static_cast<int>(keep);
      k_note = "k clamped to the retained count";
    }
  }

  const fs::path dir = prepare_out_dir(opt.common);
  const PipelineResult res = is_tc ? fit_tc_merge(data, cfg) : fit_tk_merge(data, cfg);
  const bool used_tkm_branch = std::holds_alternative<TkmFit>(res.first_step);

  write_labels((dir / "labels.csv").string(), res.final_partition.labels);
  write_csv((dir / "centroids.csv").string(), res.first_step_model().centroids);
  write_dendrogram((dir / "dendrogram.txt").string(), res.merge.dendrogram);

  const ClusterModel& model = res.first_step_model();
  json mj;
  mj["method"] = opt.method;
  mj["first_step"] = used_tkm_branch ? "tkmeans" : "tclust";
  mj["n"] = data.n();
  mj["p"] = data.p();
  mj["K"] = cfg.K;
  mj["k"] = cfg.k;
  mj["alpha"] = cfg.alpha;
  mj["r"] = cfg.r;
  mj["metric"] = to_string(cfg.metric);
  mj["linkage"] = to_string(cfg.linkage);
  mj["seed"] = cfg.seed;
  if (used_tkm_branch) {
    const TkmFit& fit = std::get<TkmFit>(res.first_step);
    mj["objective"] = fit.objective;
    mj["iterations"] = fit.iterations;
    mj["converged"] = fit.converged;
  } else {
    const TclustFit& fit = std::get<TclustFit>(res.first_step);
    mj["log_objective"] = fit.log_objective;
    mj["iterations"] = fit.iterations;
    mj["converged"] = fit.converged;
  }
  mj["centroids"] = matrix_to_json(model.centroids);
  json covs = json::array();
  for (const auto& c : model.covariances) covs.push_back(matrix_to_json(c));
  mj["covariances"] = std::move(covs);
  mj["sizes"] = model.sizes;
  json weights = json::array();
  for (Eigen::Index j = 0; j < model.weights.size(); ++j) weights.push_back(model.weights(j));
  mj["weights"] = std::move(weights);
  mj["component_to_group"] = res.merge.component_to_group;
  mj["trimmed"] = res.final_partition.trimmed_count();
  mj["wall_time_s"] = res.wall_time_s;
  write_json(dir / "model.json", mj);

  std::ostringstream summary;
  summary << "tkmerge fit\n";
  summary << "input: " << opt.input << " (" << data.n() << " x " << data.p() << ")\n";
  for (const auto& w : warnings) summary << "warning: " << w << "\n";
  summary << "method: " << opt.method;
  if (is_tc && cfg.r == 1.0) summary << " (r = 1 routes to the tk-means branch)";
  summary << "\nfirst step: " << (used_tkm_branch ? "tkmeans" : "tclust") << " with k = " << cfg.k
          << ", alpha = " << cfg.alpha << ", r = " << cfg.r << "\n";
  if (!k_note.empty()) summary << "note: " << k_note << "\n";
  summary << "merge: " << to_string(cfg.metric) << " metric, " << to_string(cfg.linkage)
          << " linkage, cut at K = " << cfg.K << "\n";
  summary << "retained: " << res.final_partition.retained_count() << ", trimmed: "
          << res.final_partition.trimmed_count() << "\n";
  if (used_tkm_branch) {
    summary << "objective: " << format_double(std::get<TkmFit>(res.first_step).objective) << "\n";
  } else {
    summary << "log objective: "
            << format_double(std::get<TclustFit>(res.first_step).log_objective) << "\n";
  }
  summary << "wall time: " << format_double(res.wall_time_s) << " s\n";
  write_text(dir / "summary.txt", summary.str());

  json echo = common_echo(opt.common);
  echo["command"] = "fit";
  echo["input"] = opt.input;
  echo["method"] = opt.method;
  echo["K"] = cfg.K;
  echo["k"] = cfg.k;
  echo["k_heuristic"] = opt.k_heuristic;
  echo["alpha"] = cfg.alpha;
  echo["r"] = cfg.r;
  echo["linkage"] = to_string(cfg.linkage);
  echo["metric"] = to_string(cfg.metric);
  echo["n_mc"] = cfg.n_mc;
  write_json(dir / "config_echo.json", echo);

  if (opt.common.svg && data.p() >= 2) {
    svg::scatter((dir / "partition.svg").string(), data.values, res.final_partition.labels,
                 "tkmerge partition (red = trimmed)");
  }
  std::cout << "wrote " << (dir / "labels.csv").string() << '\n';
  return 0;
}

// ------------------------------------------------------------- monitor ----

struct MonitorOpts {
  std::string input;
  std::string method = "tkm";
  int k = 0;
  std::string k_heuristic;
  double r = -1.0;
  std::string grid;
  double drop_tol = 0.10;
  std::string target = "consecutive";
  CommonOpts common;
};

int cmd_monitor(const MonitorOpts& opt) {
  const DataMatrix data = read_csv(opt.input);
  for (const auto& w : validate_data(data)) std::cerr << "warning: " << w << '\n';

  const MonitorMethod method = parse_monitor_method(opt.method);
  if ((opt.k > 0) == !opt.k_heuristic.empty()) {
    throw ConfigError("exactly one of --k or --k-heuristic is required");
  }
  int k = opt.k;
  if (k <= 0) {
    k = std::max(2, default_k(data.n(), parse_k_heuristic(opt.k_heuristic)));
  }
  const double r = opt.r > 0 ? opt.r : 64.0;

  std::vector<double> grid;
  if (!opt.grid.empty()) {
    std::stringstream ss(opt.grid);
    std::string cell;
    while (std::getline(ss, cell, ',')) grid.push_back(std::stod(cell));
  }

  MonitorTarget target;
  if (opt.target == "consecutive") target = MonitorTarget::consecutive;
  else if (opt.target == "smallest") target = MonitorTarget::vs_smallest_alpha;
  else throw ConfigError("--target must be consecutive or smallest");

  const MonitorTrace trace =
      monitor_alpha(data, k, method, r, grid, opt.common.n_starts, opt.common.max_iter,
                    opt.common.tol, opt.common.seed, opt.drop_tol, target);

  const fs::path dir = prepare_out_dir(opt.common);
  write_text(dir / "trace.csv", trace_to_csv(trace));
  write_text(dir / "best_alpha.txt", format_double(trace.best_alpha) + "\n");
  for (const auto& level : trace.levels) {
    if (!level.ok) continue;
    write_labels((dir / ("labels_alpha_" + format_double(level.alpha) + ".csv")).string(),
                 level.partition.labels);
  }

  json echo = common_echo(opt.common);
  echo["command"] = "monitor";
  echo["input"] = opt.input;
  echo["method"] = opt.method;
  echo["k"] = k;
  echo["k_heuristic"] = opt.k_heuristic;
  echo["r"] = trace.r_used;
  json galpha = json::array();
  for (double a : trace.alphas) galpha.push_back(a);
  echo["grid"] = std::move(galpha);
  echo["drop_tol"] = opt.drop_tol;
  echo["target"] = opt.target;
  echo["best_alpha"] = trace.best_alpha;
  write_json(dir / "config_echo.json", echo);

  if (opt.common.svg) {
    std::vector<double> xs, ys;
    for (std::size_t t = 0; t + 1 < trace.alphas.size(); ++t) {
      xs.push_back(trace.alphas[t]);
      ys.push_back(trace.score_consecutive[t]);
    }
    svg::line_chart((dir / "monitor.svg").string(), xs, ys, "consecutive-level agreement",
                    "alpha", "ARI");
  }
  std::cout << "best alpha: " << format_double(trace.best_alpha) << '\n';
  return 0;
}

// ------------------------------------------------------------ simulate ----

struct SimulateOpts {
  std::string scenario = "s1";
  double scale = 1.0;
  int reps = 3;
  double separation = std::numeric_limits<double>::quiet_NaN();
  CommonOpts common;
};

void write_aggregate(const fs::path& path, const std::vector<MethodRun>& rows) {
  std::ostringstream os;
  os << "method,ari_median,ari_sn,time_median_s,time_sn_s,gain_median_pct,gain_sn_pct\n";
  for (const std::string& method : {"tkmerge", "tkmeans", "tclust"}) {
    std::vector<double> aris, times, gains;
    for (const auto& row : rows) {
      if (row.method != method) continue;
      aris.push_back(row.ari_value);
      times.push_back(row.seconds);
    }
    for (const auto& row : rows) {
      if (row.method != method) continue;
      for (const auto& ref : rows) {
        if (ref.method == "tclust" && ref.rep == row.rep) {
          gains.push_back(percentage_gain(row.seconds, ref.seconds));
        }
      }
    }
    if (aris.empty()) continue;
    const MedianSn ari_s = summarize(aris);
    const MedianSn time_s = summarize(times);
    const MedianSn gain_s = summarize(gains);
    os << method << ',' << format_double(ari_s.median) << ',' << format_double(ari_s.sn) << ','
       << format_double(time_s.median) << ',' << format_double(time_s.sn) << ','
       << format_double(gain_s.median) << ',' << format_double(gain_s.sn) << '\n';
  }
  write_text(path, os.str());
}

int cmd_simulate(const SimulateOpts& opt) {
  if (opt.reps < 1) throw ConfigError("--reps must be >= 1");
  const ScenarioId id = parse_scenario(opt.scenario);
  const fs::path dir = prepare_out_dir(opt.common);

  std::vector<std::vector<MethodRun>> results(opt.reps);
  std::vector<std::string> failures(opt.reps);
  parallel_for(opt.reps, opt.common.jobs, [&](int rep) {
    const std::uint64_t rep_seed = derive_seed(opt.common.seed, static_cast<std::uint64_t>(rep));
    const SyntheticDataset ds = scenario(id, opt.scale, rep_seed, opt.separation);
    write_csv((dir / ("data_rep" + std::to_string(rep) + ".csv")).string(), ds.data.values);
    write_labels((dir / ("truth_rep" + std::to_string(rep) + ".csv")).string(), ds.truth.labels);
    try {
      const MethodSetup setup = scenario_setup(id, ds);
      results[rep] = run_methods(ds, setup, opt.common, rep, rep_seed);
      for (const auto& row : results[rep]) {
        write_labels(
            (dir / ("labels_" + row.method + "_rep" + std::to_string(rep) + ".csv")).string(),
            row.labels);
      }
    } catch (const Error& e) {
      failures[rep] = e.what();  // recorded, run continues
    }
  });

  std::ostringstream os;
  os << "method,rep,ari,seconds,gain_pct\n";
  std::vector<MethodRun> flat;
  for (int rep = 0; rep < opt.reps; ++rep) {
    if (!failures[rep].empty()) {
      std::cerr << "rep " << rep << " failed: " << failures[rep] << '\n';
      continue;
    }
    double t_tclust = 0.0;
    for (const auto& row : results[rep]) {
      if (row.method == "tclust") t_tclust = row.seconds;
    }
    for (const auto& row : results[rep]) {
      os << row.method << ',' << row.rep << ',' << format_double(row.ari_value) << ','
         << format_double(row.seconds) << ',' << format_double(percentage_gain(row.seconds, t_tclust))
         << '\n';
      flat.push_back(row);
    }
  }
  write_text(dir / "results.csv", os.str());
  if (flat.empty()) throw Error("every replication failed");
  write_aggregate(dir / "aggregate.csv", flat);

  json echo = common_echo(opt.common);
  echo["command"] = "simulate";
  echo["scenario"] = opt.scenario;
  echo["scale"] = opt.scale;
  echo["reps"] = opt.reps;
  if (std::isfinite(opt.separation)) echo["separation"] = opt.separation;
  write_json(dir / "config_echo.json", echo);

  if (opt.common.svg) {
    const SyntheticDataset ds = scenario(id, opt.scale, derive_seed(opt.common.seed, 0),
                                         opt.separation);
    svg::scatter((dir / "scenario.svg").string(), ds.data.values, ds.truth.labels,
                 opt.scenario + " example (red = contamination)");
  }
  std::cout << "wrote " << (dir / "aggregate.csv").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------- bench ----

struct BenchOpts {
  std::string scenario = "s1";
  std::string sizes;
  int reps = 3;
  CommonOpts common;
};

int cmd_bench(const BenchOpts& opt) {
  if (opt.reps < 1) throw ConfigError("--reps must be >= 1");
  const ScenarioId id = parse_scenario(opt.scenario);
  std::vector<std::int64_t> sizes;
  {
    std::stringstream ss(opt.sizes);
    std::string cell;
    while (std::getline(ss, cell, ',')) sizes.push_back(std::stoll(cell));
  }
  if (sizes.empty()) throw ConfigError("--sizes requires a comma-separated ascending list");
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (sizes[i] <= sizes[i - 1]) throw ConfigError("--sizes must be strictly ascending");
  }
  double base = 1000.0;
  if (id == ScenarioId::s2) base = 5000.0;
  if (id == ScenarioId::s3a) base = 2000.0;
  if (id == ScenarioId::s3b) base = 9000.0;
  if (id == ScenarioId::s3c) base = 20000.0;

  const fs::path dir = prepare_out_dir(opt.common);
  std::ostringstream os;
  os << "n,method,time_median_s,time_sn_s,gain_median_pct\n";
  for (std::int64_t n : sizes) {
    std::vector<std::vector<MethodRun>> results(opt.reps);
    parallel_for(opt.reps, opt.common.jobs, [&](int rep) {
      const std::uint64_t rep_seed =
          derive_seed(opt.common.seed, static_cast<std::uint64_t>(rep) * 1000 + n % 997);
      const SyntheticDataset ds = scenario(id, static_cast<double>(n) / base, rep_seed);
      results[rep] = run_methods(ds, scenario_setup(id, ds), opt.common, rep, rep_seed);
    });
    for (const std::string& method : {"tkmerge", "tkmeans", "tclust"}) {
      std::vector<double> times, gains;
      for (int rep = 0; rep < opt.reps; ++rep) {
        double t = 0.0, t_tclust = 0.0;
        for (const auto& row : results[rep]) {
          if (row.method == method) t = row.seconds;
          if (row.method == "tclust") t_tclust = row.seconds;
        }
        times.push_back(t);
        gains.push_back(percentage_gain(t, t_tclust));
      }
      const MedianSn time_s = summarize(times);
      os << n << ',' << method << ',' << format_double(time_s.median) << ','
         << format_double(time_s.sn) << ',' << format_double(median_of(gains)) << '\n';
    }
  }
  write_text(dir / "timing.csv", os.str());

  json echo = common_echo(opt.common);
  echo["command"] = "bench";
  echo["scenario"] = opt.scenario;
  echo["sizes"] = opt.sizes;
  echo["reps"] = opt.reps;
  write_json(dir / "config_echo.json", echo);
  std::cout << "wrote " << (dir / "timing.csv").string() << '\n';
  return 0;
}

// ----------------------------------------------------------------- eval ----

int cmd_eval(const std::string& a_path, const std::string& b_path) {
  const std::vector<int> a = read_labels(a_path);
  const std::vector<int> b = read_labels(b_path);
  std::cout << format_double(ari(a, b)) << '\n';
  return 0;
}

// Expands --config file.json into command-line tokens placed before the user
// flags; later duplicates win, so explicit flags override the file.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config requires a file path");
      config_path = args[i + 1];
      args.erase(args.begin() + i, args.begin() + i + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + i);
      break;
    }
  }
  if (config_path.empty()) return args;

  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open config file '" + config_path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config file '" + config_path + "': " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config file must hold a JSON object");

  std::vector<std::string> merged;
  if (!args.empty()) merged.push_back(args[0]);  // subcommand stays first
  for (const auto& [key, value] : j.items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) merged.push_back("--" + key);
    } else if (value.is_string()) {
      merged.push_back("--" + key + "=" + value.get<std::string>());
    } else {
      merged.push_back("--" + key + "=" + value.dump());
    }
  }
  merged.insert(merged.end(), args.begin() + (args.empty() ? 0 : 1), args.end());
  return merged;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust two-step clustering: trimmed first step plus hierarchical merging"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  FitOpts fit_opts;
  CLI::App* fit = app.add_subcommand("fit", "Fit the two-step pipeline to a CSV dataset");
  fit->add_option("input", fit_opts.input, "Numeric CSV (optional single header row)")->required();
  fit->add_option("--method", fit_opts.method, "First step: tkm or tc");
  fit->add_option("--K", fit_opts.K, "Final number of groups")->required();
  fit->add_option("--k", fit_opts.k, "Inflated component count");
  fit->add_option("--k-heuristic", fit_opts.k_heuristic, "2logn, logn or 2Klogn");
  fit->add_option("--alpha", fit_opts.alpha, "Trimming proportion in [0, 0.5]");
  fit->add_option("--r", fit_opts.r, "Eigenvalue-ratio restriction (tc)");
  fit->add_option("--linkage", fit_opts.linkage, "single, complete or average");
  fit->add_option("--metric", fit_opts.metric, "euclid or demp");
  fit->add_option("--n-mc", fit_opts.n_mc, "Monte Carlo draws for demp");
  add_common(fit, fit_opts.common);

  MonitorOpts mon_opts;
  CLI::App* mon = app.add_subcommand("monitor", "Sweep the trimming level and score stability");
  mon->add_option("input", mon_opts.input, "Numeric CSV")->required();
  mon->add_option("--method", mon_opts.method, "First step: tkm or tc");
  mon->add_option("--k", mon_opts.k, "Components to fit at every level");
  mon->add_option("--k-heuristic", mon_opts.k_heuristic, "2logn, logn or 2Klogn");
  mon->add_option("--r", mon_opts.r, "Restriction factor for tc monitoring");
  mon->add_option("--grid", mon_opts.grid, "Descending alphas, e.g. 0.4,0.2,0");
  mon->add_option("--drop-tol", mon_opts.drop_tol, "Stability-break threshold");
  mon->add_option("--target", mon_opts.target, "consecutive or smallest");
  add_common(mon, mon_opts.common);

  SimulateOpts sim_opts;
  CLI::App* sim = app.add_subcommand("simulate", "Replicated synthetic benchmark with ARI table");
  sim->add_option("--scenario", sim_opts.scenario, "s1, s2, s3a, s3b or s3c")->required();
  sim->add_option("--scale", sim_opts.scale, "Size multiple of the scenario base");
  sim->add_option("--reps", sim_opts.reps, "Replications");
  sim->add_option("--separation", sim_opts.separation, "Override scenario separation (s1/s2)");
  add_common(sim, sim_opts.common);

  BenchOpts bench_opts;
  CLI::App* bench = app.add_subcommand("bench", "Timing table across sample sizes");
  bench->add_option("--scenario", bench_opts.scenario, "Scenario to time");
  bench->add_option("--sizes", bench_opts.sizes, "Ascending clean sample sizes")->required();
  bench->add_option("--reps", bench_opts.reps, "Replications per size");
  add_common(bench, bench_opts.common);

  std::string eval_a, eval_b;
  CLI::App* eval = app.add_subcommand("eval", "Print the ARI between two label files");
  eval->add_option("labels_a", eval_a, "First label CSV")->required();
  eval->add_option("labels_b", eval_b, "Second label CSV")->required();

  try {
    const std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> cargs{argv[0]};
    for (const auto& a : args) cargs.push_back(a.c_str());
    app.parse(static_cast<int>(cargs.size()), cargs.data());

    if (*fit) return cmd_fit(fit_opts);
    if (*mon) return cmd_monitor(mon_opts);
    if (*sim) return cmd_simulate(sim_opts);
    if (*bench) return cmd_bench(bench_opts);
    if (*eval) return cmd_eval(eval_a, eval_b);
    return 4;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 4;
  } catch (const CsvParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const AlphaOutOfRange& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const KGreaterThanK& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const GridTooShort& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
