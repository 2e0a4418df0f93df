// qdet — survival and first-detection statistics of a quantum particle on a
// lattice under repeated projective measurements.
//
// Subcommands: run, compare, fit, meanfield, graph-check.
// Exit codes: 0 ok, 2 config error, 3 numerical-consistency failure,
// 4 tolerance exceeded in compare.

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <thread>

#include "qdet/absorbing.hpp"
#include "qdet/experiment.hpp"
#include "qdet/meanfield.hpp"
#include "qdet/series_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTolerance = 4;

// Precedence: --out flag, then QDET_OUT_DIR, then the config's [output] dir.
void apply_output_override(qdet::ExperimentConfig& cfg,
                           const std::string& out_flag) {
  if (!out_flag.empty()) {
    cfg.output_dir = out_flag;
    return;
  }
  if (const char* env = std::getenv("QDET_OUT_DIR"); env && *env)
    cfg.output_dir = env;
}

std::vector<fs::path> collect_configs(const std::vector<std::string>& args) {
  std::vector<fs::path> files;
  for (const auto& arg : args) {
    fs::path p(arg);
    if (fs::is_directory(p)) {
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.path().extension() == ".cfg") files.push_back(entry.path());
    } else {
      files.push_back(p);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

int run_one(const fs::path& path, const std::string& out_flag) {
  qdet::ExperimentConfig cfg = qdet::parse_config_file(path);
  apply_output_override(cfg, out_flag);
  const qdet::RunResult result = qdet::run(cfg);
  // Batch workers share the streams; emit each experiment in one write.
  std::string warnings, files;
  for (const auto& warning : result.warnings)
    warnings += cfg.name + ": warning: " + warning + '\n';
  for (const auto& file : result.files) files += file.string() + '\n';
  std::cerr << warnings;
  std::cout << files;
  return kExitOk;
}

int cmd_run(const std::vector<std::string>& config_args,
            const std::string& out_flag, int jobs) {
  const auto files = collect_configs(config_args);
  if (files.empty()) throw qdet::ConfigError("no config files found");
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || files.size() == 1) {
    int status = kExitOk;
    for (const auto& f : files) status = std::max(status, run_one(f, out_flag));
    return status;
  }

  // Batch mode: experiments are independent and their outputs are
  // experiment-scoped, so a simple worker pool is safe.
  std::atomic<std::size_t> next{0};
  std::atomic<int> status{kExitOk};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= files.size()) return;
      try {
        run_one(files[i], out_flag);
      } catch (const qdet::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        status.store(kExitConfig);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        status.store(kExitNumerical);
      }
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < std::min<int>(jobs, static_cast<int>(files.size())); ++i)
    pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  return status.load();
}

int cmd_compare(const std::vector<std::string>& config_args,
                const std::string& engines_arg, double tolerance,
                bool has_tolerance, const std::string& out_file) {
  if (config_args.empty() || config_args.size() > 2)
    throw qdet::ConfigError("compare takes one or two --config files");
  qdet::ExperimentConfig cfg_a = qdet::parse_config_file(config_args[0]);
  qdet::ExperimentConfig cfg_b =
      config_args.size() == 2 ? qdet::parse_config_file(config_args[1])
                              : cfg_a;

  qdet::Engine engine_a, engine_b;
  if (!engines_arg.empty()) {
    const auto comma = engines_arg.find(',');
    if (comma == std::string::npos)
      throw qdet::ConfigError("--engines takes 'a,b'");
    engine_a = qdet::engine_from_name(engines_arg.substr(0, comma));
    engine_b = qdet::engine_from_name(engines_arg.substr(comma + 1));
  } else if (config_args.size() == 2) {
    engine_a = cfg_a.engines.at(0);
    engine_b = cfg_b.engines.at(0);
  } else if (cfg_a.engines.size() == 2) {
    engine_a = cfg_a.engines[0];
    engine_b = cfg_a.engines[1];
  } else {
    throw qdet::ConfigError(
        "pass --engines a,b or a config with exactly two engines");
  }

  const auto outcome = qdet::compare_engines(
      cfg_a, engine_a, cfg_b, engine_b,
      has_tolerance ? std::optional<double>(tolerance) : std::nullopt);
  const std::string text = qdet::comparison_json(outcome);
  if (out_file.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(out_file);
    if (!out) throw qdet::ConfigError("cannot write " + out_file);
    out << text << '\n';
    std::cout << out_file << '\n';
  }
  return outcome.passed ? kExitOk : kExitTolerance;
}

int cmd_fit(const std::string& csv, double t_min, double t_max,
            double plateau, double plateau_tail, bool exponential,
            const std::string& out_file) {
  const qdet::SurvivalSeries series = qdet::read_survival_csv(fs::path(csv));
  double base = plateau;
  if (plateau_tail >= 0.0)
    base = qdet::estimate_plateau(series, plateau_tail).value;
  const qdet::FitWindow window{t_min, t_max};
  const std::string text =
      exponential
          ? qdet::fit_json(qdet::fit_exponential(series, window, base), base)
          : qdet::fit_json(qdet::fit_power_law(series, window, base), base);
  if (out_file.empty()) {
    std::cout << text << '\n';
  } else {
    std::ofstream out(out_file);
    if (!out) throw qdet::ConfigError("cannot write " + out_file);
    out << text << '\n';
    std::cout << out_file << '\n';
  }
  return kExitOk;
}

int cmd_meanfield(int n, double tau, int ell, long n_max,
                  const std::string& csv_file) {
  const qdet::MeanFieldSolution sol = qdet::mf_solve(n, tau);
  json j{{"n", n},
         {"tau", tau},
         {"ell", ell},
         {"x", sol.x},
         {"xi", sol.xi},
         {"lambda2", {sol.lambda2.real(), sol.lambda2.imag()}},
         {"resonant", sol.resonant},
         {"total_detection", qdet::mf_total_detection(n, ell)}};
  if (ell != n)
    j["steady_state_norm_sq"] = qdet::mf_steady_state(n, ell).norm_sq;
  if (!csv_file.empty()) {
    qdet::write_survival_csv(fs::path(csv_file),
                             qdet::mf_series(sol, ell, n_max));
    j["csv"] = csv_file;
  }
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

int cmd_graph_check(const std::string& path) {
  const qdet::Lattice lat = qdet::load_graph(fs::path(path));
  long edges = 0;
  const auto& m = lat.hamiltonian.matrix;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i; j < m.cols(); ++j)
      if (m(i, j) != 0.0) ++edges;
  std::vector<int> detected;
  for (int idx : lat.detectors.detected)
    detected.push_back(qdet::site_label(idx));
  json j{{"sites", lat.hamiltonian.n_sites()},
         {"edges", edges},
         {"detected", detected},
         {"symmetric", m.isApprox(m.transpose())}};
  std::cout << j.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Survival and first-detection statistics of a quantum particle on a "
      "lattice under repeated projective measurements"};
  app.require_subcommand(1);

  // run
  auto* run = app.add_subcommand(
      "run", "Run the engines of one or more experiment configs");
  std::vector<std::string> run_configs;
  std::string run_out;
  int run_jobs = 1;
  run->add_option("--config", run_configs,
                  "Config file or directory of .cfg files")
      ->required();
  run->add_option("--out", run_out, "Override the output directory");
  run->add_option("--jobs", run_jobs, "Concurrent experiments in batch mode");

  // compare
  auto* compare = app.add_subcommand(
      "compare", "Compare two engines on sample-aligned grids");
  std::vector<std::string> cmp_configs;
  std::string cmp_engines, cmp_out;
  double cmp_tolerance = 0.0;
  compare->add_option("--config", cmp_configs, "One or two config files")
      ->required();
  compare->add_option("--engines", cmp_engines, "Engine pair, e.g. "
                                                "'exact,absorbing'");
  auto* tol_opt = compare->add_option(
      "--tolerance", cmp_tolerance,
      "Exit with status 4 if max_rel_err exceeds this");
  compare->add_option("--out", cmp_out, "Write the report JSON here");

  // fit
  auto* fit = app.add_subcommand("fit", "Fit a power law (or exponential) "
                                        "to a survival CSV");
  std::string fit_csv, fit_out;
  double fit_tmin = 0.0, fit_tmax = 0.0, fit_plateau = 0.0,
         fit_ptail = -1.0;
  bool fit_exp = false;
  fit->add_option("--csv", fit_csv, "Survival CSV (n,t,P,p)")->required();
  fit->add_option("--t-min", fit_tmin, "Window start")->required();
  fit->add_option("--t-max", fit_tmax, "Window end")->required();
  fit->add_option("--plateau", fit_plateau, "Subtract this plateau");
  fit->add_option("--plateau-tail", fit_ptail,
                  "Estimate the plateau from this trailing fraction");
  fit->add_flag("--exponential", fit_exp, "Fit exp(-rate t) instead");
  fit->add_option("--out", fit_out, "Write the fit JSON here");

  // meanfield
  auto* mf = app.add_subcommand(
      "meanfield", "Closed-form complete-graph solution and series");
  int mf_n = 5, mf_ell = 1;
  double mf_tau = 0.3;
  long mf_nmax = 100;
  std::string mf_csv;
  mf->add_option("--n", mf_n, "Number of sites")->required();
  mf->add_option("--tau", mf_tau, "Measurement interval")->required();
  mf->add_option("--ell", mf_ell, "Initial site (1-based; n = detector)");
  mf->add_option("--n-max", mf_nmax, "Series length");
  mf->add_option("--out", mf_csv, "Write the series CSV here");

  // graph-check
  auto* gc = app.add_subcommand("graph-check",
                                "Parse and validate a graph file");
  std::string gc_path;
  gc->add_option("graph", gc_path, "Graph file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_configs, run_out, run_jobs);
    if (*compare)
      return cmd_compare(cmp_configs, cmp_engines, cmp_tolerance,
                         tol_opt->count() > 0, cmp_out);
    if (*fit)
      return cmd_fit(fit_csv, fit_tmin, fit_tmax, fit_plateau, fit_ptail,
                     fit_exp, fit_out);
    if (*mf) return cmd_meanfield(mf_n, mf_tau, mf_ell, mf_nmax, mf_csv);
    if (*gc) return cmd_graph_check(gc_path);
  } catch (const qdet::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const qdet::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}
