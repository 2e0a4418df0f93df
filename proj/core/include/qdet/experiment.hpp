// experiment.hpp — experiment configs and the run/compare orchestration
// behind the CLI: parse a config file, dispatch to the requested engines,
// emit CSV/JSON artifacts.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qdet/analysis.hpp"
#include "qdet/dynamics.hpp"
#include "qdet/lattice.hpp"

namespace qdet {

enum class Engine { exact, effective, analytic, meanfield, absorbing };

const char* engine_name(Engine e);
Engine engine_from_name(const std::string& name);

struct InitialState {
  enum class Kind { position, position2d, eigenstate, file };
  Kind kind = Kind::position;
  int site = 1;    // 1-based label (or lx for position2d)
  int site_y = 0;  // ly for position2d
  int mode = 1;    // eigenstate: 1-based index into the H_S spectrum
  std::filesystem::path path;
};

struct FitSpec {
  bool enabled = false;
  FitWindow window;
  double plateau = 0.0;
  double plateau_tail = -1.0;  // >= 0: estimate the plateau from the tail
  bool exponential = false;
};

struct ExperimentConfig {
  std::string name;  // artifact basename; defaults to the config file stem
  LatticeSpec lattice;
  std::filesystem::path graph;  // geometry = custom only
  double tau = 0.1;
  long n_max = 1000;
  InitialState initial;
  std::vector<Engine> engines;
  std::vector<long> snapshots;
  std::filesystem::path output_dir = ".";
  std::optional<double> gamma_big;  // absorbing engine: override for Gamma
  FitSpec fit;
};

// Config file: '#' comments, "key = value" lines grouped under [section]
// headers. Errors name the file, line and field. See the README for the
// full key list.
ExperimentConfig parse_config(std::istream& in,
                              const std::string& display_name);
ExperimentConfig parse_config_file(const std::filesystem::path& path);

// Throws ConfigError on anything run() could not execute.
void validate(const ExperimentConfig& cfg);

// One engine, no file output.
SurvivalSeries run_engine(const ExperimentConfig& cfg, Engine engine);

struct RunResult {
  std::map<Engine, SurvivalSeries> series;
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;
};

// Runs every configured engine and writes one survival CSV per engine,
// snapshot CSVs when requested, fit JSONs when [fit] is present, and a
// comparison JSON of every engine against the first one. Outputs are
// deterministic; partial files are removed if anything fails.
RunResult run(const ExperimentConfig& cfg);

struct CompareOutcome {
  Engine engine_a;
  Engine engine_b;
  ComparisonReport report;
  std::optional<double> tolerance;
  bool passed = true;  // false when a tolerance was given and exceeded
  std::vector<std::string> warnings;
};

CompareOutcome compare_engines(const ExperimentConfig& cfg_a, Engine a,
                               const ExperimentConfig& cfg_b, Engine b,
                               std::optional<double> tolerance);

std::string comparison_json(const CompareOutcome& outcome);
std::string fit_json(const PowerLawFit& fit, double plateau);
std::string fit_json(const ExponentialFit& fit, double plateau);

}  // namespace qdet
