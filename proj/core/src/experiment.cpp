#include "qdet/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <nlohmann/json.hpp>
#include <sstream>

#include "qdet/absorbing.hpp"
#include "qdet/effective.hpp"
#include "qdet/meanfield.hpp"
#include "qdet/series_io.hpp"

namespace qdet {

using nlohmann::json;

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::exact: return "exact";
    case Engine::effective: return "effective";
    case Engine::analytic: return "analytic";
    case Engine::meanfield: return "meanfield";
    case Engine::absorbing: return "absorbing";
  }
  return "?";
}

Engine engine_from_name(const std::string& name) {
  if (name == "exact") return Engine::exact;
  if (name == "effective") return Engine::effective;
  if (name == "analytic") return Engine::analytic;
  if (name == "meanfield") return Engine::meanfield;
  if (name == "absorbing") return Engine::absorbing;
  throw ConfigError("unknown engine '" + name + "'");
}

namespace {

// ---------------------------------------------------------------- parsing

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

struct KeyContext {
  std::string file;
  int line = 0;
  std::string field;

  [[noreturn]] void fail(const std::string& msg) const {
    std::ostringstream os;
    os << file << ":" << line << ": " << field << ": " << msg;
    throw ParseError(os.str(), line);
  }
};

double parse_double(const KeyContext& ctx, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used != v.size()) ctx.fail("trailing characters after number");
    return out;
  } catch (const std::logic_error&) {
    ctx.fail("expected a number, got '" + v + "'");
  }
}

long parse_long(const KeyContext& ctx, const std::string& v) {
  try {
    std::size_t used = 0;
    const long out = std::stol(v, &used);
    if (used != v.size()) ctx.fail("trailing characters after integer");
    return out;
  } catch (const std::logic_error&) {
    ctx.fail("expected an integer, got '" + v + "'");
  }
}

Geometry parse_geometry(const KeyContext& ctx, const std::string& v) {
  if (v == "chain-open") return Geometry::chain_open;
  if (v == "ring") return Geometry::ring;
  if (v == "square-open") return Geometry::square_open;
  if (v == "complete") return Geometry::complete;
  if (v == "custom") return Geometry::custom;
  ctx.fail("unknown geometry '" + v + "'");
}

DetectorLayout parse_layout(const KeyContext& ctx, const std::string& v) {
  DetectorLayout lay;
  const auto colon = v.find(':');
  const std::string head = trim(v.substr(0, colon));
  const std::string arg =
      colon == std::string::npos ? "" : trim(v.substr(colon + 1));
  if (head == "end") {
    lay.kind = DetectorLayout::Kind::end;
  } else if (head == "both-ends") {
    lay.kind = DetectorLayout::Kind::both_ends;
  } else if (head == "block-end") {
    lay.kind = DetectorLayout::Kind::block_end;
    lay.block = static_cast<int>(parse_long(ctx, arg));
  } else if (head == "single") {
    lay.kind = DetectorLayout::Kind::single;
    lay.site = static_cast<int>(parse_long(ctx, arg));
  } else if (head == "explicit") {
    lay.kind = DetectorLayout::Kind::explicit_list;
    for (const auto& tok : split(arg, ','))
      lay.sites.push_back(static_cast<int>(parse_long(ctx, tok)));
    if (lay.sites.empty()) ctx.fail("explicit layout needs site labels");
  } else if (head == "case-i" || head == "case-ii" || head == "case-iii" ||
             head == "case-iv" || head == "case-v") {
    lay.kind = DetectorLayout::Kind::case2d;
    lay.case_id = head == "case-i"     ? 1
                  : head == "case-ii"  ? 2
                  : head == "case-iii" ? 3
                  : head == "case-iv"  ? 4
                                       : 5;
  } else {
    ctx.fail("unknown detector layout '" + v + "'");
  }
  return lay;
}

InitialState parse_initial(const KeyContext& ctx, const std::string& v) {
  InitialState init;
  const auto colon = v.find(':');
  if (colon == std::string::npos)
    ctx.fail("expected position:L, eigenstate:S or file:PATH");
  const std::string head = trim(v.substr(0, colon));
  const std::string arg = trim(v.substr(colon + 1));
  if (head == "position") {
    const auto parts = split(arg, ',');
    if (parts.size() == 1) {
      init.kind = InitialState::Kind::position;
      init.site = static_cast<int>(parse_long(ctx, parts[0]));
    } else if (parts.size() == 2) {
      init.kind = InitialState::Kind::position2d;
      init.site = static_cast<int>(parse_long(ctx, parts[0]));
      init.site_y = static_cast<int>(parse_long(ctx, parts[1]));
    } else {
      ctx.fail("position takes one label or an lx,ly pair");
    }
  } else if (head == "eigenstate") {
    init.kind = InitialState::Kind::eigenstate;
    init.mode = static_cast<int>(parse_long(ctx, arg));
  } else if (head == "file") {
    init.kind = InitialState::Kind::file;
    init.path = arg;
  } else {
    ctx.fail("unknown initial state kind '" + head + "'");
  }
  return init;
}

}  // namespace

ExperimentConfig parse_config(std::istream& in,
                              const std::string& display_name) {
  ExperimentConfig cfg;
  std::string section;
  std::string line;
  int line_no = 0;
  bool saw_engines = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ParseError(display_name + ":" + std::to_string(line_no) +
                             ": unterminated section header",
                         line_no);
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParseError(display_name + ":" + std::to_string(line_no) +
                           ": expected 'key = value'",
                       line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    KeyContext ctx{display_name, line_no,
                   section.empty() ? key : section + "." + key};
    if (value.empty()) ctx.fail("empty value");

    if (section.empty()) {
      if (key == "name")
        cfg.name = value;
      else
        ctx.fail("unknown key");
    } else if (section == "lattice") {
      if (key == "geometry")
        cfg.lattice.geometry = parse_geometry(ctx, value);
      else if (key == "n")
        cfg.lattice.n = static_cast<int>(parse_long(ctx, value));
      else if (key == "gamma")
        cfg.lattice.gamma = parse_double(ctx, value);
      else if (key == "detectors")
        cfg.lattice.layout = parse_layout(ctx, value);
      else if (key == "graph")
        cfg.graph = value;
      else
        ctx.fail("unknown key");
    } else if (section == "run") {
      if (key == "tau")
        cfg.tau = parse_double(ctx, value);
      else if (key == "n_max")
        cfg.n_max = parse_long(ctx, value);
      else if (key == "initial")
        cfg.initial = parse_initial(ctx, value);
      else if (key == "engines") {
        saw_engines = true;
        cfg.engines.clear();
        for (const auto& tok : split(value, ',')) {
          try {
            cfg.engines.push_back(engine_from_name(tok));
          } catch (const ConfigError& e) {
            ctx.fail(e.what());
          }
        }
      } else if (key == "snapshots") {
        for (const auto& tok : split(value, ','))
          cfg.snapshots.push_back(parse_long(ctx, tok));
      } else if (key == "gamma_big")
        cfg.gamma_big = parse_double(ctx, value);
      else
        ctx.fail("unknown key");
    } else if (section == "output") {
      if (key == "dir")
        cfg.output_dir = value;
      else
        ctx.fail("unknown key");
    } else if (section == "fit") {
      cfg.fit.enabled = true;
      if (key == "t_min")
        cfg.fit.window.t_min = parse_double(ctx, value);
      else if (key == "t_max")
        cfg.fit.window.t_max = parse_double(ctx, value);
      else if (key == "plateau") {
        if (value.rfind("tail:", 0) == 0)
          cfg.fit.plateau_tail = parse_double(ctx, trim(value.substr(5)));
        else
          cfg.fit.plateau = parse_double(ctx, value);
      } else if (key == "mode") {
        if (value == "power")
          cfg.fit.exponential = false;
        else if (value == "exponential")
          cfg.fit.exponential = true;
        else
          ctx.fail("fit mode must be 'power' or 'exponential'");
      } else
        ctx.fail("unknown key");
    } else {
      ctx.fail("unknown section [" + section + "]");
    }
  }

  if (!saw_engines)
    throw ConfigError(display_name + ": [run] engines is required");
  return cfg;
}

ExperimentConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  ExperimentConfig cfg = parse_config(in, path.string());
  if (cfg.name.empty()) cfg.name = path.stem().string();
  // Relative graph/amplitude paths resolve against the config location.
  const auto base = path.parent_path();
  if (!cfg.graph.empty() && cfg.graph.is_relative()) cfg.graph = base / cfg.graph;
  if (cfg.initial.kind == InitialState::Kind::file &&
      cfg.initial.path.is_relative())
    cfg.initial.path = base / cfg.initial.path;
  return cfg;
}

namespace {

// ------------------------------------------------------------- dispatch

struct Prepared {
  Lattice lattice;
  int n_total = 0;
  bool two_d = false;
};

Prepared prepare_lattice(const ExperimentConfig& cfg) {
  Prepared prep;
  if (cfg.lattice.geometry == Geometry::custom) {
    if (cfg.graph.empty())
      throw ConfigError(cfg.name + ": custom geometry needs lattice.graph");
    prep.lattice = load_graph(cfg.graph);
  } else {
    prep.lattice = build(cfg.lattice);
  }
  prep.n_total = prep.lattice.hamiltonian.n_sites();
  prep.two_d = prep.lattice.hamiltonian.geometry == Geometry::square_open;
  return prep;
}

int initial_flat_index(const ExperimentConfig& cfg, const Prepared& prep) {
  const InitialState& init = cfg.initial;
  if (init.kind == InitialState::Kind::position2d) {
    if (!prep.two_d)
      throw ConfigError("initial position lx,ly needs square-open geometry");
    const int n = cfg.lattice.n;
    if (init.site < 1 || init.site > n || init.site_y < 1 || init.site_y > n)
      throw ConfigError("initial position outside the lattice");
    return flat_index(n, init.site, init.site_y);
  }
  if (init.site < 1 || init.site > prep.n_total)
    throw ConfigError("initial position outside the lattice");
  return site_index(init.site);
}

// Initial position as (lx, ly) on the square lattice.
std::pair<int, int> initial_xy(const ExperimentConfig& cfg,
                               const Prepared& prep) {
  const int flat = initial_flat_index(cfg, prep);
  const int n = cfg.lattice.n;
  return {flat / n + 1, flat % n + 1};
}

StateVector initial_full_state(const ExperimentConfig& cfg,
                               const Prepared& prep,
                               std::vector<std::string>& warnings) {
  switch (cfg.initial.kind) {
    case InitialState::Kind::position:
    case InitialState::Kind::position2d:
      return StateVector::position(prep.n_total,
                                   initial_flat_index(cfg, prep));
    case InitialState::Kind::eigenstate: {
      if (prep.two_d)
        throw ConfigError("eigenstate initial not supported on square-open");
      const auto& d = prep.lattice.detectors;
      const int ns = static_cast<int>(d.system.size());
      if (cfg.initial.mode < 1 || cfg.initial.mode > ns)
        throw ConfigError("eigenstate index out of range 1.." +
                          std::to_string(ns));
      const Eigen::MatrixXd hs =
          prep.lattice.hamiltonian.matrix(d.system, d.system);
      const SpectralDecomposition spec = eig_sym(hs);
      Eigen::VectorXcd full = Eigen::VectorXcd::Zero(prep.n_total);
      for (int i = 0; i < ns; ++i)
        full(d.system[i]) = spec.eigenvectors(i, cfg.initial.mode - 1);
      return StateVector::from_amplitudes(std::move(full));
    }
    case InitialState::Kind::file: {
      StateVector psi = read_amplitudes(cfg.initial.path, prep.n_total);
      if (std::abs(psi.norm_sq - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "initial state from " << cfg.initial.path.string()
           << " renormalized (norm^2 was " << psi.norm_sq << ")";
        warnings.push_back(os.str());
      }
      psi.amplitudes /= std::sqrt(psi.norm_sq);
      psi.norm_sq = 1.0;
      return psi;
    }
  }
  throw ConfigError("unreachable initial state kind");
}

int system_position_of(const std::vector<int>& system, int flat) {
  const auto it = std::lower_bound(system.begin(), system.end(), flat);
  if (it == system.end() || *it != flat)
    throw ConfigError(
        "initial position sits on a detector site; the effective engine "
        "needs it inside the system");
  return static_cast<int>(it - system.begin());
}

SurvivalSeries engine_exact(const ExperimentConfig& cfg, const Prepared& prep,
                            std::vector<std::string>& warnings) {
  MeasurementProtocol proto{cfg.tau, cfg.n_max, cfg.snapshots};
  if (prep.two_d) {
    if (cfg.lattice.layout.kind != DetectorLayout::Kind::case2d)
      throw ConfigError(
          "square-open exact evolution needs a case-i..case-v detector "
          "layout (the step operator factorizes per axis)");
    const StepOperator2D u = step_operator_2d(
        cfg.lattice.n, cfg.lattice.gamma, cfg.lattice.layout.case_id, cfg.tau);
    return evolve_2d(u, initial_full_state(cfg, prep, warnings), proto);
  }
  const StepOperator u =
      step_operator(prep.lattice.hamiltonian, prep.lattice.detectors, cfg.tau);
  return evolve(u, initial_full_state(cfg, prep, warnings), proto);
}

SurvivalSeries engine_effective(const ExperimentConfig& cfg,
                                const Prepared& prep) {
  const EffectiveHamiltonian heff =
      build_heff(prep.lattice.hamiltonian, prep.lattice.detectors, cfg.tau);
  const auto& sys = heff.system_sites;
  StateVector psi0;
  if (cfg.initial.kind == InitialState::Kind::position ||
      cfg.initial.kind == InitialState::Kind::position2d) {
    const int pos = system_position_of(sys, initial_flat_index(cfg, prep));
    psi0 = StateVector::position(static_cast<int>(sys.size()), pos);
  } else if (cfg.initial.kind == InitialState::Kind::eigenstate) {
    const int ns = static_cast<int>(sys.size());
    if (cfg.initial.mode < 1 || cfg.initial.mode > ns)
      throw ConfigError("eigenstate index out of range 1.." +
                        std::to_string(ns));
    const Eigen::MatrixXd hs = prep.lattice.hamiltonian.matrix(sys, sys);
    psi0 = StateVector::from_amplitudes(
        eig_sym(hs).eigenvectors.col(cfg.initial.mode - 1).cast<Complex>());
  } else {
    throw ConfigError("effective engine supports position and eigenstate "
                      "initial states");
  }
  return evolve_heff(heff, psi0, cfg.n_max);
}

SurvivalSeries series_from_formula(const ExperimentConfig& cfg,
                                   const std::function<double(double)>& P) {
  SurvivalSeries out;
  out.rows.reserve(static_cast<std::size_t>(cfg.n_max));
  double prev = 1.0;
  for (long n = 1; n <= cfg.n_max; ++n) {
    const double t = n * cfg.tau;
    const double value = P(t);
    out.rows.push_back({n, t, value, prev - value});
    prev = value;
  }
  return out;
}

SurvivalSeries engine_analytic(const ExperimentConfig& cfg,
                               const Prepared& prep) {
  const auto& lay = cfg.lattice.layout;
  const int n = cfg.lattice.n;
  const double g = cfg.lattice.gamma;
  // The closed forms are written for unit hopping; rates scale as
  // gamma^2 tau (the amplitudes are gamma-free), so rescale tau.
  const double tau_eff = cfg.tau * g * g;

  switch (prep.lattice.hamiltonian.geometry) {
    case Geometry::chain_open: {
      if (cfg.initial.kind == InitialState::Kind::eigenstate) {
        const DecayModes modes = decay_modes(prep.lattice.hamiltonian,
                                             prep.lattice.detectors, cfg.tau);
        const int want = cfg.initial.mode;
        const auto it = std::find_if(
            modes.modes.begin(), modes.modes.end(),
            [&](const DecayMode& m) { return m.index == want; });
        if (it == modes.modes.end())
          throw ConfigError("eigenstate index out of range");
        const double rate = it->rate;
        return series_from_formula(
            cfg, [rate](double t) { return std::exp(-rate * t); });
      }
      const int ell = cfg.initial.site;
      if (lay.kind == DetectorLayout::Kind::end ||
          (lay.kind == DetectorLayout::Kind::single && lay.site == n))
        return series_from_formula(cfg, [=](double t) {
          return chain_survival(n, ell, tau_eff, t);
        });
      if (lay.kind == DetectorLayout::Kind::both_ends)
        return series_from_formula(cfg, [=](double t) {
          return chain_survival_both_ends(n, ell, tau_eff, t);
        });
      if (lay.kind == DetectorLayout::Kind::block_end) {
        // A block of detectors at the end behaves like a shorter chain
        // with a single end detector.
        const int n_eff = n - lay.block + 1;
        return series_from_formula(cfg, [=](double t) {
          return chain_survival(n_eff, ell, tau_eff, t);
        });
      }
      throw ConfigError("no closed form for this chain detector layout");
    }
    case Geometry::ring: {
      if (prep.lattice.ring_odd)
        throw ConfigError("ring analytics assume an even number of sites");
      int detector = n;
      if (lay.kind == DetectorLayout::Kind::single)
        detector = lay.site;
      else if (lay.kind != DetectorLayout::Kind::end)
        throw ConfigError("ring closed form needs a single detector");
      if (cfg.initial.kind == InitialState::Kind::eigenstate) {
        if (detector != n)
          throw ConfigError("eigenstate initial needs the detector at site n");
        const DecayModes modes = decay_modes(prep.lattice.hamiltonian,
                                             prep.lattice.detectors, cfg.tau);
        const int want = cfg.initial.mode;
        const auto it = std::find_if(
            modes.modes.begin(), modes.modes.end(),
            [&](const DecayMode& m) { return m.index == want; });
        if (it == modes.modes.end())
          throw ConfigError("eigenstate index out of range");
        const double rate = it->rate;
        return series_from_formula(
            cfg, [rate](double t) { return std::exp(-rate * t); });
      }
      // The ring is translation invariant: rotate so the detector sits at n.
      int ell = cfg.initial.site - detector;
      ell = ((ell % n) + n) % n;
      if (ell == 0) ell = n;
      return series_from_formula(cfg, [=](double t) {
        return ring_survival(n, ell, tau_eff, t).value;
      });
    }
    case Geometry::square_open: {
      if (lay.kind != DetectorLayout::Kind::case2d)
        throw ConfigError("square-open closed form needs a case-i..case-v "
                          "detector layout");
      const auto [lx, ly] = initial_xy(cfg, prep);
      return series_from_formula(cfg, [=, c = lay.case_id](double t) {
        return square_survival(c, n, lx, ly, tau_eff, t);
      });
    }
    case Geometry::complete: {
      if (prep.lattice.detectors.detected.size() != 1)
        throw ConfigError("complete-graph closed form needs one detector");
      // Mean-field formulas with tau -> gamma tau; only coincidence with
      // the detector site matters.
      const MeanFieldSolution sol = mf_solve(n, cfg.tau * g);
      const int det = prep.lattice.detectors.detected[0];
      const bool on_detector =
          initial_flat_index(cfg, prep) == det;
      SurvivalSeries s = mf_series(sol, on_detector ? n : 1, cfg.n_max);
      for (auto& row : s.rows) row.t = row.n * cfg.tau;
      return s;
    }
    case Geometry::custom:
      throw ConfigError("no closed form for custom graphs");
  }
  throw ConfigError("unreachable analytic dispatch");
}

SurvivalSeries engine_meanfield(const ExperimentConfig& cfg,
                                const Prepared& prep) {
  if (prep.lattice.hamiltonian.geometry != Geometry::complete)
    throw ConfigError("meanfield engine needs geometry = complete");
  if (prep.lattice.detectors.detected.size() != 1)
    throw ConfigError("meanfield engine needs exactly one detector");
  if (cfg.initial.kind != InitialState::Kind::position)
    throw ConfigError("meanfield engine needs a position initial state");
  const int n = cfg.lattice.n;
  const MeanFieldSolution sol = mf_solve(n, cfg.tau * cfg.lattice.gamma);
  const bool on_detector =
      site_index(cfg.initial.site) == prep.lattice.detectors.detected[0];
  SurvivalSeries s = mf_series(sol, on_detector ? n : 1, cfg.n_max);
  for (auto& row : s.rows) row.t = row.n * cfg.tau;
  return s;
}

SurvivalSeries engine_absorbing(const ExperimentConfig& cfg,
                                const Prepared& prep,
                                std::vector<std::string>& warnings) {
  const double gamma = prep.lattice.hamiltonian.gamma;
  const double Gamma =
      cfg.gamma_big ? *cfg.gamma_big : gamma_for_tau(gamma, cfg.tau);
  const MappingValidity flags = mapping_validity(gamma, cfg.tau, Gamma);
  if (!flags.gamma_large || !flags.tau_small) {
    std::ostringstream os;
    os << "absorbing mapping outside its validity window (Gamma=" << Gamma
       << ", tau*gamma=" << cfg.tau * gamma
       << "); survival may not track the measurement dynamics";
    warnings.push_back(os.str());
  }
  const AbsorbingHamiltonian hnh =
      build_hnh(prep.lattice.hamiltonian, prep.lattice.detectors, Gamma);
  std::vector<double> grid(static_cast<std::size_t>(cfg.n_max));
  for (long i = 0; i < cfg.n_max; ++i) grid[i] = (i + 1) * cfg.tau;
  return evolve_hnh(hnh, initial_full_state(cfg, prep, warnings), grid);
}

}  // namespace

void validate(const ExperimentConfig& cfg) {
  if (cfg.engines.empty())
    throw ConfigError(cfg.name + ": at least one engine is required");
  if (!(cfg.tau > 0.0)) throw ConfigError(cfg.name + ": tau must be > 0");
  if (cfg.n_max < 1) throw ConfigError(cfg.name + ": n_max must be >= 1");
  if (cfg.lattice.geometry != Geometry::custom && cfg.lattice.n < 2)
    throw ConfigError(cfg.name + ": lattice.n must be >= 2");
  if (cfg.lattice.geometry == Geometry::custom && cfg.graph.empty())
    throw ConfigError(cfg.name + ": custom geometry needs lattice.graph");
  if (cfg.lattice.geometry != Geometry::custom && !cfg.graph.empty())
    throw ConfigError(cfg.name + ": lattice.graph requires geometry=custom");
  const bool wants_analytic =
      std::find(cfg.engines.begin(), cfg.engines.end(), Engine::analytic) !=
      cfg.engines.end();
  if (wants_analytic && cfg.lattice.geometry == Geometry::ring &&
      cfg.lattice.n % 2 != 0)
    throw ConfigError(cfg.name +
                      ": ring analytics need even n (exact dynamics does "
                      "not; drop the analytic engine to proceed)");
  for (long n : cfg.snapshots)
    if (n < 1 || n > cfg.n_max)
      throw ConfigError(cfg.name + ": snapshot n out of range");
  if (cfg.fit.enabled && !(cfg.fit.window.t_min < cfg.fit.window.t_max))
    throw ConfigError(cfg.name + ": fit window needs t_min < t_max");
}

SurvivalSeries run_engine(const ExperimentConfig& cfg, Engine engine) {
  std::vector<std::string> warnings;
  const Prepared prep = prepare_lattice(cfg);
  switch (engine) {
    case Engine::exact: return engine_exact(cfg, prep, warnings);
    case Engine::effective: return engine_effective(cfg, prep);
    case Engine::analytic: return engine_analytic(cfg, prep);
    case Engine::meanfield: return engine_meanfield(cfg, prep);
    case Engine::absorbing: return engine_absorbing(cfg, prep, warnings);
  }
  throw ConfigError("unreachable engine dispatch");
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text << '\n';
}

}  // namespace

RunResult run(const ExperimentConfig& cfg) {
  validate(cfg);
  RunResult result;
  const Prepared prep = prepare_lattice(cfg);
  std::filesystem::create_directories(cfg.output_dir);

  auto artifact = [&](const std::string& suffix) {
    return cfg.output_dir / (cfg.name + "_" + suffix);
  };

  try {
    for (Engine engine : cfg.engines) {
      SurvivalSeries series;
      switch (engine) {
        case Engine::exact:
          series = engine_exact(cfg, prep, result.warnings);
          break;
        case Engine::effective:
          series = engine_effective(cfg, prep);
          break;
        case Engine::analytic:
          series = engine_analytic(cfg, prep);
          break;
        case Engine::meanfield:
          series = engine_meanfield(cfg, prep);
          break;
        case Engine::absorbing:
          series = engine_absorbing(cfg, prep, result.warnings);
          break;
      }

      const auto csv = artifact(std::string(engine_name(engine)) + ".csv");
      write_survival_csv(csv, series);
      result.files.push_back(csv);

      for (const auto& [n, psi] : series.snapshots) {
        const auto snap = artifact(std::string(engine_name(engine)) +
                                   "_snapshot_n" + std::to_string(n) + ".csv");
        write_snapshot_csv(snap, psi);
        result.files.push_back(snap);
      }

      if (cfg.fit.enabled) {
        double plateau = cfg.fit.plateau;
        if (cfg.fit.plateau_tail >= 0.0)
          plateau = estimate_plateau(series, cfg.fit.plateau_tail).value;
        const auto path =
            artifact(std::string(engine_name(engine)) + "_fit.json");
        if (cfg.fit.exponential)
          write_text(path,
                     fit_json(fit_exponential(series, cfg.fit.window, plateau),
                              plateau));
        else
          write_text(path,
                     fit_json(fit_power_law(series, cfg.fit.window, plateau),
                              plateau));
        result.files.push_back(path);
      }

      result.series.emplace(engine, std::move(series));
    }

    // Every non-reference engine against the first listed one.
    const Engine ref = cfg.engines.front();
    for (std::size_t i = 1; i < cfg.engines.size(); ++i) {
      const Engine other = cfg.engines[i];
      if (other == ref) continue;
      CompareOutcome outcome{ref, other,
                             compare_series(result.series.at(ref),
                                            result.series.at(other)),
                             std::nullopt, true, {}};
      const auto path = artifact(std::string(engine_name(ref)) + "_vs_" +
                                 engine_name(other) + ".json");
      write_text(path, comparison_json(outcome));
      result.files.push_back(path);
    }
  } catch (...) {
    std::error_code ec;
    for (const auto& f : result.files) std::filesystem::remove(f, ec);
    throw;
  }
  return result;
}

CompareOutcome compare_engines(const ExperimentConfig& cfg_a, Engine a,
                               const ExperimentConfig& cfg_b, Engine b,
                               std::optional<double> tolerance) {
  if (cfg_a.n_max != cfg_b.n_max ||
      std::abs(cfg_a.tau - cfg_b.tau) > 1e-12 * cfg_a.tau)
    throw ConfigError("compare: sample grids are not aligned "
                      "(tau and n_max must match)");
  CompareOutcome outcome{a, b, {}, tolerance, true, {}};
  const SurvivalSeries sa = run_engine(cfg_a, a);
  const SurvivalSeries sb = run_engine(cfg_b, b);
  outcome.report = compare_series(sa, sb);
  if (tolerance && outcome.report.max_rel_err > *tolerance)
    outcome.passed = false;
  return outcome;
}

std::string comparison_json(const CompareOutcome& outcome) {
  json j{{"a", engine_name(outcome.engine_a)},
         {"b", engine_name(outcome.engine_b)},
         {"max_rel_err", outcome.report.max_rel_err},
         {"max_abs_err", outcome.report.max_abs_err},
         {"argmax_n", outcome.report.argmax_n},
         {"rms_err", outcome.report.rms_err}};
  if (outcome.tolerance) {
    j["tolerance"] = *outcome.tolerance;
    j["passed"] = outcome.passed;
  }
  if (!outcome.warnings.empty()) j["warnings"] = outcome.warnings;
  return j.dump(2);
}

std::string fit_json(const PowerLawFit& fit, double plateau) {
  return json{{"type", "power"},
              {"exponent", fit.exponent},
              {"stderr", fit.std_err},
              {"intercept", fit.intercept},
              {"window", {{"t_min", fit.window.t_min},
                          {"t_max", fit.window.t_max}}},
              {"n_points", fit.n_points},
              {"plateau", plateau}}
      .dump(2);
}

std::string fit_json(const ExponentialFit& fit, double plateau) {
  return json{{"type", "exponential"},
              {"rate", fit.rate},
              {"stderr", fit.std_err},
              {"intercept", fit.intercept},
              {"window", {{"t_min", fit.window.t_min},
                          {"t_max", fit.window.t_max}}},
              {"n_points", fit.n_points},
              {"plateau", plateau}}
      .dump(2);
}

}  // namespace qdet
