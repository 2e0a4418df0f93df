#include "qdet/lattice.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace qdet {

namespace {

void check_label(int label, int n_sites, const std::string& what) {
  if (label < 1 || label > n_sites) {
    std::ostringstream os;
    os << what << " site " << label << " out of range 1.." << n_sites;
    throw ConfigError(os.str());
  }
}

Eigen::MatrixXd chain_matrix(int n, double gamma) {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int l = 0; l + 1 < n; ++l) h(l, l + 1) = h(l + 1, l) = -gamma;
  return h;
}

std::vector<int> case2d_detectors(int case_id, int n) {
  std::vector<int> d;
  switch (case_id) {
    case 1:  // one boundary: (N, ly) for all ly
      for (int ly = 1; ly <= n; ++ly) d.push_back(flat_index(n, n, ly));
      break;
    case 2:  // two opposite boundaries: (1, ly) and (N, ly)
      for (int ly = 1; ly <= n; ++ly) {
        d.push_back(flat_index(n, 1, ly));
        d.push_back(flat_index(n, n, ly));
      }
      break;
    case 3:  // two adjacent boundaries: (lx, N) all lx; (N, ly) ly <= N-1
      for (int lx = 1; lx <= n; ++lx) d.push_back(flat_index(n, lx, n));
      for (int ly = 1; ly <= n - 1; ++ly) d.push_back(flat_index(n, n, ly));
      break;
    case 4:  // three boundaries: (1, ly), (N, ly) all ly; (lx, N) 2..N-1
      for (int ly = 1; ly <= n; ++ly) {
        d.push_back(flat_index(n, 1, ly));
        d.push_back(flat_index(n, n, ly));
      }
      for (int lx = 2; lx <= n - 1; ++lx) d.push_back(flat_index(n, lx, n));
      break;
    case 5:  // all four boundaries
      for (int lx = 1; lx <= n; ++lx) {
        d.push_back(flat_index(n, lx, 1));
        d.push_back(flat_index(n, lx, n));
      }
      for (int ly = 2; ly <= n - 1; ++ly) {
        d.push_back(flat_index(n, 1, ly));
        d.push_back(flat_index(n, n, ly));
      }
      break;
    default:
      throw ConfigError("unknown 2d detector case " + std::to_string(case_id));
  }
  return d;
}

}  // namespace

DetectorSet DetectorSet::from_detected(std::vector<int> detected, int n_sites) {
  std::sort(detected.begin(), detected.end());
  detected.erase(std::unique(detected.begin(), detected.end()),
                 detected.end());
  if (!detected.empty() &&
      (detected.front() < 0 || detected.back() >= n_sites))
    throw ConfigError("detector index out of range");

  DetectorSet set;
  set.detected = std::move(detected);
  set.system.reserve(n_sites - set.detected.size());
  auto it = set.detected.begin();
  for (int i = 0; i < n_sites; ++i) {
    if (it != set.detected.end() && *it == i)
      ++it;
    else
      set.system.push_back(i);
  }
  return set;
}

Lattice build(const LatticeSpec& spec) {
  if (spec.n < 2) throw ConfigError("lattice.n must be >= 2");
  if (spec.geometry == Geometry::custom)
    throw ConfigError("custom geometry is built through load_graph");

  const bool two_d = spec.geometry == Geometry::square_open;
  const int n_total = two_d ? spec.n * spec.n : spec.n;

  Lattice lat;
  lat.hamiltonian.gamma = spec.gamma;
  lat.hamiltonian.geometry = spec.geometry;

  switch (spec.geometry) {
    case Geometry::chain_open:
      lat.hamiltonian.matrix = chain_matrix(spec.n, spec.gamma);
      lat.hamiltonian.lattice_dims = {spec.n};
      break;
    case Geometry::ring:
      lat.hamiltonian.matrix = chain_matrix(spec.n, spec.gamma);
      lat.hamiltonian.matrix(0, spec.n - 1) = -spec.gamma;
      lat.hamiltonian.matrix(spec.n - 1, 0) = -spec.gamma;
      lat.hamiltonian.lattice_dims = {spec.n};
      lat.ring_odd = (spec.n % 2 != 0);
      break;
    case Geometry::square_open: {
      // H = H_chain (x) I + I (x) H_chain, assembled entrywise.
      Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n_total, n_total);
      for (int lx = 1; lx <= spec.n; ++lx)
        for (int ly = 1; ly <= spec.n; ++ly) {
          const int from = flat_index(spec.n, lx, ly);
          if (lx < spec.n) {
            const int to = flat_index(spec.n, lx + 1, ly);
            h(from, to) = h(to, from) = -spec.gamma;
          }
          if (ly < spec.n) {
            const int to = flat_index(spec.n, lx, ly + 1);
            h(from, to) = h(to, from) = -spec.gamma;
          }
        }
      lat.hamiltonian.matrix = std::move(h);
      lat.hamiltonian.lattice_dims = {spec.n, spec.n};
      break;
    }
    case Geometry::complete:
      // Includes the diagonal: H = -gamma sum_{j,k} |j><k|.
      lat.hamiltonian.matrix =
          -spec.gamma * Eigen::MatrixXd::Ones(spec.n, spec.n);
      lat.hamiltonian.lattice_dims = {spec.n};
      break;
    case Geometry::custom:
      break;  // unreachable
  }

  std::vector<int> detected;
  const DetectorLayout& lay = spec.layout;
  switch (lay.kind) {
    case DetectorLayout::Kind::end:
      detected = {n_total - 1};
      break;
    case DetectorLayout::Kind::both_ends:
      if (two_d) throw ConfigError("both-ends layout needs a 1d geometry");
      detected = {0, spec.n - 1};
      break;
    case DetectorLayout::Kind::block_end:
      if (two_d) throw ConfigError("block-end layout needs a 1d geometry");
      if (lay.block < 1 || lay.block >= spec.n)
        throw ConfigError("block-end size out of range");
      for (int i = spec.n - lay.block; i < spec.n; ++i) detected.push_back(i);
      break;
    case DetectorLayout::Kind::single:
      check_label(lay.site, n_total, "detector");
      detected = {site_index(lay.site)};
      break;
    case DetectorLayout::Kind::case2d:
      if (!two_d) throw ConfigError("case-i..case-v layouts need square-open");
      detected = case2d_detectors(lay.case_id, spec.n);
      break;
    case DetectorLayout::Kind::explicit_list:
      for (int label : lay.sites) {
        check_label(label, n_total, "detector");
        detected.push_back(site_index(label));
      }
      break;
  }

  lat.detectors = DetectorSet::from_detected(std::move(detected), n_total);
  return lat;
}

Lattice load_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open graph file " + path.string());
  return load_graph(in, path.string());
}

Lattice load_graph(std::istream& in, const std::string& display_name) {
  int n_sites = -1;
  std::map<std::pair<int, int>, double> weights;
  std::vector<int> detected;

  auto fail = [&](int line_no, const std::string& msg) -> ParseError {
    std::ostringstream os;
    os << display_name << ":" << line_no << ": " << msg;
    return ParseError(os.str(), line_no);
  };

  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;  // blank or comment-only

    if (first == "sites") {
      if (n_sites != -1) throw fail(line_no, "duplicate sites header");
      if (!(ls >> n_sites) || n_sites < 1)
        throw fail(line_no, "malformed sites header");
      continue;
    }
    if (n_sites == -1)
      throw fail(line_no, "expected 'sites N' before this line");

    if (first == "detect") {
      int label;
      bool any = false;
      while (ls >> label) {
        any = true;
        if (label < 1 || label > n_sites)
          throw fail(line_no, "detector site " + std::to_string(label) +
                                  " out of range 1.." +
                                  std::to_string(n_sites));
        detected.push_back(site_index(label));
      }
      std::string rest;
      if (!any || (ls.clear(), ls >> rest))
        throw fail(line_no, "malformed detect line");
      continue;
    }

    // Edge line: i j w.
    int i, j;
    double w;
    std::istringstream es(line);
    std::string rest;
    if (!(es >> i >> j >> w) || (es >> rest))
      throw fail(line_no, "malformed edge line");
    if (i < 1 || i > n_sites || j < 1 || j > n_sites)
      throw fail(line_no, "edge site out of range 1.." +
                              std::to_string(n_sites));
    const std::pair<int, int> key{std::min(site_index(i), site_index(j)),
                                  std::max(site_index(i), site_index(j))};
    auto [it, inserted] = weights.emplace(key, w);
    if (!inserted && it->second != w) {
      std::ostringstream os;
      os << "edge " << i << "-" << j << " restated with weight " << w
         << " (was " << it->second << ")";
      throw fail(line_no, os.str());
    }
  }
  if (n_sites == -1)
    throw ParseError(display_name + ": missing 'sites N' header", line_no);

  Lattice lat;
  lat.hamiltonian.matrix = Eigen::MatrixXd::Zero(n_sites, n_sites);
  for (const auto& [key, w] : weights) {
    lat.hamiltonian.matrix(key.first, key.second) = -w;
    lat.hamiltonian.matrix(key.second, key.first) = -w;
  }
  lat.hamiltonian.gamma = 1.0;
  lat.hamiltonian.geometry = Geometry::custom;
  lat.hamiltonian.lattice_dims = {n_sites};
  lat.detectors = DetectorSet::from_detected(std::move(detected), n_sites);
  return lat;
}

const char* geometry_name(Geometry g) {
  switch (g) {
    case Geometry::chain_open: return "chain-open";
    case Geometry::ring: return "ring";
    case Geometry::square_open: return "square-open";
    case Geometry::complete: return "complete";
    case Geometry::custom: return "custom";
  }
  return "?";
}

}  // namespace qdet
