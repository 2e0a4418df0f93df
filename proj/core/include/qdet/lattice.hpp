// lattice.hpp — Hamiltonian and detector-set construction for the supported
// geometries, plus arbitrary graphs loaded from an edge-list file.
//
// Site indexing: user-facing labels are 1-based everywhere (config files,
// graph files, CSV output); internal vector/matrix indices are 0-based.
// The conversion lives in this module only.
#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "qdet/errors.hpp"

namespace qdet {

enum class Geometry { chain_open, ring, square_open, complete, custom };

struct Hamiltonian {
  Eigen::MatrixXd matrix;  // real symmetric
  double gamma = 1.0;      // hopping amplitude, units of hbar = 1
  Geometry geometry = Geometry::custom;
  std::vector<int> lattice_dims;  // {N} for 1d, {N, N} for the square

  int n_sites() const { return static_cast<int>(matrix.rows()); }
};

// Partition of the sites into detected (domain D) and system (S) sets.
// Indices are 0-based and ascending; the two sets are disjoint and cover
// every site.
struct DetectorSet {
  std::vector<int> detected;
  std::vector<int> system;

  static DetectorSet from_detected(std::vector<int> detected, int n_sites);
};

struct DetectorLayout {
  enum class Kind { end, both_ends, block_end, single, case2d, explicit_list };
  Kind kind = Kind::end;
  int block = 0;             // block_end: number of detectors at the far end
  int site = 0;              // single: 1-based site label
  int case_id = 0;           // case2d: 1..5, boundary arrangements
  std::vector<int> sites;    // explicit_list: 1-based labels
};

struct LatticeSpec {
  Geometry geometry = Geometry::chain_open;
  int n = 2;  // sites per dimension
  double gamma = 1.0;
  DetectorLayout layout;
};

struct Lattice {
  Hamiltonian hamiltonian;
  DetectorSet detectors;
  // Odd-N ring: exact dynamics is fine, the closed-form ring results assume
  // even N. Callers requesting analytics must reject this themselves.
  bool ring_odd = false;
};

Lattice build(const LatticeSpec& spec);

// Plain-text graph format: header "sites N"; edge lines "i j w" with
// 1-based site labels and hopping weight w (the matrix entry becomes -w,
// symmetric entry implied); one or more "detect i1 i2 ..." lines;
// '#' starts a comment. Parse errors carry the line number.
Lattice load_graph(const std::filesystem::path& path);
Lattice load_graph(std::istream& in, const std::string& display_name);

// 1-based label <-> 0-based index helpers.
inline int site_index(int label) { return label - 1; }
inline int site_label(int index) { return index + 1; }

// Row-major flattening of the square lattice: 1-based (lx, ly) to the
// 0-based index (lx-1)*n + (ly-1).
inline int flat_index(int n, int lx, int ly) {
  return (lx - 1) * n + (ly - 1);
}

const char* geometry_name(Geometry g);

}  // namespace qdet
