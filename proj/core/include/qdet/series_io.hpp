// series_io.hpp — CSV schemas shared by every engine and the CLI.
//
// Survival CSV: header "n,t,P,p", one row per measurement.
// Snapshot CSV: header "site,re,im,prob", 1-based site labels, amplitudes
// un-normalized. Floats use the shortest decimal that round-trips, so
// output is byte-identical across runs.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qdet/dynamics.hpp"

namespace qdet {

std::string format_double(double v);

void write_survival_csv(std::ostream& out, const SurvivalSeries& s);
void write_survival_csv(const std::filesystem::path& path,
                        const SurvivalSeries& s);

SurvivalSeries read_survival_csv(std::istream& in,
                                 const std::string& display_name);
SurvivalSeries read_survival_csv(const std::filesystem::path& path);

// site_labels maps vector indices to 1-based lattice labels; pass the
// identity (empty) for full-space states.
void write_snapshot_csv(std::ostream& out, const StateVector& psi,
                        const std::vector<int>& site_labels = {});
void write_snapshot_csv(const std::filesystem::path& path,
                        const StateVector& psi,
                        const std::vector<int>& site_labels = {});

// Amplitude file: one "re im" pair per line in site order, '#' comments.
StateVector read_amplitudes(const std::filesystem::path& path, int n_sites);

}  // namespace qdet
