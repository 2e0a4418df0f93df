#include "qdet/series_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "qdet/lattice.hpp"

namespace qdet {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_survival_csv(std::ostream& out, const SurvivalSeries& s) {
  out << "n,t,P,p\n";
  for (const auto& row : s.rows) {
    out << row.n << ',' << format_double(row.t) << ','
        << format_double(row.P) << ',' << format_double(row.p) << '\n';
  }
}

void write_survival_csv(const std::filesystem::path& path,
                        const SurvivalSeries& s) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_survival_csv(out, s);
}

SurvivalSeries read_survival_csv(std::istream& in,
                                 const std::string& display_name) {
  SurvivalSeries s;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line != "n,t,P,p")
        throw ParseError(display_name + ":1: expected header n,t,P,p",
                         line_no);
      continue;
    }
    for (auto& c : line)
      if (c == ',') c = ' ';
    std::istringstream ws(line);
    SurvivalRow row;
    if (!(ws >> row.n >> row.t >> row.P >> row.p))
      throw ParseError(display_name + ":" + std::to_string(line_no) +
                           ": malformed row",
                       line_no);
    s.rows.push_back(row);
  }
  return s;
}

SurvivalSeries read_survival_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  return read_survival_csv(in, path.string());
}

void write_snapshot_csv(std::ostream& out, const StateVector& psi,
                        const std::vector<int>& site_labels) {
  out << "site,re,im,prob\n";
  for (Eigen::Index i = 0; i < psi.amplitudes.size(); ++i) {
    const int label = site_labels.empty()
                          ? site_label(static_cast<int>(i))
                          : site_label(site_labels[i]);
    const Complex a = psi.amplitudes(i);
    out << label << ',' << format_double(a.real()) << ','
        << format_double(a.imag()) << ',' << format_double(std::norm(a))
        << '\n';
  }
}

void write_snapshot_csv(const std::filesystem::path& path,
                        const StateVector& psi,
                        const std::vector<int>& site_labels) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  write_snapshot_csv(out, psi, site_labels);
}

StateVector read_amplitudes(const std::filesystem::path& path, int n_sites) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open amplitude file " + path.string());
  std::vector<Complex> amps;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    double re, im;
    if (!(ls >> re)) continue;
    if (!(ls >> im))
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                           ": expected 're im' pair",
                       line_no);
    amps.emplace_back(re, im);
  }
  if (static_cast<int>(amps.size()) != n_sites) {
    std::ostringstream os;
    os << path.string() << ": has " << amps.size() << " amplitudes, lattice"
       << " has " << n_sites << " sites";
    throw ConfigError(os.str());
  }
  Eigen::VectorXcd v(n_sites);
  for (int i = 0; i < n_sites; ++i) v(i) = amps[i];
  return StateVector::from_amplitudes(std::move(v));
}

}  // namespace qdet
