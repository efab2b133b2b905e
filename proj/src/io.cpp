#include "odefilter/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace odefilter::io {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s) {
  // strtod rather than stod: subnormals must parse, not throw out_of_range
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size())
    throw std::invalid_argument("bad number in CSV: '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", v);
  return {buf, static_cast<std::size_t>(n)};
}

CsvTable read_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("empty CSV");
  table.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != table.header.size()) {
      throw std::invalid_argument("CSV row has " + std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_trajectory_csv(std::ostream& out, const FilterTrajectory& traj) {
  out << "t";
  for (int i = 0; i <= traj.q; ++i) {
    for (int j = 0; j < traj.d; ++j) out << ",mean_" << i << "_" << j;
  }
  for (int i = 0; i <= traj.q; ++i) out << ",var_" << i;
  out << "\n";
  for (const auto& s : traj.states) {
    out << format_double(s.t);
    for (int i = 0; i <= traj.q; ++i) {
      for (int j = 0; j < traj.d; ++j) out << "," << format_double(s.mean(i, j));
    }
    for (int i = 0; i <= traj.q; ++i) out << "," << format_double(s.cov(i, i));
    out << "\n";
  }
}

FilterTrajectory read_trajectory_csv(std::istream& in) {
  const CsvTable table = read_csv(in);
  int n_var = 0;
  for (const auto& h : table.header) {
    if (h.rfind("var_", 0) == 0) ++n_var;
  }
  const int n_mean = static_cast<int>(table.header.size()) - 1 - n_var;
  if (table.header.empty() || table.header.front() != "t" || n_var < 2 || n_mean % n_var != 0) {
    throw std::invalid_argument("not a trajectory CSV");
  }
  FilterTrajectory traj;
  traj.q = n_var - 1;
  traj.d = n_mean / n_var;
  for (const auto& row : table.rows) {
    GaussianState s;
    s.t = row[0];
    s.mean.resize(n_var, traj.d);
    s.cov = Eigen::MatrixXd::Zero(n_var, n_var);
    std::size_t c = 1;
    for (int i = 0; i < n_var; ++i) {
      for (int j = 0; j < traj.d; ++j) s.mean(i, j) = row[c++];
    }
    for (int i = 0; i < n_var; ++i) s.cov(i, i) = row[c++];
    traj.states.push_back(std::move(s));
  }
  return traj;
}

void write_samples_csv(std::ostream& out, const PriorSamples& samples, int component) {
  if (component < 0 || component >= static_cast<int>(samples.coords.size())) {
    throw std::invalid_argument("sample component out of range");
  }
  const Eigen::MatrixXd& paths = samples.coords[component];
  out << "t";
  for (Eigen::Index p = 0; p < paths.cols(); ++p) out << ",path_" << p;
  out << "\n";
  for (std::size_t n = 0; n < samples.times.size(); ++n) {
    out << format_double(samples.times[n]);
    for (Eigen::Index p = 0; p < paths.cols(); ++p) {
      out << "," << format_double(paths(static_cast<Eigen::Index>(n), p));
    }
    out << "\n";
  }
}

}  // namespace odefilter::io
