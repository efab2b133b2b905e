#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "odefilter/analysis.hpp"
#include "odefilter/filter.hpp"

namespace odefilter::io {

// Shortest-safe decimal form: 17 significant digits, round-trips through strtod.
[[nodiscard]] std::string format_double(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

[[nodiscard]] CsvTable read_csv(std::istream& in);

// Columns: t, mean_<i>_<j> for i = 0..q, j = 0..d-1, then var_<i> = cov(i, i).
void write_trajectory_csv(std::ostream& out, const FilterTrajectory& traj);

// Inverse of write_trajectory_csv. Only the covariance diagonal is recovered.
[[nodiscard]] FilterTrajectory read_trajectory_csv(std::istream& in);

// Columns: t, path_0, ..., path_{n-1} for one state component.
void write_samples_csv(std::ostream& out, const PriorSamples& samples, int component);

}  // namespace odefilter::io
