#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "tns/mps.hpp"

namespace tns {

/// <Z_n> for every site, with Z|0> = +|0>.
std::vector<double> measure_z(const Mps& s);

/// <xi_n^dagger xi_n> = (1 - <Z_n>) / 2.
std::vector<double> density_from_z(const std::vector<double>& z);

/// Values on a rectangular (time, site) grid. A NaN value marks a missing cell.
struct SiteSeries {
  std::string label;
  std::vector<double> times;
  /// column labels; usually 0..N-1, or cut indices for entropy tables
  std::vector<std::size_t> sites;
  /// values[i][j] at times[i], sites[j]
  std::vector<std::vector<double>> values;
  /// empty, or the same shape as values
  std::vector<std::vector<double>> stderrs;
  /// emit an even/odd tag per row
  bool parity_column = true;

  void append(double t, std::vector<double> row, std::vector<double> err = {});
  /// Throws std::invalid_argument listing missing cells (up to 20).
  void check_complete() const;
};

/// CSV `t,site,value[,stderr][,parity]`, sites ascending within each time block.
void emit_heatmap_table(std::ostream& os, const SiteSeries& series);
std::string emit_heatmap_table(const SiteSeries& series);
SiteSeries parse_heatmap_table(std::istream& is);
SiteSeries parse_heatmap_table(const std::string& text);

/// Shortest decimal representation that round-trips.
std::string format_double(double x);

}  // namespace tns
