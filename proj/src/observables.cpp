#include "tns/observables.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "tns/environment.hpp"

namespace tns {

std::vector<double> measure_z(const Mps& s) {
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  std::vector<double> out;
  for (const auto& v : local_expectations(s, z)) out.push_back(v.real());
  return out;
}

std::vector<double> density_from_z(const std::vector<double>& z) {
  std::vector<double> out;
  out.reserve(z.size());
  for (double v : z) out.push_back(0.5 * (1.0 - v));
  return out;
}

void SiteSeries::append(double t, std::vector<double> row, std::vector<double> err) {
  if (row.size() != sites.size()) throw std::invalid_argument("SiteSeries::append: row length does not match sites");
  if (!err.empty() && err.size() != row.size()) throw std::invalid_argument("SiteSeries::append: stderr length mismatch");
  if (!err.empty() && stderrs.size() != values.size()) throw std::invalid_argument("SiteSeries::append: stderr on some rows only");
  if (err.empty() && !stderrs.empty()) throw std::invalid_argument("SiteSeries::append: missing stderr row");
  times.push_back(t);
  values.push_back(std::move(row));
  if (!err.empty()) stderrs.push_back(std::move(err));
}

void SiteSeries::check_complete() const {
  std::vector<std::string> missing;
  std::size_t count = 0;
  if (values.size() != times.size()) throw std::invalid_argument("SiteSeries: row count does not match times");
  if (!stderrs.empty() && stderrs.size() != values.size()) throw std::invalid_argument("SiteSeries: stderr row count mismatch");
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < sites.size(); ++j) {
      const bool absent = j >= values[i].size() || std::isnan(values[i][j]) ||
                          (!stderrs.empty() && (j >= stderrs[i].size() || std::isnan(stderrs[i][j])));
      if (absent) {
        if (missing.size() < 20) missing.push_back(fmt::format("(t={}, site={})", format_double(times[i]), sites[j]));
        ++count;
      }
    }
  }
  if (count > 0) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : " ") + m;
    throw std::invalid_argument(fmt::format("incomplete grid: {} missing cells: {}{}", count, list, count > missing.size() ? " ..." : ""));
  }
}

std::string format_double(double x) { return fmt::format("{}", x); }

void emit_heatmap_table(std::ostream& os, const SiteSeries& series) {
  series.check_complete();
  const bool with_err = !series.stderrs.empty();
  os << "t,site,value";
  if (with_err) os << ",stderr";
  if (series.parity_column) os << ",parity";
  os << '\n';
  std::vector<std::size_t> order(series.sites.size());
  for (std::size_t j = 0; j < order.size(); ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return series.sites[a] < series.sites[b]; });
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    for (std::size_t j : order) {
      os << format_double(series.times[i]) << ',' << series.sites[j] << ',' << format_double(series.values[i][j]);
      if (with_err) os << ',' << format_double(series.stderrs[i][j]);
      if (series.parity_column) os << ',' << (series.sites[j] % 2 == 0 ? "even" : "odd");
      os << '\n';
    }
  }
}

std::string emit_heatmap_table(const SiteSeries& series) {
  std::ostringstream os;
  emit_heatmap_table(os, series);
  return os.str();
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_number(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument(fmt::format("heatmap table line {}: bad number '{}'", lineno, s));
  }
  return v;
}

}  // namespace

SiteSeries parse_heatmap_table(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("heatmap table: empty input");
  const auto header = split_csv(line);
  if (header.size() < 3 || header[0] != "t" || header[1] != "site" || header[2] != "value") {
    throw std::invalid_argument("heatmap table: header must start with t,site,value");
  }
  bool with_err = false, with_parity = false;
  for (std::size_t c = 3; c < header.size(); ++c) {
    if (header[c] == "stderr" && c == 3) with_err = true;
    else if (header[c] == "parity" && c + 1 == header.size()) with_parity = true;
    else throw std::invalid_argument(fmt::format("heatmap table: unexpected column '{}'", header[c]));
  }

  SiteSeries out;
  out.parity_column = with_parity;
  std::map<std::size_t, std::size_t> site_index;
  std::size_t lineno = 1;
  double current_t = 0.0;
  bool have_row = false;
  std::vector<double> row, err;
  auto flush = [&]() {
    if (!have_row) return;
    out.times.push_back(current_t);
    out.values.push_back(row);
    if (with_err) out.stderrs.push_back(err);
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != header.size()) throw std::invalid_argument(fmt::format("heatmap table line {}: wrong field count", lineno));
    const double t = parse_number(f[0], lineno);
    const auto site = static_cast<std::size_t>(parse_number(f[1], lineno));
    if (!have_row || t != current_t) {
      flush();
      current_t = t;
      have_row = true;
      row.assign(out.sites.size(), std::nan(""));
      err.assign(out.sites.size(), std::nan(""));
    }
    auto it = site_index.find(site);
    if (it == site_index.end()) {
      if (out.times.size() > 0) throw std::invalid_argument(fmt::format("heatmap table line {}: site {} absent from first block", lineno, site));
      it = site_index.emplace(site, out.sites.size()).first;
      out.sites.push_back(site);
      row.push_back(std::nan(""));
      err.push_back(std::nan(""));
    }
    row[it->second] = parse_number(f[2], lineno);
    if (with_err) err[it->second] = parse_number(f[3], lineno);
  }
  flush();
  out.check_complete();
  return out;
}

SiteSeries parse_heatmap_table(const std::string& text) {
  std::istringstream is(text);
  return parse_heatmap_table(is);
}

}  // namespace tns
