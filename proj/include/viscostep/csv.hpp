#pragma once

#include <array>
#include <charconv>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "driver.hpp"

// CSV emission and ingestion for TimeSeries and convergence tables. Numbers
// are written with 17 significant digits via to_chars, so output is
// locale-independent and parsing an emitted file and re-emitting it is
// byte-identical ('\n' line endings throughout).

namespace viscostep {

inline std::string format_g17(double x) {
  std::array<char, 40> buf;
  const auto res =
      std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
  return std::string(buf.data(), res.ptr);
}

inline std::string csv_header(int n_branches) {
  std::string h = "t";
  const char* cell[9] = {"11", "12", "13", "21", "22", "23", "31", "32", "33"};
  for (const char* c : cell) h += std::string(",F") + c;
  for (const char* c : cell) h += std::string(",T") + c;
  for (int b = 1; b <= n_branches; ++b) h += ",detCi_" + std::to_string(b);
  h += ",psi";
  return h;
}

inline void write_csv(std::ostream& os, const TimeSeries& ts) {
  os << csv_header(ts.n_branches) << "\n";
  for (std::size_t r = 0; r < ts.rows(); ++r) {
    os << format_g17(ts.t[r]);
    for (int i = 0; i < 9; ++i) os << "," << format_g17(ts.F[r].v[i]);
    for (int i = 0; i < 9; ++i) os << "," << format_g17(ts.cauchy[r].v[i]);
    for (int b = 0; b < ts.n_branches; ++b) os << "," << format_g17(ts.det_ci_at(r, b));
    os << "," << format_g17(ts.psi[r]) << "\n";
  }
}

inline void write_convergence_csv(std::ostream& os, const std::vector<ConvergenceRow>& rows) {
  os << "dt,err_ebmsc,err_ebm,err_em\n";
  for (const auto& r : rows)
    os << format_g17(r.dt) << "," << format_g17(r.err_ebmsc) << "," << format_g17(r.err_ebm)
       << "," << format_g17(r.err_em) << "\n";
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline double parse_double(const std::string& s) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ConfigError("CSV: malformed number '" + s + "'");
  return x;
}

}  // namespace detail

// Parses a TimeSeries CSV. Internal states are not serialized, so the ci
// column of the result stays empty.
inline TimeSeries read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto cols = detail::split_csv_line(line);
  if (cols.size() < 21) throw ConfigError("CSV: too few columns");
  const int n_branches = static_cast<int>(cols.size()) - 20;
  if (csv_header(n_branches) != line) throw ConfigError("CSV: unexpected header");

  TimeSeries ts;
  ts.n_branches = n_branches;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = detail::split_csv_line(line);
    if (f.size() != cols.size()) throw ConfigError("CSV: ragged row");
    std::size_t c = 0;
    ts.t.push_back(detail::parse_double(f[c++]));
    Tensor2<double> F, T;
    for (int i = 0; i < 9; ++i) F.v[i] = detail::parse_double(f[c++]);
    for (int i = 0; i < 9; ++i) T.v[i] = detail::parse_double(f[c++]);
    ts.F.push_back(F);
    ts.cauchy.push_back(T);
    for (int b = 0; b < n_branches; ++b) ts.det_ci.push_back(detail::parse_double(f[c++]));
    ts.psi.push_back(detail::parse_double(f[c++]));
  }
  return ts;
}

}  // namespace viscostep
