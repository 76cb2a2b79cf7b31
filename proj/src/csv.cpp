#include <charconv>
#include <cstdio>
#include <sstream>

#include "cemimo/harness.hpp"

namespace cemimo {

namespace {

std::string format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), "malformed_csv", "bad number '" + s + "'");
  return v;
}

Index parse_index(const std::string& s) {
  Index v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && ptr == s.data() + s.size(), "malformed_csv", "bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string to_csv(const std::vector<SweepRow>& rows, std::uint64_t seed) {
  std::ostringstream out;
  out << "# ce-precode " << kVersion << "\n";
  out << "# seed " << seed << "\n";
  out << kCsvHeader << "\n";
  for (const auto& r : rows) {
    out << r.sweep_var << ',' << r.L << ',' << r.tau << ',' << r.N << ',' << r.M << ',' << format_double(r.E_star)
        << ',' << format_double(r.ce_min_db) << ',' << format_double(r.zf_min_db) << ','
        << format_double(r.gap_db) << ',' << format_double(r.rate_se) << "\n";
  }
  return out.str();
}

std::vector<SweepRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    if (!header_seen) {
      require(line == kCsvHeader, "malformed_csv", "unexpected CSV header: " + line);
      header_seen = true;
      continue;
    }
    const auto f = split(line);
    require(f.size() == 10, "malformed_csv", "expected 10 columns, got " + std::to_string(f.size()));
    rows.push_back({f[0], parse_index(f[1]), parse_index(f[2]), parse_index(f[3]), parse_index(f[4]),
                    parse_double(f[5]), parse_double(f[6]), parse_double(f[7]), parse_double(f[8]),
                    parse_double(f[9])});
  }
  require(header_seen, "malformed_csv", "CSV header missing");
  return rows;
}

}  // namespace cemimo
