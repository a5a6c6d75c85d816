#pragma once

// Diagnostic series as CSV: header `t,E,Etilde,p,speed,dist_V,gradnorm_Vp`
// followed by one `I_nu_<nu>` column per configured rate. Values use the
// shortest round-trip decimal form, lines end in LF.

#include "vandamp/core.hpp"
#include "vandamp/diagnostics/energy_record.hpp"
#include "vandamp/runner/format.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace vandamp {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::vector<std::string> csv_header(const EnergyRecord& record) {
  std::vector<std::string> h{"t", "E", "Etilde", "p", "speed", "dist_V", "gradnorm_Vp"};
  for (double nu : record.nu) h.push_back("I_nu_" + format_rate(nu));
  return h;
}

inline std::string format_csv(const EnergyRecord& record) {
  std::string out;
  const auto header = csv_header(record);
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (std::size_t k = 0; k < record.size(); ++k) {
    const double row[] = {record.t[k],     record.E[k],     record.Etilde[k],     record.p[k],
                          record.speed[k], record.dist_V[k], record.gradnorm_Vp[k]};
    for (std::size_t i = 0; i < 7; ++i) {
      if (i) out += ',';
      out += format_real(row[i]);
    }
    for (const auto& series : record.I_nu) {
      out += ',';
      out += format_real(series[k]);
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  f.close();
  if (!f) throw IoError("failed writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  if (f.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

inline void emit_csv(const EnergyRecord& record, const std::string& path) {
  write_text_file(path, format_csv(record));
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;

  const std::vector<double>& column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return columns[i];
    throw InputError("csv: no column named '" + name + "'");
  }
  bool has(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }
  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

inline CsvTable parse_csv(std::string_view text) {
  CsvTable table;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? line.size() - start : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(c);
      table.columns.resize(cells.size());
      continue;
    }
    if (cells.size() != table.header.size())
      throw InputError("csv line " + std::to_string(line_no) + ": expected " +
                       std::to_string(table.header.size()) + " fields");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), v);
      if (ec != std::errc{} || ptr != cells[i].data() + cells[i].size())
        throw InputError("csv line " + std::to_string(line_no) + ": bad number '" +
                         std::string(cells[i]) + "'");
      table.columns[i].push_back(v);
    }
  }
  if (table.header.empty()) throw InputError("csv: empty input");
  return table;
}

/// Rebuilds the sampled series of a record from its CSV form (no checkpoints).
inline EnergyRecord record_from_csv(const CsvTable& table) {
  EnergyRecord r;
  r.t = table.column("t");
  r.E = table.column("E");
  r.Etilde = table.column("Etilde");
  r.p = table.column("p");
  r.speed = table.column("speed");
  r.dist_V = table.column("dist_V");
  r.gradnorm_Vp = table.column("gradnorm_Vp");
  for (std::size_t i = 7; i < table.header.size(); ++i) {
    const std::string& h = table.header[i];
    if (h.rfind("I_nu_", 0) != 0) throw InputError("csv: unexpected column '" + h + "'");
    double nu = 0.0;
    const std::string_view digits = std::string_view(h).substr(5);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), nu);
    if (ec != std::errc{} || ptr != digits.data() + digits.size())
      throw InputError("csv: cannot read the rate in column '" + h + "'");
    r.nu.push_back(nu);
    r.I_nu.push_back(table.columns[i]);
  }
  return r;
}

}  // namespace vandamp
