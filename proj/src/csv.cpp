#include "bilevel/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace bilevel {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Index CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<Index>(i);
  throw DataError("csv: no column named '" + name + "'");
}

std::vector<double> CsvTable::column_values(const std::string& name) const {
  const auto c = static_cast<std::size_t>(column(name));
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

std::string trajectory_to_csv(const RunRecord& record) {
  std::string out;
  const auto& header = trajectory_header();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';
  for (const RunRow& r : record.rows) {
    out += std::to_string(r.k);
    out += ',';
    out += std::to_string(r.samples_xi);
    out += ',';
    out += std::to_string(r.samples_phi);
    for (double v : {r.upper_error, r.lower_error, r.moreau, r.tracker_mse_xy, r.tracker_mse_yy}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw DataError("cannot open for writing: " + path);
  f.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!f) throw DataError("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CsvTable parse_csv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  bool first = true;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      fields.push_back(line.substr(pos, comma - pos));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (first) {
      table.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError("csv: ragged row at line " + std::to_string(line_no));
    std::vector<double> row(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const std::string& tok = fields[i];
      if (tok == "nan") {
        row[i] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      double v = 0.0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw DataError("csv: bad number '" + tok + "' at line " + std::to_string(line_no));
      row[i] = v;
    }
    table.rows.push_back(std::move(row));
  }
  if (first) throw DataError("csv: empty input");
  return table;
}

CsvTable read_csv_file(const std::string& path) { return parse_csv(read_file(path)); }

}  // namespace bilevel
