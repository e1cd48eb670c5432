#ifndef BILEVEL_CSV_HPP
#define BILEVEL_CSV_HPP

#include <string>
#include <vector>

#include "bilevel/record.hpp"

namespace bilevel {

/// Shortest decimal form that round-trips through IEEE-754 binary64.
std::string format_double(double v);

/// Simple numeric CSV table: one header row, then doubles (NaN allowed).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  Index column(const std::string& name) const;  // throws if absent
  std::vector<double> column_values(const std::string& name) const;
};

inline const std::vector<std::string>& trajectory_header() {
  static const std::vector<std::string> h = {
      "k",          "samples_xi",     "samples_phi",    "upper_error", "lower_error",
      "moreau_sq",  "tracker_mse_xy", "tracker_mse_yy"};
  return h;
}

std::string trajectory_to_csv(const RunRecord& record);
void write_file(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);
CsvTable parse_csv(const std::string& text);
CsvTable read_csv_file(const std::string& path);

}  // namespace bilevel

#endif  // BILEVEL_CSV_HPP
