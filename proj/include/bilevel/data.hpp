#ifndef BILEVEL_DATA_HPP
#define BILEVEL_DATA_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "bilevel/types.hpp"

namespace bilevel {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Sparse labeled dataset in LIBSVM layout: per row, strictly ascending
/// 0-based feature indices (1-based in the external text format) and labels
/// in {-1, +1}.
struct Dataset {
  Index dim = 0;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;

  Index n() const { return static_cast<Index>(rows.size()); }

  double dot_row(Index i, const Vector& y) const;
  /// out += c * rows[i]
  void add_scaled_row(Index i, double c, Vector& out) const;
  Vector dense_row(Index i) const;
  double row_norm(Index i) const;
  double max_row_norm() const;

  void validate() const;
};

/// Parses `label idx:val idx:val ...` lines. Labels in {-1,+1} pass through;
/// datasets labeled {0,1} or {1,2} are remapped to {-1,+1} (larger label ->
/// +1) and a warning is written to `warnings` when given. Blank lines and
/// lines starting with '#' are skipped. dim is 1 + max feature index seen,
/// raised to min_dim when that is larger.
Dataset parse_libsvm(std::istream& in, Index min_dim = 0, std::ostream* warnings = nullptr);
Dataset parse_libsvm(const std::string& text, Index min_dim = 0, std::ostream* warnings = nullptr);

/// Canonical text form; parse(serialize(d)) reproduces d value-for-value.
std::string serialize_libsvm(const Dataset& data);

/// Reads a LIBSVM file, transparently inflating it when the name ends in .gz.
Dataset load_libsvm_file(const std::string& path, Index min_dim = 0, std::ostream* warnings = nullptr);

/// Seeded shuffle-then-partition. Returns (train, val); both nonempty.
std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction, std::uint64_t seed);

/// Uniform with-replacement draw of `batch` row indices.
std::vector<Index> minibatch(const Dataset& data, long batch, Rng& rng);

}  // namespace bilevel

#endif  // BILEVEL_DATA_HPP
