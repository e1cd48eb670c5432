#include "bilevel/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace bilevel {

double Dataset::dot_row(Index i, const Vector& y) const {
  double s = 0.0;
  for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) s += val * y[idx];
  return s;
}

void Dataset::add_scaled_row(Index i, double c, Vector& out) const {
  for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) out[idx] += c * val;
}

Vector Dataset::dense_row(Index i) const {
  Vector v = Vector::Zero(dim);
  for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) v[idx] = val;
  return v;
}

double Dataset::row_norm(Index i) const {
  double s = 0.0;
  for (const auto& [idx, val] : rows[static_cast<std::size_t>(i)]) s += val * val;
  return std::sqrt(s);
}

double Dataset::max_row_norm() const {
  double m = 0.0;
  for (Index i = 0; i < n(); ++i) m = std::max(m, row_norm(i));
  return m;
}

void Dataset::validate() const {
  if (rows.size() != labels.size()) throw DataError("dataset rows/labels size mismatch");
  for (std::size_t r = 0; r < rows.size(); ++r) {
    Index prev = -1;
    for (const auto& [idx, val] : rows[r]) {
      if (idx <= prev || idx >= dim) throw DataError("dataset row has bad feature index");
      if (std::isnan(val)) throw DataError("dataset contains NaN feature value");
      prev = idx;
    }
    if (labels[r] != 1.0 && labels[r] != -1.0) throw DataError("dataset label outside {-1,+1}");
  }
}

namespace {

[[noreturn]] void fail(long line, const std::string& what) {
  throw ParseError("libsvm parse error at line " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& tok, long line) {
  const char* begin = tok.data();
  const char* end = begin + tok.size();
  double value = 0.0;
  auto res = std::from_chars(begin, end, value);
  if (res.ec != std::errc() || res.ptr != end) fail(line, "malformed number '" + tok + "'");
  if (std::isnan(value)) fail(line, "NaN value");
  return value;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, Index min_dim, std::ostream* warnings) {
  Dataset data;
  Index max_index = -1;
  std::string line;
  long line_no = 0;
  std::set<double> label_set;
  std::vector<double> raw_labels;

  while (std::getline(in, line)) {
    ++line_no;
    std::size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    const double label = parse_number(tok, line_no);
    if (label != -1.0 && label != 0.0 && label != 1.0 && label != 2.0)
      fail(line_no, "unsupported label value '" + tok + "'");
    label_set.insert(label);
    raw_labels.push_back(label);

    std::vector<std::pair<Index, double>> row;
    Index prev = 0;  // external indices are 1-based
    while (ls >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        fail(line_no, "malformed feature token '" + tok + "'");
      const double idx_num = parse_number(tok.substr(0, colon), line_no);
      const Index idx = static_cast<Index>(idx_num);
      if (static_cast<double>(idx) != idx_num || idx < 1)
        fail(line_no, "feature index must be a positive integer in '" + tok + "'");
      if (idx <= prev) fail(line_no, "feature indices not strictly ascending");
      const double val = parse_number(tok.substr(colon + 1), line_no);
      row.emplace_back(idx - 1, val);
      prev = idx;
    }
    if (!row.empty()) max_index = std::max(max_index, row.back().first);
    data.rows.push_back(std::move(row));
  }

  // Decide the label convention for the whole file.
  auto subset_of = [&](std::initializer_list<double> s) {
    return std::all_of(label_set.begin(), label_set.end(), [&](double v) {
      return std::find(s.begin(), s.end(), v) != s.end();
    });
  };
  if (subset_of({-1.0, 1.0})) {
    data.labels = std::move(raw_labels);
  } else if (subset_of({0.0, 1.0})) {
    if (warnings) *warnings << "libsvm: remapping labels {0,1} -> {-1,+1}\n";
    data.labels.reserve(raw_labels.size());
    for (double v : raw_labels) data.labels.push_back(v == 0.0 ? -1.0 : 1.0);
  } else if (subset_of({1.0, 2.0})) {
    if (warnings) *warnings << "libsvm: remapping labels {1,2} -> {-1,+1}\n";
    data.labels.reserve(raw_labels.size());
    for (double v : raw_labels) data.labels.push_back(v == 1.0 ? -1.0 : 1.0);
  } else {
    std::string set;
    for (double v : label_set) set += std::to_string(v) + " ";
    throw ParseError("libsvm parse error: unsupported label set { " + set + "}");
  }

  data.dim = std::max(max_index + 1, min_dim);
  data.validate();
  return data;
}

Dataset parse_libsvm(const std::string& text, Index min_dim, std::ostream* warnings) {
  std::istringstream in(text);
  return parse_libsvm(in, min_dim, warnings);
}

std::string serialize_libsvm(const Dataset& data) {
  std::string out;
  char buf[64];
  auto append_double = [&](double v) {
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, res.ptr);
  };
  for (Index i = 0; i < data.n(); ++i) {
    out += data.labels[static_cast<std::size_t>(i)] > 0 ? "1" : "-1";
    for (const auto& [idx, val] : data.rows[static_cast<std::size_t>(i)]) {
      out += ' ';
      out += std::to_string(idx + 1);
      out += ':';
      append_double(val);
    }
    out += '\n';
  }
  return out;
}

Dataset load_libsvm_file(const std::string& path, Index min_dim, std::ostream* warnings) {
  const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
  if (gz) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open " + path);
    std::string text;
    char buf[1 << 16];
    int got;
    while ((got = gzread(f, buf, sizeof(buf))) > 0) text.append(buf, static_cast<std::size_t>(got));
    const bool bad = got < 0;
    gzclose(f);
    if (bad) throw DataError("gzip read failed on " + path);
    return parse_libsvm(text, min_dim, warnings);
  }
  std::ifstream f(path);
  if (!f) throw DataError("cannot open " + path);
  return parse_libsvm(f, min_dim, warnings);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double val_fraction, std::uint64_t seed) {
  if (data.n() < 2) throw ConfigError("split requires at least two examples");
  if (!(val_fraction > 0.0 && val_fraction < 1.0))
    throw ConfigError("split fraction must lie in (0, 1)");
  const Index n = data.n();
  const Index n_val = static_cast<Index>(std::llround(val_fraction * static_cast<double>(n)));
  if (n_val == 0 || n_val == n) throw ConfigError("split fraction yields an empty side");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  Dataset train, val;
  train.dim = val.dim = data.dim;
  for (Index i = 0; i < n; ++i) {
    Dataset& side = i < n_val ? val : train;
    side.rows.push_back(data.rows[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    side.labels.push_back(data.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
  }
  return {std::move(train), std::move(val)};
}

std::vector<Index> minibatch(const Dataset& data, long batch, Rng& rng) {
  if (batch < 1) throw ConfigError("minibatch size must be >= 1");
  if (data.n() == 0) throw DataError("minibatch on empty dataset");
  std::uniform_int_distribution<Index> dist(0, data.n() - 1);
  std::vector<Index> out(static_cast<std::size_t>(batch));
  for (auto& i : out) i = dist(rng);
  return out;
}

}  // namespace bilevel
