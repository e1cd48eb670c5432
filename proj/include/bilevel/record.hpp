#ifndef BILEVEL_RECORD_HPP
#define BILEVEL_RECORD_HPP

#include <functional>
#include <limits>
#include <vector>

#include "bilevel/types.hpp"

namespace bilevel {

/// One logged trajectory row. Metrics that do not apply (e.g. tracker error
/// for algorithms without trackers) hold NaN.
struct RunRow {
  long k = 0;
  std::int64_t samples_xi = 0;
  std::int64_t samples_phi = 0;
  double upper_error = std::numeric_limits<double>::quiet_NaN();
  double lower_error = std::numeric_limits<double>::quiet_NaN();
  double moreau = std::numeric_limits<double>::quiet_NaN();
  double tracker_mse_xy = std::numeric_limits<double>::quiet_NaN();
  double tracker_mse_yy = std::numeric_limits<double>::quiet_NaN();
};

/// Full trajectory of one run plus the terminal summary.
struct RunRecord {
  std::vector<RunRow> rows;
  long iters = 0;
  SampleCounter samples;
  Point final_point;
  double wall_seconds = 0.0;  // measured; never written into trajectory files
};

/// What a recorder sees at each iteration, uniform across algorithms.
/// Tracker pointers are null for algorithms that do not carry trackers.
struct IterationView {
  long k = 0;
  const Point* point = nullptr;
  SampleCounter samples;
  const Matrix* tracker_xy = nullptr;
  const Matrix* tracker_yy = nullptr;
};

/// Called once at initialization (k = 0) and once after every iteration;
/// appends rows to the record at whatever cadence it chooses.
using Recorder = std::function<void(const IterationView&, RunRecord&)>;

/// Recorder that logs nothing (sample counters and final point still land in
/// the record).
inline Recorder null_recorder() {
  return [](const IterationView&, RunRecord&) {};
}

}  // namespace bilevel

#endif  // BILEVEL_RECORD_HPP
