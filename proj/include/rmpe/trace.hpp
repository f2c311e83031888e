#pragma once

#include <cstdint>
#include <vector>

namespace rmpe {

struct TraceRecord {
  std::int64_t oracle_calls = 0;
  double f_gap = 0.0;
  double dist = 0.0;
  std::int64_t wall_ns = 0;
};

using ConvergenceTrace = std::vector<TraceRecord>;

}  // namespace rmpe
