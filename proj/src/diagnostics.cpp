// Apache License, Version 2.0, refer to LICENSE.txt

#include "mixk/diagnostics.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mixk {

double mc_standard_error(std::span<const double> trace, int batches) {
  if (batches < 2) throw std::invalid_argument("mc_standard_error: need at least 2 batches");
  const std::size_t size = trace.size() / static_cast<std::size_t>(batches);
  if (size < 2) throw std::invalid_argument("mc_standard_error: trace too short for batch means");

  std::vector<double> means(batches, 0.0);
  for (int b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < size; ++i) s += trace[b * size + i];
    means[b] = s / static_cast<double>(size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= batches;
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  return std::sqrt(ss / (batches - 1) / batches);
}

}  // namespace mixk
