// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <span>

namespace mixk {

inline constexpr int kDefaultBatches = 20;

// Batch-means Monte Carlo standard error of the mean of a trace. The trace
// is split into `batches` equal batches (a remainder at the end is dropped);
// each batch must hold at least two draws.
double mc_standard_error(std::span<const double> trace, int batches = kDefaultBatches);

}  // namespace mixk
