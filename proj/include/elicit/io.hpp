#pragma once

#include <cstddef>
#include <functional>
#include <string>

namespace elicit {

/// Writes content to path via a sibling temp file and rename, so readers
/// never observe a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

/// '%.17g' formatting: round-trips doubles exactly through text.
std::string format_double(double v);

/// Number of worker threads: ELICIT_THREADS if set (>=1), else hardware
/// concurrency.
int worker_threads();

/// Runs fn(i) for i in [0, n) across worker_threads() threads in contiguous
/// chunks. fn must write only to per-index slots; results are then
/// independent of the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace elicit
