#pragma once

// Many independent runs at once. Each job gets its own input script and its
// own machine; only the program terms are shared, and those are immutable.

#include <vector>

#include "aleph/runner.hpp"

namespace aleph {

struct BatchJob {
  TermPtr program;
  std::vector<Integer> inputs;
};

struct BatchOptions {
  RunOptions run;
  bool tracing = false;
  /// 0 means the OpenMP default.
  int threads = 0;
};

/// Results in job order. Identical to run_batch_serial for the same jobs.
std::vector<RunReport> run_batch(const std::vector<BatchJob>& jobs, const BatchOptions& options = {});

/// One job after another on the calling thread.
std::vector<RunReport> run_batch_serial(const std::vector<BatchJob>& jobs, const BatchOptions& options = {});

/// Number of threads run_batch would use.
int batch_threads(const BatchOptions& options = {});

}  // namespace aleph
