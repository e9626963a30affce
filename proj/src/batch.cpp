#include "aleph/batch.hpp"

#include <exception>

#include <omp.h>

namespace aleph {

namespace {

RunReport run_job(const BatchJob& job, const BatchOptions& options) {
  ScriptedInput in(job.inputs);
  return options.tracing ? trace(job.program, in, options.run) : run(job.program, in, options.run);
}

}  // namespace

int batch_threads(const BatchOptions& options) {
  return options.threads > 0 ? options.threads : omp_get_max_threads();
}

std::vector<RunReport> run_batch(const std::vector<BatchJob>& jobs, const BatchOptions& options) {
  std::vector<RunReport> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto n = static_cast<std::ptrdiff_t>(jobs.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(batch_threads(options))
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      out[i] = run_job(jobs[i], options);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }

  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

std::vector<RunReport> run_batch_serial(const std::vector<BatchJob>& jobs, const BatchOptions& options) {
  std::vector<RunReport> out;
  out.reserve(jobs.size());
  for (const auto& job : jobs) out.push_back(run_job(job, options));
  return out;
}

}  // namespace aleph
