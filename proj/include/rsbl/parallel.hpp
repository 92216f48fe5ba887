#pragma once

// Fan-out of independent Monte Carlo trials. Results are stored by trial index
// so the reduced output never depends on scheduling.

#include <cstddef>
#include <exception>
#include <type_traits>
#include <vector>

namespace rsbl {

/// Runs fn(0), ..., fn(count-1) across OpenMP threads. If any call throws, the
/// exception of the lowest failing index is rethrown after all calls finish.
template <typename Fn>
auto map_trials(std::size_t count, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  using Result = std::invoke_result_t<Fn&, std::size_t>;
  std::vector<Result> results(count);
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      results[k] = fn(k);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Serial reference for map_trials.
template <typename Fn>
auto map_trials_serial(std::size_t count, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, std::size_t>> {
  std::vector<std::invoke_result_t<Fn&, std::size_t>> results;
  results.reserve(count);
  for (std::size_t i = 0; i < count; ++i) results.push_back(fn(i));
  return results;
}

}  // namespace rsbl
