#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace bkuq {

using cplx = std::complex<double>;

// Raised when a configuration or precondition check rejects the input.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

// Raised when a numerical procedure fails to meet its own accuracy checks.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class CacheError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Number of worker threads used by parallel_for; 0 means hardware concurrency.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is handled by exactly one thread and
// callers write results into per-index slots, so output never depends on
// scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace bkuq
