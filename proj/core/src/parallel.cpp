#include "g2glue/parallel.hpp"

#include <tbb/global_control.h>

#include <cstdlib>
#include <memory>
#include <mutex>
#include <string>

#include "g2glue/errors.hpp"

namespace g2glue {

namespace {

std::mutex& control_mutex() {
  static std::mutex m;
  return m;
}

std::unique_ptr<tbb::global_control>& control() {
  static std::unique_ptr<tbb::global_control> c;
  return c;
}

}  // namespace

void set_thread_limit(std::size_t threads) {
  std::lock_guard<std::mutex> lock(control_mutex());
  control().reset();
  if (threads > 0)
    control() = std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism, threads);
}

std::size_t apply_thread_limit_from_env() {
  const char* v = std::getenv("G2GLUE_THREADS");
  if (v == nullptr || *v == '\0') return 0;
  std::size_t pos = 0;
  unsigned long n = 0;
  try {
    n = std::stoul(v, &pos);
  } catch (const std::exception&) {
    throw DomainError(std::string("G2GLUE_THREADS must be a positive integer, got '") + v + "'");
  }
  if (pos != std::string(v).size() || n == 0)
    throw DomainError(std::string("G2GLUE_THREADS must be a positive integer, got '") + v + "'");
  set_thread_limit(n);
  return n;
}

std::size_t max_parallelism() {
  return tbb::global_control::active_value(tbb::global_control::max_allowed_parallelism);
}

}  // namespace g2glue
