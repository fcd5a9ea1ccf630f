#pragma once

#include <cstddef>

namespace g2glue {

/// Caps the worker threads used by parallel scans; 0 restores the default.
void set_thread_limit(std::size_t threads);

/// Reads G2GLUE_THREADS and applies it; returns the value applied (0 if unset).
std::size_t apply_thread_limit_from_env();

/// Worker threads currently available to parallel scans.
std::size_t max_parallelism();

}  // namespace g2glue
