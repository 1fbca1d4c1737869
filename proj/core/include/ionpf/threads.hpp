#pragma once

#include <cstddef>

namespace ionpf {

/// Caps the worker pool used by parallel loops. Zero restores the default.
/// Results do not depend on the setting.
void set_thread_limit(std::size_t threads);
/// Workers a parallel loop may use; 1 without OpenMP.
std::size_t thread_limit();

}  // namespace ionpf
