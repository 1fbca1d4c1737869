#include "ionpf/threads.hpp"

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace ionpf {

#if defined(_OPENMP)
namespace {
const int kDefaultThreads = omp_get_max_threads();
}

void set_thread_limit(std::size_t threads) {
  omp_set_num_threads(threads == 0 ? kDefaultThreads : static_cast<int>(threads));
}

std::size_t thread_limit() { return static_cast<std::size_t>(omp_get_max_threads()); }
#else
void set_thread_limit(std::size_t) {}

std::size_t thread_limit() { return 1; }
#endif

}  // namespace ionpf
