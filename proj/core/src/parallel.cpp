#include "pintmf/parallel.hpp"
#include "pintmf/random.hpp"

#include <cstdlib>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pintmf {

void set_num_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n < 1 ? omp_get_num_procs() : n);
#else
  (void)n;
#endif
}

void configure_threads_from_env() {
  if (const char* v = std::getenv("PINTMF_NUM_THREADS")) {
    try {
      set_num_threads(std::stoi(v));
    } catch (const std::exception&) {
      // ignore malformed values
    }
  }
}

int num_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  // partial Fisher-Yates from the front
  for (int i = 0; i < k && i < n; ++i) {
    const auto j = i + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  idx.resize(static_cast<std::size_t>(std::min(k, n)));
  return idx;
}

}  // namespace pintmf
