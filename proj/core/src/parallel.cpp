#include "kernelgp/parallel.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace kernelgp {

namespace {
int g_default_threads = -1;
}

void set_num_threads(int n) {
  if (g_default_threads < 0) g_default_threads = omp_get_max_threads();
  omp_set_num_threads(n > 0 ? n : g_default_threads);
}

int num_threads() { return omp_get_max_threads(); }

bool configure_threads_from_env() {
  const char* value = std::getenv(kThreadsEnvVar);
  if (value == nullptr) return false;
  int n = 0;
  const char* end = value + std::strlen(value);
  auto [ptr, ec] = std::from_chars(value, end, n);
  if (ec != std::errc() || ptr != end || n <= 0) return false;
  set_num_threads(n);
  return true;
}

}  // namespace kernelgp
