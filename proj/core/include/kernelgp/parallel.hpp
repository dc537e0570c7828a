#pragma once

namespace kernelgp {

/// Environment variable consulted by configure_threads_from_env().
inline constexpr const char* kThreadsEnvVar = "KERNELGP_NUM_THREADS";

/// Sets the worker count used by blocked kernel matmuls. n <= 0 restores the
/// runtime default.
void set_num_threads(int n);

/// Current worker count (>= 1).
int num_threads();

/// Applies KERNELGP_NUM_THREADS when set to a positive integer. Returns true
/// if the variable was present and valid.
bool configure_threads_from_env();

}  // namespace kernelgp
