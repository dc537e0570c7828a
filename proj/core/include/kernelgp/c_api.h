/* C-compatible entry points for host-language bindings.
 *
 * Arrays are flat, row-major, 64-bit floats. Data passed in is copied; no
 * pointer supplied by the caller is retained after a call returns. Problem
 * handles are integers looked up in a registry, so destroying a handle twice
 * or using a stale one returns KGP_ERR_INVALID_HANDLE instead of crashing.
 * A handle may be used from any thread but not from two threads at once
 * (KGP_ERR_BUSY). */
#ifndef KERNELGP_C_API_H
#define KERNELGP_C_API_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define KGP_API_VERSION_MAJOR 1
#define KGP_API_VERSION_MINOR 0
#define KGP_API_VERSION_PATCH 0

typedef enum kgp_status {
  KGP_OK = 0,
  KGP_ERR_INVALID_ARGUMENT = 1,
  KGP_ERR_NUMERICAL = 2,
  KGP_ERR_RESOURCE = 3,
  KGP_ERR_INVALID_HANDLE = 4,
  KGP_ERR_BUSY = 5,
  KGP_ERR_INTERNAL = 6
} kgp_status;

typedef enum kgp_kernel {
  KGP_KERNEL_GAUSSIAN = 0,
  KGP_KERNEL_MATERN32 = 1,
  KGP_KERNEL_MATERN52 = 2
} kgp_kernel;

typedef enum kgp_mode { KGP_MODE_EXACT = 0, KGP_MODE_ITERATIVE = 1 } kgp_mode;

/* 0 is never a valid handle. */
typedef uint64_t kgp_problem;

typedef struct kgp_options {
  double tol;
  double probe_tol;
  int64_t max_iter;
  int64_t num_probes;
  int64_t precond_rank; /* 0: automatic */
  int32_t use_precond;
  int32_t on_the_fly;   /* 0: dense kernel storage, 1: blocked on-the-fly */
  int64_t block_size;
  uint64_t seed;
} kgp_options;

void kgp_default_options(kgp_options* out);

const char* kgp_version(void);
void kgp_api_version(int* major, int* minor, int* patch);

/* Message of the last failed call on this thread ("" if none). */
const char* kgp_last_error(void);

int kgp_problem_create(const double* train_x, int64_t n, int64_t d, const double* train_y,
                       int kernel, int mode, const kgp_options* options, kgp_problem* out);

int kgp_problem_destroy(kgp_problem problem);

/* Loss and gradient at softplus-parameterized raw_params = (rho_l, rho_f,
 * rho_s). grad_raw receives dL/drho; grad_theta (may be NULL) receives
 * dL/d(l, f, s). */
int kgp_problem_loss_grad(kgp_problem problem, const double raw_params[3], double* loss,
                          double grad_raw[3], double grad_theta[3]);

/* Stateless prediction; params = (l, f, s). mean and stddev receive m values.
 * m = 0 is allowed and writes nothing. options may be NULL. */
int kgp_gpr_prediction(const double* train_x, int64_t n, int64_t d, const double* train_y,
                       const double* test_x, int64_t m, int kernel, const double params[3],
                       int mode, const kgp_options* options, double* mean, double* stddev);

typedef struct kgp_api_table {
  int32_t version_major;
  int32_t version_minor;
  int32_t version_patch;
  void (*default_options)(kgp_options*);
  const char* (*version)(void);
  const char* (*last_error)(void);
  int (*problem_create)(const double*, int64_t, int64_t, const double*, int, int,
                        const kgp_options*, kgp_problem*);
  int (*problem_destroy)(kgp_problem);
  int (*problem_loss_grad)(kgp_problem, const double*, double*, double*, double*);
  int (*gpr_prediction)(const double*, int64_t, int64_t, const double*, const double*, int64_t,
                        int, const double*, int, const kgp_options*, double*, double*);
} kgp_api_table;

const kgp_api_table* kgp_get_api(void);

#ifdef __cplusplus
}
#endif

#endif /* KERNELGP_C_API_H */
