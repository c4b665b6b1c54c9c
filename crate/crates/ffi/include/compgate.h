#ifndef COMPGATE_H
#define COMPGATE_H

/* Generated with cbindgen:0.29.4 */

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CgStatus {
  CG_STATUS_OK = 0,
  CG_STATUS_NULL_POINTER = 1,
  CG_STATUS_INVALID_ARGUMENT = 2,
  CG_STATUS_NOT_NORMALIZED = 3,
  CG_STATUS_LINEARLY_DEPENDENT_PAIR = 4,
  CG_STATUS_INFEASIBLE_EFFICIENCY = 5,
  CG_STATUS_ZERO_SUCCESS_PROBABILITY = 6,
  CG_STATUS_NUMERICAL_FAILURE = 7,
  CG_STATUS_BUFFER_TOO_SMALL = 8,
  CG_STATUS_PANIC = 99,
} CgStatus;

typedef enum CgBranch {
  CG_BRANCH_PLUS = 0,
  CG_BRANCH_MINUS = 1,
} CgBranch;

/**
 * A synthesized single-branch machine.
 */
typedef struct CgMachine CgMachine;

/**
 * A state pair with its derived complements, a gate and their Gram matrices.
 */
typedef struct CgProblem CgProblem;

typedef struct CgComplex {
  double re;
  double im;
} CgComplex;

/**
 * Gate coefficients `a`, `b` with `|a|² + |b|² = 1`.
 */
typedef struct CgGate {
  struct CgComplex a;
  struct CgComplex b;
} CgGate;

/**
 * `alpha|0⟩ + beta|1⟩`
 */
typedef struct CgQubit {
  struct CgComplex alpha;
  struct CgComplex beta;
} CgQubit;

typedef struct CgOptimization {
  double eff1;
  double eff2;
  double average;
  double boundary_certificate;
  size_t iterations;
} CgOptimization;

typedef struct CgExactRun {
  double success_prob;
  struct CgQubit post_state;
  double fidelity;
} CgExactRun;

typedef struct CgSimulation {
  double exact_success_prob;
  double observed_success_freq;
  uint64_t trials;
  uint64_t seed;
  /**
   * Negative when the success probability vanishes.
   */
  double post_fidelity;
} CgSimulation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Hadamard-like gate `a = b = 1/√2`.
 */
struct CgGate cg_gate_hadamard(void);

/**
 * `(cos(θ/2), e^{iφ} sin(θ/2))`.
 */
struct CgQubit cg_qubit_from_bloch(double theta, double phi);

/**
 * Complement `β*|0⟩ − α*|1⟩`. The input is used as given, without a norm check.
 */
struct CgQubit cg_qubit_complement(struct CgQubit q);

/**
 * Builds a problem handle. `*out` receives ownership; release with `cg_problem_free`.
 */
enum CgStatus cg_problem_new(struct CgQubit state1,
                             struct CgQubit state2,
                             struct CgGate gate,
                             struct CgProblem **out);

void cg_problem_free(struct CgProblem *problem);

/**
 * Derived complements `Ψ̄₁`, `Ψ̄₂`.
 */
enum CgStatus cg_problem_complements(const struct CgProblem *problem,
                                     struct CgQubit *out_bar1,
                                     struct CgQubit *out_bar2);

/**
 * Capped average-efficiency bounds of both branches.
 */
enum CgStatus cg_problem_bounds(const struct CgProblem *problem,
                                double *out_plus,
                                double *out_minus);

/**
 * Writes whether both residuals are PSD at `Γ = diag(gamma)`, `Λ = diag(delta)`.
 */
enum CgStatus cg_problem_check_feasible(const struct CgProblem *problem,
                                        double gamma1,
                                        double gamma2,
                                        double delta1,
                                        double delta2,
                                        double tol,
                                        bool *out_feasible);

enum CgStatus cg_problem_optimize(const struct CgProblem *problem,
                                  enum CgBranch branch,
                                  bool equal_eff,
                                  struct CgOptimization *out);

/**
 * Synthesizes the machine for one branch. Release with `cg_machine_free`.
 */
enum CgStatus cg_machine_synthesize(const struct CgProblem *problem,
                                    enum CgBranch branch,
                                    double eff1,
                                    double eff2,
                                    double tol,
                                    struct CgMachine **out);

void cg_machine_free(struct CgMachine *machine);

/**
 * Number of rows (and columns) of the machine unitary.
 */
size_t cg_machine_dimension(void);

/**
 * Copies the unitary in row-major order; `len` must be at least `dim²`.
 *
 * Joint basis index is `3·s + p` for system state `s` and probe state `p`.
 */
enum CgStatus cg_machine_unitary(const struct CgMachine *machine,
                                 struct CgComplex *out,
                                 size_t len);

/**
 * `‖U†U − I‖_F` of the synthesized unitary.
 */
enum CgStatus cg_machine_unitarity_defect(const struct CgMachine *machine, double *out);

enum CgStatus cg_machine_exact_run(const struct CgMachine *machine,
                                   struct CgQubit input,
                                   struct CgQubit target,
                                   struct CgExactRun *out);

enum CgStatus cg_machine_monte_carlo(const struct CgMachine *machine,
                                     struct CgQubit input,
                                     uint64_t trials,
                                     uint64_t seed,
                                     struct CgSimulation *out);

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len − 1` bytes. Returns the full message length.
 */
size_t cg_last_error_message(char *buf, size_t len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COMPGATE_H */
