#pragma once

// Coupled systems of monotone inclusions
//
//   z_i in A_i x_i + sum_k L_ki^* B_k(sum_j L_kj x_j - r_k),  i = 1..m,
//
// solved by lifting to a single inclusion on H_1 x ... x H_m and
// G_1 x ... x G_K, plus two front ends built on the lifting: relaxation of
// possibly inconsistent common-zero problems, and multivariate convex
// minimization through proximity operators.

#include "ktba/ktsolver.hpp"

#include <optional>
#include <vector>

namespace ktba {

struct SystemProblem {
  std::vector<MonotoneOp> A;               // m operators on H_i
  std::vector<MonotoneOp> B;               // K operators on G_k
  std::vector<Vec> z;                      // m
  std::vector<Vec> r;                      // K
  std::vector<std::vector<LinearMap>> L;   // K x m, L[k][i]: H_i -> G_k
  std::vector<Vec> x_start;                // m
  std::vector<Vec> v_start;                // K

  std::size_t m() const { return A.size(); }
  std::size_t K() const { return B.size(); }
  std::vector<Index> primal_dims() const;
  std::vector<Index> dual_dims() const;
};

/// Throws ValidationError listing every inconsistency.
void validate(const SystemProblem& sys);

/// A = x_i (A_i - z_i), B = x_k B_k(. - r_k), L = [L_ki]. The lifted
/// resolvents are J_{gA}(x) = (J_{gA_i}(x_i + g z_i))_i and
/// J_{mB}(y) = (r_k + J_{mB_k}(y_k - r_k))_k.
KTProblem lift(const SystemProblem& sys);

struct SystemSolution {
  std::vector<Vec> x;       // x_i limits
  std::vector<Vec> v_star;  // v_k* limits
  IterationTrace trace;     // includes per-block residuals
  Status status = Status::max_iters;
  std::optional<EmptyIntersection> breakdown;
};

SystemSolution solve_system(const SystemProblem& sys,
                            const SolverConfig& config);

/// Splits a lifted solve result back into blocks.
SystemSolution split_solution(const SystemProblem& sys, SolveResult result);

/// Relaxation of "find x with 0 in A x and 0 in B_k x for all k" to
/// 0 in A x + sum_k (B_k □ S_k) x, with parallel sum
/// B □ S = (B^{-1} + S^{-1})^{-1}.
struct RelaxationSpec {
  MonotoneOp A;
  std::vector<MonotoneOp> B;
  std::vector<MonotoneOp> S;  // strictly monotone kernels (rho Id, rho > 0)
  std::vector<Vec> x_start;   // K+1 blocks; empty means zero
  std::vector<Vec> v_start;   // K blocks; empty means zero
};

/// m = K+1 system with H_{k+1} = G_k = H, A_1 = A, A_{k+1} = S_k, z = r = 0,
/// L_k1 = Id and L_{k,k+1} = -Id (all other couplings zero). The first
/// primal block of the solution solves the relaxed inclusion.
SystemProblem build_relaxation(const RelaxationSpec& spec);

/// minimize sum_i (f_i(x_i) - <x_i, z_i>) + sum_k g_k(sum_i L_ki x_i - r_k),
/// with each f_i, g_k given as a catalogued subdifferential so that the
/// resolvents are proximity operators.
struct MinimizationSpec {
  std::vector<MonotoneOp> f;
  std::vector<MonotoneOp> g;
  std::vector<Vec> z;                     // empty means zero
  std::vector<Vec> r;                     // empty means zero
  std::vector<std::vector<LinearMap>> L;  // K x m
  std::vector<Vec> x_start;               // empty means zero
  std::vector<Vec> v_start;               // empty means zero
};

SystemProblem build_minimization(const MinimizationSpec& spec);

}  // namespace ktba
