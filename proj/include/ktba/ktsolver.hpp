#pragma once

// Strongly convergent primal-dual iteration for the best approximation to a
// reference point (x0, v0*) from the Kuhn-Tucker set
//
//   Z = {(x, v*) : -L* v* in A x  and  L x in B^{-1} v*}
//
// of the inclusion 0 in A x + L* B L x. Each iteration picks graph points of A
// and B, cuts a half-space containing Z, and projects (x0, v0*) onto the
// intersection of that cut with H((x0,v0*), (x_n,v_n*)).
//
// The solver never needs ||L||; the norm only enters diagnostics.

#include "ktba/errors.hpp"
#include "ktba/haugazeau.hpp"
#include "ktba/operators.hpp"
#include "ktba/space.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace ktba {

struct KTProblem {
  MonotoneOp A;  // on H
  MonotoneOp B;  // on G
  LinearMap L;   // H -> G
  Vec x0;
  Vec v0_star;
  // Optional product-space layout of H and G; enables per-block residuals.
  std::vector<Index> primal_blocks;
  std::vector<Index> dual_blocks;
};

/// Throws SignatureError / NonFiniteError on inconsistent problems.
void validate(const KTProblem& problem);

/// Graph points (a, a*) of A and (b, b*) of B chosen at an iterate.
struct GraphSelection {
  Vec a;
  Vec b;
  Vec a_star;
  Vec b_star;
  Vec s_star;  // a* + L* b*
  Vec t;       // b - L a
  double tau = 0.0;  // ||s*||^2 + ||t||^2
  double theta_numerator = 0.0;
  Vec l;       // L x_n
};

/// <x, s*> + <t, v*> - <a, a*> - <b, b*>: the numerator of the relaxed step
/// for an arbitrary selection.
double theorem_theta_numerator(const Vec& x, const Vec& v_star,
                               const GraphSelection& sel);

/// Resolvent-based selection:
///   a = J_{gamma A}(x - gamma L* v*),  l = L x,  b = J_{mu B}(l + mu v*),
///   s* = (x - a)/gamma + L*(l - b)/mu,  t = b - L a,
///   a* = (x - a)/gamma - L* v*,  b* = (l - b)/mu + v*,
/// with theta_numerator = ||x - a||^2/gamma + ||l - b||^2/mu.
GraphSelection select_resolvent(const KTProblem& problem, const Vec& x,
                                const Vec& v_star, double gamma, double mu);

/// alpha = eps / (1 + ||L||^2 + 2 (1 - eps^2) max(1, ||L||^2)).
double g_alpha(double epsilon, double norm_L);

/// <x - a, a* + L* v*> + <Lx - b, b* - v*> - alpha (||a* + L* b*||^2 +
/// ||La - b||^2). Nonnegative when the selection lies in G_alpha(x, v*).
double g_alpha_margin(const KTProblem& problem, const Vec& x,
                      const Vec& v_star, const GraphSelection& sel,
                      double alpha);

using Schedule = std::function<double(std::size_t)>;
Schedule constant_schedule(double value);

enum class Mode { haugazeau, fejer };
std::string_view to_string(Mode mode);

struct SolverConfig {
  double epsilon = 0.1;
  /// Empty means the mode default: 1 (haugazeau) or 1.8 (fejer).
  Schedule lambda;
  Schedule gamma = constant_schedule(1.0);
  Schedule mu = constant_schedule(1.0);
  std::size_t max_iters = 5000;
  double tau_tol = 1e-16;
  double dist_tol = 1e-10;
  std::size_t dist_patience = 5;
  Mode mode = Mode::haugazeau;
  /// When false only the most recent record is kept in the trace.
  bool record_trace = true;
};

void validate(const SolverConfig& config);

struct IterationRecord {
  std::size_t n = 0;
  double tau = 0.0;
  double theta = 0.0;
  double lambda = 0.0;
  double gamma = 0.0;
  double mu = 0.0;
  QScalars q;
  QCase branch = QCase::keep_z;
  double start_distance = 0.0;   // ||(x0, v0*) - (x_n, v_n*)||
  double s_norm = 0.0;
  double t_norm = 0.0;
  double primal_residual = 0.0;  // ||x_n - a_n||
  double dual_residual = 0.0;    // ||L x_n - b_n||
  std::vector<double> primal_block_residuals;
  std::vector<double> dual_block_residuals;
  Vec x;       // x_n
  Vec v_star;  // v_n*
  Vec x_half;
  Vec v_half;
};

using IterationTrace = std::vector<IterationRecord>;

enum class Status { kt_point_reached, step_tolerance, max_iters, breakdown };
std::string_view to_string(Status status);

struct SolveResult {
  Vec x;
  Vec v_star;
  IterationTrace trace;
  Status status = Status::max_iters;
  std::optional<EmptyIntersection> breakdown;
};

/// Thrown when an iterate picks up NaN or infinity; carries the trace so far.
class NonFiniteIterate : public NonFiniteError {
 public:
  NonFiniteIterate(const std::string& what, IterationTrace trace)
      : NonFiniteError(what), trace_(std::move(trace)) {}
  const IterationTrace& trace() const { return trace_; }

 private:
  IterationTrace trace_;
};

struct StepOutcome {
  double theta = 0.0;
  Vec x_half;
  Vec v_half;
  QScalars q;
  QCase branch = QCase::keep_z;
  Vec x_next;
  Vec v_next;
};

/// One update from (x_n, v_n*) given a selection made there: the relaxed
/// half-step followed by the projection of (x0, v0*) onto the two
/// half-spaces (haugazeau) or the plain half-step (fejer). Returns
/// EmptyIntersection on numerical breakdown.
std::variant<StepOutcome, EmptyIntersection> theorem_step(
    const Vec& x_n, const Vec& v_n, const GraphSelection& sel, double lambda,
    const Vec& x0, const Vec& v0, Mode mode = Mode::haugazeau);

/// Any rule producing a selection in G_alpha(x_n, v_n*) for a fixed alpha.
using SelectionOracle = std::function<GraphSelection(
    std::size_t n, const Vec& x, const Vec& v_star)>;

/// Generic iteration over a pluggable selection oracle.
SolveResult run_theorem_iteration(const KTProblem& problem,
                                  const SolverConfig& config,
                                  const SelectionOracle& selection);

/// Resolvent-selection solver; dispatches on config.mode.
SolveResult solve(const KTProblem& problem, const SolverConfig& config);

/// Weakly convergent baseline (no projection step). Requires mode = fejer.
SolveResult fejer_solve(const KTProblem& problem, const SolverConfig& config);

struct KTResidual {
  double s_norm = 0.0;
  double t_norm = 0.0;
};

/// ||s*|| and ||t|| of a fresh resolvent selection at (x, v*). Both vanish
/// exactly on Z.
KTResidual kt_residual(const KTProblem& problem, const Vec& x,
                       const Vec& v_star, double gamma, double mu);

}  // namespace ktba
