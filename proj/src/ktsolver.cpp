#include "ktba/ktsolver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ktba {

void validate(const KTProblem& p) {
  if (p.L.domain_dim() != p.A.dim()) {
    throw SignatureError("KTProblem: L domain " +
                         std::to_string(p.L.domain_dim()) + " vs A dim " +
                         std::to_string(p.A.dim()));
  }
  if (p.L.codomain_dim() != p.B.dim()) {
    throw SignatureError("KTProblem: L codomain " +
                         std::to_string(p.L.codomain_dim()) + " vs B dim " +
                         std::to_string(p.B.dim()));
  }
  require_same_dim(p.x0, Vec::Zero(p.A.dim()), "KTProblem x0");
  require_same_dim(p.v0_star, Vec::Zero(p.B.dim()), "KTProblem v0*");
  require_finite(p.x0, "KTProblem x0");
  require_finite(p.v0_star, "KTProblem v0*");
  auto check_blocks = [](const std::vector<Index>& dims, Index total,
                         const char* what) {
    if (dims.empty()) return;
    Index sum = 0;
    for (Index d : dims) sum += d;
    if (sum != total) {
      throw SignatureError(std::string("KTProblem: ") + what +
                           " block layout does not cover the space");
    }
  };
  check_blocks(p.primal_blocks, p.A.dim(), "primal");
  check_blocks(p.dual_blocks, p.B.dim(), "dual");
}

double theorem_theta_numerator(const Vec& x, const Vec& v_star,
                               const GraphSelection& sel) {
  return inner(x, sel.s_star) + inner(sel.t, v_star) -
         inner(sel.a, sel.a_star) - inner(sel.b, sel.b_star);
}

GraphSelection select_resolvent(const KTProblem& problem, const Vec& x,
                                const Vec& v_star, double gamma, double mu) {
  const LinearMap& L = problem.L;
  GraphSelection sel;
  const Vec Ltv = L.adjoint_apply(v_star);
  sel.a = problem.A.resolvent(gamma, x - gamma * Ltv);
  sel.l = L.apply(x);
  sel.b = problem.B.resolvent(mu, sel.l + mu * v_star);
  const Vec xa = x - sel.a;
  const Vec lb = sel.l - sel.b;
  sel.s_star = xa / gamma + L.adjoint_apply(lb) / mu;
  sel.t = sel.b - L.apply(sel.a);
  sel.tau = squared_norm(sel.s_star) + squared_norm(sel.t);
  sel.theta_numerator = squared_norm(xa) / gamma + squared_norm(lb) / mu;
  sel.a_star = xa / gamma - Ltv;
  sel.b_star = lb / mu + v_star;
  return sel;
}

double g_alpha(double epsilon, double norm_L) {
  const double n2 = norm_L * norm_L;
  return epsilon /
         (1.0 + n2 + 2.0 * (1.0 - epsilon * epsilon) * std::max(1.0, n2));
}

double g_alpha_margin(const KTProblem& problem, const Vec& x,
                      const Vec& v_star, const GraphSelection& sel,
                      double alpha) {
  const LinearMap& L = problem.L;
  const double lhs =
      inner(Vec(x - sel.a), Vec(sel.a_star + L.adjoint_apply(v_star))) +
      inner(Vec(L.apply(x) - sel.b), Vec(sel.b_star - v_star));
  const double rhs =
      squared_norm(Vec(sel.a_star + L.adjoint_apply(sel.b_star))) +
      squared_norm(Vec(L.apply(sel.a) - sel.b));
  return lhs - alpha * rhs;
}

Schedule constant_schedule(double value) {
  return [value](std::size_t) { return value; };
}

std::string_view to_string(Mode mode) {
  return mode == Mode::haugazeau ? "haugazeau" : "fejer";
}

std::string_view to_string(Status status) {
  switch (status) {
    case Status::kt_point_reached:
      return "kt_point_reached";
    case Status::step_tolerance:
      return "step_tolerance";
    case Status::max_iters:
      return "max_iters";
    case Status::breakdown:
      return "breakdown";
  }
  return "unknown";
}

namespace {

Schedule lambda_schedule(const SolverConfig& c) {
  if (c.lambda) return c.lambda;
  return constant_schedule(c.mode == Mode::haugazeau ? 1.0 : 1.8);
}

void check_range(double value, double lo, double hi, const char* name,
                 std::size_t n) {
  if (!(value >= lo && value <= hi)) {
    throw ParameterError(std::string(name) + "_" + std::to_string(n) + " = " +
                         std::to_string(value) + " outside [" +
                         std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

void validate(const SolverConfig& c) {
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) {
    throw ParameterError("SolverConfig: epsilon must lie in (0,1), got " +
                         std::to_string(c.epsilon));
  }
  if (c.max_iters < 1) throw ParameterError("SolverConfig: max_iters < 1");
  if (!(c.tau_tol >= 0.0)) throw ParameterError("SolverConfig: tau_tol < 0");
  if (!(c.dist_tol >= 0.0)) throw ParameterError("SolverConfig: dist_tol < 0");
  if (c.dist_patience < 1) {
    throw ParameterError("SolverConfig: dist_patience < 1");
  }
  if (!c.gamma || !c.mu) {
    throw ParameterError("SolverConfig: gamma and mu schedules are required");
  }
  check_range(c.gamma(0), c.epsilon, 1.0 / c.epsilon, "gamma", 0);
  check_range(c.mu(0), c.epsilon, 1.0 / c.epsilon, "mu", 0);
  const double lambda_hi = c.mode == Mode::haugazeau ? 1.0 : 2.0 - c.epsilon;
  check_range(lambda_schedule(c)(0), c.epsilon, lambda_hi, "lambda", 0);
}

namespace {

std::vector<double> block_norms(const Vec& v, const std::vector<Index>& dims) {
  std::vector<double> out;
  if (dims.empty()) {
    out.push_back(norm(v));
    return out;
  }
  Index off = 0;
  for (Index d : dims) {
    out.push_back(norm(Vec(v.segment(off, d))));
    off += d;
  }
  return out;
}

bool selection_finite(const GraphSelection& s) {
  return s.a.allFinite() && s.b.allFinite() && s.s_star.allFinite() &&
         s.t.allFinite() && std::isfinite(s.tau) &&
         std::isfinite(s.theta_numerator);
}

}  // namespace

std::variant<StepOutcome, EmptyIntersection> theorem_step(
    const Vec& x_n, const Vec& v_n, const GraphSelection& sel, double lambda,
    const Vec& x0, const Vec& v0, Mode mode) {
  StepOutcome out;
  out.theta = sel.tau == 0.0 ? 0.0 : lambda * sel.theta_numerator / sel.tau;
  out.x_half = x_n - out.theta * sel.s_star;
  out.v_half = v_n - out.theta * sel.t;

  const Index n = x_n.size();
  const Index k = v_n.size();
  auto stack = [n, k](const Vec& x, const Vec& v) {
    Vec w(n + k);
    w << x, v;
    return w;
  };
  const Vec w0 = stack(x0, v0);
  const Vec wn = stack(x_n, v_n);
  const Vec wh = stack(out.x_half, out.v_half);
  out.q = q_scalars(w0, wn, wh);
  out.branch = classify(out.q);

  if (mode == Mode::fejer) {
    out.x_next = out.x_half;
    out.v_next = out.v_half;
    return out;
  }
  if (out.branch == QCase::empty) return EmptyIntersection{out.q};
  const Vec next = q_combine(out.branch, out.q, w0, wn, wh);
  out.x_next = next.head(n);
  out.v_next = next.tail(k);
  return out;
}

SolveResult run_theorem_iteration(const KTProblem& problem,
                                  const SolverConfig& config,
                                  const SelectionOracle& selection) {
  validate(problem);
  validate(config);
  const Schedule lambda = lambda_schedule(config);
  const double eps = config.epsilon;
  const double lambda_hi = config.mode == Mode::haugazeau ? 1.0 : 2.0 - eps;

  SolveResult result;
  Vec x = problem.x0;
  Vec v = problem.v0_star;
  std::size_t small_steps = 0;
  auto push = [&](IterationRecord&& rec) {
    if (!config.record_trace) result.trace.clear();
    result.trace.push_back(std::move(rec));
  };

  for (std::size_t n = 0; n < config.max_iters; ++n) {
    const double gamma_n = config.gamma(n);
    const double mu_n = config.mu(n);
    check_range(gamma_n, eps, 1.0 / eps, "gamma", n);
    check_range(mu_n, eps, 1.0 / eps, "mu", n);

    GraphSelection sel = selection(n, x, v);
    if (!selection_finite(sel)) {
      throw NonFiniteIterate("non-finite graph selection at iteration " +
                                 std::to_string(n),
                             std::move(result.trace));
    }

    IterationRecord rec;
    rec.n = n;
    rec.tau = sel.tau;
    rec.gamma = gamma_n;
    rec.mu = mu_n;
    rec.start_distance = std::sqrt((problem.x0 - x).squaredNorm() +
                                   (problem.v0_star - v).squaredNorm());
    rec.s_norm = norm(sel.s_star);
    rec.t_norm = norm(sel.t);
    const Vec xa = x - sel.a;
    const Vec lb = sel.l - sel.b;
    rec.primal_residual = norm(xa);
    rec.dual_residual = norm(lb);
    rec.primal_block_residuals = block_norms(xa, problem.primal_blocks);
    rec.dual_block_residuals = block_norms(lb, problem.dual_blocks);

    if (sel.tau <= config.tau_tol) {
      // tau_n = 0 certifies (x_n, v_n*) = P_Z(x0, v0*).
      rec.x = x;
      rec.v_star = v;
      rec.x_half = x;
      rec.v_half = v;
      rec.q = q_scalars(BlockVec({problem.x0, problem.v0_star}),
                        BlockVec({x, v}), BlockVec({x, v}));
      rec.branch = classify(rec.q);
      push(std::move(rec));
      result.status = Status::kt_point_reached;
      result.x = std::move(x);
      result.v_star = std::move(v);
      return result;
    }

    const double lambda_n = lambda(n);
    check_range(lambda_n, eps, lambda_hi, "lambda", n);
    rec.lambda = lambda_n;

    auto outcome = theorem_step(x, v, sel, lambda_n, problem.x0,
                                problem.v0_star, config.mode);
    if (auto* empty = std::get_if<EmptyIntersection>(&outcome)) {
      rec.q = empty->q;
      rec.branch = QCase::empty;
      rec.x = x;
      rec.v_star = v;
      push(std::move(rec));
      result.status = Status::breakdown;
      result.breakdown = *empty;
      result.x = std::move(x);
      result.v_star = std::move(v);
      return result;
    }
    StepOutcome& step = std::get<StepOutcome>(outcome);
    rec.theta = step.theta;
    rec.q = step.q;
    rec.branch = step.branch;
    rec.x_half = std::move(step.x_half);
    rec.v_half = std::move(step.v_half);
    const bool finite = step.x_next.allFinite() && step.v_next.allFinite();
    const double moved = std::sqrt((step.x_next - x).squaredNorm() +
                                   (step.v_next - v).squaredNorm());
    rec.x = std::move(x);
    rec.v_star = std::move(v);
    push(std::move(rec));

    if (!finite) {
      throw NonFiniteIterate(
          "non-finite iterate at iteration " + std::to_string(n + 1),
          std::move(result.trace));
    }
    x = std::move(step.x_next);
    v = std::move(step.v_next);
    small_steps = moved <= config.dist_tol ? small_steps + 1 : 0;
    if (small_steps >= config.dist_patience) {
      result.status = Status::step_tolerance;
      result.x = std::move(x);
      result.v_star = std::move(v);
      return result;
    }
  }
  result.status = Status::max_iters;
  result.x = std::move(x);
  result.v_star = std::move(v);
  return result;
}

SolveResult solve(const KTProblem& problem, const SolverConfig& config) {
  const SelectionOracle oracle = [&](std::size_t n, const Vec& x,
                                     const Vec& v) {
    return select_resolvent(problem, x, v, config.gamma(n), config.mu(n));
  };
  return run_theorem_iteration(problem, config, oracle);
}

SolveResult fejer_solve(const KTProblem& problem, const SolverConfig& config) {
  if (config.mode != Mode::fejer) {
    throw ParameterError("fejer_solve: config.mode must be fejer");
  }
  return solve(problem, config);
}

KTResidual kt_residual(const KTProblem& problem, const Vec& x,
                       const Vec& v_star, double gamma, double mu) {
  const GraphSelection sel = select_resolvent(problem, x, v_star, gamma, mu);
  return {norm(sel.s_star), norm(sel.t)};
}

}  // namespace ktba
