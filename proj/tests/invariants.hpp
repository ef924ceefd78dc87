#pragma once

// Per-iteration checks of a Haugazeau-mode run against a known projection
// z = P_Z(x0, v0*). Bounds on the partial sums follow from
// sum ||w_{n+1} - w_n||^2 <= d^2 and sum ||w_{n+1/2} - w_n||^2 <= d^2 with
// d = ||w_0 - z||, together with theta_n >= eps alpha.

#include "ktba/ktsolver.hpp"

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

namespace invariants {

using namespace ktba;

struct Report {
  std::vector<std::string> failures;
  std::size_t iterations = 0;
  double alpha = 0.0;
  double min_theta_ratio = INFINITY;  // min theta_n / (eps alpha)
  double max_halfspace_violation = -INFINITY;
  double max_distance_drop = -INFINITY;
  double min_g_alpha_margin = INFINITY;
  double sum_step_sq = 0.0;
  double sum_half_sq = 0.0;
  double sum_tau = 0.0;
  double sum_primal_sq = 0.0;
  double sum_dual_sq = 0.0;

  bool ok() const { return failures.empty(); }
  std::string text() const {
    std::ostringstream ss;
    for (const auto& f : failures) ss << f << '\n';
    return ss.str();
  }
};

inline Report check_theorem(const KTProblem& p, const SolverConfig& config,
                            const SolveResult& result, const Vec& zx,
                            const Vec& zv) {
  Report rep;
  const double eps = config.epsilon;
  const double normL = operator_norm_estimate(p.L, 200);
  rep.alpha = g_alpha(eps, 1.1 * normL);
  const double d2 = (p.x0 - zx).squaredNorm() + (p.v0_star - zv).squaredNorm();
  const double scale = 1.0 + d2 + zx.squaredNorm() + zv.squaredNorm();
  auto fail = [&](std::size_t n, const std::string& what) {
    if (rep.failures.size() < 20) {
      rep.failures.push_back("iteration " + std::to_string(n) + ": " + what);
    }
  };

  double prev = 0.0;
  double gamma_max = 0.0;
  double mu_max = 0.0;
  double lambda_min = INFINITY;
  const auto& tr = result.trace;
  rep.iterations = tr.size();
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const auto& r = tr[i];
    gamma_max = std::max(gamma_max, r.gamma);
    mu_max = std::max(mu_max, r.mu);
    if (r.start_distance < prev - 1e-12) fail(r.n, "start distance decreased");
    rep.max_distance_drop = std::max(rep.max_distance_drop, prev - r.start_distance);
    prev = r.start_distance;
    if (r.start_distance > std::sqrt(d2) + 1e-9 * (1 + std::sqrt(d2))) {
      fail(r.n, "start distance exceeds ||w0 - P_Z w0||");
    }

    // z in H(w0, w_n) and z in H(w_n, w_half).
    const double h1 = (zx - r.x).dot(p.x0 - r.x) + (zv - r.v_star).dot(p.v0_star - r.v_star);
    const double h2 = (zx - r.x_half).dot(r.x - r.x_half) + (zv - r.v_half).dot(r.v_star - r.v_half);
    rep.max_halfspace_violation = std::max({rep.max_halfspace_violation, h1, h2});
    if (h1 > 1e-9 * scale) fail(r.n, "oracle point outside H(w0, w_n)");
    if (h2 > 1e-9 * scale) fail(r.n, "oracle point outside H(w_n, w_half)");

    const GraphSelection sel = select_resolvent(p, r.x, r.v_star, r.gamma, r.mu);
    const double margin = g_alpha_margin(p, r.x, r.v_star, sel, rep.alpha);
    rep.min_g_alpha_margin = std::min(rep.min_g_alpha_margin, margin);
    if (margin < -1e-12 * (1 + sel.tau)) fail(r.n, "selection outside G_alpha");

    if (r.tau > config.tau_tol) {
      lambda_min = std::min(lambda_min, r.lambda);
      const double ratio = r.theta / (eps * rep.alpha);
      rep.min_theta_ratio = std::min(rep.min_theta_ratio, ratio);
      if (ratio < 1.0) fail(r.n, "theta below eps * alpha");
    }

    rep.sum_tau += r.tau;
    rep.sum_primal_sq += r.primal_residual * r.primal_residual;
    rep.sum_dual_sq += r.dual_residual * r.dual_residual;
    rep.sum_half_sq += (r.x_half - r.x).squaredNorm() + (r.v_half - r.v_star).squaredNorm();
    const Vec& xn1 = i + 1 < tr.size() ? tr[i + 1].x : result.x;
    const Vec& vn1 = i + 1 < tr.size() ? tr[i + 1].v_star : result.v_star;
    rep.sum_step_sq += (xn1 - r.x).squaredNorm() + (vn1 - r.v_star).squaredNorm();
  }

  const double slack = 1e-9 * scale;
  if (rep.sum_step_sq > d2 + slack) fail(tr.size(), "sum ||w_{n+1} - w_n||^2 exceeds d^2");
  if (rep.sum_half_sq > d2 + slack) fail(tr.size(), "sum ||w_{n+1/2} - w_n||^2 exceeds d^2");
  const double ea = eps * rep.alpha;
  if (rep.sum_tau > d2 / (ea * ea) + slack) fail(tr.size(), "sum tau_n exceeds d^2 / (eps alpha)^2");
  if (std::isfinite(lambda_min)) {
    if (rep.sum_primal_sq > gamma_max * d2 / (lambda_min * ea) + slack) {
      fail(tr.size(), "sum ||x_n - a_n||^2 exceeds its bound");
    }
    if (rep.sum_dual_sq > mu_max * d2 / (lambda_min * ea) + slack) {
      fail(tr.size(), "sum ||L x_n - b_n||^2 exceeds its bound");
    }
  }
  return rep;
}

}  // namespace invariants
