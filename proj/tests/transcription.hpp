#pragma once

// Line-by-line transcription of the block iteration for coupled systems,
// written against the factor operators without going through the lifting.

#include "ktba/systems.hpp"

#include <vector>

namespace transcription {

using namespace ktba;

struct State {
  std::vector<Vec> x;
  std::vector<Vec> v;
};

inline std::vector<State> run(const SystemProblem& s, double gamma, double mu,
                              double lambda, std::size_t iters) {
  const std::size_t m = s.m();
  const std::size_t K = s.K();
  std::vector<State> out;
  State w{s.x_start, s.v_start};
  const State w0 = w;
  for (std::size_t n = 0; n < iters; ++n) {
    out.push_back(w);
    std::vector<Vec> a(m), l(K), b(K), t(K), s_star(m);
    for (std::size_t i = 0; i < m; ++i) {
      Vec sum = Vec::Zero(s.z[i].size());
      for (std::size_t k = 0; k < K; ++k) sum += adjoint_apply(s.L[k][i], w.v[k]);
      a[i] = resolvent(s.A[i], gamma, Vec(w.x[i] + gamma * (s.z[i] - sum)));
    }
    for (std::size_t k = 0; k < K; ++k) {
      l[k] = Vec::Zero(s.r[k].size());
      for (std::size_t i = 0; i < m; ++i) l[k] += apply(s.L[k][i], w.x[i]);
      b[k] = s.r[k] + resolvent(s.B[k], mu, Vec(l[k] + mu * w.v[k] - s.r[k]));
      t[k] = b[k];
      for (std::size_t i = 0; i < m; ++i) t[k] -= apply(s.L[k][i], a[i]);
    }
    for (std::size_t i = 0; i < m; ++i) {
      s_star[i] = (w.x[i] - a[i]) / gamma;
      for (std::size_t k = 0; k < K; ++k) {
        s_star[i] += adjoint_apply(s.L[k][i], Vec(l[k] - b[k])) / mu;
      }
    }
    double tau = 0.0;
    for (std::size_t i = 0; i < m; ++i) tau += s_star[i].squaredNorm();
    for (std::size_t k = 0; k < K; ++k) tau += t[k].squaredNorm();
    double theta = 0.0;
    if (tau > 0.0) {
      double num = 0.0;
      double sx = 0.0;
      double sl = 0.0;
      for (std::size_t i = 0; i < m; ++i) sx += (w.x[i] - a[i]).squaredNorm();
      for (std::size_t k = 0; k < K; ++k) sl += (l[k] - b[k]).squaredNorm();
      num = sx / gamma + sl / mu;
      theta = lambda * num / tau;
    }
    State half = w;
    for (std::size_t i = 0; i < m; ++i) half.x[i] = w.x[i] - theta * s_star[i];
    for (std::size_t k = 0; k < K; ++k) half.v[k] = w.v[k] - theta * t[k];
    double chi = 0.0, mu_n = 0.0, nu = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      chi += (w0.x[i] - w.x[i]).dot(w.x[i] - half.x[i]);
      mu_n += (w0.x[i] - w.x[i]).squaredNorm();
      nu += (w.x[i] - half.x[i]).squaredNorm();
    }
    for (std::size_t k = 0; k < K; ++k) {
      chi += (w0.v[k] - w.v[k]).dot(w.v[k] - half.v[k]);
      mu_n += (w0.v[k] - w.v[k]).squaredNorm();
      nu += (w.v[k] - half.v[k]).squaredNorm();
    }
    const double rho = mu_n * nu - chi * chi;
    const double rho_tol = 1e-12 * mu_n * nu;
    State next = w;
    if (rho <= rho_tol && chi >= 0.0) {
      next = half;
    } else if (rho > rho_tol && chi * nu >= rho) {
      for (std::size_t i = 0; i < m; ++i) next.x[i] = w0.x[i] + (1 + chi / nu) * (half.x[i] - w.x[i]);
      for (std::size_t k = 0; k < K; ++k) next.v[k] = w0.v[k] + (1 + chi / nu) * (half.v[k] - w.v[k]);
    } else if (rho > rho_tol && chi * nu < rho) {
      for (std::size_t i = 0; i < m; ++i) {
        next.x[i] = w.x[i] + (nu / rho) * (chi * (w0.x[i] - w.x[i]) + mu_n * (half.x[i] - w.x[i]));
      }
      for (std::size_t k = 0; k < K; ++k) {
        next.v[k] = w.v[k] + (nu / rho) * (chi * (w0.v[k] - w.v[k]) + mu_n * (half.v[k] - w.v[k]));
      }
    } else {
      break;  // empty intersection
    }
    w = next;
  }
  return out;
}

}  // namespace transcription
