#include "ktba/harness/trace_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace ktba::harness {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trace_header(Index primal_dim, Index dual_dim) {
  std::string h =
      "n,tau,theta,q_chi,q_mu,q_nu,q_rho,start_distance,s_norm,t_norm,"
      "primal_residual,dual_residual";
  for (Index i = 0; i < primal_dim; ++i) h += ",x_" + std::to_string(i);
  for (Index k = 0; k < dual_dim; ++k) h += ",v_" + std::to_string(k);
  return h;
}

void write_trace(std::ostream& out, const IterationTrace& trace,
                 Index primal_dim, Index dual_dim) {
  out << trace_header(primal_dim, dual_dim) << '\n';
  for (const auto& r : trace) {
    out << r.n;
    for (double v : {r.tau, r.theta, r.q.chi, r.q.mu, r.q.nu, r.q.rho,
                     r.start_distance, r.s_norm, r.t_norm, r.primal_residual,
                     r.dual_residual}) {
      out << ',' << format_double(v);
    }
    for (Index i = 0; i < r.x.size(); ++i) out << ',' << format_double(r.x[i]);
    for (Index k = 0; k < r.v_star.size(); ++k) {
      out << ',' << format_double(r.v_star[k]);
    }
    out << '\n';
  }
}

std::string trace_text(const IterationTrace& trace, Index primal_dim,
                       Index dual_dim) {
  std::ostringstream ss;
  write_trace(ss, trace, primal_dim, dual_dim);
  return ss.str();
}

namespace {

nlohmann::json vec_json(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json split_json(const Vec& flat, const std::vector<Index>& dims) {
  nlohmann::json out = nlohmann::json::array();
  const BlockVec blocks = BlockVec::split(flat, dims);
  for (const auto& b : blocks.blocks()) out.push_back(vec_json(b));
  return out;
}

}  // namespace

nlohmann::json summary(const SummaryInput& in) {
  const KTProblem& p = *in.problem;
  const SolveResult& r = *in.result;
  const KTResidual res = kt_residual(p, r.x, r.v_star, in.gamma, in.mu);
  const double moved =
      std::sqrt(squared_norm(Vec(r.x - p.x0)) +
                squared_norm(Vec(r.v_star - p.v0_star)));
  nlohmann::json s = {
      {"status", std::string(to_string(r.status))},
      {"mode", std::string(to_string(in.mode))},
      {"iterations", r.trace.empty() ? std::size_t{0} : r.trace.back().n + 1},
      {"x", vec_json(r.x)},
      {"v_star", vec_json(r.v_star)},
      {"s_norm", res.s_norm},
      {"t_norm", res.t_norm},
      {"distance_moved", moved},
  };
  if (!p.primal_blocks.empty()) s["x_blocks"] = split_json(r.x, p.primal_blocks);
  if (!p.dual_blocks.empty()) {
    s["v_star_blocks"] = split_json(r.v_star, p.dual_blocks);
  }
  if (r.breakdown) {
    s["breakdown"] = {{"q_chi", r.breakdown->q.chi},
                      {"q_mu", r.breakdown->q.mu},
                      {"q_nu", r.breakdown->q.nu},
                      {"q_rho", r.breakdown->q.rho}};
  }
  return s;
}

}  // namespace ktba::harness
