#pragma once

// Trace and summary emission. Trace files are CSV with a fixed header and
// every number printed with 17 significant digits.

#include "ktba/ktsolver.hpp"

#include <json.hpp>

#include <ostream>
#include <string>

namespace ktba::harness {

/// "n,tau,theta,q_chi,q_mu,q_nu,q_rho,start_distance,s_norm,t_norm,
/// primal_residual,dual_residual,x_0,..,v_0,.."
std::string trace_header(Index primal_dim, Index dual_dim);

void write_trace(std::ostream& out, const IterationTrace& trace,
                 Index primal_dim, Index dual_dim);
std::string trace_text(const IterationTrace& trace, Index primal_dim,
                       Index dual_dim);

/// %.17g
std::string format_double(double v);

struct SummaryInput {
  const KTProblem* problem = nullptr;
  const SolveResult* result = nullptr;
  Mode mode = Mode::haugazeau;
  double gamma = 1.0;
  double mu = 1.0;
};

/// status, iterations, final point, final residuals and distance moved.
nlohmann::json summary(const SummaryInput& in);

}  // namespace ktba::harness
