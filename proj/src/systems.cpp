#include "ktba/systems.hpp"

#include <string>

namespace ktba {

std::vector<Index> SystemProblem::primal_dims() const {
  std::vector<Index> dims;
  for (const auto& op : A) dims.push_back(op.dim());
  return dims;
}

std::vector<Index> SystemProblem::dual_dims() const {
  std::vector<Index> dims;
  for (const auto& op : B) dims.push_back(op.dim());
  return dims;
}

void validate(const SystemProblem& sys) {
  std::vector<std::string> errs;
  const std::size_t m = sys.m();
  const std::size_t K = sys.K();
  if (m == 0) errs.push_back("system: no primal operators");
  if (K == 0) errs.push_back("system: no dual operators");
  auto check_list = [&](const std::vector<Vec>& list, std::size_t count,
                        const std::vector<MonotoneOp>& ops,
                        const std::string& name) {
    if (list.size() != count) {
      errs.push_back("system: " + name + " has " + std::to_string(list.size()) +
                     " blocks, expected " + std::to_string(count));
      return;
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (list[i].size() != ops[i].dim()) {
        errs.push_back("system: " + name + "[" + std::to_string(i) +
                       "] has dimension " + std::to_string(list[i].size()) +
                       ", expected " + std::to_string(ops[i].dim()));
      } else if (!list[i].allFinite()) {
        errs.push_back("system: " + name + "[" + std::to_string(i) +
                       "] is not finite");
      }
    }
  };
  check_list(sys.z, m, sys.A, "z");
  check_list(sys.r, K, sys.B, "r");
  check_list(sys.x_start, m, sys.A, "x_start");
  check_list(sys.v_start, K, sys.B, "v_start");
  if (sys.L.size() != K) {
    errs.push_back("system: coupling grid has " + std::to_string(sys.L.size()) +
                   " rows, expected " + std::to_string(K));
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      if (sys.L[k].size() != m) {
        errs.push_back("system: coupling row " + std::to_string(k) + " has " +
                       std::to_string(sys.L[k].size()) + " entries, expected " +
                       std::to_string(m));
        continue;
      }
      for (std::size_t i = 0; i < m; ++i) {
        const LinearMap& map = sys.L[k][i];
        if (map.codomain_dim() != sys.B[k].dim() ||
            map.domain_dim() != sys.A[i].dim()) {
          errs.push_back("system: coupling L[" + std::to_string(k) + "][" +
                         std::to_string(i) + "] is " +
                         std::to_string(map.codomain_dim()) + "x" +
                         std::to_string(map.domain_dim()) + ", expected " +
                         std::to_string(sys.B[k].dim()) + "x" +
                         std::to_string(sys.A[i].dim()));
        }
      }
    }
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));
}

namespace {

bool is_zero(const Vec& v) { return (v.array() == 0.0).all(); }

Vec concat(const std::vector<Vec>& blocks) {
  return BlockVec(blocks).flatten();
}

}  // namespace

KTProblem lift(const SystemProblem& sys) {
  validate(sys);
  std::vector<MonotoneOp> a_factors;
  for (std::size_t i = 0; i < sys.m(); ++i) {
    if (is_zero(sys.z[i])) {
      a_factors.push_back(sys.A[i]);
    } else {
      // x -> A_i x - z_i
      a_factors.push_back(MonotoneOp::shifted(
          sys.A[i], Vec::Zero(sys.A[i].dim()), -sys.z[i]));
    }
  }
  std::vector<MonotoneOp> b_factors;
  for (std::size_t k = 0; k < sys.K(); ++k) {
    if (is_zero(sys.r[k])) {
      b_factors.push_back(sys.B[k]);
    } else {
      // y -> B_k(y - r_k)
      b_factors.push_back(MonotoneOp::shifted(
          sys.B[k], sys.r[k], Vec::Zero(sys.B[k].dim())));
    }
  }
  return KTProblem{MonotoneOp::product(std::move(a_factors)),
                   MonotoneOp::product(std::move(b_factors)),
                   LinearMap::block(sys.L),
                   concat(sys.x_start),
                   concat(sys.v_start),
                   sys.primal_dims(),
                   sys.dual_dims()};
}

SystemSolution split_solution(const SystemProblem& sys, SolveResult result) {
  SystemSolution out;
  const auto pd = sys.primal_dims();
  const auto dd = sys.dual_dims();
  out.x = BlockVec::split(result.x, pd).blocks();
  out.v_star = BlockVec::split(result.v_star, dd).blocks();
  out.trace = std::move(result.trace);
  out.status = result.status;
  out.breakdown = result.breakdown;
  return out;
}

SystemSolution solve_system(const SystemProblem& sys,
                            const SolverConfig& config) {
  return split_solution(sys, solve(lift(sys), config));
}

namespace {

std::vector<Vec> or_zeros(const std::vector<Vec>& given,
                          const std::vector<Index>& dims) {
  if (!given.empty()) return given;
  std::vector<Vec> out;
  for (Index d : dims) out.push_back(Vec::Zero(d));
  return out;
}

}  // namespace

SystemProblem build_relaxation(const RelaxationSpec& spec) {
  std::vector<std::string> errs;
  const std::size_t K = spec.B.size();
  const Index d = spec.A.dim();
  if (K == 0) errs.push_back("relaxation: no B_k operators");
  if (spec.S.size() != K) {
    errs.push_back("relaxation: " + std::to_string(spec.S.size()) +
                   " kernels for " + std::to_string(K) + " operators");
  }
  for (std::size_t k = 0; k < K; ++k) {
    if (spec.B[k].dim() != d) {
      errs.push_back("relaxation: B[" + std::to_string(k) +
                     "] dimension differs from A");
    }
  }
  for (std::size_t k = 0; k < spec.S.size(); ++k) {
    if (spec.S[k].dim() != d) {
      errs.push_back("relaxation: S[" + std::to_string(k) +
                     "] dimension differs from A");
    }
    if (!std::holds_alternative<catalog::ScaledIdentity>(
            spec.S[k].descriptor().params)) {
      errs.push_back("relaxation: S[" + std::to_string(k) +
                     "] must be a scaled_identity kernel (rho > 0)");
    }
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));

  SystemProblem sys;
  sys.A.push_back(spec.A);
  for (const auto& s : spec.S) sys.A.push_back(s);
  sys.B = spec.B;
  sys.z.assign(K + 1, Vec::Zero(d));
  sys.r.assign(K, Vec::Zero(d));
  sys.L.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    sys.L[k].push_back(LinearMap::identity(d));
    for (std::size_t i = 1; i <= K; ++i) {
      sys.L[k].push_back(i == k + 1 ? LinearMap::negated_identity(d)
                                    : LinearMap::zero(d, d));
    }
  }
  sys.x_start = or_zeros(spec.x_start, sys.primal_dims());
  sys.v_start = or_zeros(spec.v_start, sys.dual_dims());
  validate(sys);
  return sys;
}

SystemProblem build_minimization(const MinimizationSpec& spec) {
  std::vector<std::string> errs;
  for (std::size_t i = 0; i < spec.f.size(); ++i) {
    if (!spec.f[i].is_subdifferential()) {
      errs.push_back("minimization: f[" + std::to_string(i) + "] (" +
                     std::string(spec.f[i].tag()) +
                     ") is not a prox-capable function");
    }
  }
  for (std::size_t k = 0; k < spec.g.size(); ++k) {
    if (!spec.g[k].is_subdifferential()) {
      errs.push_back("minimization: g[" + std::to_string(k) + "] (" +
                     std::string(spec.g[k].tag()) +
                     ") is not a prox-capable function");
    }
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));

  SystemProblem sys;
  sys.A = spec.f;
  sys.B = spec.g;
  sys.L = spec.L;
  sys.z = or_zeros(spec.z, sys.primal_dims());
  sys.r = or_zeros(spec.r, sys.dual_dims());
  sys.x_start = or_zeros(spec.x_start, sys.primal_dims());
  sys.v_start = or_zeros(spec.v_start, sys.dual_dims());
  validate(sys);
  return sys;
}

}  // namespace ktba
