#pragma once

// Reference projections onto the Kuhn-Tucker set for two problem classes:
//
//  * affine: A x = M x + c and B y = N y + d, so Z is the solution set of a
//    linear system and P_Z is a least-squares correction;
//  * planar: dim H = dim G = 1, where Z is located by grid search on the
//    graph residual and refined locally.
//
// Anything else is refused.

#include "ktba/errors.hpp"
#include "ktba/ktsolver.hpp"

namespace ktba::harness {

class OracleRefusal : public Error {
 public:
  using Error::Error;
};

enum class OracleClass { affine, planar };

struct OracleResult {
  Vec x;
  Vec v_star;
  OracleClass method = OracleClass::affine;
};

/// sum of the residuals of (x, -L* v*) in gra A and (v*, L x) in gra B^{-1}
/// (both at unit step).
double kt_membership_residual(const KTProblem& problem, const Vec& x,
                              const Vec& v_star);

/// P_Z(x, v*). Throws OracleRefusal for unsupported classes or when Z
/// appears to be empty.
OracleResult oracle_project(const KTProblem& problem, const Vec& x,
                            const Vec& v_star);

}  // namespace ktba::harness
