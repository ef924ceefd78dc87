#pragma once

// Projection of x onto H(x,y) ∩ H(y,z) and the outer-approximation loop
// x_{n+1} = Q(x_0, x_n, x_{n+1/2}) built on it.
//
// H(x,y) = {h : <h - y, x - y> <= 0}. All routines are templates over the
// point type so the same code runs on flat vectors (Vec) and on product-space
// vectors (BlockVec).

#include "ktba/space.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <type_traits>
#include <variant>
#include <vector>

namespace ktba {

/// chi = <x - y, y - z>, mu = ||x - y||^2, nu = ||y - z||^2,
/// rho = mu nu - chi^2.
struct QScalars {
  double chi = 0.0;
  double mu = 0.0;
  double nu = 0.0;
  double rho = 0.0;
};

/// Which branch of the projection formula applies.
enum class QCase {
  empty,        // rho = 0, chi < 0: the two half-spaces do not meet
  keep_z,       // rho = 0, chi >= 0: Q = z
  extrapolate,  // rho > 0, chi nu >= rho: Q = x + (1 + chi/nu)(z - y)
  corner,       // rho > 0, chi nu < rho: both constraints active
};

/// Relative threshold under which rho is treated as zero.
inline constexpr double kRhoTolerance = 1e-12;
/// Negative rho above -kCauchySchwarzSlack * mu * nu is rounding noise.
inline constexpr double kCauchySchwarzSlack = 1e-14;
/// Two points closer than kSeparationFloor times their norms coincide; the
/// direction between them is rounding noise and defines no half-space.
inline constexpr double kSeparationFloor = 1e-13;
/// rho below kNearParallel * mu * nu is recomputed from the component of
/// y - z orthogonal to x - y.
inline constexpr double kNearParallel = 1e-3;

template <class P>
QScalars q_scalars(const P& x, const P& y, const P& z) {
  QScalars q;
  double sx = 0.0;
  double sy = 0.0;
  double sz = 0.0;
  if constexpr (std::is_same_v<P, Vec>) {
    require_same_dim(x, y, "q_scalars");
    require_same_dim(y, z, "q_scalars");
    q.chi = (x - y).dot(y - z);
    q.mu = (x - y).squaredNorm();
    q.nu = (y - z).squaredNorm();
    sx = x.squaredNorm();
    sy = y.squaredNorm();
    sz = z.squaredNorm();
  } else {
    const P xy = x - y;
    const P yz = y - z;
    q.chi = inner(xy, yz);
    q.mu = squared_norm(xy);
    q.nu = squared_norm(yz);
    sx = squared_norm(x);
    sy = squared_norm(y);
    sz = squared_norm(z);
  }
  const double floor2 = kSeparationFloor * kSeparationFloor;
  if (q.mu <= floor2 * std::max(sx, sy)) {
    q.mu = 0.0;
    q.chi = 0.0;
  }
  if (q.nu <= floor2 * std::max(sy, sz)) {
    q.nu = 0.0;
    q.chi = 0.0;
  }
  q.rho = q.mu * q.nu - q.chi * q.chi;
  if (q.mu > 0.0 && q.nu > 0.0 && q.rho < kNearParallel * q.mu * q.nu) {
    // mu * ||(y - z) - (chi/mu)(x - y)||^2, free of the cancellation in
    // mu nu - chi^2 for nearly parallel directions.
    const double c = q.chi / q.mu;
    if constexpr (std::is_same_v<P, Vec>) {
      q.rho = q.mu * ((y - z) - c * (x - y)).squaredNorm();
    } else {
      q.rho = q.mu * squared_norm(P((y - z) - c * (x - y)));
    }
  }
  return q;
}

/// Classifies q (clamping rho to zero when it is rounding noise).
inline QCase classify(QScalars& q) {
  const double scale = q.mu * q.nu;
  if (q.rho < 0.0 && q.rho >= -kCauchySchwarzSlack * scale) q.rho = 0.0;
  const double tiny = std::numeric_limits<double>::min();
  const bool rho_zero = q.rho <= kRhoTolerance * std::max(scale, tiny);
  if (rho_zero) {
    q.rho = 0.0;
    return q.chi < 0.0 ? QCase::empty : QCase::keep_z;
  }
  return q.chi * q.nu >= q.rho ? QCase::extrapolate : QCase::corner;
}

/// Evaluates the projection formula for a non-empty branch.
template <class P>
P q_combine(QCase branch, const QScalars& q, const P& x, const P& y,
            const P& z) {
  switch (branch) {
    case QCase::keep_z:
      return z;
    case QCase::extrapolate: {
      P out = x + (1.0 + q.chi / q.nu) * (z - y);
      return out;
    }
    case QCase::corner: {
      if (q.rho < kNearParallel * q.mu * q.nu) {
        P out = y - (q.mu * q.nu / q.rho) * ((y - z) - (q.chi / q.mu) * (x - y));
        return out;
      }
      P out = y + (q.nu / q.rho) * (q.chi * (x - y) + q.mu * (z - y));
      return out;
    }
    case QCase::empty:
      break;
  }
  return z;  // unreachable for valid callers
}

/// H(x,y) ∩ H(y,z) is empty; carries the scalars that proved it.
struct EmptyIntersection {
  QScalars q;
};

template <class P>
struct QStep {
  P point;
  QScalars q;
  QCase branch;
};

template <class P>
using QOutcome = std::variant<QStep<P>, EmptyIntersection>;

/// Q(x,y,z): the point of H(x,y) ∩ H(y,z) nearest to x.
template <class P>
QOutcome<P> project_q(const P& x, const P& y, const P& z) {
  QScalars q = q_scalars(x, y, z);
  const QCase branch = classify(q);
  if (branch == QCase::empty) return EmptyIntersection{q};
  return QStep<P>{q_combine(branch, q, x, y, z), q, branch};
}

/// One outer-approximation update x_{n+1} = Q(x_0, x_n, x_{n+1/2}).
template <class P>
QOutcome<P> outer_step(const P& x0, const P& xn, const P& x_half) {
  return project_q(x0, xn, x_half);
}

/// H(anchor_x, anchor_y); the whole space when the anchors coincide.
template <class P>
struct HalfSpace {
  P anchor_x;
  P anchor_y;
};

template <class P>
bool halfspace_contains(const HalfSpace<P>& hs, const P& h, double tol) {
  if constexpr (std::is_same_v<P, Vec>) {
    require_same_dim(hs.anchor_x, hs.anchor_y, "halfspace_contains");
    require_same_dim(h, hs.anchor_y, "halfspace_contains");
  }
  const P hy = h - hs.anchor_y;
  const P xy = hs.anchor_x - hs.anchor_y;
  return inner(hy, xy) <= tol;
}

struct StoppingSpec {
  std::size_t max_iters = 1000;
  /// Stop once ||x_{n+1} - x_n|| <= step_tol for `patience` consecutive steps.
  double step_tol = 1e-10;
  std::size_t patience = 5;
};

enum class OuterStatus { stationary, step_tolerance, max_iters, breakdown };

template <class P>
struct OuterRecord {
  std::size_t n = 0;
  QScalars q;
  QCase branch = QCase::keep_z;
  double start_distance = 0.0;  // ||x_0 - x_n||
  double half_step_sq = 0.0;    // ||x_{n+1/2} - x_n||^2
  double step_sq = 0.0;         // ||x_{n+1} - x_n||^2
  P iterate;                    // x_n
  P half_step;                  // x_{n+1/2}
};

template <class P>
struct OuterResult {
  P point;
  std::vector<OuterRecord<P>> trace;
  OuterStatus status = OuterStatus::max_iters;
};

/// Runs x_{n+1} = Q(x0, x_n, oracle(n, x_n)). The oracle must return a point
/// x_{n+1/2} with C ⊂ H(x_n, x_{n+1/2}) for the target set C. An oracle that
/// returns x_n itself makes the loop stationary and it stops at once.
template <class P>
OuterResult<P> run_outer_loop(
    const P& x0, const std::function<P(std::size_t, const P&)>& halfstep_oracle,
    const StoppingSpec& stop) {
  OuterResult<P> result;
  P xn = x0;
  std::size_t small_steps = 0;
  for (std::size_t n = 0; n < stop.max_iters; ++n) {
    P x_half = halfstep_oracle(n, xn);
    OuterRecord<P> rec;
    rec.n = n;
    rec.start_distance = norm(P(x0 - xn));
    rec.half_step_sq = squared_norm(P(x_half - xn));
    rec.iterate = xn;
    rec.half_step = x_half;
    if (x_half == xn) {
      rec.q = q_scalars(x0, xn, x_half);
      rec.branch = classify(rec.q);
      result.trace.push_back(std::move(rec));
      result.point = xn;
      result.status = OuterStatus::stationary;
      return result;
    }
    auto outcome = outer_step(x0, xn, x_half);
    if (auto* empty = std::get_if<EmptyIntersection>(&outcome)) {
      rec.q = empty->q;
      rec.branch = QCase::empty;
      result.trace.push_back(std::move(rec));
      result.point = xn;
      result.status = OuterStatus::breakdown;
      return result;
    }
    auto& step = std::get<QStep<P>>(outcome);
    rec.q = step.q;
    rec.branch = step.branch;
    rec.step_sq = squared_norm(P(step.point - xn));
    const bool small = std::sqrt(rec.step_sq) <= stop.step_tol;
    result.trace.push_back(std::move(rec));
    xn = std::move(step.point);
    small_steps = small ? small_steps + 1 : 0;
    if (small_steps >= stop.patience) {
      result.point = xn;
      result.status = OuterStatus::step_tolerance;
      return result;
    }
  }
  result.point = xn;
  result.status = OuterStatus::max_iters;
  return result;
}

}  // namespace ktba
