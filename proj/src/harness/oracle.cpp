#include "ktba/harness/oracle.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

namespace ktba::harness {

double kt_membership_residual(const KTProblem& problem, const Vec& x,
                              const Vec& v_star) {
  const Vec lt_v = adjoint_apply(problem.L, v_star);
  const Vec lx = apply(problem.L, x);
  return graph_residual(problem.A, 1.0, GraphPoint{x, Vec(-lt_v)}) +
         inverse_graph_residual(problem.B, 1.0, GraphPoint{v_star, lx});
}

namespace {

OracleResult project_affine(const KTProblem& p, const MonotoneOp::AffineForm& fa,
                            const MonotoneOp::AffineForm& fb, const Vec& x,
                            const Vec& v) {
  const Index n = x.size();
  const Index k = v.size();
  const Matrix L = p.L.densify();
  // M x + L^T v = -c,  -N L x + v = d.
  Matrix C(n + k, n + k);
  C.topLeftCorner(n, n) = fa.matrix;
  C.topRightCorner(n, k) = L.transpose();
  C.bottomLeftCorner(k, n) = -fb.matrix * L;
  C.bottomRightCorner(k, k) = Matrix::Identity(k, k);
  Vec e(n + k);
  e << -fa.offset, fb.offset;
  Vec w0(n + k);
  w0 << x, v;

  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(C);
  const Vec w = w0 - cod.solve(Vec(C * w0 - e));
  const double scale = 1.0 + e.norm() + C.norm() * w.norm();
  if ((C * w - e).norm() > 1e-9 * scale) {
    throw OracleRefusal("affine Kuhn-Tucker system is inconsistent");
  }
  return OracleResult{w.head(n), w.tail(k), OracleClass::affine};
}

struct Best {
  double dist = std::numeric_limits<double>::infinity();
  double x = 0.0;
  double v = 0.0;
  bool found = false;
};

// Difference of squared distances to (x0, v0), factored so that small
// moves far from the anchor are not lost to rounding.
bool closer(double x, double v, const Best& b, double x0, double v0) {
  return (x - b.x) * (x + b.x - 2.0 * x0) + (v - b.v) * (v + b.v - 2.0 * v0) < 0.0;
}

// Nearest grid point to (x0, v0) whose membership residual is within tol.
// Rows are split among threads; ties break toward the lowest index so the
// answer does not depend on the thread count.
Best scan(const KTProblem& p, double cx, double cv, double half, int points,
          double x0, double v0, double tol, bool parallel) {
  const double h = 2.0 * half / (points - 1);
  auto run_rows = [&](int lo, int hi) {
    Best best;
    Vec xs(1);
    Vec vs(1);
    for (int i = lo; i < hi; ++i) {
      xs[0] = cx - half + i * h;
      for (int j = 0; j < points; ++j) {
        vs[0] = cv - half + j * h;
        if (best.found && !closer(xs[0], vs[0], best, x0, v0)) continue;
        if (kt_membership_residual(p, xs, vs) <= tol) {
          best = Best{std::hypot(xs[0] - x0, vs[0] - v0), xs[0], vs[0], true};
        }
      }
    }
    return best;
  };
  unsigned threads = parallel ? std::max(1u, std::thread::hardware_concurrency())
                              : 1u;
  threads = std::min<unsigned>(threads, 16);
  if (threads == 1) return run_rows(0, points);
  std::vector<Best> part(threads);
  std::vector<std::thread> pool;
  const int chunk = (points + static_cast<int>(threads) - 1) /
                    static_cast<int>(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const int lo = std::min(points, static_cast<int>(t) * chunk);
    const int hi = std::min(points, lo + chunk);
    pool.emplace_back([&, t, lo, hi] { part[t] = run_rows(lo, hi); });
  }
  for (auto& th : pool) th.join();
  Best best;
  for (const auto& b : part) {
    if (b.found && (!best.found || closer(b.x, b.v, best, x0, v0))) best = b;
  }
  return best;
}

OracleResult project_planar(const KTProblem& p, const Vec& xv, const Vec& vv) {
  const double x0 = xv[0];
  const double v0 = vv[0];
  const double base = 1.0 + std::hypot(x0, v0);
  if (kt_membership_residual(p, xv, vv) <= 1e-10 * base) {
    return OracleResult{xv, vv, OracleClass::planar};
  }
  const double lip = 2.0 + operator_norm_estimate(p.L, 50);
  auto tol_for = [&](double h) { return 1.5 * lip * h; };

  // Grow a box around the start until it catches a point of Z.
  double radius = 1e-6 * base;
  Best coarse;
  while (radius <= 1e7 * base) {
    const int pts = 201;
    coarse = scan(p, x0, v0, radius, pts, x0, v0,
                  tol_for(2.0 * radius / (pts - 1)), false);
    if (coarse.found) break;
    radius *= 4.0;
  }
  if (!coarse.found) {
    throw OracleRefusal("no Kuhn-Tucker point found near the start");
  }

  // A hit on a coarse grid may be a near miss far from Z. Scan boxes of
  // growing size until the local refinement reaches full resolution.
  const double coarse_h = 2.0 * radius / 200.0;
  Best best;
  bool converged = false;
  for (int attempt = 0; attempt < 8 && !converged; ++attempt) {
    int pts = 401;
    const double half = (coarse.dist + 2.0 * coarse_h) * std::ldexp(1.0, attempt);
    best = scan(p, x0, v0, half, pts, x0, v0, tol_for(2.0 * half / (pts - 1)),
                true);
    if (!best.found) continue;
    double h = 2.0 * half / (pts - 1);
    pts = 201;
    while (h > 1e-11 * base) {
      const double w = 10.0 * h;
      const double hn = 2.0 * w / (pts - 1);
      Best next = scan(p, best.x, best.v, w, pts, x0, v0, tol_for(hn), false);
      if (!next.found) break;
      best = next;
      h = hn;
    }
    converged = h <= 1e-11 * base;
  }
  if (!converged) {
    throw OracleRefusal("grid refinement did not settle on a Kuhn-Tucker point");
  }
  Vec xs(1);
  Vec vs(1);
  xs[0] = best.x;
  vs[0] = best.v;
  return OracleResult{xs, vs, OracleClass::planar};
}

}  // namespace

OracleResult oracle_project(const KTProblem& problem, const Vec& x,
                            const Vec& v_star) {
  validate(problem);
  require_same_dim(x, problem.x0, "oracle primal point");
  require_same_dim(v_star, problem.v0_star, "oracle dual point");
  const auto fa = problem.A.affine_form();
  const auto fb = problem.B.affine_form();
  if (fa && fb) return project_affine(problem, *fa, *fb, x, v_star);
  if (x.size() == 1 && v_star.size() == 1) {
    return project_planar(problem, x, v_star);
  }
  throw OracleRefusal(
      "oracle supports affine operators or one-dimensional H and G only");
}

}  // namespace ktba::harness
