#include "ktba/errors.hpp"
#include "ktba/ktsolver.hpp"

#include "../invariants.hpp"
#include "../problems.hpp"

#include <doctest.h>

using namespace ktba;
using problems::v;

namespace {

double dist(const SolveResult& r, const Vec& x, const Vec& vs) {
  return std::sqrt((r.x - x).squaredNorm() + (r.v_star - vs).squaredNorm());
}

double start_distance(const KTProblem& p, const SolveResult& r) {
  return dist(r, p.x0, p.v0_star);
}

SolverConfig fejer_config() {
  SolverConfig c;
  c.mode = Mode::fejer;
  return c;
}

}  // namespace

TEST_CASE("resolvent selection examples") {
  {
    // Hand evaluation: a = x - v* = 0, l = 1, b = l + v* = 2,
    // s* = (1 - 0) + (1 - 2) = 0, t = 2 - 0 = 2.
    const auto sel = select_resolvent(problems::zero_ops(1, 1), v({1}), v({1}), 1.0, 1.0);
    CHECK(sel.a == v({0}));
    CHECK(sel.b == v({2}));
    CHECK(sel.s_star == v({0}));
    CHECK(sel.t == v({2}));
    CHECK(sel.tau == 4.0);
    CHECK(sel.theta_numerator == 2.0);
    CHECK(sel.a_star == v({0}));
    CHECK(sel.b_star == v({0}));
    CHECK(theorem_theta_numerator(v({1}), v({1}), sel) == doctest::Approx(2.0));
  }
  {
    const auto sel = select_resolvent(problems::quadratic(0, 0), v({0}), v({0}), 1.0, 1.0);
    CHECK(sel.a == v({0}));
    CHECK(sel.b == v({0}));
    CHECK(sel.tau == 0.0);
  }
  {
    const auto sel = select_resolvent(problems::interval(3, 0.5), v({1}), v({-1}), 1.0, 1.0);
    CHECK(sel.a == v({1}));
    CHECK(sel.b == v({1}));
    CHECK(sel.s_star == v({0}));
    CHECK(sel.t == v({0}));
    CHECK(sel.tau == 0.0);
  }
}

TEST_CASE("selection graph points are certified and satisfy G_alpha") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    auto ac = problems::random_affine(rng, 3, 2);
    const KTProblem& p = ac.problem;
    const double g = 0.3 + trial % 5;
    const double m = 0.5 + trial % 3;
    const Vec x = oracle::random_vec(rng, 3, 2.0);
    const Vec vs = oracle::random_vec(rng, 2, 2.0);
    const auto sel = select_resolvent(p, x, vs, g, m);
    CHECK(graph_residual(p.A, 1.0, GraphPoint{sel.a, sel.a_star}) <= 1e-10);
    CHECK(graph_residual(p.B, 1.0, GraphPoint{sel.b, sel.b_star}) <= 1e-10);
    CHECK((sel.s_star - (sel.a_star + adjoint_apply(p.L, sel.b_star))).norm() <= 1e-10 * (1 + sel.s_star.norm()));
    CHECK((sel.t - (sel.b - apply(p.L, sel.a))).norm() <= 1e-12 * (1 + sel.t.norm()));
    const double eps = std::min({1.0 / g, g, 1.0 / m, m, 0.5});
    const double alpha = g_alpha(eps, 1.01 * operator_norm_estimate(p.L, 200));
    CHECK(g_alpha_margin(p, x, vs, sel, alpha) >= -1e-12);
    CHECK(theorem_theta_numerator(x, vs, sel) == doctest::Approx(sel.theta_numerator).epsilon(1e-9));
  }
}

TEST_CASE("theorem_step examples") {
  {
    auto sel = select_resolvent(problems::quadratic(1, 1), v({0}), v({0}), 1.0, 1.0);
    auto out = theorem_step(v({0}), v({0}), sel, 1.0, v({1}), v({1}));
    const auto& step = std::get<StepOutcome>(out);
    CHECK(step.theta == 0.0);
    CHECK(step.x_next == v({0}));
    CHECK(step.v_next == v({0}));
  }
  {
    const auto p = problems::zero_ops(1, 1);
    auto sel = select_resolvent(p, v({1}), v({1}), 1.0, 1.0);
    auto out = theorem_step(v({1}), v({1}), sel, 1.0, v({1}), v({1}));
    const auto& step = std::get<StepOutcome>(out);
    CHECK(step.theta == 0.5);
    CHECK(step.x_half == v({1}));
    CHECK(step.v_half == v({0}));
    CHECK(step.q.mu == 0.0);
    CHECK(step.branch == QCase::keep_z);
    CHECK(step.x_next == v({1}));
    CHECK(step.v_next == v({0}));
  }
}

TEST_CASE("solve: interval problem") {
  const auto p = problems::interval(3, 0.5);
  const auto r = solve(p, SolverConfig{});
  CHECK(r.status == Status::kt_point_reached);
  CHECK(dist(r, v({1}), v({0})) <= 1e-6);
  const auto rep = invariants::check_theorem(p, SolverConfig{}, r, v({1}), v({0}));
  CHECK_MESSAGE(rep.ok(), rep.text());
}

TEST_CASE("solve: quadratic problem") {
  for (auto [x0, v0] : {std::pair{3.0, 0.5}, {-2.0, 4.0}, {0.1, -7.0}}) {
    const auto p = problems::quadratic(x0, v0);
    const auto r = solve(p, SolverConfig{});
    CHECK(r.status != Status::max_iters);
    CHECK(dist(r, v({0}), v({0})) <= 1e-6);
    const auto rep = invariants::check_theorem(p, SolverConfig{}, r, v({0}), v({0}));
    CHECK_MESSAGE(rep.ok(), rep.text());
  }
}

TEST_CASE("solve: affine problems match the linear solve") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 5; ++trial) {
    const auto ac = problems::random_affine(rng, 3, 2);
    const auto accurate = solve(ac.problem, problems::long_run(3000000, 1e-14));
    CHECK(accurate.status == Status::kt_point_reached);
    CHECK(dist(accurate, ac.x_bar, ac.v_bar) <= 1e-5);
    SolverConfig cfg;
    cfg.max_iters = 20000;
    const auto r = solve(ac.problem, cfg);
    CHECK(r.status != Status::breakdown);
    const auto rep = invariants::check_theorem(ac.problem, cfg, r, ac.x_bar, ac.v_bar);
    CHECK_MESSAGE(rep.ok(), rep.text());
  }
}

TEST_CASE("fejer baseline") {
  const auto p = problems::interval(3, 0.5);
  const auto r = fejer_solve(p, fejer_config());
  CHECK(r.status != Status::max_iters);
  CHECK(std::abs(r.x[0] - 1.0) <= 1e-6);
  CHECK(r.v_star[0] <= 1e-6);
  const auto res = kt_residual(p, r.x, r.v_star, 1.0, 1.0);
  CHECK(res.s_norm <= 1e-6);
  CHECK(res.t_norm <= 1e-6);

  // Fejer monotone with respect to several points of Z.
  for (double zv : {0.0, -0.3, -1.0, -5.0}) {
    double prev = INFINITY;
    for (const auto& rec : r.trace) {
      const double d = std::hypot(rec.x[0] - 1.0, rec.v_star[0] - zv);
      CHECK(d <= prev + 1e-10);
      prev = d;
    }
  }

  const auto q = fejer_solve(problems::quadratic(2, -1), fejer_config());
  CHECK(dist(q, v({0}), v({0})) <= 1e-6);

  CHECK_THROWS_AS(fejer_solve(p, SolverConfig{}), ParameterError);
}

TEST_CASE("haugazeau limit is never farther than the fejer limit") {
  std::mt19937_64 rng(47);
  std::vector<KTProblem> ps = {problems::interval(3, 0.5), problems::interval(-1, 2),
                               problems::quadratic(1, 2)};
  for (int i = 0; i < 3; ++i) ps.push_back(problems::random_affine(rng, 3, 2).problem);
  for (const auto& p : ps) {
    SolverConfig cfg;
    cfg.max_iters = 20000;
    SolverConfig fcfg = cfg;
    fcfg.mode = Mode::fejer;
    const auto h = solve(p, cfg);
    const auto f = solve(p, fcfg);
    CHECK(start_distance(p, h) <= start_distance(p, f) + 1e-6);
  }
}

TEST_CASE("kt_residual examples") {
  auto r = kt_residual(problems::interval(3, 0.5), v({1}), v({-0.5}), 1.0, 1.0);
  CHECK(r.s_norm == 0.0);
  CHECK(r.t_norm == 0.0);
  r = kt_residual(problems::quadratic(1, 1), v({0}), v({0}), 1.0, 1.0);
  CHECK(r.s_norm == 0.0);
  CHECK(r.t_norm == 0.0);
  r = kt_residual(problems::zero_ops(1, 1), v({1}), v({1}), 1.0, 1.0);
  CHECK(r.s_norm == 0.0);
  CHECK(r.t_norm == 2.0);
}

TEST_CASE("parameter validation") {
  const auto p = problems::interval(3, 0.5);
  SolverConfig c;
  c.epsilon = 0.0;
  CHECK_THROWS_AS(solve(p, c), ParameterError);
  c = SolverConfig{};
  c.lambda = constant_schedule(1.5);
  CHECK_THROWS_AS(solve(p, c), ParameterError);
  c.mode = Mode::fejer;
  CHECK_NOTHROW(solve(p, c));
  c.lambda = constant_schedule(1.95);
  CHECK_THROWS_AS(solve(p, c), ParameterError);
  c = SolverConfig{};
  c.gamma = constant_schedule(20.0);
  CHECK_THROWS_AS(solve(p, c), ParameterError);
  c = SolverConfig{};
  c.mu = constant_schedule(0.05);
  CHECK_THROWS_AS(solve(p, c), ParameterError);

  KTProblem bad = p;
  bad.x0 = v({1, 2});
  CHECK_THROWS_AS(solve(bad, SolverConfig{}), SignatureError);
}

TEST_CASE("varying schedules stay within range and converge") {
  const auto p = problems::interval(3, 0.5);
  SolverConfig c;
  c.epsilon = 0.2;
  c.gamma = [](std::size_t n) { return n % 2 == 0 ? 0.5 : 3.0; };
  c.mu = [](std::size_t n) { return 1.0 + 0.5 * std::sin(static_cast<double>(n)); };
  c.lambda = [](std::size_t n) { return n % 3 == 0 ? 0.4 : 1.0; };
  const auto r = solve(p, c);
  CHECK(dist(r, v({1}), v({0})) <= 1e-6);
  const auto rep = invariants::check_theorem(p, c, r, v({1}), v({0}));
  CHECK_MESSAGE(rep.ok(), rep.text());
}

TEST_CASE("pluggable selection oracle") {
  const auto p = problems::interval(3, 0.5);
  SolverConfig c;
  const auto direct = solve(p, c);
  const SelectionOracle oracle = [&](std::size_t, const Vec& x, const Vec& vs) {
    return select_resolvent(p, x, vs, 1.0, 1.0);
  };
  const auto generic = run_theorem_iteration(p, c, oracle);
  REQUIRE(generic.trace.size() == direct.trace.size());
  CHECK(generic.x == direct.x);
  CHECK(generic.v_star == direct.v_star);
}

TEST_CASE("breakdown and non-finite selections are reported") {
  const auto p = problems::zero_ops(1, 1);
  // A bogus (non-G_alpha) selection pulling the half-step back toward the
  // anchor makes the two half-spaces disjoint.
  const SelectionOracle pull_back = [&](std::size_t n, const Vec& x, const Vec& vs) {
    GraphSelection s = select_resolvent(p, x, vs, 1.0, 1.0);
    if (n > 0) {
      s.s_star = x - p.x0;
      s.t = vs - p.v0_star;
      s.tau = s.s_star.squaredNorm() + s.t.squaredNorm();
      s.theta_numerator = 0.5 * s.tau;
    }
    return s;
  };
  const auto r = run_theorem_iteration(p, SolverConfig{}, pull_back);
  CHECK(r.status == Status::breakdown);
  REQUIRE(r.breakdown.has_value());
  CHECK(r.breakdown->q.chi < 0.0);
  CHECK(r.trace.size() == 2);

  const SelectionOracle nan_sel = [&](std::size_t n, const Vec& x, const Vec& vs) {
    GraphSelection s = select_resolvent(p, x, vs, 1.0, 1.0);
    if (n == 1) s.t[0] = std::nan("");
    return s;
  };
  try {
    run_theorem_iteration(p, SolverConfig{}, nan_sel);
    FAIL("expected NonFiniteIterate");
  } catch (const NonFiniteIterate& e) {
    CHECK(e.trace().size() == 1);
  }
}

TEST_CASE("g_alpha formula") {
  CHECK(g_alpha(0.5, 1.0) == doctest::Approx(0.5 / (1 + 1 + 2 * 0.75)));
  CHECK(g_alpha(0.1, 0.5) == doctest::Approx(0.1 / (1 + 0.25 + 2 * 0.99)));
}
