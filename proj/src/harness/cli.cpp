#include "ktba/harness/cli.hpp"

#include "ktba/harness/problem_file.hpp"
#include "ktba/harness/trace_io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <optional>

namespace ktba::harness {

namespace {

struct SolveArgs {
  std::string file;
  std::optional<std::string> mode;
  std::optional<double> eps;
  std::optional<double> gamma;
  std::optional<double> mu;
  std::optional<double> lambda;
  std::optional<std::size_t> max_iter;
  std::optional<double> tau_tol;
  std::optional<double> dist_tol;
  std::string trace;
  std::string summary;
};

void print_vec(std::ostream& out, const char* name, const Vec& v) {
  out << name << ":";
  for (Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v[i]);
  out << '\n';
}

int run_solve(const SolveArgs& a, std::ostream& out, std::ostream& err) {
  ParsedProblem parsed;
  try {
    parsed = parse_problem(a.file);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return exit_code::invalid;
  } catch (const ValidationError& e) {
    err << e.what() << '\n';
    return exit_code::invalid;
  }

  SolverConfig config = parsed.config;
  if (a.mode) config.mode = *a.mode == "fejer" ? Mode::fejer : Mode::haugazeau;
  if (a.eps) config.epsilon = *a.eps;
  double gamma = a.gamma.value_or(parsed.gamma);
  double mu = a.mu.value_or(parsed.mu);
  config.gamma = constant_schedule(gamma);
  config.mu = constant_schedule(mu);
  if (a.lambda) {
    config.lambda = constant_schedule(*a.lambda);
  } else if (!parsed.lambda) {
    config.lambda = nullptr;
  }
  if (a.max_iter) config.max_iters = *a.max_iter;
  if (a.tau_tol) config.tau_tol = *a.tau_tol;
  if (a.dist_tol) config.dist_tol = *a.dist_tol;
  config.record_trace = !a.trace.empty();

  const KTProblem problem = parsed.lifted();
  SolveResult result;
  try {
    validate(config);
    result = solve(problem, config);
  } catch (const ParameterError& e) {
    err << "invalid solver parameters: " << e.what() << '\n';
    return exit_code::invalid;
  } catch (const NonFiniteIterate& e) {
    err << "non-finite iterate: " << e.what() << '\n';
    if (!a.trace.empty()) {
      std::ofstream t(a.trace);
      write_trace(t, e.trace(), problem.x0.size(), problem.v0_star.size());
    }
    return exit_code::non_finite;
  }

  if (!a.trace.empty()) {
    std::ofstream t(a.trace);
    if (!t) {
      err << "cannot write trace file " << a.trace << '\n';
      return exit_code::usage;
    }
    write_trace(t, result.trace, problem.x0.size(), problem.v0_star.size());
  }
  const nlohmann::json s =
      summary(SummaryInput{&problem, &result, config.mode, gamma, mu});
  if (!a.summary.empty()) {
    std::ofstream f(a.summary);
    if (!f) {
      err << "cannot write summary file " << a.summary << '\n';
      return exit_code::usage;
    }
    f << s.dump(2) << '\n';
  }

  out << "status: " << to_string(result.status) << '\n';
  out << "iterations: " << s["iterations"].get<std::size_t>() << '\n';
  print_vec(out, "x", result.x);
  print_vec(out, "v*", result.v_star);
  out << "s_norm: " << format_double(s["s_norm"].get<double>()) << '\n';
  out << "t_norm: " << format_double(s["t_norm"].get<double>()) << '\n';
  out << "distance_moved: "
      << format_double(s["distance_moved"].get<double>()) << '\n';

  switch (result.status) {
    case Status::kt_point_reached:
    case Status::step_tolerance:
      return exit_code::ok;
    case Status::breakdown:
      err << "numerical breakdown: the two half-spaces do not intersect\n";
      return exit_code::breakdown;
    case Status::max_iters:
      err << "iteration limit reached without convergence\n";
      return exit_code::max_iters;
  }
  return exit_code::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Best approximation from the Kuhn-Tucker set of a composite "
               "monotone inclusion",
               "ktba"};
  app.require_subcommand(1);
  SolveArgs a;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a problem file");
  solve_cmd->add_option("problem-file", a.file, "problem file (JSON)")
      ->required();
  solve_cmd->add_option("--mode", a.mode, "haugazeau or fejer")
      ->check(CLI::IsMember({"haugazeau", "fejer"}));
  solve_cmd->add_option("--eps", a.eps, "epsilon in (0,1)");
  solve_cmd->add_option("--gamma", a.gamma, "primal resolvent step");
  solve_cmd->add_option("--mu", a.mu, "dual resolvent step");
  solve_cmd->add_option("--lambda", a.lambda, "relaxation parameter");
  solve_cmd->add_option("--max-iter", a.max_iter, "iteration limit");
  solve_cmd->add_option("--tau-tol", a.tau_tol, "tau stopping tolerance");
  solve_cmd->add_option("--dist-tol", a.dist_tol, "step stopping tolerance");
  solve_cmd->add_option("--trace", a.trace, "write the iteration trace (CSV)");
  solve_cmd->add_option("--summary", a.summary, "write a JSON summary");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return exit_code::ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return exit_code::ok;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return exit_code::usage;
  }
  return run_solve(a, out, err);
}

}  // namespace ktba::harness
