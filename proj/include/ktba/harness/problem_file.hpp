#pragma once

// Problem files: JSON documents with named sections. See
// docs/problem-format.md for the schema.

#include "ktba/ktsolver.hpp"
#include "ktba/systems.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <variant>

namespace ktba::harness {

enum class ProblemKind { inclusion, system, relaxation, minimization };
std::string_view to_string(ProblemKind kind);

struct ParsedProblem {
  ProblemKind kind = ProblemKind::inclusion;
  /// Canonical form: every default filled in, broadcasts expanded.
  nlohmann::json canonical;
  /// KTProblem for `inclusion`, SystemProblem otherwise.
  std::variant<SystemProblem, KTProblem> problem;
  std::optional<RelaxationSpec> relaxation;
  std::optional<MinimizationSpec> minimization;
  SolverConfig config;
  /// Lambda given explicitly in the file (otherwise the mode default).
  std::optional<double> lambda;
  double gamma = 1.0;
  double mu = 1.0;

  /// The single inclusion actually solved (system kinds are lifted).
  KTProblem lifted() const;
};

/// Throws ParseError on malformed JSON (with line/column) and
/// ValidationError listing every schema or consistency failure.
ParsedProblem parse_problem_text(const std::string& text);
ParsedProblem parse_problem_json(const nlohmann::json& doc);
ParsedProblem parse_problem(const std::filesystem::path& path);

/// Canonical text of a parsed problem; parse_problem_text(emit_problem(p))
/// has the same canonical form as p.
std::string emit_problem(const ParsedProblem& problem);

}  // namespace ktba::harness
