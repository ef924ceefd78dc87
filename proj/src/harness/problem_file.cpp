#include "ktba/harness/problem_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace ktba::harness {

using nlohmann::json;

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::inclusion:
      return "inclusion";
    case ProblemKind::system:
      return "system";
    case ProblemKind::relaxation:
      return "relaxation";
    case ProblemKind::minimization:
      return "minimization";
  }
  return "unknown";
}

KTProblem ParsedProblem::lifted() const {
  if (const auto* kt = std::get_if<KTProblem>(&problem)) return *kt;
  return lift(std::get<SystemProblem>(problem));
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Collects schema failures keyed by JSON path while building the canonical
// document and the runtime objects side by side.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& msg) {
    errors.push_back(path + ": " + msg);
  }

  bool expect_keys(const json& obj, const std::string& path,
                   std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) {
      fail(path, "expected an object");
      return false;
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    bool good = true;
    for (const auto& [key, _] : obj.items()) {
      if (!ok.count(key)) {
        fail(path, "unknown field '" + key + "'");
        good = false;
      }
    }
    return good;
  }

  std::optional<double> number(const json& j, const std::string& path) {
    if (!j.is_number()) {
      fail(path, "expected a number");
      return std::nullopt;
    }
    const double v = j.get<double>();
    if (!std::isfinite(v)) {
      fail(path, "number is not finite");
      return std::nullopt;
    }
    return v;
  }

  std::optional<std::size_t> count(const json& j, const std::string& path) {
    if (!j.is_number_integer() || j.get<long long>() < 1) {
      fail(path, "expected a positive integer");
      return std::nullopt;
    }
    return static_cast<std::size_t>(j.get<long long>());
  }

  // Vector of `dim` numbers. With `allow_null`, null entries become
  // `null_value` (used for unbounded box sides). A bare number is broadcast.
  std::optional<Vec> vector(const json& j, const std::string& path, Index dim,
                            bool allow_null = false,
                            double null_value = 0.0) {
    if (j.is_number() || (allow_null && j.is_null())) {
      const auto v = j.is_null() ? std::optional<double>(null_value)
                                 : number(j, path);
      if (!v) return std::nullopt;
      return Vec::Constant(dim, *v);
    }
    if (!j.is_array()) {
      fail(path, "expected an array of numbers");
      return std::nullopt;
    }
    if (static_cast<Index>(j.size()) != dim) {
      fail(path, "has " + std::to_string(j.size()) + " entries, expected " +
                     std::to_string(dim));
      return std::nullopt;
    }
    Vec out(dim);
    bool good = true;
    for (Index i = 0; i < dim; ++i) {
      const json& e = j[static_cast<std::size_t>(i)];
      const std::string p = path + "/" + std::to_string(i);
      if (allow_null && e.is_null()) {
        out[i] = null_value;
      } else if (auto v = number(e, p)) {
        out[i] = *v;
      } else {
        good = false;
      }
    }
    if (!good) return std::nullopt;
    return out;
  }

  std::optional<Matrix> matrix(const json& j, const std::string& path,
                               Index rows, Index cols) {
    if (!j.is_array()) {
      fail(path, "expected an array of rows");
      return std::nullopt;
    }
    if (static_cast<Index>(j.size()) != rows) {
      fail(path, "has " + std::to_string(j.size()) + " rows, expected " +
                     std::to_string(rows));
      return std::nullopt;
    }
    Matrix out(rows, cols);
    bool good = true;
    for (Index r = 0; r < rows; ++r) {
      const json& row = j[static_cast<std::size_t>(r)];
      const std::string p = path + "/" + std::to_string(r);
      if (!row.is_array()) {
        fail(p, "row " + std::to_string(r) + " is not an array");
        good = false;
        continue;
      }
      if (static_cast<Index>(row.size()) != cols) {
        fail(p, "row " + std::to_string(r) + " has " +
                    std::to_string(row.size()) + " entries, expected " +
                    std::to_string(cols));
        good = false;
        continue;
      }
      for (Index c = 0; c < cols; ++c) {
        if (auto v = number(row[static_cast<std::size_t>(c)],
                            p + "/" + std::to_string(c))) {
          out(r, c) = *v;
        } else {
          good = false;
        }
      }
    }
    if (!good) return std::nullopt;
    return out;
  }

  // Rows of a matrix whose row count is free (normal_cone_affine).
  std::optional<Matrix> matrix_any_rows(const json& j, const std::string& path,
                                        Index cols) {
    if (!j.is_array() || j.empty()) {
      fail(path, "expected a nonempty array of rows");
      return std::nullopt;
    }
    return matrix(j, path, static_cast<Index>(j.size()), cols);
  }
};

json to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::isinf(v[i])) {
      out.push_back(nullptr);
    } else {
      out.push_back(v[i]);
    }
  }
  return out;
}

json to_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Vec(m.row(r))));
  return out;
}

struct OpResult {
  json canonical;
  MonotoneOp op;
};

std::optional<OpResult> read_op(Reader& rd, const json& j,
                                const std::string& path, Index dim) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    rd.fail(path, "operator needs a string 'type'");
    return std::nullopt;
  }
  const std::string type = j["type"].get<std::string>();
  const std::size_t before = rd.errors.size();
  json canon = {{"type", type}};
  std::optional<MonotoneOp> op;
  auto build = [&](auto&& make) {
    if (rd.errors.size() != before) return;
    try {
      op = make();
    } catch (const ValidationError& e) {
      for (const auto& f : e.failures()) rd.fail(path, f);
    }
  };

  if (type == "zero") {
    rd.expect_keys(j, path, {"type"});
    build([&] { return MonotoneOp::zero(dim); });
  } else if (type == "affine") {
    rd.expect_keys(j, path, {"type", "matrix", "offset"});
    std::optional<Matrix> m;
    std::optional<Vec> c = Vec::Zero(dim);
    if (j.contains("matrix")) {
      m = rd.matrix(j["matrix"], path + "/matrix", dim, dim);
    } else {
      rd.fail(path, "affine needs 'matrix'");
    }
    if (j.contains("offset")) c = rd.vector(j["offset"], path + "/offset", dim);
    if (m && c) {
      canon["matrix"] = to_json(*m);
      canon["offset"] = to_json(*c);
    }
    build([&] { return MonotoneOp::affine(*m, *c); });
  } else if (type == "normal_cone_box") {
    rd.expect_keys(j, path, {"type", "lower", "upper"});
    std::optional<Vec> lo = Vec::Constant(dim, -kInf);
    std::optional<Vec> hi = Vec::Constant(dim, kInf);
    if (j.contains("lower")) {
      lo = rd.vector(j["lower"], path + "/lower", dim, true, -kInf);
    }
    if (j.contains("upper")) {
      hi = rd.vector(j["upper"], path + "/upper", dim, true, kInf);
    }
    if (lo && hi) {
      canon["lower"] = to_json(*lo);
      canon["upper"] = to_json(*hi);
    }
    build([&] { return MonotoneOp::box_normal_cone(*lo, *hi); });
  } else if (type == "normal_cone_affine") {
    rd.expect_keys(j, path, {"type", "matrix", "rhs"});
    std::optional<Matrix> m;
    std::optional<Vec> e;
    if (j.contains("matrix")) {
      m = rd.matrix_any_rows(j["matrix"], path + "/matrix", dim);
    } else {
      rd.fail(path, "normal_cone_affine needs 'matrix'");
    }
    if (m) {
      e = Vec::Zero(m->rows());
      if (j.contains("rhs")) e = rd.vector(j["rhs"], path + "/rhs", m->rows());
    }
    if (m && e) {
      canon["matrix"] = to_json(*m);
      canon["rhs"] = to_json(*e);
    }
    build([&] { return MonotoneOp::affine_normal_cone(*m, *e); });
  } else if (type == "l1") {
    rd.expect_keys(j, path, {"type", "weight"});
    std::optional<double> w = 1.0;
    if (j.contains("weight")) w = rd.number(j["weight"], path + "/weight");
    if (w) canon["weight"] = *w;
    build([&] { return MonotoneOp::l1(dim, *w); });
  } else if (type == "squared_distance") {
    rd.expect_keys(j, path, {"type", "center"});
    std::optional<Vec> c = Vec::Zero(dim);
    if (j.contains("center")) c = rd.vector(j["center"], path + "/center", dim);
    if (c) canon["center"] = to_json(*c);
    build([&] { return MonotoneOp::squared_distance(*c); });
  } else if (type == "normal_cone_ball") {
    rd.expect_keys(j, path, {"type", "center", "radius"});
    std::optional<Vec> c = Vec::Zero(dim);
    std::optional<double> rad;
    if (j.contains("center")) c = rd.vector(j["center"], path + "/center", dim);
    if (j.contains("radius")) {
      rad = rd.number(j["radius"], path + "/radius");
    } else {
      rd.fail(path, "normal_cone_ball needs 'radius'");
    }
    if (c && rad) {
      canon["center"] = to_json(*c);
      canon["radius"] = *rad;
    }
    build([&] { return MonotoneOp::ball_normal_cone(*c, *rad); });
  } else if (type == "scaled_identity") {
    rd.expect_keys(j, path, {"type", "rho"});
    std::optional<double> rho = 1.0;
    if (j.contains("rho")) rho = rd.number(j["rho"], path + "/rho");
    if (rho) canon["rho"] = *rho;
    build([&] { return MonotoneOp::scaled_identity(dim, *rho); });
  } else if (type == "shifted") {
    rd.expect_keys(j, path, {"type", "inner", "input_shift", "output_shift"});
    std::optional<OpResult> inner;
    std::optional<Vec> s = Vec::Zero(dim);
    std::optional<Vec> t = Vec::Zero(dim);
    if (j.contains("inner")) {
      inner = read_op(rd, j["inner"], path + "/inner", dim);
    } else {
      rd.fail(path, "shifted needs 'inner'");
    }
    if (j.contains("input_shift")) {
      s = rd.vector(j["input_shift"], path + "/input_shift", dim);
    }
    if (j.contains("output_shift")) {
      t = rd.vector(j["output_shift"], path + "/output_shift", dim);
    }
    if (inner && s && t) {
      canon["inner"] = inner->canonical;
      canon["input_shift"] = to_json(*s);
      canon["output_shift"] = to_json(*t);
    }
    build([&] { return MonotoneOp::shifted(inner->op, *s, *t); });
  } else {
    rd.fail(path, "unknown catalog tag '" + type + "'");
  }
  if (!op) return std::nullopt;
  return OpResult{std::move(canon), std::move(*op)};
}

struct MapResult {
  json canonical;
  LinearMap map;
};

std::optional<MapResult> read_map(Reader& rd, const json& j,
                                  const std::string& path, Index rows,
                                  Index cols) {
  if (!j.is_object() || !j.contains("type") || !j["type"].is_string()) {
    rd.fail(path, "coupling needs a string 'type'");
    return std::nullopt;
  }
  const std::string type = j["type"].get<std::string>();
  auto square = [&]() {
    if (rows != cols) {
      rd.fail(path, type + " needs equal dimensions, got " +
                        std::to_string(rows) + "x" + std::to_string(cols));
      return false;
    }
    return true;
  };
  if (type == "identity") {
    rd.expect_keys(j, path, {"type"});
    if (!square()) return std::nullopt;
    return MapResult{{{"type", type}}, LinearMap::identity(rows)};
  }
  if (type == "negated_identity") {
    rd.expect_keys(j, path, {"type"});
    if (!square()) return std::nullopt;
    return MapResult{{{"type", type}}, LinearMap::negated_identity(rows)};
  }
  if (type == "zero") {
    rd.expect_keys(j, path, {"type"});
    return MapResult{{{"type", type}}, LinearMap::zero(rows, cols)};
  }
  if (type == "scaled") {
    rd.expect_keys(j, path, {"type", "factor", "map"});
    std::optional<double> f;
    std::optional<MapResult> inner;
    if (j.contains("factor")) {
      f = rd.number(j["factor"], path + "/factor");
    } else {
      rd.fail(path, "scaled needs 'factor'");
    }
    if (j.contains("map")) {
      inner = read_map(rd, j["map"], path + "/map", rows, cols);
    } else {
      rd.fail(path, "scaled needs 'map'");
    }
    if (!f || !inner) return std::nullopt;
    return MapResult{{{"type", type}, {"factor", *f}, {"map", inner->canonical}},
                     LinearMap::scaled(*f, inner->map)};
  }
  if (type == "dense") {
    rd.expect_keys(j, path, {"type", "rows"});
    if (!j.contains("rows")) {
      rd.fail(path, "dense needs 'rows'");
      return std::nullopt;
    }
    auto m = rd.matrix(j["rows"], path + "/rows", rows, cols);
    if (!m) return std::nullopt;
    return MapResult{{{"type", type}, {"rows", to_json(*m)}},
                     LinearMap::dense(*m)};
  }
  rd.fail(path, "unknown coupling type '" + type + "'");
  return std::nullopt;
}

std::optional<std::vector<Index>> read_dims(Reader& rd, const json& j,
                                            const std::string& path) {
  if (!j.is_array() || j.empty()) {
    rd.fail(path, "expected a nonempty array of dimensions");
    return std::nullopt;
  }
  std::vector<Index> dims;
  bool good = true;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (auto c = rd.count(j[i], path + "/" + std::to_string(i))) {
      dims.push_back(static_cast<Index>(*c));
    } else {
      good = false;
    }
  }
  if (!good) return std::nullopt;
  return dims;
}

std::vector<OpResult> read_ops(Reader& rd, const json& ops, const char* name,
                               const std::vector<Index>& dims, bool& good) {
  std::vector<OpResult> out;
  const std::string path = std::string("/operators/") + name;
  if (!ops.contains(name) || !ops[name].is_array()) {
    rd.fail(path, "expected an array of operators");
    good = false;
    return out;
  }
  const json& list = ops[name];
  if (list.size() != dims.size()) {
    rd.fail(path, "has " + std::to_string(list.size()) +
                      " operators, expected " + std::to_string(dims.size()));
    good = false;
    return out;
  }
  for (std::size_t i = 0; i < list.size(); ++i) {
    auto r = read_op(rd, list[i], path + "/" + std::to_string(i), dims[i]);
    if (r) {
      out.push_back(std::move(*r));
    } else {
      good = false;
    }
  }
  return out;
}

std::vector<Vec> read_blocks(Reader& rd, const json& parent, const char* key,
                             const std::string& path,
                             const std::vector<Index>& dims, bool& good) {
  std::vector<Vec> out;
  if (!parent.is_object() || !parent.contains(key)) {
    for (Index d : dims) out.push_back(Vec::Zero(d));
    return out;
  }
  const json& list = parent[key];
  const std::string p = path + "/" + key;
  if (!list.is_array() || list.size() != dims.size()) {
    rd.fail(p, "expected " + std::to_string(dims.size()) + " blocks");
    good = false;
    return out;
  }
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (auto v = rd.vector(list[i], p + "/" + std::to_string(i), dims[i])) {
      out.push_back(std::move(*v));
    } else {
      good = false;
    }
  }
  return out;
}

json blocks_json(const std::vector<Vec>& blocks) {
  json out = json::array();
  for (const auto& b : blocks) out.push_back(to_json(b));
  return out;
}

}  // namespace

ParsedProblem parse_problem_json(const json& doc) {
  Reader rd;
  if (!doc.is_object()) {
    throw ValidationError({"/: problem document must be an object"});
  }
  rd.expect_keys(doc, "", {"kind", "spaces", "operators", "couplings",
                           "constants", "start", "solver"});

  ProblemKind kind = ProblemKind::inclusion;
  if (!doc.contains("kind") || !doc["kind"].is_string()) {
    throw ValidationError({"/kind: expected one of inclusion, system, "
                           "relaxation, minimization"});
  }
  const std::string kind_name = doc["kind"].get<std::string>();
  if (kind_name == "inclusion") {
    kind = ProblemKind::inclusion;
  } else if (kind_name == "system") {
    kind = ProblemKind::system;
  } else if (kind_name == "relaxation") {
    kind = ProblemKind::relaxation;
  } else if (kind_name == "minimization") {
    kind = ProblemKind::minimization;
  } else {
    throw ValidationError({"/kind: unknown problem kind '" + kind_name + "'"});
  }

  // Spaces.
  std::vector<Index> pdims;
  std::vector<Index> ddims;
  bool good = true;
  if (!doc.contains("spaces") || !doc["spaces"].is_object()) {
    throw ValidationError({"/spaces: missing section"});
  }
  const json& spaces = doc["spaces"];
  if (kind == ProblemKind::relaxation) {
    rd.expect_keys(spaces, "/spaces", {"primal"});
  } else {
    rd.expect_keys(spaces, "/spaces", {"primal", "dual"});
  }
  if (auto d = spaces.contains("primal")
                   ? read_dims(rd, spaces["primal"], "/spaces/primal")
                   : std::nullopt) {
    pdims = *d;
  } else {
    if (!spaces.contains("primal")) rd.fail("/spaces", "missing 'primal'");
    good = false;
  }
  if (kind != ProblemKind::relaxation) {
    if (auto d = spaces.contains("dual")
                     ? read_dims(rd, spaces["dual"], "/spaces/dual")
                     : std::nullopt) {
      ddims = *d;
    } else {
      if (!spaces.contains("dual")) rd.fail("/spaces", "missing 'dual'");
      good = false;
    }
  }
  if (kind == ProblemKind::inclusion && good &&
      (pdims.size() != 1 || ddims.size() != 1)) {
    rd.fail("/spaces", "inclusion problems have one primal and one dual space");
    good = false;
  }
  if (kind == ProblemKind::relaxation && good && pdims.size() != 1) {
    rd.fail("/spaces/primal", "relaxation problems have a single space");
    good = false;
  }
  if (!good) throw ValidationError(rd.errors);

  // Operators.
  if (!doc.contains("operators") || !doc["operators"].is_object()) {
    rd.fail("/operators", "missing section");
    throw ValidationError(rd.errors);
  }
  const json& ops = doc["operators"];
  const char* a_name = kind == ProblemKind::minimization ? "f" : "A";
  const char* b_name = kind == ProblemKind::minimization ? "g" : "B";
  std::size_t relax_K = 0;
  if (kind == ProblemKind::relaxation) {
    rd.expect_keys(ops, "/operators", {"A", "B", "S"});
    if (ops.contains("B") && ops["B"].is_array()) relax_K = ops["B"].size();
    if (relax_K == 0) {
      rd.fail("/operators/B", "relaxation needs at least one B_k");
      throw ValidationError(rd.errors);
    }
    ddims.assign(relax_K, pdims[0]);
  } else if (kind == ProblemKind::minimization) {
    rd.expect_keys(ops, "/operators", {"f", "g"});
  } else {
    rd.expect_keys(ops, "/operators", {"A", "B"});
  }
  std::vector<OpResult> a_ops = read_ops(rd, ops, a_name, pdims, good);
  std::vector<OpResult> b_ops = read_ops(rd, ops, b_name, ddims, good);
  std::vector<OpResult> s_ops;
  if (kind == ProblemKind::relaxation) {
    s_ops = read_ops(rd, ops, "S", ddims, good);
  }

  // Couplings.
  std::vector<std::vector<LinearMap>> grid;
  json grid_json = json::array();
  if (kind == ProblemKind::relaxation) {
    if (doc.contains("couplings")) {
      rd.fail("/couplings", "relaxation builds its own couplings");
      good = false;
    }
  } else if (!doc.contains("couplings") || !doc["couplings"].is_array()) {
    rd.fail("/couplings", "expected an array of coupling rows");
    good = false;
  } else {
    const json& rows = doc["couplings"];
    if (rows.size() != ddims.size()) {
      rd.fail("/couplings", "has " + std::to_string(rows.size()) +
                                " rows, expected " +
                                std::to_string(ddims.size()));
      good = false;
    } else {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::string rp = "/couplings/" + std::to_string(k);
        if (!rows[k].is_array() || rows[k].size() != pdims.size()) {
          rd.fail(rp, "coupling row " + std::to_string(k) + " must have " +
                          std::to_string(pdims.size()) + " entries");
          good = false;
          continue;
        }
        std::vector<LinearMap> row;
        json row_json = json::array();
        for (std::size_t i = 0; i < pdims.size(); ++i) {
          auto m = read_map(rd, rows[k][i], rp + "/" + std::to_string(i),
                            ddims[k], pdims[i]);
          if (m) {
            row.push_back(m->map);
            row_json.push_back(m->canonical);
          } else {
            good = false;
          }
        }
        grid.push_back(std::move(row));
        grid_json.push_back(std::move(row_json));
      }
    }
  }

  // Constants and start.
  std::vector<Vec> z;
  std::vector<Vec> r;
  const json empty = json::object();
  if (kind == ProblemKind::system || kind == ProblemKind::minimization) {
    const json& consts = doc.contains("constants") ? doc["constants"] : empty;
    rd.expect_keys(consts, "/constants", {"z", "r"});
    z = read_blocks(rd, consts, "z", "/constants", pdims, good);
    r = read_blocks(rd, consts, "r", "/constants", ddims, good);
  } else if (doc.contains("constants")) {
    rd.fail("/constants", "only system and minimization problems take constants");
    good = false;
  }
  std::vector<Index> start_pdims = pdims;
  if (kind == ProblemKind::relaxation) {
    start_pdims.assign(relax_K + 1, pdims[0]);
  }
  const json& start = doc.contains("start") ? doc["start"] : empty;
  rd.expect_keys(start, "/start", {"x", "v"});
  std::vector<Vec> xs = read_blocks(rd, start, "x", "/start", start_pdims, good);
  std::vector<Vec> vs = read_blocks(rd, start, "v", "/start", ddims, good);

  // Solver section.
  ParsedProblem out;
  json solver_json;
  {
    const json& s = doc.contains("solver") ? doc["solver"] : empty;
    rd.expect_keys(s, "/solver", {"mode", "epsilon", "gamma", "mu", "lambda",
                                  "max_iter", "tau_tol", "dist_tol"});
    SolverConfig& c = out.config;
    if (s.contains("mode")) {
      const json& m = s["mode"];
      if (m == "haugazeau") {
        c.mode = Mode::haugazeau;
      } else if (m == "fejer") {
        c.mode = Mode::fejer;
      } else {
        rd.fail("/solver/mode", "expected 'haugazeau' or 'fejer'");
        good = false;
      }
    }
    auto num = [&](const char* key, double& dst) {
      if (!s.contains(key)) return;
      if (auto v = rd.number(s[key], std::string("/solver/") + key)) {
        dst = *v;
      } else {
        good = false;
      }
    };
    num("epsilon", c.epsilon);
    num("gamma", out.gamma);
    num("mu", out.mu);
    num("tau_tol", c.tau_tol);
    num("dist_tol", c.dist_tol);
    if (s.contains("lambda") && !s["lambda"].is_null()) {
      double l = 0.0;
      num("lambda", l);
      out.lambda = l;
    }
    if (s.contains("max_iter")) {
      if (auto n = rd.count(s["max_iter"], "/solver/max_iter")) {
        c.max_iters = *n;
      } else {
        good = false;
      }
    }
    c.gamma = constant_schedule(out.gamma);
    c.mu = constant_schedule(out.mu);
    if (out.lambda) c.lambda = constant_schedule(*out.lambda);
    solver_json = {{"mode", std::string(to_string(c.mode))},
                   {"epsilon", c.epsilon},
                   {"gamma", out.gamma},
                   {"mu", out.mu},
                   {"lambda", out.lambda ? json(*out.lambda) : json(nullptr)},
                   {"max_iter", c.max_iters},
                   {"tau_tol", c.tau_tol},
                   {"dist_tol", c.dist_tol}};
    try {
      validate(c);
    } catch (const ParameterError& e) {
      rd.fail("/solver", e.what());
    }
  }

  if (!good || !rd.errors.empty()) throw ValidationError(rd.errors);

  // Assemble.
  out.kind = kind;
  auto ops_json = [](const std::vector<OpResult>& list) {
    json arr = json::array();
    for (const auto& o : list) arr.push_back(o.canonical);
    return arr;
  };
  auto ops_of = [](const std::vector<OpResult>& list) {
    std::vector<MonotoneOp> v;
    for (const auto& o : list) v.push_back(o.op);
    return v;
  };
  json canon = {{"kind", kind_name}};
  canon["spaces"] = {{"primal", pdims}};
  if (kind != ProblemKind::relaxation) canon["spaces"]["dual"] = ddims;
  canon["operators"] = json::object();
  canon["operators"][a_name] = ops_json(a_ops);
  canon["operators"][b_name] = ops_json(b_ops);
  if (kind == ProblemKind::relaxation) canon["operators"]["S"] = ops_json(s_ops);
  if (kind != ProblemKind::relaxation) canon["couplings"] = grid_json;
  if (kind == ProblemKind::system || kind == ProblemKind::minimization) {
    canon["constants"] = {{"z", blocks_json(z)}, {"r", blocks_json(r)}};
  }
  canon["start"] = {{"x", blocks_json(xs)}, {"v", blocks_json(vs)}};
  canon["solver"] = solver_json;
  out.canonical = std::move(canon);

  try {
    switch (kind) {
      case ProblemKind::inclusion: {
        KTProblem kt{a_ops[0].op, b_ops[0].op, grid[0][0], xs[0], vs[0], {}, {}};
        validate(kt);
        out.problem = std::move(kt);
        break;
      }
      case ProblemKind::system: {
        SystemProblem sys{ops_of(a_ops), ops_of(b_ops), z, r, grid, xs, vs};
        validate(sys);
        out.problem = std::move(sys);
        break;
      }
      case ProblemKind::relaxation: {
        RelaxationSpec spec{a_ops[0].op, ops_of(b_ops), ops_of(s_ops), xs, vs};
        out.problem = build_relaxation(spec);
        out.relaxation = std::move(spec);
        break;
      }
      case ProblemKind::minimization: {
        MinimizationSpec spec{ops_of(a_ops), ops_of(b_ops), z, r, grid, xs, vs};
        out.problem = build_minimization(spec);
        out.minimization = std::move(spec);
        break;
      }
    }
  } catch (const ValidationError&) {
    throw;
  } catch (const Error& e) {
    throw ValidationError({e.what()});
  }
  return out;
}

ParsedProblem parse_problem_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  return parse_problem_json(doc);
}

ParsedProblem parse_problem(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_problem_text(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string emit_problem(const ParsedProblem& problem) {
  return problem.canonical.dump(2) + "\n";
}

}  // namespace ktba::harness
