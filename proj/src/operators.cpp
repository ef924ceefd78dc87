#include "ktba/operators.hpp"

#include "ktba/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

namespace ktba {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_symmetric(const Matrix& m) {
  const double scale = 1.0 + m.cwiseAbs().maxCoeff();
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// Factorizations of I + gamma M, keyed on gamma.
class AffineCache {
 public:
  explicit AffineCache(const Matrix& m) : matrix_(m) {}

  Vec solve(double gamma, const Vec& rhs) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(gamma);
    if (it == cache_.end()) {
      if (cache_.size() >= 64) cache_.clear();
      Matrix sys = Matrix::Identity(matrix_.rows(), matrix_.cols()) +
                   gamma * matrix_;
      it = cache_.emplace(gamma, Eigen::PartialPivLU<Matrix>(sys)).first;
    }
    return it->second.solve(rhs);
  }

 private:
  Matrix matrix_;
  mutable std::mutex mutex_;
  mutable std::map<double, Eigen::PartialPivLU<Matrix>> cache_;
};

}  // namespace

struct MonotoneOp::State {
  Descriptor descriptor;
  Index dim = 0;
  // Affine: factorization cache. AffineNormalCone: pseudo-inverse of E.
  std::unique_ptr<AffineCache> affine_cache;
  Matrix pinv;
  bool symmetric = false;
};

namespace {

void validate(const catalog::Zero& p, std::vector<std::string>& errs) {
  if (p.dim < 1) errs.push_back("zero: dimension must be positive");
}

void validate(const catalog::Affine& p, std::vector<std::string>& errs) {
  if (p.matrix.rows() < 1 || p.matrix.rows() != p.matrix.cols()) {
    errs.push_back("affine: matrix must be square and nonempty");
    return;
  }
  if (p.offset.size() != p.matrix.rows()) {
    errs.push_back("affine: offset dimension " +
                   std::to_string(p.offset.size()) + " vs matrix " +
                   std::to_string(p.matrix.rows()));
  }
  if (!p.matrix.allFinite() || !p.offset.allFinite()) {
    errs.push_back("affine: non-finite parameters");
    return;
  }
  const Matrix sym = 0.5 * (p.matrix + p.matrix.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym, Eigen::EigenvaluesOnly);
  const double scale = 1.0 + p.matrix.cwiseAbs().maxCoeff();
  if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
    errs.push_back("affine: matrix is not positive semidefinite");
  }
}

void validate(const catalog::BoxNormalCone& p, std::vector<std::string>& errs) {
  if (p.lower.size() < 1 || p.lower.size() != p.upper.size()) {
    errs.push_back("normal_cone_box: lower/upper dimensions must match");
    return;
  }
  for (Index i = 0; i < p.lower.size(); ++i) {
    const double l = p.lower[i];
    const double u = p.upper[i];
    if (std::isnan(l) || std::isnan(u) || l == kInf || u == -kInf || l > u) {
      errs.push_back("normal_cone_box: invalid interval at coordinate " +
                     std::to_string(i));
    }
  }
}

void validate(const catalog::AffineNormalCone& p,
              std::vector<std::string>& errs) {
  if (p.matrix.rows() < 1 || p.matrix.cols() < 1) {
    errs.push_back("normal_cone_affine: matrix must be nonempty");
    return;
  }
  if (p.rhs.size() != p.matrix.rows()) {
    errs.push_back("normal_cone_affine: rhs dimension " +
                   std::to_string(p.rhs.size()) + " vs matrix rows " +
                   std::to_string(p.matrix.rows()));
    return;
  }
  if (!p.matrix.allFinite() || !p.rhs.allFinite()) {
    errs.push_back("normal_cone_affine: non-finite parameters");
    return;
  }
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(p.matrix);
  const Vec x = cod.solve(p.rhs);
  const double resid = norm(Vec(p.matrix * x - p.rhs));
  if (resid > 1e-9 * (1.0 + norm(p.rhs))) {
    errs.push_back("normal_cone_affine: {x : E x = e} is empty");
  }
}

void validate(const catalog::L1& p, std::vector<std::string>& errs) {
  if (p.dim < 1) errs.push_back("l1: dimension must be positive");
  if (!(p.weight >= 0.0) || !std::isfinite(p.weight)) {
    errs.push_back("l1: weight must be finite and nonnegative");
  }
}

void validate(const catalog::SquaredDistance& p,
              std::vector<std::string>& errs) {
  if (p.center.size() < 1) errs.push_back("squared_distance: empty center");
  if (!p.center.allFinite()) errs.push_back("squared_distance: non-finite center");
}

void validate(const catalog::BallNormalCone& p,
              std::vector<std::string>& errs) {
  if (p.center.size() < 1) errs.push_back("normal_cone_ball: empty center");
  if (!p.center.allFinite()) errs.push_back("normal_cone_ball: non-finite center");
  if (!(p.radius > 0.0) || !std::isfinite(p.radius)) {
    errs.push_back("normal_cone_ball: radius must be finite and positive");
  }
}

void validate(const catalog::ScaledIdentity& p,
              std::vector<std::string>& errs) {
  if (p.dim < 1) errs.push_back("scaled_identity: dimension must be positive");
  if (!(p.rho > 0.0) || !std::isfinite(p.rho)) {
    errs.push_back("scaled_identity: rho must be finite and positive");
  }
}

void validate(const catalog::Shifted& p, std::vector<std::string>& errs) {
  if (!p.inner) {
    errs.push_back("shifted: missing inner operator");
    return;
  }
  const Index d = p.inner->dim();
  if (p.input_shift.size() != d || p.output_shift.size() != d) {
    errs.push_back("shifted: shift dimensions must equal inner dimension " +
                   std::to_string(d));
  }
  if (!p.input_shift.allFinite() || !p.output_shift.allFinite()) {
    errs.push_back("shifted: non-finite shifts");
  }
}

void validate(const catalog::Product& p, std::vector<std::string>& errs) {
  if (p.factors.empty()) errs.push_back("product: no factors");
}

Index dim_of(const Descriptor& d) {
  return std::visit(
      Overloaded{
          [](const catalog::Zero& p) { return p.dim; },
          [](const catalog::Affine& p) { return p.matrix.rows(); },
          [](const catalog::BoxNormalCone& p) { return p.lower.size(); },
          [](const catalog::AffineNormalCone& p) { return p.matrix.cols(); },
          [](const catalog::L1& p) { return p.dim; },
          [](const catalog::SquaredDistance& p) { return p.center.size(); },
          [](const catalog::BallNormalCone& p) { return p.center.size(); },
          [](const catalog::ScaledIdentity& p) { return p.dim; },
          [](const catalog::Shifted& p) { return p.inner->dim(); },
          [](const catalog::Product& p) {
            Index total = 0;
            for (const auto& f : p.factors) total += f.dim();
            return total;
          },
      },
      d.params);
}

}  // namespace

MonotoneOp::MonotoneOp(Descriptor descriptor) {
  std::vector<std::string> errs;
  std::visit([&](const auto& p) { validate(p, errs); }, descriptor.params);
  if (!errs.empty()) throw ValidationError(std::move(errs));

  auto state = std::make_shared<State>();
  state->dim = dim_of(descriptor);
  if (const auto* p = std::get_if<catalog::Affine>(&descriptor.params)) {
    state->affine_cache = std::make_unique<AffineCache>(p->matrix);
    state->symmetric = is_symmetric(p->matrix);
  }
  if (const auto* p =
          std::get_if<catalog::AffineNormalCone>(&descriptor.params)) {
    state->pinv = Eigen::CompleteOrthogonalDecomposition<Matrix>(p->matrix)
                      .pseudoInverse();
  }
  state->descriptor = std::move(descriptor);
  state_ = std::move(state);
}

MonotoneOp MonotoneOp::zero(Index dim) {
  return MonotoneOp(Descriptor{catalog::Zero{dim}});
}
MonotoneOp MonotoneOp::affine(Matrix matrix, Vec offset) {
  return MonotoneOp(
      Descriptor{catalog::Affine{std::move(matrix), std::move(offset)}});
}
MonotoneOp MonotoneOp::box_normal_cone(Vec lower, Vec upper) {
  return MonotoneOp(Descriptor{
      catalog::BoxNormalCone{std::move(lower), std::move(upper)}});
}
MonotoneOp MonotoneOp::affine_normal_cone(Matrix matrix, Vec rhs) {
  return MonotoneOp(Descriptor{
      catalog::AffineNormalCone{std::move(matrix), std::move(rhs)}});
}
MonotoneOp MonotoneOp::l1(Index dim, double weight) {
  return MonotoneOp(Descriptor{catalog::L1{dim, weight}});
}
MonotoneOp MonotoneOp::squared_distance(Vec center) {
  return MonotoneOp(Descriptor{catalog::SquaredDistance{std::move(center)}});
}
MonotoneOp MonotoneOp::ball_normal_cone(Vec center, double radius) {
  return MonotoneOp(
      Descriptor{catalog::BallNormalCone{std::move(center), radius}});
}
MonotoneOp MonotoneOp::scaled_identity(Index dim, double rho) {
  return MonotoneOp(Descriptor{catalog::ScaledIdentity{dim, rho}});
}
MonotoneOp MonotoneOp::shifted(MonotoneOp inner, Vec input_shift,
                               Vec output_shift) {
  return MonotoneOp(Descriptor{catalog::Shifted{
      std::make_shared<const MonotoneOp>(std::move(inner)),
      std::move(input_shift), std::move(output_shift)}});
}
MonotoneOp MonotoneOp::product(std::vector<MonotoneOp> factors) {
  return MonotoneOp(Descriptor{catalog::Product{std::move(factors)}});
}

Index MonotoneOp::dim() const { return state_->dim; }
const Descriptor& MonotoneOp::descriptor() const { return state_->descriptor; }

std::string_view MonotoneOp::tag() const {
  static constexpr std::string_view names[] = {
      "zero", "affine",          "normal_cone_box", "normal_cone_affine",
      "l1",   "squared_distance", "normal_cone_ball", "scaled_identity",
      "shifted", "product"};
  return names[state_->descriptor.params.index()];
}

Vec MonotoneOp::resolvent(double gamma, const Vec& w) const {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("resolvent: gamma must be finite and positive, got " +
                         std::to_string(gamma));
  }
  if (w.size() != dim()) {
    throw SignatureError("resolvent(" + std::string(tag()) +
                         "): input dimension " + std::to_string(w.size()) +
                         ", operator dimension " + std::to_string(dim()));
  }
  require_finite(w, "resolvent input");
  const State& st = *state_;
  return std::visit(
      Overloaded{
          [&](const catalog::Zero&) -> Vec { return w; },
          [&](const catalog::Affine& p) -> Vec {
            return st.affine_cache->solve(gamma, w - gamma * p.offset);
          },
          [&](const catalog::BoxNormalCone& p) -> Vec {
            return w.cwiseMax(p.lower).cwiseMin(p.upper);
          },
          [&](const catalog::AffineNormalCone& p) -> Vec {
            return w - st.pinv * (p.matrix * w - p.rhs);
          },
          [&](const catalog::L1& p) -> Vec {
            const double thr = gamma * p.weight;
            Vec out(w.size());
            for (Index i = 0; i < w.size(); ++i) {
              const double mag = std::abs(w[i]) - thr;
              out[i] = mag > 0.0 ? std::copysign(mag, w[i]) : 0.0;
            }
            return out;
          },
          [&](const catalog::SquaredDistance& p) -> Vec {
            return (w + gamma * p.center) / (1.0 + gamma);
          },
          [&](const catalog::BallNormalCone& p) -> Vec {
            const Vec d = w - p.center;
            const double r = norm(d);
            if (r <= p.radius) return w;
            return p.center + (p.radius / r) * d;
          },
          [&](const catalog::ScaledIdentity& p) -> Vec {
            return w / (1.0 + gamma * p.rho);
          },
          [&](const catalog::Shifted& p) -> Vec {
            // w in a + gamma (A(a - s) + t)  <=>  a - s = J(w - gamma t - s).
            return p.input_shift +
                   p.inner->resolvent(
                       gamma, w - gamma * p.output_shift - p.input_shift);
          },
          [&](const catalog::Product& p) -> Vec {
            Vec out(w.size());
            Index off = 0;
            for (const auto& f : p.factors) {
              out.segment(off, f.dim()) =
                  f.resolvent(gamma, w.segment(off, f.dim()));
              off += f.dim();
            }
            return out;
          },
      },
      st.descriptor.params);
}

std::optional<double> MonotoneOp::potential(const Vec& x) const {
  if (x.size() != dim()) {
    throw SignatureError("potential: dimension mismatch");
  }
  const State& st = *state_;
  return std::visit(
      Overloaded{
          [&](const catalog::Zero&) -> std::optional<double> { return 0.0; },
          [&](const catalog::Affine& p) -> std::optional<double> {
            if (!st.symmetric) return std::nullopt;
            return 0.5 * inner(x, Vec(p.matrix * x)) + inner(p.offset, x);
          },
          [&](const catalog::BoxNormalCone& p) -> std::optional<double> {
            for (Index i = 0; i < x.size(); ++i) {
              if (x[i] < p.lower[i] || x[i] > p.upper[i]) return kInf;
            }
            return 0.0;
          },
          [&](const catalog::AffineNormalCone& p) -> std::optional<double> {
            const double r = norm(Vec(p.matrix * x - p.rhs));
            return r <= 1e-9 * (1.0 + norm(p.rhs) + norm(x)) ? 0.0 : kInf;
          },
          [&](const catalog::L1& p) -> std::optional<double> {
            return p.weight * x.cwiseAbs().sum();
          },
          [&](const catalog::SquaredDistance& p) -> std::optional<double> {
            return 0.5 * squared_norm(Vec(x - p.center));
          },
          [&](const catalog::BallNormalCone& p) -> std::optional<double> {
            return norm(Vec(x - p.center)) <= p.radius * (1.0 + 1e-12) ? 0.0
                                                                       : kInf;
          },
          [&](const catalog::ScaledIdentity& p) -> std::optional<double> {
            return 0.5 * p.rho * squared_norm(x);
          },
          [&](const catalog::Shifted& p) -> std::optional<double> {
            auto v = p.inner->potential(x - p.input_shift);
            if (!v) return std::nullopt;
            return *v + inner(p.output_shift, x);
          },
          [&](const catalog::Product& p) -> std::optional<double> {
            double sum = 0.0;
            Index off = 0;
            for (const auto& f : p.factors) {
              auto v = f.potential(x.segment(off, f.dim()));
              if (!v) return std::nullopt;
              sum += *v;
              off += f.dim();
            }
            return sum;
          },
      },
      st.descriptor.params);
}

bool MonotoneOp::is_subdifferential() const {
  return potential(Vec::Zero(dim())).has_value();
}

std::optional<MonotoneOp::AffineForm> MonotoneOp::affine_form() const {
  const Index d = dim();
  return std::visit(
      Overloaded{
          [&](const catalog::Zero&) -> std::optional<AffineForm> {
            return AffineForm{Matrix::Zero(d, d), Vec::Zero(d)};
          },
          [&](const catalog::Affine& p) -> std::optional<AffineForm> {
            return AffineForm{p.matrix, p.offset};
          },
          [&](const catalog::SquaredDistance& p) -> std::optional<AffineForm> {
            return AffineForm{Matrix::Identity(d, d), -p.center};
          },
          [&](const catalog::ScaledIdentity& p) -> std::optional<AffineForm> {
            return AffineForm{p.rho * Matrix::Identity(d, d), Vec::Zero(d)};
          },
          [&](const catalog::Shifted& p) -> std::optional<AffineForm> {
            auto f = p.inner->affine_form();
            if (!f) return std::nullopt;
            return AffineForm{
                f->matrix, f->offset - f->matrix * p.input_shift + p.output_shift};
          },
          [&](const catalog::Product& p) -> std::optional<AffineForm> {
            AffineForm out{Matrix::Zero(d, d), Vec::Zero(d)};
            Index off = 0;
            for (const auto& f : p.factors) {
              auto g = f.affine_form();
              if (!g) return std::nullopt;
              out.matrix.block(off, off, f.dim(), f.dim()) = g->matrix;
              out.offset.segment(off, f.dim()) = g->offset;
              off += f.dim();
            }
            return out;
          },
          [&](const auto&) -> std::optional<AffineForm> {
            return std::nullopt;
          },
      },
      state_->descriptor.params);
}

Vec resolvent(const MonotoneOp& op, double gamma, const Vec& w) {
  return op.resolvent(gamma, w);
}

GraphPoint graph_point(const MonotoneOp& op, double gamma, const Vec& w) {
  Vec a = op.resolvent(gamma, w);
  Vec a_star = (w - a) / gamma;
  return {std::move(a), std::move(a_star)};
}

double graph_residual(const MonotoneOp& op, double gamma,
                      const GraphPoint& p) {
  return norm(Vec(p.a - op.resolvent(gamma, p.a + gamma * p.a_star)));
}

Vec inverse_resolvent(const MonotoneOp& op, double gamma, const Vec& w) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw ParameterError("inverse_resolvent: gamma must be finite and positive");
  }
  return w - gamma * op.resolvent(1.0 / gamma, w / gamma);
}

double inverse_graph_residual(const MonotoneOp& op, double gamma,
                              const GraphPoint& p) {
  return norm(
      Vec(p.a - inverse_resolvent(op, gamma, p.a + gamma * p.a_star)));
}

}  // namespace ktba
