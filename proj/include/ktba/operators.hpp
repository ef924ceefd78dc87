#pragma once

// Catalog of maximally monotone operators with exact resolvents.
//
// The catalog is a pragmatic subset of maximally monotone operators: every
// entry has a closed-form (or direct-factorization) resolvent, so graph points
// are exact up to floating-point arithmetic.

#include "ktba/space.hpp"

#include <memory>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace ktba {

struct Descriptor;

/// A maximally monotone operator A on R^dim exposing J_{gamma A}.
class MonotoneOp {
 public:
  explicit MonotoneOp(Descriptor descriptor);

  /// x -> 0. Resolvent is the identity.
  static MonotoneOp zero(Index dim);
  /// x -> M x + c, M positive semidefinite (not necessarily symmetric).
  static MonotoneOp affine(Matrix matrix, Vec offset);
  /// Normal cone to the box [lower, upper]. Bounds may be infinite.
  static MonotoneOp box_normal_cone(Vec lower, Vec upper);
  /// Normal cone to the affine subspace {x : E x = e}.
  static MonotoneOp affine_normal_cone(Matrix matrix, Vec rhs);
  /// Subdifferential of weight * ||x||_1.
  static MonotoneOp l1(Index dim, double weight);
  /// Subdifferential of (1/2)||x - center||^2.
  static MonotoneOp squared_distance(Vec center);
  /// Normal cone to the closed Euclidean ball B(center, radius).
  static MonotoneOp ball_normal_cone(Vec center, double radius);
  /// x -> rho x with rho > 0; the strictly monotone relaxation kernel.
  static MonotoneOp scaled_identity(Index dim, double rho);
  /// x -> A(x - input_shift) + output_shift.
  static MonotoneOp shifted(MonotoneOp inner, Vec input_shift,
                            Vec output_shift);
  /// (x_1, ..., x_m) -> A_1 x_1 x ... x A_m x_m on the concatenated space.
  static MonotoneOp product(std::vector<MonotoneOp> factors);

  Index dim() const;
  const Descriptor& descriptor() const;
  std::string_view tag() const;

  /// J_{gamma A}(w) = (Id + gamma A)^{-1}(w).
  Vec resolvent(double gamma, const Vec& w) const;

  /// Value of f at x when A = grad/subdifferential of a known f (may be
  /// +infinity for indicators); nullopt when A is not a catalogued
  /// subdifferential.
  std::optional<double> potential(const Vec& x) const;
  bool is_subdifferential() const;

  struct AffineForm {
    Matrix matrix;
    Vec offset;
  };
  /// (M, c) when A x = M x + c everywhere, otherwise nullopt.
  std::optional<AffineForm> affine_form() const;

 private:
  struct State;
  std::shared_ptr<const State> state_;
};

namespace catalog {

struct Zero {
  Index dim;
};
struct Affine {
  Matrix matrix;
  Vec offset;
};
struct BoxNormalCone {
  Vec lower;
  Vec upper;
};
struct AffineNormalCone {
  Matrix matrix;
  Vec rhs;
};
struct L1 {
  Index dim;
  double weight;
};
struct SquaredDistance {
  Vec center;
};
struct BallNormalCone {
  Vec center;
  double radius;
};
struct ScaledIdentity {
  Index dim;
  double rho;
};
struct Shifted {
  std::shared_ptr<const MonotoneOp> inner;
  Vec input_shift;
  Vec output_shift;
};
struct Product {
  std::vector<MonotoneOp> factors;
};

}  // namespace catalog

/// Catalog tag plus parameters. Construction of a MonotoneOp validates it.
struct Descriptor {
  std::variant<catalog::Zero, catalog::Affine, catalog::BoxNormalCone,
               catalog::AffineNormalCone, catalog::L1,
               catalog::SquaredDistance, catalog::BallNormalCone,
               catalog::ScaledIdentity, catalog::Shifted, catalog::Product>
      params;
};

/// A pair (a, a*) on the graph of an operator.
struct GraphPoint {
  Vec a;
  Vec a_star;
};

Vec resolvent(const MonotoneOp& op, double gamma, const Vec& w);

/// a = J_{gamma A}(w), a* = (w - a) / gamma, so that a* is in A a.
GraphPoint graph_point(const MonotoneOp& op, double gamma, const Vec& w);

/// ||a - J_{gamma A}(a + gamma a*)||; zero exactly when (a, a*) is in gra A.
double graph_residual(const MonotoneOp& op, double gamma, const GraphPoint& p);

/// J_{gamma A^{-1}}(w) = w - gamma J_{A/gamma}(w / gamma).
Vec inverse_resolvent(const MonotoneOp& op, double gamma, const Vec& w);

/// Residual of (p.a, p.a_star) in gra A^{-1}, i.e. of (p.a_star, p.a) in
/// gra A, evaluated through inverse_resolvent.
double inverse_graph_residual(const MonotoneOp& op, double gamma,
                              const GraphPoint& p);

}  // namespace ktba
