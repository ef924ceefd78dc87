#pragma once

// Finite-dimensional real coordinate spaces, product-space vectors and
// linear maps with exact adjoints.

#include <Eigen/Core>

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ktba {

using Index = Eigen::Index;
using Vec = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Throws NonFiniteError naming `what` if any coordinate is NaN or infinite.
void require_finite(const Vec& v, const char* what);
void require_finite(const Matrix& m, const char* what);

/// Throws SignatureError unless both vectors have the same dimension.
void require_same_dim(const Vec& u, const Vec& v, const char* what);

/// Euclidean inner product, summed in ascending coordinate order.
double inner(const Vec& u, const Vec& v);
double squared_norm(const Vec& v);
double norm(const Vec& v);

/// Element of a product space H_1 x ... x H_m. The inner product is the sum
/// of the blockwise inner products.
class BlockVec {
 public:
  BlockVec() = default;
  explicit BlockVec(std::vector<Vec> blocks);

  /// Zero vector with the given block dimensions.
  static BlockVec zeros(std::span<const Index> dims);
  /// Splits a flat coordinate vector according to `dims`.
  static BlockVec split(const Vec& flat, std::span<const Index> dims);

  std::size_t size() const { return blocks_.size(); }
  const Vec& operator[](std::size_t i) const { return blocks_[i]; }
  Vec& operator[](std::size_t i) { return blocks_[i]; }
  const std::vector<Vec>& blocks() const { return blocks_; }

  std::vector<Index> dims() const;
  Index total_dim() const;
  Vec flatten() const;
  bool same_signature(const BlockVec& other) const;

  BlockVec& operator+=(const BlockVec& rhs);
  BlockVec& operator-=(const BlockVec& rhs);
  BlockVec& operator*=(double s);

  friend bool operator==(const BlockVec& a, const BlockVec& b);

 private:
  std::vector<Vec> blocks_;
};

BlockVec operator+(BlockVec a, const BlockVec& b);
BlockVec operator-(BlockVec a, const BlockVec& b);
BlockVec operator*(double s, BlockVec a);

double inner(const BlockVec& u, const BlockVec& v);
double squared_norm(const BlockVec& v);
double norm(const BlockVec& v);

/// Bounded linear map between coordinate spaces together with its adjoint.
///
/// The structured variants (identity, negated identity, zero, scaled, block)
/// apply in O(dim) and exist so that sparse coupling grids do not have to be
/// densified. Values are immutable and cheap to copy.
class LinearMap {
 public:
  enum class Kind { identity, negated_identity, zero, scaled, dense, block };

  static LinearMap identity(Index dim);
  static LinearMap negated_identity(Index dim);
  /// Zero map from R^domain_dim into R^codomain_dim.
  static LinearMap zero(Index codomain_dim, Index domain_dim);
  static LinearMap scaled(double factor, LinearMap inner);
  static LinearMap dense(Matrix matrix);
  /// `grid[k][i]` maps block i of the domain into block k of the codomain.
  /// Every row must share a codomain dimension and every column a domain
  /// dimension.
  static LinearMap block(std::vector<std::vector<LinearMap>> grid);

  Kind kind() const;
  Index domain_dim() const;
  Index codomain_dim() const;

  Vec apply(const Vec& x) const;
  Vec adjoint_apply(const Vec& y) const;
  Matrix densify() const;

  // Representation accessors; each throws std::logic_error on the wrong kind.
  double factor() const;
  const LinearMap& inner_map() const;
  const Matrix& matrix() const;
  const std::vector<std::vector<LinearMap>>& grid() const;
  /// Codomain (row) and domain (column) block dimensions of a block map.
  const std::vector<Index>& row_dims() const;
  const std::vector<Index>& col_dims() const;

 private:
  struct Node;
  explicit LinearMap(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Vec apply(const LinearMap& map, const Vec& x);
Vec adjoint_apply(const LinearMap& map, const Vec& y);

/// Power-iteration lower bound on the spectral norm. The estimate is
/// nondecreasing in `iters`. Diagnostic only: no solver path depends on it.
double operator_norm_estimate(const LinearMap& map, int iters);

}  // namespace ktba
