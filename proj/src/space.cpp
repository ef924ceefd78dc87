#include "ktba/space.hpp"

#include "ktba/errors.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

namespace ktba {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite coordinate");
  }
}

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entry");
  }
}

void require_same_dim(const Vec& u, const Vec& v, const char* what) {
  if (u.size() != v.size()) {
    throw SignatureError(std::string(what) + ": dimension " +
                         std::to_string(u.size()) + " vs " +
                         std::to_string(v.size()));
  }
}

double inner(const Vec& u, const Vec& v) {
  require_same_dim(u, v, "inner");
  double sum = 0.0;
  for (Index i = 0; i < u.size(); ++i) sum += u[i] * v[i];
  return sum;
}

double squared_norm(const Vec& v) {
  double sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) sum += v[i] * v[i];
  return sum;
}

double norm(const Vec& v) { return std::sqrt(squared_norm(v)); }

// ---------------------------------------------------------------------------
// BlockVec

BlockVec::BlockVec(std::vector<Vec> blocks) : blocks_(std::move(blocks)) {}

BlockVec BlockVec::zeros(std::span<const Index> dims) {
  std::vector<Vec> blocks;
  blocks.reserve(dims.size());
  for (Index d : dims) blocks.push_back(Vec::Zero(d));
  return BlockVec(std::move(blocks));
}

BlockVec BlockVec::split(const Vec& flat, std::span<const Index> dims) {
  Index total = 0;
  for (Index d : dims) total += d;
  if (total != flat.size()) {
    throw SignatureError("BlockVec::split: flat dimension " +
                         std::to_string(flat.size()) + " vs signature total " +
                         std::to_string(total));
  }
  std::vector<Vec> blocks;
  blocks.reserve(dims.size());
  Index offset = 0;
  for (Index d : dims) {
    blocks.push_back(flat.segment(offset, d));
    offset += d;
  }
  return BlockVec(std::move(blocks));
}

std::vector<Index> BlockVec::dims() const {
  std::vector<Index> out;
  out.reserve(blocks_.size());
  for (const auto& b : blocks_) out.push_back(b.size());
  return out;
}

Index BlockVec::total_dim() const {
  Index total = 0;
  for (const auto& b : blocks_) total += b.size();
  return total;
}

Vec BlockVec::flatten() const {
  Vec out(total_dim());
  Index offset = 0;
  for (const auto& b : blocks_) {
    out.segment(offset, b.size()) = b;
    offset += b.size();
  }
  return out;
}

bool BlockVec::same_signature(const BlockVec& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].size() != other.blocks_[i].size()) return false;
  }
  return true;
}

static void require_signature(const BlockVec& a, const BlockVec& b,
                              const char* what) {
  if (!a.same_signature(b)) {
    throw SignatureError(std::string(what) + ": block signature mismatch");
  }
}

BlockVec& BlockVec::operator+=(const BlockVec& rhs) {
  require_signature(*this, rhs, "BlockVec +=");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] += rhs.blocks_[i];
  return *this;
}

BlockVec& BlockVec::operator-=(const BlockVec& rhs) {
  require_signature(*this, rhs, "BlockVec -=");
  for (std::size_t i = 0; i < blocks_.size(); ++i) blocks_[i] -= rhs.blocks_[i];
  return *this;
}

BlockVec& BlockVec::operator*=(double s) {
  for (auto& b : blocks_) b *= s;
  return *this;
}

bool operator==(const BlockVec& a, const BlockVec& b) {
  if (!a.same_signature(b)) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

BlockVec operator+(BlockVec a, const BlockVec& b) { return a += b; }
BlockVec operator-(BlockVec a, const BlockVec& b) { return a -= b; }
BlockVec operator*(double s, BlockVec a) { return a *= s; }

double inner(const BlockVec& u, const BlockVec& v) {
  require_signature(u, v, "inner");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) sum += inner(u[i], v[i]);
  return sum;
}

double squared_norm(const BlockVec& v) {
  double sum = 0.0;
  for (const auto& b : v.blocks()) sum += squared_norm(b);
  return sum;
}

double norm(const BlockVec& v) { return std::sqrt(squared_norm(v)); }

// ---------------------------------------------------------------------------
// LinearMap

namespace {

struct IdentityRep {
  Index dim;
};
struct NegIdentityRep {
  Index dim;
};
struct ZeroRep {
  Index rows;
  Index cols;
};
struct ScaledRep {
  double factor;
  LinearMap inner;
};
struct DenseRep {
  Matrix matrix;
};
struct BlockRep {
  std::vector<std::vector<LinearMap>> grid;
  std::vector<Index> row_dims;
  std::vector<Index> col_dims;
};

}  // namespace

struct LinearMap::Node {
  std::variant<IdentityRep, NegIdentityRep, ZeroRep, ScaledRep, DenseRep,
               BlockRep>
      rep;
  Index rows;
  Index cols;
};

LinearMap::LinearMap(std::shared_ptr<const Node> node)
    : node_(std::move(node)) {}

LinearMap LinearMap::identity(Index dim) {
  if (dim < 1) throw SignatureError("identity: dimension must be positive");
  return LinearMap(std::make_shared<Node>(Node{IdentityRep{dim}, dim, dim}));
}

LinearMap LinearMap::negated_identity(Index dim) {
  if (dim < 1) {
    throw SignatureError("negated_identity: dimension must be positive");
  }
  return LinearMap(
      std::make_shared<Node>(Node{NegIdentityRep{dim}, dim, dim}));
}

LinearMap LinearMap::zero(Index codomain_dim, Index domain_dim) {
  if (codomain_dim < 1 || domain_dim < 1) {
    throw SignatureError("zero: dimensions must be positive");
  }
  return LinearMap(std::make_shared<Node>(
      Node{ZeroRep{codomain_dim, domain_dim}, codomain_dim, domain_dim}));
}

LinearMap LinearMap::scaled(double factor, LinearMap inner) {
  if (!std::isfinite(factor)) throw NonFiniteError("scaled: factor");
  const Index rows = inner.codomain_dim();
  const Index cols = inner.domain_dim();
  return LinearMap(std::make_shared<Node>(
      Node{ScaledRep{factor, std::move(inner)}, rows, cols}));
}

LinearMap LinearMap::dense(Matrix matrix) {
  if (matrix.rows() < 1 || matrix.cols() < 1) {
    throw SignatureError("dense: matrix must be nonempty");
  }
  require_finite(matrix, "dense");
  const Index rows = matrix.rows();
  const Index cols = matrix.cols();
  return LinearMap(
      std::make_shared<Node>(Node{DenseRep{std::move(matrix)}, rows, cols}));
}

LinearMap LinearMap::block(std::vector<std::vector<LinearMap>> grid) {
  if (grid.empty() || grid.front().empty()) {
    throw SignatureError("block: grid must be nonempty");
  }
  const std::size_t ncols = grid.front().size();
  std::vector<Index> row_dims(grid.size());
  std::vector<Index> col_dims(ncols);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (grid[k].size() != ncols) {
      throw SignatureError("block: row " + std::to_string(k) + " has " +
                           std::to_string(grid[k].size()) +
                           " entries, expected " + std::to_string(ncols));
    }
    for (std::size_t i = 0; i < ncols; ++i) {
      const LinearMap& entry = grid[k][i];
      if (i == 0) row_dims[k] = entry.codomain_dim();
      if (k == 0) col_dims[i] = entry.domain_dim();
      if (entry.codomain_dim() != row_dims[k] ||
          entry.domain_dim() != col_dims[i]) {
        throw SignatureError("block: entry (" + std::to_string(k) + "," +
                             std::to_string(i) + ") is " +
                             std::to_string(entry.codomain_dim()) + "x" +
                             std::to_string(entry.domain_dim()) +
                             ", expected " + std::to_string(row_dims[k]) +
                             "x" + std::to_string(col_dims[i]));
      }
    }
  }
  Index rows = 0;
  Index cols = 0;
  for (Index d : row_dims) rows += d;
  for (Index d : col_dims) cols += d;
  return LinearMap(std::make_shared<Node>(
      Node{BlockRep{std::move(grid), std::move(row_dims), std::move(col_dims)},
           rows, cols}));
}

LinearMap::Kind LinearMap::kind() const {
  return static_cast<Kind>(node_->rep.index());
}

Index LinearMap::domain_dim() const { return node_->cols; }
Index LinearMap::codomain_dim() const { return node_->rows; }

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

Vec LinearMap::apply(const Vec& x) const {
  if (x.size() != domain_dim()) {
    throw SignatureError("LinearMap::apply: input dimension " +
                         std::to_string(x.size()) + ", domain " +
                         std::to_string(domain_dim()));
  }
  return std::visit(
      Overloaded{
          [&](const IdentityRep&) -> Vec { return x; },
          [&](const NegIdentityRep&) -> Vec { return -x; },
          [&](const ZeroRep& r) -> Vec { return Vec::Zero(r.rows); },
          [&](const ScaledRep& r) -> Vec {
            return r.factor * r.inner.apply(x);
          },
          [&](const DenseRep& r) -> Vec { return r.matrix * x; },
          [&](const BlockRep& r) -> Vec {
            Vec out = Vec::Zero(codomain_dim());
            Index row_off = 0;
            for (std::size_t k = 0; k < r.grid.size(); ++k) {
              Index col_off = 0;
              for (std::size_t i = 0; i < r.col_dims.size(); ++i) {
                const LinearMap& entry = r.grid[k][i];
                if (entry.kind() != Kind::zero) {
                  out.segment(row_off, r.row_dims[k]) +=
                      entry.apply(x.segment(col_off, r.col_dims[i]));
                }
                col_off += r.col_dims[i];
              }
              row_off += r.row_dims[k];
            }
            return out;
          },
      },
      node_->rep);
}

Vec LinearMap::adjoint_apply(const Vec& y) const {
  if (y.size() != codomain_dim()) {
    throw SignatureError("LinearMap::adjoint_apply: input dimension " +
                         std::to_string(y.size()) + ", codomain " +
                         std::to_string(codomain_dim()));
  }
  return std::visit(
      Overloaded{
          [&](const IdentityRep&) -> Vec { return y; },
          [&](const NegIdentityRep&) -> Vec { return -y; },
          [&](const ZeroRep& r) -> Vec { return Vec::Zero(r.cols); },
          [&](const ScaledRep& r) -> Vec {
            return r.factor * r.inner.adjoint_apply(y);
          },
          [&](const DenseRep& r) -> Vec { return r.matrix.transpose() * y; },
          [&](const BlockRep& r) -> Vec {
            // Column i of the result is sum_k L_ki^* y_k, ascending k.
            Vec out = Vec::Zero(domain_dim());
            Index col_off = 0;
            for (std::size_t i = 0; i < r.col_dims.size(); ++i) {
              Index row_off = 0;
              for (std::size_t k = 0; k < r.grid.size(); ++k) {
                const LinearMap& entry = r.grid[k][i];
                if (entry.kind() != Kind::zero) {
                  out.segment(col_off, r.col_dims[i]) += entry.adjoint_apply(
                      y.segment(row_off, r.row_dims[k]));
                }
                row_off += r.row_dims[k];
              }
              col_off += r.col_dims[i];
            }
            return out;
          },
      },
      node_->rep);
}

Matrix LinearMap::densify() const {
  return std::visit(
      Overloaded{
          [&](const IdentityRep& r) -> Matrix {
            return Matrix::Identity(r.dim, r.dim);
          },
          [&](const NegIdentityRep& r) -> Matrix {
            return -Matrix::Identity(r.dim, r.dim);
          },
          [&](const ZeroRep& r) -> Matrix {
            return Matrix::Zero(r.rows, r.cols);
          },
          [&](const ScaledRep& r) -> Matrix {
            return r.factor * r.inner.densify();
          },
          [&](const DenseRep& r) -> Matrix { return r.matrix; },
          [&](const BlockRep& r) -> Matrix {
            Matrix out = Matrix::Zero(codomain_dim(), domain_dim());
            Index row_off = 0;
            for (std::size_t k = 0; k < r.grid.size(); ++k) {
              Index col_off = 0;
              for (std::size_t i = 0; i < r.col_dims.size(); ++i) {
                out.block(row_off, col_off, r.row_dims[k], r.col_dims[i]) =
                    r.grid[k][i].densify();
                col_off += r.col_dims[i];
              }
              row_off += r.row_dims[k];
            }
            return out;
          },
      },
      node_->rep);
}

template <class Rep>
static const Rep& rep_or_throw(const auto& variant, const char* what) {
  if (const auto* rep = std::get_if<Rep>(&variant)) return *rep;
  throw std::logic_error(std::string("LinearMap::") + what +
                         ": wrong representation");
}

double LinearMap::factor() const {
  return rep_or_throw<ScaledRep>(node_->rep, "factor").factor;
}
const LinearMap& LinearMap::inner_map() const {
  return rep_or_throw<ScaledRep>(node_->rep, "inner_map").inner;
}
const Matrix& LinearMap::matrix() const {
  return rep_or_throw<DenseRep>(node_->rep, "matrix").matrix;
}
const std::vector<std::vector<LinearMap>>& LinearMap::grid() const {
  return rep_or_throw<BlockRep>(node_->rep, "grid").grid;
}
const std::vector<Index>& LinearMap::row_dims() const {
  return rep_or_throw<BlockRep>(node_->rep, "row_dims").row_dims;
}
const std::vector<Index>& LinearMap::col_dims() const {
  return rep_or_throw<BlockRep>(node_->rep, "col_dims").col_dims;
}

Vec apply(const LinearMap& map, const Vec& x) {
  require_finite(x, "apply");
  return map.apply(x);
}
Vec adjoint_apply(const LinearMap& map, const Vec& y) {
  require_finite(y, "adjoint_apply");
  return map.adjoint_apply(y);
}

double operator_norm_estimate(const LinearMap& map, int iters) {
  if (iters < 1) throw ParameterError("operator_norm_estimate: iters < 1");
  // Fixed seed: the estimate is a reproducible diagnostic.
  std::mt19937_64 rng(0x5eedULL);
  std::normal_distribution<double> gauss;
  Vec x(map.domain_dim());
  for (Index i = 0; i < x.size(); ++i) x[i] = gauss(rng);
  x /= norm(x);
  double best = 0.0;
  for (int it = 0; it < iters; ++it) {
    const Vec y = map.apply(x);
    const double ny = norm(y);
    if (ny > best) best = ny;
    if (ny == 0.0) break;
    Vec next = map.adjoint_apply(y);
    const double nn = norm(next);
    if (nn == 0.0) break;
    x = next / nn;
  }
  return best;
}

}  // namespace ktba
