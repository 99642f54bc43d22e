#pragma once

#include <Eigen/Dense>

#include "taskalg/errors.hpp"
#include "taskalg/mdp.hpp"

namespace taskalg {

/// Dense extended action-value table: one row per (cell, goal region), one
/// column per action. Row index is `cell * regions + goal`.
template <typename Scalar>
class QTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, kNumActions, Eigen::RowMajor>;

  QTable() = default;
  QTable(int cells, int regions, Scalar fill = Scalar(0))
      : cells_(cells), regions_(regions), values_(Matrix::Constant(Eigen::Index(cells) * regions, kNumActions, fill)) {}
  QTable(int cells, int regions, Matrix values) : cells_(cells), regions_(regions), values_(std::move(values)) {
    if (values_.rows() != Eigen::Index(cells) * regions) throw IncompatibleTables("row count does not match cells x regions");
  }

  int num_cells() const { return cells_; }
  int num_regions() const { return regions_; }
  Eigen::Index row(int cell, int goal) const { return Eigen::Index(cell) * regions_ + goal; }

  Scalar& operator()(int cell, int goal, Action a) { return values_(row(cell, goal), static_cast<int>(a)); }
  Scalar operator()(int cell, int goal, Action a) const { return values_(row(cell, goal), static_cast<int>(a)); }

  /// V(s, g) = max over actions.
  Scalar value(int cell, int goal) const { return values_.row(row(cell, goal)).maxCoeff(); }

  Matrix& values() { return values_; }
  const Matrix& values() const { return values_; }

  bool same_shape(const QTable& o) const { return cells_ == o.cells_ && regions_ == o.regions_; }
  bool operator==(const QTable& o) const { return same_shape(o) && values_ == o.values_; }

 private:
  int cells_ = 0;
  int regions_ = 0;
  Matrix values_;
};

namespace detail {

template <typename Scalar>
void require_same_shape(const QTable<Scalar>& a, const QTable<Scalar>& b) {
  if (!a.same_shape(b)) throw IncompatibleTables("tables differ in grid size or region count");
}

}  // namespace detail

/// Analytic negation against the boundary tables: (upper + lower) - q.
template <typename Scalar>
QTable<Scalar> neg(const QTable<Scalar>& q, const QTable<Scalar>& upper, const QTable<Scalar>& lower) {
  detail::require_same_shape(q, upper);
  detail::require_same_shape(q, lower);
  return QTable<Scalar>(q.num_cells(), q.num_regions(), (upper.values() + lower.values()) - q.values());
}

template <typename Scalar>
QTable<Scalar> conj(const QTable<Scalar>& a, const QTable<Scalar>& b) {
  detail::require_same_shape(a, b);
  return QTable<Scalar>(a.num_cells(), a.num_regions(), a.values().cwiseMin(b.values()));
}

template <typename Scalar>
QTable<Scalar> disj(const QTable<Scalar>& a, const QTable<Scalar>& b) {
  detail::require_same_shape(a, b);
  return QTable<Scalar>(a.num_cells(), a.num_regions(), a.values().cwiseMax(b.values()));
}

template <typename Scalar>
Scalar max_abs_diff(const QTable<Scalar>& a, const QTable<Scalar>& b) {
  detail::require_same_shape(a, b);
  if (a.values().size() == 0) return Scalar(0);
  return (a.values() - b.values()).cwiseAbs().maxCoeff();
}

/// Entrywise a <= b + tol.
template <typename Scalar>
bool dominated_by(const QTable<Scalar>& a, const QTable<Scalar>& b, Scalar tol = Scalar(0)) {
  detail::require_same_shape(a, b);
  return ((a.values().array() - b.values().array()) <= tol).all();
}

}  // namespace taskalg
