#pragma once

#include <Eigen/Dense>

#include "adaptcs/dense_matrix.hpp"

namespace adaptcs::detail {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMut = Eigen::Map<RowMajor>;
using MapConst = Eigen::Map<const RowMajor>;

inline MapConst view(const DenseMatrix& m) {
  return MapConst(m.data(), static_cast<Eigen::Index>(m.rows()),
                  static_cast<Eigen::Index>(m.cols()));
}

inline MapMut view(DenseMatrix& m) {
  return MapMut(m.data(), static_cast<Eigen::Index>(m.rows()),
                static_cast<Eigen::Index>(m.cols()));
}

template <typename Derived>
DenseMatrix to_dense(const Eigen::MatrixBase<Derived>& e) {
  DenseMatrix out(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  view(out) = e;
  return out;
}

}  // namespace adaptcs::detail
