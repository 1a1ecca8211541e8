#ifndef VXAI_NUMERICS_HPP_
#define VXAI_NUMERICS_HPP_

#include "vxai/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace vxai {

// Cosine of the angle between a and b; a zero vector scores 0 against
// anything. Throws DimensionMismatch on unequal lengths.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "cosine_similarity: unequal lengths");
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (na == Scalar(0) || nb == Scalar(0)) return Scalar(0);
  return std::clamp(a.dot(b) / (na * nb), Scalar(-1), Scalar(1));
}

// Pearson correlation; 0 when either side has zero variance.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson_correlation(const Eigen::MatrixBase<DerivedA>& a,
                                              const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedA::Scalar;
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "pearson_correlation: unequal lengths");
  if (a.size() < 2) return Scalar(0);
  const auto da = (a.array() - a.mean()).matrix().eval();
  const auto db = (b.array() - b.mean()).matrix().eval();
  const Scalar va = da.squaredNorm();
  const Scalar vb = db.squaredNorm();
  if (!(va > Scalar(0)) || !(vb > Scalar(0))) return Scalar(0);
  return std::clamp(da.dot(db) / std::sqrt(va * vb), Scalar(-1), Scalar(1));
}

// Ranks starting at 1, ties receive their average rank.
template <typename Derived>
Vector<typename Derived::Scalar> average_ranks(const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return v(i) < v(j); });
  Vector<Scalar> ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && v(order[j + 1]) == v(order[i])) ++j;
    const Scalar rank = Scalar(i + j + 2) / Scalar(2);
    for (std::size_t k = i; k <= j; ++k) ranks(order[k]) = rank;
    i = j + 1;
  }
  return ranks;
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar spearman_correlation(const Eigen::MatrixBase<DerivedA>& a,
                                               const Eigen::MatrixBase<DerivedB>& b) {
  return pearson_correlation(average_ranks(a), average_ranks(b));
}

}  // namespace vxai

#endif  // VXAI_NUMERICS_HPP_
