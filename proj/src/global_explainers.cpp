#include "vxai/explainers.hpp"

#include "vxai/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vxai {

Explanation explain_pfi(const Predictor& model, const MatrixXd& rows, const std::vector<int>& labels,
                        int repeats, std::uint64_t seed, int explained_class) {
  if (rows.rows() < 10) {
    throw Error(ErrorCode::ConfigInvalid, "permutation importance needs at least 10 held-out rows");
  }
  if (repeats < 1) throw Error(ErrorCode::ConfigInvalid, "pfi repeats must be positive");
  const Index p = rows.cols();
  const double baseline = accuracy(labels, predict_class(model, rows));

  VectorXd raw = VectorXd::Zero(p);
  std::vector<std::size_t> order(static_cast<std::size_t>(rows.rows()));
  for (Index j = 0; j < p; ++j) {
    double drop = 0.0;
    for (int r = 0; r < repeats; ++r) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(j) * 1000003u + static_cast<std::uint64_t>(r)));
      std::iota(order.begin(), order.end(), std::size_t{0});
      rng.shuffle(order);
      MatrixXd permuted = rows;
      for (std::size_t i = 0; i < order.size(); ++i) permuted(static_cast<Index>(i), j) = rows(static_cast<Index>(order[i]), j);
      drop += baseline - accuracy(labels, predict_class(model, permuted));
    }
    raw(j) = std::max(0.0, drop / repeats);
  }

  Explanation e;
  e.method = MethodId::pfi;
  e.explain_seed = seed;
  e.explained_class = explained_class;
  e.global_importance = normalize_importance(raw);
  return e;
}

VectorXd quantile_grid(const VectorXd& column, int grid_size) {
  std::vector<double> sorted(column.data(), column.data() + column.size());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> grid;
  if (sorted.empty() || grid_size < 1) return VectorXd();
  const double n = static_cast<double>(sorted.size());
  for (int i = 0; i < grid_size; ++i) {
    const double q = grid_size == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(grid_size - 1);
    const double h = (n - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double value = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    if (grid.empty() || value != grid.back()) grid.push_back(value);
  }
  return Eigen::Map<const VectorXd>(grid.data(), static_cast<Index>(grid.size()));
}

Explanation explain_pdp(const Predictor& model, const MatrixXd& rows, const FeatureLayout& layout,
                        int explained_class, int grid_size) {
  const Index p = rows.cols();
  if (layout.size() != p) throw Error(ErrorCode::DimensionMismatch, "explain_pdp: layout arity");
  Explanation e;
  e.method = MethodId::pdp;
  e.explained_class = explained_class;
  VectorXd raw = VectorXd::Zero(p);
  MatrixXd work = rows;
  for (Index j = 0; j < p; ++j) {
    PdpCurve curve;
    if (layout.numeric[static_cast<std::size_t>(j)]) {
      curve.grid = quantile_grid(rows.col(j), grid_size);
    } else {
      // One-hot column: its levels are the distinct values present.
      std::vector<double> levels(rows.col(j).data(), rows.col(j).data() + rows.rows());
      std::sort(levels.begin(), levels.end());
      levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
      curve.grid = Eigen::Map<const VectorXd>(levels.data(), static_cast<Index>(levels.size()));
    }
    curve.response.resize(curve.grid.size());
    for (Index g = 0; g < curve.grid.size(); ++g) {
      work.col(j).setConstant(curve.grid(g));
      curve.response(g) = class_output(model, work, explained_class).mean();
    }
    work.col(j) = rows.col(j);
    // A curve whose points are all identical is flat by definition.
    if (curve.response.size() > 1 && curve.response.maxCoeff() != curve.response.minCoeff()) {
      const double mean = curve.response.mean();
      raw(j) = std::sqrt((curve.response.array() - mean).square().mean());
    }
    e.pdp_curves.push_back(std::move(curve));
  }
  e.global_importance = normalize_importance(raw);
  return e;
}

}  // namespace vxai
