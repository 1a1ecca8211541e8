#include "vxai/explainers.hpp"

#include "vxai/rng.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vxai {

namespace {

double weighted_correlation(const VectorXd& a, const VectorXd& b, const VectorXd& w) {
  const double sw = w.sum();
  const double ma = a.dot(w) / sw;
  const double mb = b.dot(w) / sw;
  const VectorXd da = (a.array() - ma).matrix();
  const VectorXd db = (b.array() - mb).matrix();
  const double cov = (da.array() * db.array() * w.array()).sum();
  const double va = (da.array().square() * w.array()).sum();
  const double vb = (db.array().square() * w.array()).sum();
  if (va <= 0.0 || vb <= 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

}  // namespace

LimeResult explain_lime(const Predictor& model, const VectorXd& instance, const FeatureLayout& layout,
                        int explained_class, const LimeConfig& config, std::uint64_t seed) {
  const Index p = instance.size();
  if (p != model.feature_count() || layout.size() != p) {
    throw Error(ErrorCode::DimensionMismatch, "explain_lime: instance/layout arity");
  }
  if (config.n_samples < 2) throw Error(ErrorCode::ConfigInvalid, "LIME needs at least two perturbations");

  Rng rng(seed);
  const Index n = static_cast<Index>(config.n_samples);
  MatrixXd samples = instance.transpose().replicate(n, 1);
  for (Index i = 0; i < n; ++i) {
    auto z = samples.row(i);
    for (const auto& group : layout.groups) {
      const Index first = group.front();
      if (layout.numeric[static_cast<std::size_t>(first)]) {
        z(first) += config.sigma * rng.normal();
        continue;
      }
      if (!rng.bernoulli(config.flip_probability)) continue;
      if (group.size() == 1) {
        z(first) = z(first) != 0.0 ? 0.0 : 1.0;
        continue;
      }
      // Move to a different level of the same one-hot group.
      Index active = -1;
      for (Index j : group) {
        if (instance(j) != 0.0) active = j;
      }
      std::vector<Index> others;
      for (Index j : group) {
        if (j != active) others.push_back(j);
      }
      const Index target = others[rng.below(others.size())];
      for (Index j : group) z(j) = 0.0;
      z(target) = 1.0;
    }
  }

  const VectorXd y = class_output(model, samples, explained_class);
  LimeResult result;
  result.values = VectorXd::Zero(p);
  if (y.maxCoeff() == y.minCoeff()) {
    result.base_value = y(0);
    result.degenerate = true;
    return result;
  }

  const double width = config.kernel_width > 0.0 ? config.kernel_width : 0.75 * std::sqrt(static_cast<double>(p));
  const VectorXd dist2 = (samples.rowwise() - instance.transpose()).rowwise().squaredNorm();
  const VectorXd w = (-dist2.array() / (width * width)).exp().matrix();

  // Keep the K features with the largest |weighted correlation| to the output.
  std::vector<double> score(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) score[static_cast<std::size_t>(j)] = std::abs(weighted_correlation(samples.col(j), y, w));
  std::vector<Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return score[static_cast<std::size_t>(a)] > score[static_cast<std::size_t>(b)];
  });
  const std::size_t k = std::min(config.max_features, static_cast<std::size_t>(p));
  std::vector<Index> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(selected.begin(), selected.end());

  MatrixXd z(n, static_cast<Index>(k));
  for (std::size_t c = 0; c < k; ++c) z.col(static_cast<Index>(c)) = samples.col(selected[c]);

  // Weighted ridge with an unpenalised intercept, solved on centred data.
  const double sw = w.sum();
  const Eigen::RowVectorXd z_mean = (w.transpose() * z) / sw;
  const double y_mean = w.dot(y) / sw;
  const MatrixXd zc = z.rowwise() - z_mean;
  const VectorXd yc = (y.array() - y_mean).matrix();
  MatrixXd gram = zc.transpose() * w.asDiagonal() * zc;
  gram.diagonal().array() += config.l2;
  const VectorXd beta = gram.ldlt().solve(zc.transpose() * w.asDiagonal() * yc);

  for (std::size_t c = 0; c < k; ++c) result.values(selected[c]) = beta(static_cast<Index>(c));
  result.base_value = y_mean - z_mean.dot(beta);
  return result;
}

Explanation explain_lime_set(const Predictor& model, const MatrixXd& instances,
                             const std::vector<std::size_t>& instance_ids, const FeatureLayout& layout,
                             int explained_class, const LimeConfig& config, std::uint64_t seed) {
  Explanation e;
  e.method = MethodId::lime;
  e.explain_seed = seed;
  e.explained_class = explained_class;
  for (Index i = 0; i < instances.rows(); ++i) {
    const std::size_t id = instance_ids.at(static_cast<std::size_t>(i));
    const LimeResult r = explain_lime(model, instances.row(i).transpose(), layout, explained_class, config,
                                      instance_seed(seed, id));
    e.degenerate = e.degenerate || r.degenerate;
    e.local_attributions.push_back({id, r.values, r.base_value});
  }
  e.global_importance = mean_abs_importance(e.local_attributions, model.feature_count());
  return e;
}

}  // namespace vxai
