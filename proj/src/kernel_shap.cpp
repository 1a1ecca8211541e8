#include "vxai/explainers.hpp"

#include "vxai/rng.hpp"

#include <Eigen/Cholesky>

#include <bit>
#include <cmath>

namespace vxai {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Mean model output over the background with coalition members taken from
// the instance. Evaluates many coalitions in one batch.
VectorXd coalition_values(const Predictor& model, const VectorXd& instance, const MatrixXd& background,
                          const MatrixXd& coalitions, int explained_class) {
  const Index m = background.rows();
  const Index p = instance.size();
  VectorXd values(coalitions.rows());
  constexpr Index kChunk = 256;
  for (Index start = 0; start < coalitions.rows(); start += kChunk) {
    const Index count = std::min(kChunk, coalitions.rows() - start);
    MatrixXd batch(count * m, p);
    for (Index c = 0; c < count; ++c) {
      const auto z = coalitions.row(start + c);
      for (Index b = 0; b < m; ++b) {
        auto row = batch.row(c * m + b);
        for (Index j = 0; j < p; ++j) row(j) = z(j) != 0.0 ? instance(j) : background(b, j);
      }
    }
    const VectorXd out = class_output(model, batch, explained_class);
    for (Index c = 0; c < count; ++c) values(start + c) = out.segment(c * m, m).mean();
  }
  return values;
}

struct Design {
  MatrixXd coalitions;
  VectorXd weights;
};

Design enumerate_coalitions(int p) {
  const std::uint32_t full = (1u << p) - 1u;
  Design d;
  d.coalitions.resize(full - 1, p);
  d.weights.resize(full - 1);
  Index row = 0;
  for (std::uint32_t mask = 1; mask < full; ++mask, ++row) {
    int size = 0;
    for (int j = 0; j < p; ++j) {
      const bool in = (mask >> j) & 1u;
      d.coalitions(row, j) = in ? 1.0 : 0.0;
      size += in ? 1 : 0;
    }
    d.weights(row) = shapley_kernel_weight(p, size);
  }
  return d;
}

// Paired sampling: coalition sizes drawn in proportion to their total kernel
// mass, members uniformly; each draw is added together with its complement.
Design sample_coalitions(int p, std::size_t budget, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> cumulative;
  double total = 0.0;
  for (int s = 1; s < p; ++s) {
    total += static_cast<double>(p - 1) / static_cast<double>(s * (p - s));
    cumulative.push_back(total);
  }
  const std::size_t pairs = std::max<std::size_t>(1, budget / 2);
  Design d;
  d.coalitions = MatrixXd::Zero(static_cast<Index>(2 * pairs), p);
  d.weights = VectorXd::Ones(static_cast<Index>(2 * pairs));
  for (std::size_t k = 0; k < pairs; ++k) {
    const double u = rng.uniform() * total;
    int size = 1;
    while (size < p - 1 && cumulative[static_cast<std::size_t>(size - 1)] <= u) ++size;
    const auto members = rng.sample_indices(static_cast<std::size_t>(p), static_cast<std::size_t>(size));
    auto z = d.coalitions.row(static_cast<Index>(2 * k));
    for (std::size_t j : members) z(static_cast<Index>(j)) = 1.0;
    d.coalitions.row(static_cast<Index>(2 * k + 1)) = (1.0 - z.array()).matrix();
  }
  return d;
}

}  // namespace

double shapley_kernel_weight(int p, int s) {
  return static_cast<double>(p - 1) / (binomial(p, s) * static_cast<double>(s) * static_cast<double>(p - s));
}

VectorXd class_output(const Predictor& model, const MatrixXd& rows, int explained_class) {
  return model.predict_proba(rows).col(explained_class);
}

ShapResult kernel_shap(const Predictor& model, const VectorXd& instance, const MatrixXd& background,
                       int explained_class, const ShapConfig& config, std::uint64_t seed) {
  const Index p = instance.size();
  if (p != model.feature_count() || background.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "kernel_shap: instance/background arity");
  }
  if (background.rows() == 0) throw Error(ErrorCode::ConfigInvalid, "kernel_shap: empty background");

  ShapResult result;
  result.base_value = class_output(model, background, explained_class).mean();
  const double fx = class_output(model, instance.transpose(), explained_class)(0);
  const double total = fx - result.base_value;
  if (p == 1) {
    result.values = VectorXd::Constant(1, total);
    return result;
  }

  bool exact = config.mode == ShapConfig::Mode::exact;
  if (config.mode == ShapConfig::Mode::automatic) {
    exact = p < 31 && (std::size_t{1} << p) <= config.max_coalitions;
  }
  if (exact && p > 24) throw Error(ErrorCode::TooManyFeatures, "exact Kernel SHAP needs p <= 24");
  const Design design = exact ? enumerate_coalitions(static_cast<int>(p))
                              : sample_coalitions(static_cast<int>(p), config.max_coalitions, seed);

  const VectorXd v = coalition_values(model, instance, background, design.coalitions, explained_class);

  // Eliminate the last player through the efficiency constraint:
  // phi_last = total - sum(phi_others).
  const Index q = p - 1;
  const MatrixXd x = design.coalitions.leftCols(q).colwise() - design.coalitions.col(q);
  const VectorXd y = (v.array() - result.base_value).matrix() - design.coalitions.col(q) * total;
  const MatrixXd xtw = x.transpose() * design.weights.asDiagonal();
  MatrixXd gram = xtw * x;
  const VectorXd rhs = xtw * y;

  Eigen::LDLT<MatrixXd> ldlt(gram);
  const VectorXd d = ldlt.vectorD();
  const double scale = d.cwiseAbs().maxCoeff();
  VectorXd phi;
  if (ldlt.info() == Eigen::Success && d.minCoeff() > 1e-12 * std::max(scale, 1e-300)) {
    phi = ldlt.solve(rhs);
  }
  if (phi.size() != q || !phi.allFinite()) {
    gram.diagonal().array() += 1e-6;
    phi = gram.ldlt().solve(rhs);
    result.ridge_damped = true;
  }

  result.values.resize(p);
  result.values.head(q) = phi;
  result.values(q) = total - phi.sum();
  return result;
}

MatrixXd sample_background(const MatrixXd& rows, std::size_t size, std::uint64_t seed) {
  Rng rng(seed);
  const auto picks = rng.sample_indices(static_cast<std::size_t>(rows.rows()), size);
  MatrixXd out(static_cast<Index>(picks.size()), rows.cols());
  for (std::size_t i = 0; i < picks.size(); ++i) out.row(static_cast<Index>(i)) = rows.row(static_cast<Index>(picks[i]));
  return out;
}

Explanation explain_shap(const Predictor& model, const MatrixXd& background, const MatrixXd& instances,
                         const std::vector<std::size_t>& instance_ids, int explained_class,
                         const ShapConfig& config, std::uint64_t seed) {
  Explanation e;
  e.method = MethodId::shap;
  e.explain_seed = seed;
  e.explained_class = explained_class;
  for (Index i = 0; i < instances.rows(); ++i) {
    const std::size_t id = instance_ids.at(static_cast<std::size_t>(i));
    const ShapResult r = kernel_shap(model, instances.row(i).transpose(), background, explained_class, config,
                                     instance_seed(seed, id));
    e.ridge_damped = e.ridge_damped || r.ridge_damped;
    e.local_attributions.push_back({id, r.values, r.base_value});
  }
  e.global_importance = mean_abs_importance(e.local_attributions, model.feature_count());
  return e;
}

VectorXd shapley_values(int players, const std::function<double(std::uint32_t)>& value) {
  if (players < 0 || players > 24) throw Error(ErrorCode::TooManyFeatures, "shapley_values: too many players");
  const std::uint32_t count = 1u << players;
  std::vector<double> v(count);
  for (std::uint32_t mask = 0; mask < count; ++mask) v[mask] = value(mask);

  // weight[s] = s! (p - s - 1)! / p!
  std::vector<double> weight(static_cast<std::size_t>(std::max(players, 1)));
  for (int s = 0; s < players; ++s) {
    weight[static_cast<std::size_t>(s)] = 1.0 / (static_cast<double>(players) * binomial(players - 1, s));
  }
  VectorXd phi = VectorXd::Zero(players);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    const int size = std::popcount(mask);
    for (int i = 0; i < players; ++i) {
      if ((mask >> i) & 1u) continue;
      phi(i) += weight[static_cast<std::size_t>(size)] * (v[mask | (1u << i)] - v[mask]);
    }
  }
  return phi;
}

VectorXd exact_shapley(const Predictor& model, const VectorXd& instance, const MatrixXd& background,
                       int explained_class) {
  const Index p = instance.size();
  if (p > 12) throw Error(ErrorCode::TooManyFeatures, "exact_shapley supports p <= 12, got " + std::to_string(p));
  if (p != model.feature_count() || background.cols() != p) {
    throw Error(ErrorCode::DimensionMismatch, "exact_shapley: instance/background arity");
  }
  const std::uint32_t count = 1u << p;
  MatrixXd coalitions(count, p);
  for (std::uint32_t mask = 0; mask < count; ++mask) {
    for (Index j = 0; j < p; ++j) coalitions(mask, j) = ((mask >> j) & 1u) ? 1.0 : 0.0;
  }
  const VectorXd v = coalition_values(model, instance, background, coalitions, explained_class);
  return shapley_values(static_cast<int>(p), [&](std::uint32_t mask) { return v(mask); });
}

}  // namespace vxai
