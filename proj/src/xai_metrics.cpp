#include "vxai/xai_metrics.hpp"

#include "vxai/numerics.hpp"
#include "vxai/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace vxai {

VectorXd occlusion_deltas(const Predictor& model, const VectorXd& x, const VectorXd& feature_means,
                          int explained_class) {
  const Index p = x.size();
  MatrixXd batch = x.transpose().replicate(p + 1, 1);
  for (Index j = 0; j < p; ++j) batch(j + 1, j) = feature_means(j);
  const VectorXd out = class_output(model, batch, explained_class);
  return (out.tail(p).array() - out(0)).abs().matrix();
}

double fidelity(const Explanation& explanation, const ExplainContext& ctx, const MetricConfig& config,
                std::uint64_t seed) {
  const VectorXd means = ctx.data.colwise().mean().transpose();
  const Predictor& model = *ctx.model;

  if (is_local(explanation.method)) {
    if (explanation.local_attributions.empty()) return 0.0;
    double total = 0.0;
    for (const auto& a : explanation.local_attributions) {
      const VectorXd x = ctx.eval.row(static_cast<Index>(a.instance)).transpose();
      const VectorXd delta = occlusion_deltas(model, x, means, explanation.explained_class);
      total += pearson_correlation(a.values.cwiseAbs(), delta);
    }
    return std::clamp(total / static_cast<double>(explanation.local_attributions.size()), -1.0, 1.0);
  }

  const auto instances = select_instances(ctx.eval.rows(), config.fidelity_instances, seed);
  VectorXd mean_delta = VectorXd::Zero(ctx.eval.cols());
  for (std::size_t id : instances) {
    mean_delta += occlusion_deltas(model, ctx.eval.row(static_cast<Index>(id)).transpose(), means,
                                   explanation.explained_class);
  }
  if (!instances.empty()) mean_delta /= static_cast<double>(instances.size());
  return pearson_correlation(explanation.global_importance.cwiseAbs(), mean_delta);
}

double coverage_count(const VectorXd& attribution, double tau) {
  const Index p = attribution.size();
  std::vector<double> mass(attribution.data(), attribution.data() + p);
  for (double& m : mass) m = std::abs(m);
  std::sort(mass.begin(), mass.end(), std::greater<>());
  double total = 0.0;
  for (double m : mass) total += m;
  if (!(total > 0.0)) return static_cast<double>(p);
  // Relative slack so that exact-share boundaries (e.g. uniform mass) are
  // not lost to rounding.
  const double target = tau * total * (1.0 - 1e-12);
  double cumulative = 0.0;
  for (std::size_t k = 0; k < mass.size(); ++k) {
    cumulative += mass[k];
    if (cumulative >= target) return static_cast<double>(k + 1);
  }
  return static_cast<double>(p);
}

double simplicity(const Explanation& explanation, double tau) {
  if (is_local(explanation.method) && !explanation.local_attributions.empty()) {
    double total = 0.0;
    for (const auto& a : explanation.local_attributions) total += coverage_count(a.values, tau);
    return total / static_cast<double>(explanation.local_attributions.size());
  }
  return coverage_count(explanation.global_importance, tau);
}

namespace {

void perturb_numeric(MatrixXd& rows, const FeatureLayout& layout, double sigma, Rng& rng) {
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) {
      if (layout.numeric[static_cast<std::size_t>(j)]) rows(i, j) += sigma * rng.normal();
    }
  }
}

}  // namespace

std::vector<AttributionPair> stability_pairs(MethodId method, const ExplainContext& ctx,
                                             const ExplainerConfig& explainer, const MetricConfig& config,
                                             std::uint64_t seed) {
  std::vector<AttributionPair> pairs;
  const std::uint64_t explain_seed = derive_seed(seed, 1);

  if (is_local(method)) {
    const auto instances = select_instances(ctx.eval.rows(), config.stability_instances, derive_seed(seed, 2));
    for (std::size_t id : instances) {
      const VectorXd x = ctx.eval.row(static_cast<Index>(id)).transpose();
      const std::uint64_t row_seed = instance_seed(explain_seed, id);
      const VectorXd original = explain_row(method, ctx, x, explainer, row_seed);
      for (int k = 0; k < config.stability_perturbations; ++k) {
        Rng rng(derive_seed(seed, 0x100000u + id * 64u + static_cast<std::uint64_t>(k)));
        MatrixXd perturbed = x.transpose();
        perturb_numeric(perturbed, ctx.layout, config.stability_sigma, rng);
        pairs.emplace_back(original, explain_row(method, ctx, perturbed.row(0).transpose(), explainer, row_seed));
      }
    }
    return pairs;
  }

  const std::vector<std::size_t> no_instances;
  const VectorXd original = global_importance(method, ctx, no_instances, explainer, explain_seed);
  for (int k = 0; k < config.stability_perturbations; ++k) {
    Rng rng(derive_seed(seed, 0x200000u + static_cast<std::uint64_t>(k)));
    ExplainContext copy = ctx;
    perturb_numeric(copy.data, ctx.layout, config.stability_sigma, rng);
    perturb_numeric(copy.eval, ctx.layout, config.stability_sigma, rng);
    pairs.emplace_back(original, global_importance(method, copy, no_instances, explainer, explain_seed));
  }
  return pairs;
}

double mean_clamped_cosine(const std::vector<AttributionPair>& pairs) {
  if (pairs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& [a, b] : pairs) {
    if (a.size() == b.size() && a == b) {
      total += 1.0;
    } else {
      total += std::clamp(cosine_similarity(a, b), 0.0, 1.0);
    }
  }
  return std::clamp(total / static_cast<double>(pairs.size()), 0.0, 1.0);
}

double stability(MethodId method, const ExplainContext& ctx, const ExplainerConfig& explainer,
                 const MetricConfig& config, std::uint64_t seed) {
  return mean_clamped_cosine(stability_pairs(method, ctx, explainer, config, seed));
}

double quant_composite(const MethodMetrics& metrics, std::size_t feature_count, double accuracy) {
  const double fid = std::clamp(metrics.fidelity, 0.0, 1.0);
  const double simple = feature_count > 1
                            ? 1.0 - (metrics.simplicity - 1.0) / (static_cast<double>(feature_count) - 1.0)
                            : 1.0;
  const double value = (fid + metrics.stability + std::clamp(simple, 0.0, 1.0) + accuracy) / 4.0;
  return std::clamp(value, 0.0, 1.0);
}

ModelId best_model(const std::map<ModelId, PerformanceMetrics>& performance) {
  ModelId best = ModelId::random_forest;
  double best_accuracy = -1.0;
  for (ModelId id : kAllModels) {
    const auto it = performance.find(id);
    if (it != performance.end() && it->second.accuracy > best_accuracy) {
      best = id;
      best_accuracy = it->second.accuracy;
    }
  }
  return best;
}

QuantRecord aggregate_quant(const std::map<MethodId, MethodMetrics>& per_method,
                            const std::map<ModelId, PerformanceMetrics>& performance, std::size_t feature_count) {
  for (MethodId m : kAllMethods) {
    if (!per_method.count(m)) {
      throw Error(ErrorCode::IncompleteMetrics, "missing metrics for " + std::string(to_token(m)));
    }
  }
  if (performance.empty()) throw Error(ErrorCode::IncompleteMetrics, "no model performance recorded");

  QuantRecord record;
  record.performance = performance;
  record.scored_model = best_model(performance);
  record.feature_count = feature_count;
  const double acc = performance.at(record.scored_model).accuracy;
  for (const auto& [method, m] : per_method) {
    record.methods[method] = {m.fidelity, m.simplicity, m.stability, quant_composite(m, feature_count, acc)};
  }
  return record;
}

}  // namespace vxai
