#ifndef VXAI_XAI_METRICS_HPP_
#define VXAI_XAI_METRICS_HPP_

#include "vxai/core.hpp"
#include "vxai/explainers.hpp"
#include "vxai/model_zoo.hpp"

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace vxai {

struct MetricConfig {
  std::size_t fidelity_instances = 30;
  double tau = 0.90;
  std::size_t stability_instances = 20;
  int stability_perturbations = 5;
  double stability_sigma = 0.05;

  bool operator==(const MetricConfig&) const = default;
};

// |f(x) - f(x with feature j set to its background mean)| for every j.
VectorXd occlusion_deltas(const Predictor& model, const VectorXd& x, const VectorXd& feature_means,
                          int explained_class);

// Occlusion-correlation fidelity in [-1, 1]. Local explanations are scored
// per explained instance (rows of ctx.eval) and averaged; global ones are
// correlated once against the mean delta over seeded instances.
double fidelity(const Explanation& explanation, const ExplainContext& ctx, const MetricConfig& config,
                std::uint64_t seed);

// Smallest number of top-ranked features whose share of |attribution| mass
// reaches tau; features.size() when there is no mass.
double coverage_count(const VectorXd& attribution, double tau);

// In [1, p], lower is simpler.
double simplicity(const Explanation& explanation, double tau = 0.90);

using AttributionPair = std::pair<VectorXd, VectorXd>;

// Original vs perturbed-input attributions. Local methods: seeded instances
// with Gaussian noise on numeric features, explained with the same seed.
// Global methods: the same noise applied to whole dataset copies.
std::vector<AttributionPair> stability_pairs(MethodId method, const ExplainContext& ctx,
                                             const ExplainerConfig& explainer, const MetricConfig& config,
                                             std::uint64_t seed);

// Mean cosine similarity with negatives clamped to zero; identical vectors
// (including two zero vectors) score exactly one.
double mean_clamped_cosine(const std::vector<AttributionPair>& pairs);

double stability(MethodId method, const ExplainContext& ctx, const ExplainerConfig& explainer,
                 const MetricConfig& config, std::uint64_t seed);

struct MethodMetrics {
  double fidelity = 0.0;
  double simplicity = 1.0;
  double stability = 0.0;

  bool operator==(const MethodMetrics&) const = default;
};

struct MethodQuant {
  double fidelity = 0.0;
  double simplicity = 1.0;
  double stability = 0.0;
  double quant_composite = 0.0;

  bool operator==(const MethodQuant&) const = default;
};

struct QuantRecord {
  std::map<MethodId, MethodQuant> methods;
  std::map<ModelId, PerformanceMetrics> performance;
  // Model whose explanations were scored: the most accurate one.
  ModelId scored_model = ModelId::random_forest;
  std::size_t feature_count = 0;
  MetricConfig metric_config;
  std::uint64_t explain_seed = 0;
  std::uint64_t metric_seed = 0;

  bool operator==(const QuantRecord&) const = default;
};

// mean(clamp(fidelity, 0, 1), stability, 1 - (simplicity - 1)/(p - 1), accuracy)
double quant_composite(const MethodMetrics& metrics, std::size_t feature_count, double accuracy);

// Most accurate model; random_forest wins ties.
ModelId best_model(const std::map<ModelId, PerformanceMetrics>& performance);

// Throws IncompleteMetrics unless all four methods and at least one model
// are present.
QuantRecord aggregate_quant(const std::map<MethodId, MethodMetrics>& per_method,
                            const std::map<ModelId, PerformanceMetrics>& performance, std::size_t feature_count);

}  // namespace vxai

#endif  // VXAI_XAI_METRICS_HPP_
