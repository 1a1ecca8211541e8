#ifndef VXAI_RECOMMENDER_HPP_
#define VXAI_RECOMMENDER_HPP_

#include "vxai/core.hpp"
#include "vxai/data_ingest.hpp"
#include "vxai/repository_store.hpp"
#include "vxai/survey_priors.hpp"

#include <map>
#include <string>
#include <vector>

namespace vxai {

struct ScoreWeights {
  double w_quant = 0.5;
  double w_qual = 0.3;
  double w_prior = 0.2;

  bool operator==(const ScoreWeights&) const = default;
};

// Throws ConfigInvalid unless all weights are >= 0 and sum to 1 (+-1e-9).
void validate_weights(const ScoreWeights& weights);

inline constexpr Index kProfileDims = 9;

// (log10 n_rows, log10(n_features + 1), numeric_ratio, missing_ratio, sparsity,
//  log10 n_classes, class_balance_entropy, mean_abs_skewness,
//  mean_feature_correlation)
VectorXd raw_profile_vector(const DatasetProfile& profile);

struct ProfileStats {
  VectorXd mean;
  VectorXd std;  // population
};

// Throws EmptyRepository.
ProfileStats profile_stats(const Repository& repo);

// z-scores against the repository; components with zero spread map to 0.
VectorXd profile_vector(const DatasetProfile& profile, const ProfileStats& stats);

struct Neighbor {
  std::string dataset_id;
  double similarity = 0.0;  // clamped to [0, 1]

  bool operator==(const Neighbor&) const = default;
};

// Top min(k, |repo|) entries by similarity, ties by dataset_id.
std::vector<Neighbor> match_top_k(const DatasetProfile& profile, const Repository& repo, std::size_t k = 5);

struct ScoreEstimate {
  std::map<MethodId, double> scores;
  // Every neighbor had zero similarity, so all were weighted equally.
  bool uniform_fallback = false;
};

ScoreEstimate estimate_scores(const std::vector<Neighbor>& neighbors, const Repository& repo,
                              const SurveyPriors& priors, const ScoreWeights& weights,
                              const std::string& domain_tag);

struct Recommendation {
  std::string dataset_id;
  std::string domain_tag;
  std::map<MethodId, double> estimated_scores;
  // max over estimated_scores
  double s_xai = 0.0;
  MethodId recommended_method = MethodId::shap;
  ModelId recommended_model = ModelId::random_forest;
  std::map<ModelId, double> model_accuracy;
  std::vector<Neighbor> neighbors;
  std::size_t k_used = 0;
  ScoreWeights weights;
  bool uniform_fallback = false;
};

// Highest score; ties go to the larger prior frequency, then the smaller
// method token.
MethodId pick_method(const std::map<MethodId, double>& scores, const SurveyPriors& priors);

Recommendation recommend(const DatasetProfile& profile, const Repository& repo, const SurveyPriors& priors,
                         const ScoreWeights& weights, std::size_t k = 5);
Recommendation recommend(const DatasetTable& dataset, const Repository& repo, const SurveyPriors& priors,
                         const ScoreWeights& weights, std::size_t k = 5);

std::string recommendation_json(const Recommendation& rec);
std::string recommendation_text(const Recommendation& rec);

}  // namespace vxai

#endif  // VXAI_RECOMMENDER_HPP_
