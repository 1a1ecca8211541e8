#include "vxai/recommender.hpp"

#include "vxai/numerics.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace vxai {

void validate_weights(const ScoreWeights& w) {
  if (w.w_quant < 0.0 || w.w_qual < 0.0 || w.w_prior < 0.0) {
    throw Error(ErrorCode::ConfigInvalid, "score weights must be non-negative");
  }
  if (std::abs(w.w_quant + w.w_qual + w.w_prior - 1.0) > 1e-9) {
    throw Error(ErrorCode::ConfigInvalid, "score weights must sum to 1");
  }
}

VectorXd raw_profile_vector(const DatasetProfile& p) {
  VectorXd v(kProfileDims);
  v << std::log10(static_cast<double>(std::max<std::size_t>(p.n_rows, 1))),
      std::log10(static_cast<double>(p.n_features) + 1.0), p.numeric_ratio, p.missing_ratio, p.sparsity,
      std::log10(static_cast<double>(std::max<std::size_t>(p.n_classes, 1))), p.class_balance_entropy,
      p.mean_abs_skewness, p.mean_feature_correlation;
  return v;
}

ProfileStats profile_stats(const Repository& repo) {
  if (repo.empty()) throw Error(ErrorCode::EmptyRepository, "repository has no entries");
  const auto entries = repo.list_entries();
  MatrixXd rows(static_cast<Index>(entries.size()), kProfileDims);
  for (std::size_t i = 0; i < entries.size(); ++i) rows.row(static_cast<Index>(i)) = raw_profile_vector(entries[i].profile);
  ProfileStats stats;
  stats.mean = rows.colwise().mean().transpose();
  stats.std = ((rows.rowwise() - stats.mean.transpose()).array().square().colwise().mean()).sqrt().transpose();
  return stats;
}

VectorXd profile_vector(const DatasetProfile& profile, const ProfileStats& stats) {
  const VectorXd raw = raw_profile_vector(profile);
  VectorXd z = VectorXd::Zero(kProfileDims);
  for (Index i = 0; i < kProfileDims; ++i) {
    // Rounding in the mean leaves a tiny spread for constant columns.
    if (stats.std(i) > 1e-12 * std::max(1.0, std::abs(stats.mean(i)))) z(i) = (raw(i) - stats.mean(i)) / stats.std(i);
  }
  return z;
}

std::vector<Neighbor> match_top_k(const DatasetProfile& profile, const Repository& repo, std::size_t k) {
  const ProfileStats stats = profile_stats(repo);
  const VectorXd query = profile_vector(profile, stats);
  std::vector<Neighbor> all;
  for (const auto& e : repo.list_entries()) {
    const double sim = cosine_similarity(query, profile_vector(e.profile, stats));
    all.push_back({e.dataset_id, std::clamp(sim, 0.0, 1.0)});
  }
  std::stable_sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.dataset_id < b.dataset_id;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

namespace {

// Normalised neighbor weights; uniform when every similarity is zero.
std::vector<double> neighbor_weights(const std::vector<Neighbor>& neighbors, bool* uniform) {
  double total = 0.0;
  for (const auto& n : neighbors) total += n.similarity;
  std::vector<double> w(neighbors.size(), neighbors.empty() ? 0.0 : 1.0 / static_cast<double>(neighbors.size()));
  *uniform = !(total > 0.0);
  if (!*uniform) {
    for (std::size_t i = 0; i < neighbors.size(); ++i) w[i] = neighbors[i].similarity / total;
  }
  return w;
}

const RepositoryEntry& entry_of(const Repository& repo, const std::string& id) {
  const auto* e = repo.find(id);
  if (!e) throw Error(ErrorCode::InvalidEntry, "neighbor '" + id + "' is not in the repository");
  return *e;
}

}  // namespace

ScoreEstimate estimate_scores(const std::vector<Neighbor>& neighbors, const Repository& repo,
                              const SurveyPriors& priors, const ScoreWeights& weights,
                              const std::string& domain_tag) {
  validate_weights(weights);
  if (neighbors.empty()) throw Error(ErrorCode::EmptyRepository, "no neighbors to score from");
  ScoreEstimate out;
  const auto w = neighbor_weights(neighbors, &out.uniform_fallback);
  for (MethodId m : kAllMethods) {
    double quant = 0.0;
    double qual = 0.0;
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
      const auto& e = entry_of(repo, neighbors[i].dataset_id);
      quant += w[i] * e.quant.methods.at(m).quant_composite;
      qual += w[i] * e.qual.methods.at(m).qual_composite;
    }
    const double prior = domain_bonus(priors, domain_tag, m);
    out.scores[m] = std::clamp(weights.w_quant * quant + weights.w_qual * qual + weights.w_prior * prior, 0.0, 1.0);
  }
  return out;
}

MethodId pick_method(const std::map<MethodId, double>& scores, const SurveyPriors& priors) {
  std::vector<MethodId> order(kAllMethods.begin(), kAllMethods.end());
  std::sort(order.begin(), order.end(), [&](MethodId a, MethodId b) {
    const double sa = scores.at(a);
    const double sb = scores.at(b);
    if (sa != sb) return sa > sb;
    const double fa = method_frequency(priors, a);
    const double fb = method_frequency(priors, b);
    if (fa != fb) return fa > fb;
    return to_token(a) < to_token(b);
  });
  return order.front();
}

Recommendation recommend(const DatasetProfile& profile, const Repository& repo, const SurveyPriors& priors,
                         const ScoreWeights& weights, std::size_t k) {
  Recommendation rec;
  rec.dataset_id = profile.dataset_id;
  rec.domain_tag = profile.domain_tag;
  rec.weights = weights;
  rec.neighbors = match_top_k(profile, repo, k);
  rec.k_used = rec.neighbors.size();
  const ScoreEstimate estimate = estimate_scores(rec.neighbors, repo, priors, weights, profile.domain_tag);
  rec.estimated_scores = estimate.scores;
  rec.uniform_fallback = estimate.uniform_fallback;
  rec.recommended_method = pick_method(rec.estimated_scores, priors);
  rec.s_xai = rec.estimated_scores.at(rec.recommended_method);

  bool uniform = false;
  const auto w = neighbor_weights(rec.neighbors, &uniform);
  for (ModelId model : kAllModels) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < rec.neighbors.size(); ++i) {
      const auto& perf = entry_of(repo, rec.neighbors[i].dataset_id).model_performance;
      const auto it = perf.find(model);
      if (it == perf.end()) continue;
      num += w[i] * it->second.accuracy;
      den += w[i];
    }
    if (den > 0.0) rec.model_accuracy[model] = num / den;
  }
  // kAllModels lists random_forest first, so it keeps ties.
  double best = -1.0;
  for (ModelId model : kAllModels) {
    const auto it = rec.model_accuracy.find(model);
    if (it != rec.model_accuracy.end() && it->second > best) {
      best = it->second;
      rec.recommended_model = model;
    }
  }
  return rec;
}

Recommendation recommend(const DatasetTable& dataset, const Repository& repo, const SurveyPriors& priors,
                         const ScoreWeights& weights, std::size_t k) {
  return recommend(extract_profile(dataset), repo, priors, weights, k);
}

std::string recommendation_json(const Recommendation& rec) {
  nlohmann::ordered_json j;
  j["dataset_id"] = rec.dataset_id;
  j["domain_tag"] = rec.domain_tag;
  j["recommended_method"] = to_token(rec.recommended_method);
  j["recommended_model"] = to_token(rec.recommended_model);
  j["s_xai"] = rec.s_xai;
  nlohmann::ordered_json scores = nlohmann::ordered_json::object();
  for (const auto& [m, s] : rec.estimated_scores) scores[std::string(to_token(m))] = s;
  j["estimated_scores"] = std::move(scores);
  nlohmann::ordered_json models = nlohmann::ordered_json::object();
  for (const auto& [m, a] : rec.model_accuracy) models[std::string(to_token(m))] = a;
  j["model_accuracy"] = std::move(models);
  j["neighbors"] = nlohmann::ordered_json::array();
  for (const auto& n : rec.neighbors) j["neighbors"].push_back({{"dataset_id", n.dataset_id}, {"similarity", n.similarity}});
  j["k_used"] = rec.k_used;
  j["weights"] = {{"w_quant", rec.weights.w_quant}, {"w_qual", rec.weights.w_qual}, {"w_prior", rec.weights.w_prior}};
  j["uniform_fallback"] = rec.uniform_fallback;
  return j.dump(2) + "\n";
}

std::string recommendation_text(const Recommendation& rec) {
  std::string out = fmt::format("Recommendation for {} ({})\n", rec.dataset_id,
                                rec.domain_tag.empty() ? "no domain tag" : rec.domain_tag);
  out += fmt::format("  model:       {}\n", to_token(rec.recommended_model));
  out += fmt::format("  XAI method:  {} (score {:.4f})\n\n", to_token(rec.recommended_method), rec.s_xai);
  out += "Estimated XAI scores\n";
  for (const auto& [m, s] : rec.estimated_scores) out += fmt::format("  {:<6} {:.4f}\n", to_token(m), s);
  out += "\nModel accuracy on similar datasets\n";
  for (const auto& [m, a] : rec.model_accuracy) out += fmt::format("  {:<20} {:.4f}\n", to_token(m), a);
  out += fmt::format("\nNearest datasets (k = {})\n", rec.k_used);
  for (std::size_t i = 0; i < rec.neighbors.size(); ++i) {
    out += fmt::format("  {}. {:<30} {:.4f}\n", i + 1, rec.neighbors[i].dataset_id, rec.neighbors[i].similarity);
  }
  if (rec.uniform_fallback) out += "\nNo neighbor had positive similarity; neighbors were weighted equally.\n";
  out += fmt::format("\nWeights: quant {:.2f}, qual {:.2f}, prior {:.2f}\n", rec.weights.w_quant, rec.weights.w_qual,
                     rec.weights.w_prior);
  return out;
}

}  // namespace vxai
