#include "vxai/explainers.hpp"

#include "vxai/rng.hpp"

#include <algorithm>
#include <cmath>

namespace vxai {

VectorXd normalize_importance(const VectorXd& raw) {
  VectorXd out = raw.cwiseMax(0.0);
  const double total = out.sum();
  if (total > 0.0 && std::isfinite(total)) {
    out /= total;
  } else {
    out.setZero();
  }
  return out;
}

VectorXd mean_abs_importance(const std::vector<LocalAttribution>& attributions, Index features) {
  VectorXd sum = VectorXd::Zero(features);
  for (const auto& a : attributions) sum += a.values.cwiseAbs();
  if (!attributions.empty()) sum /= static_cast<double>(attributions.size());
  return normalize_importance(sum);
}

FeatureLayout FeatureLayout::from(const FeatureMatrix& features) {
  return {features.numeric, features.feature_groups()};
}

FeatureLayout FeatureLayout::all_numeric(Index features) {
  FeatureLayout layout;
  layout.numeric.assign(static_cast<std::size_t>(features), true);
  for (Index j = 0; j < features; ++j) layout.groups.push_back({j});
  return layout;
}

std::uint64_t instance_seed(std::uint64_t seed, std::size_t instance) {
  return derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(instance));
}

std::vector<std::size_t> select_instances(Index rows, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  auto picks = rng.sample_indices(static_cast<std::size_t>(rows), count);
  std::sort(picks.begin(), picks.end());
  return picks;
}

namespace {

MatrixXd gather_rows(const MatrixXd& rows, const std::vector<std::size_t>& ids) {
  MatrixXd out(static_cast<Index>(ids.size()), rows.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) out.row(static_cast<Index>(i)) = rows.row(static_cast<Index>(ids[i]));
  return out;
}

}  // namespace

Explanation explain(MethodId method, const ExplainContext& ctx, const std::vector<std::size_t>& instances,
                    const ExplainerConfig& config, std::uint64_t seed) {
  const Predictor& model = *ctx.model;
  Explanation e;
  switch (method) {
    case MethodId::shap:
      e = explain_shap(model, ctx.background, gather_rows(ctx.eval, instances), instances, ctx.explained_class,
                       config.shap, seed);
      break;
    case MethodId::lime:
      e = explain_lime_set(model, gather_rows(ctx.eval, instances), instances, ctx.layout, ctx.explained_class,
                           config.lime, seed);
      break;
    case MethodId::pfi:
      e = explain_pfi(model, ctx.eval, ctx.eval_labels, config.pfi_repeats, seed, ctx.explained_class);
      break;
    case MethodId::pdp:
      e = explain_pdp(model, ctx.data, ctx.layout, ctx.explained_class, config.pdp_grid);
      e.explain_seed = seed;
      break;
  }
  return e;
}

VectorXd explain_row(MethodId method, const ExplainContext& ctx, const VectorXd& row,
                     const ExplainerConfig& config, std::uint64_t row_seed) {
  switch (method) {
    case MethodId::shap:
      return kernel_shap(*ctx.model, row, ctx.background, ctx.explained_class, config.shap, row_seed).values;
    case MethodId::lime:
      return explain_lime(*ctx.model, row, ctx.layout, ctx.explained_class, config.lime, row_seed).values;
    default:
      throw Error(ErrorCode::ConfigInvalid, std::string(to_token(method)) + " has no per-instance attribution");
  }
}

VectorXd global_importance(MethodId method, const ExplainContext& ctx, const std::vector<std::size_t>& instances,
                           const ExplainerConfig& config, std::uint64_t seed) {
  return explain(method, ctx, instances, config, seed).global_importance;
}

}  // namespace vxai
