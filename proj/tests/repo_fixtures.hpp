// Hand-built repository entries for recommender, storage and report tests.
#ifndef VXAI_TESTS_REPO_FIXTURES_HPP_
#define VXAI_TESTS_REPO_FIXTURES_HPP_

#include "vxai/repository_store.hpp"

#include <array>
#include <string>

namespace vxai::testing {

inline DatasetProfile simple_profile(const std::string& id, std::size_t rows, double numeric_ratio,
                                     const std::string& domain = "") {
  DatasetProfile p;
  p.dataset_id = id;
  p.n_rows = rows;
  p.n_features = 4;
  p.numeric_ratio = numeric_ratio;
  p.categorical_ratio = 1.0 - numeric_ratio;
  p.n_classes = 2;
  p.class_balance_entropy = 1.0;
  p.domain_tag = domain;
  return p;
}

// Entry whose composites are given per method in kAllMethods order.
inline RepositoryEntry make_entry(const DatasetProfile& profile, const std::array<double, 4>& quant,
                                  const std::array<double, 4>& qual, double rf_accuracy = 0.8,
                                  double lr_accuracy = 0.7) {
  RepositoryEntry e;
  e.dataset_id = profile.dataset_id;
  e.profile = profile;
  e.created_at = "2024-01-01T00:00:00Z";
  e.feature_names = {"a", "b"};
  e.model_performance[ModelId::random_forest].accuracy = rf_accuracy;
  e.model_performance[ModelId::logistic_regression].accuracy = lr_accuracy;
  e.quant.performance = e.model_performance;
  e.quant.feature_count = 2;
  e.qual.persona_set_id = "3xabc";
  for (std::size_t i = 0; i < kAllMethods.size(); ++i) {
    const MethodId m = kAllMethods[i];
    MethodQuant q;
    q.fidelity = 0.5;
    q.simplicity = 1.5;
    q.stability = 0.9;
    q.quant_composite = quant[i];
    e.quant.methods[m] = q;
    MethodQual ql;
    ql.means = {3.0, 3.0, 3.0};
    ql.qual_composite = qual[i];
    ql.response_count = 3;
    e.qual.methods[m] = ql;
    e.global_importance[m] = {0.25 * static_cast<double>(i + 1) / 2.5, 1.0 - 0.25 * static_cast<double>(i + 1) / 2.5};
  }
  return e;
}

}  // namespace vxai::testing

#endif  // VXAI_TESTS_REPO_FIXTURES_HPP_
