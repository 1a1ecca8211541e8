#ifndef VXAI_MODEL_ZOO_HPP_
#define VXAI_MODEL_ZOO_HPP_

#include "vxai/core.hpp"
#include "vxai/data_ingest.hpp"

#include <cstdint>
#include <functional>
#include <variant>
#include <vector>

namespace vxai {

// Anything the explainers can interrogate: a batch of rows in, one
// probability row per input row out.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual Index feature_count() const = 0;
  virtual int class_count() const = 0;
  virtual MatrixXd predict_proba(const MatrixXd& rows) const = 0;
};

// Single-instance convenience; throws DimensionMismatch on wrong arity.
VectorXd predict_proba(const Predictor& model, const Eigen::Ref<const VectorXd>& x);
std::vector<int> predict_class(const Predictor& model, const MatrixXd& rows);

// Wraps a callable as a Predictor. Used for synthetic models in tests and
// for adapting external models.
class FunctionPredictor final : public Predictor {
 public:
  using Fn = std::function<MatrixXd(const MatrixXd&)>;
  FunctionPredictor(Index features, int classes, Fn fn)
      : features_(features), classes_(classes), fn_(std::move(fn)) {}

  Index feature_count() const override { return features_; }
  int class_count() const override { return classes_; }
  MatrixXd predict_proba(const MatrixXd& rows) const override;

 private:
  Index features_;
  int classes_;
  Fn fn_;
};

struct HyperParams {
  int n_trees = 100;
  int max_depth = 12;
  int min_leaf = 2;
  // 0 selects floor(sqrt(p)).
  int max_features = 0;
  bool bootstrap = true;

  int lr_iterations = 500;
  double lr_step = 0.1;
  double lr_l2 = 1e-3;
};

struct TreeNode {
  // feature < 0 marks a leaf.
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::vector<double> distribution;

  bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  const std::vector<double>& leaf_for(const double* x) const;
};

struct ForestParams {
  std::vector<DecisionTree> trees;
};

struct LinearParams {
  MatrixXd weights;  // classes x features
  VectorXd bias;     // classes
};

class TrainedModel final : public Predictor {
 public:
  using Parameters = std::variant<ForestParams, LinearParams>;

  TrainedModel(ModelId id, Parameters params, std::uint64_t train_seed, Index features, int classes);

  ModelId model_id() const { return model_id_; }
  const Parameters& parameters() const { return parameters_; }
  std::uint64_t train_seed() const { return train_seed_; }

  Index feature_count() const override { return feature_count_; }
  int class_count() const override { return class_count_; }
  MatrixXd predict_proba(const MatrixXd& rows) const override;

 private:
  ModelId model_id_;
  Parameters parameters_;
  std::uint64_t train_seed_;
  Index feature_count_;
  int class_count_;
};

// Throws DegenerateTraining when n < 10 or any class has fewer than two rows.
TrainedModel train(const FeatureMatrix& features, ModelId model_id, const HyperParams& hyper,
                   std::uint64_t seed);

struct PerformanceMetrics {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  std::uint64_t split_seed = 0;
  double test_fraction = 0.2;

  bool operator==(const PerformanceMetrics&) const = default;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Stratified: every class with at least two rows keeps one on each side.
Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed);

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted);
double macro_precision(const std::vector<int>& truth, const std::vector<int>& predicted, int classes);

// Scores on the held-out side of stratified_split(labels, test_fraction, split_seed).
PerformanceMetrics evaluate(const Predictor& model, const FeatureMatrix& features, std::uint64_t split_seed,
                            double test_fraction = 0.2);

// Most frequent label, lowest id on ties.
int majority_class(const std::vector<int>& labels, int classes);

}  // namespace vxai

#endif  // VXAI_MODEL_ZOO_HPP_
