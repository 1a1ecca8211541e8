#include "vxai/model_zoo.hpp"

#include "vxai/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace vxai {

VectorXd predict_proba(const Predictor& model, const Eigen::Ref<const VectorXd>& x) {
  if (x.size() != model.feature_count()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(model.feature_count()) +
                                                  " features, got " + std::to_string(x.size()));
  }
  return model.predict_proba(x.transpose()).row(0).transpose();
}

std::vector<int> predict_class(const Predictor& model, const MatrixXd& rows) {
  const MatrixXd proba = model.predict_proba(rows);
  std::vector<int> out(static_cast<std::size_t>(rows.rows()));
  for (Index i = 0; i < proba.rows(); ++i) {
    Index best = 0;
    proba.row(i).maxCoeff(&best);
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

MatrixXd FunctionPredictor::predict_proba(const MatrixXd& rows) const {
  if (rows.cols() != features_) {
    throw Error(ErrorCode::DimensionMismatch, "FunctionPredictor arity");
  }
  return fn_(rows);
}

const std::vector<double>& DecisionTree::leaf_for(const double* x) const {
  const TreeNode* node = &nodes.front();
  while (!node->is_leaf()) {
    node = &nodes[static_cast<std::size_t>(x[node->feature] <= node->threshold ? node->left : node->right)];
  }
  return node->distribution;
}

TrainedModel::TrainedModel(ModelId id, Parameters params, std::uint64_t train_seed, Index features,
                           int classes)
    : model_id_(id),
      parameters_(std::move(params)),
      train_seed_(train_seed),
      feature_count_(features),
      class_count_(classes) {}

namespace {

MatrixXd softmax_rows(MatrixXd logits) {
  for (Index i = 0; i < logits.rows(); ++i) {
    const double top = logits.row(i).maxCoeff();
    logits.row(i) = (logits.row(i).array() - top).exp().matrix();
    logits.row(i) /= logits.row(i).sum();
  }
  return logits;
}

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double sum_sq = 0.0;
  for (double c : counts) sum_sq += (c / total) * (c / total);
  return 1.0 - sum_sq;
}

class TreeBuilder {
 public:
  TreeBuilder(const MatrixXd& x, const std::vector<int>& y, int classes, const HyperParams& hyper,
              std::uint64_t seed)
      : x_(x), y_(y), classes_(classes), hyper_(hyper), rng_(seed) {
    const int p = static_cast<int>(x.cols());
    mtry_ = hyper.max_features > 0 ? std::min(hyper.max_features, p)
                                   : std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p)))));
  }

  DecisionTree build(std::vector<std::size_t> samples) {
    DecisionTree tree;
    tree.nodes.emplace_back();
    grow(tree, 0, std::move(samples), 0);
    return tree;
  }

 private:
  struct Candidate {
    int feature = -1;
    double threshold = 0.0;
    double impurity = 0.0;
  };

  std::vector<double> class_counts(const std::vector<std::size_t>& samples) const {
    std::vector<double> counts(static_cast<std::size_t>(classes_), 0.0);
    for (std::size_t s : samples) counts[static_cast<std::size_t>(y_[s])] += 1.0;
    return counts;
  }

  Candidate best_split(const std::vector<std::size_t>& samples) {
    Candidate best;
    best.impurity = std::numeric_limits<double>::infinity();
    const auto features = rng_.sample_indices(static_cast<std::size_t>(x_.cols()), static_cast<std::size_t>(mtry_));
    const double n = static_cast<double>(samples.size());
    const std::vector<double> total = class_counts(samples);
    std::vector<std::pair<double, int>> column(samples.size());

    for (std::size_t f : features) {
      for (std::size_t i = 0; i < samples.size(); ++i) {
        column[i] = {x_(static_cast<Index>(samples[i]), static_cast<Index>(f)), y_[samples[i]]};
      }
      std::sort(column.begin(), column.end());
      std::vector<double> left(static_cast<std::size_t>(classes_), 0.0);
      for (std::size_t i = 0; i + 1 < column.size(); ++i) {
        left[static_cast<std::size_t>(column[i].second)] += 1.0;
        const std::size_t n_left = i + 1;
        const std::size_t n_right = column.size() - n_left;
        if (column[i].first == column[i + 1].first) continue;
        if (n_left < static_cast<std::size_t>(hyper_.min_leaf) ||
            n_right < static_cast<std::size_t>(hyper_.min_leaf)) {
          continue;
        }
        std::vector<double> right(total);
        for (std::size_t c = 0; c < right.size(); ++c) right[c] -= left[c];
        const double nl = static_cast<double>(n_left);
        const double nr = static_cast<double>(n_right);
        const double impurity = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        if (impurity < best.impurity) {
          best.feature = static_cast<int>(f);
          best.threshold = 0.5 * (column[i].first + column[i + 1].first);
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  void grow(DecisionTree& tree, std::size_t node_index, std::vector<std::size_t> samples, int depth) {
    const std::vector<double> counts = class_counts(samples);
    const double n = static_cast<double>(samples.size());
    const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;

    Candidate split;
    if (!pure && depth < hyper_.max_depth && samples.size() >= 2 * static_cast<std::size_t>(hyper_.min_leaf)) {
      split = best_split(samples);
    }
    if (split.feature < 0) {
      std::vector<double> dist(counts);
      for (double& d : dist) d /= n;
      tree.nodes[node_index].distribution = std::move(dist);
      return;
    }

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t s : samples) {
      (x_(static_cast<Index>(s), split.feature) <= split.threshold ? left : right).push_back(s);
    }
    const auto left_index = tree.nodes.size();
    tree.nodes.emplace_back();
    const auto right_index = tree.nodes.size();
    tree.nodes.emplace_back();
    TreeNode& node = tree.nodes[node_index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = static_cast<int>(left_index);
    node.right = static_cast<int>(right_index);
    grow(tree, left_index, std::move(left), depth + 1);
    grow(tree, right_index, std::move(right), depth + 1);
  }

  const MatrixXd& x_;
  const std::vector<int>& y_;
  int classes_;
  const HyperParams& hyper_;
  Rng rng_;
  int mtry_ = 1;
};

ForestParams train_forest(const FeatureMatrix& features, const HyperParams& hyper, std::uint64_t seed) {
  ForestParams forest;
  const std::size_t n = static_cast<std::size_t>(features.rows());
  for (int t = 0; t < hyper.n_trees; ++t) {
    const std::uint64_t tree_seed = derive_seed(seed, static_cast<std::uint64_t>(t));
    Rng rng(tree_seed);
    std::vector<std::size_t> samples(n);
    if (hyper.bootstrap) {
      for (auto& s : samples) s = rng.below(n);
    } else {
      std::iota(samples.begin(), samples.end(), std::size_t{0});
    }
    TreeBuilder builder(features.matrix, features.labels, features.class_count(), hyper, rng.next());
    forest.trees.push_back(builder.build(std::move(samples)));
  }
  return forest;
}

LinearParams train_logistic(const FeatureMatrix& features, const HyperParams& hyper) {
  const Index n = features.rows();
  const Index k = features.class_count();
  const MatrixXd& x = features.matrix;
  MatrixXd y = MatrixXd::Zero(n, k);
  for (Index i = 0; i < n; ++i) y(i, features.labels[static_cast<std::size_t>(i)]) = 1.0;

  LinearParams params{MatrixXd::Zero(k, x.cols()), VectorXd::Zero(k)};
  for (int it = 0; it < hyper.lr_iterations; ++it) {
    MatrixXd logits = x * params.weights.transpose();
    logits.rowwise() += params.bias.transpose();
    const MatrixXd residual = (softmax_rows(std::move(logits)) - y) / static_cast<double>(n);
    const MatrixXd grad_w = residual.transpose() * x + hyper.lr_l2 * params.weights;
    const VectorXd grad_b = residual.colwise().sum().transpose();
    params.weights -= hyper.lr_step * grad_w;
    params.bias -= hyper.lr_step * grad_b;
  }
  return params;
}

}  // namespace

MatrixXd TrainedModel::predict_proba(const MatrixXd& rows) const {
  if (rows.cols() != feature_count_) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(feature_count_) + " features, got " +
                                                  std::to_string(rows.cols()));
  }
  if (const auto* linear = std::get_if<LinearParams>(&parameters_)) {
    MatrixXd logits = rows * linear->weights.transpose();
    logits.rowwise() += linear->bias.transpose();
    return softmax_rows(std::move(logits));
  }
  const auto& forest = std::get<ForestParams>(parameters_);
  MatrixXd out = MatrixXd::Zero(rows.rows(), class_count_);
  // Row-major copy so each instance is contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = rows;
  for (Index i = 0; i < rm.rows(); ++i) {
    const double* x = rm.row(i).data();
    for (const auto& tree : forest.trees) {
      const auto& dist = tree.leaf_for(x);
      for (int c = 0; c < class_count_; ++c) out(i, c) += dist[static_cast<std::size_t>(c)];
    }
  }
  out /= static_cast<double>(forest.trees.size());
  return out;
}

TrainedModel train(const FeatureMatrix& features, ModelId model_id, const HyperParams& hyper,
                   std::uint64_t seed) {
  if (features.rows() < 10) {
    throw Error(ErrorCode::DegenerateTraining, "need at least 10 rows, got " + std::to_string(features.rows()));
  }
  const int k = features.class_count();
  std::vector<int> counts(static_cast<std::size_t>(std::max(k, 0)), 0);
  for (int y : features.labels) ++counts[static_cast<std::size_t>(y)];
  if (k < 2 || std::any_of(counts.begin(), counts.end(), [](int c) { return c < 2; })) {
    throw Error(ErrorCode::DegenerateTraining, "every class needs at least two training rows");
  }
  if (hyper.n_trees < 1 || hyper.max_depth < 0 || hyper.min_leaf < 1 || hyper.lr_iterations < 0) {
    throw Error(ErrorCode::ConfigInvalid, "invalid model hyperparameters");
  }

  switch (model_id) {
    case ModelId::random_forest:
      return TrainedModel(model_id, train_forest(features, hyper, seed), seed, features.cols(), k);
    case ModelId::logistic_regression:
      return TrainedModel(model_id, train_logistic(features, hyper), seed, features.cols(), k);
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown model id");
}

Split stratified_split(const std::vector<int>& labels, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::ConfigInvalid, "test_fraction must be in (0, 1)");
  }
  const int classes = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  Rng rng(seed);
  Split split;
  for (int c = 0; c < classes; ++c) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) members.push_back(i);
    }
    rng.shuffle(members);
    std::size_t n_test = static_cast<std::size_t>(std::floor(static_cast<double>(members.size()) * test_fraction + 0.5));
    if (members.size() >= 2) n_test = std::clamp<std::size_t>(n_test, 1, members.size() - 1);
    split.test.insert(split.test.end(), members.begin(), members.begin() + static_cast<std::ptrdiff_t>(n_test));
    split.train.insert(split.train.end(), members.begin() + static_cast<std::ptrdiff_t>(n_test), members.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

double accuracy(const std::vector<int>& truth, const std::vector<int>& predicted) {
  if (truth.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) correct += truth[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(truth.size());
}

double macro_precision(const std::vector<int>& truth, const std::vector<int>& predicted, int classes) {
  if (classes <= 0) return 0.0;
  double total = 0.0;
  for (int c = 0; c < classes; ++c) {
    std::size_t predicted_c = 0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      if (predicted[i] != c) continue;
      ++predicted_c;
      hits += truth[i] == c ? 1 : 0;
    }
    // Classes never predicted contribute zero.
    if (predicted_c > 0) total += static_cast<double>(hits) / static_cast<double>(predicted_c);
  }
  return total / static_cast<double>(classes);
}

PerformanceMetrics evaluate(const Predictor& model, const FeatureMatrix& features, std::uint64_t split_seed,
                            double test_fraction) {
  const Split split = stratified_split(features.labels, test_fraction, split_seed);
  const FeatureMatrix test = features.subset(split.test);
  const std::vector<int> predicted = predict_class(model, test.matrix);
  PerformanceMetrics m;
  m.accuracy = accuracy(test.labels, predicted);
  m.macro_precision = macro_precision(test.labels, predicted, features.class_count());
  m.split_seed = split_seed;
  m.test_fraction = test_fraction;
  return m;
}

int majority_class(const std::vector<int>& labels, int classes) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(std::max(classes, 1)), 0);
  for (int y : labels) {
    if (y >= 0 && y < classes) ++counts[static_cast<std::size_t>(y)];
  }
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

}  // namespace vxai
