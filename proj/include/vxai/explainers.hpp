#ifndef VXAI_EXPLAINERS_HPP_
#define VXAI_EXPLAINERS_HPP_

#include "vxai/core.hpp"
#include "vxai/data_ingest.hpp"
#include "vxai/model_zoo.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace vxai {

struct LocalAttribution {
  std::size_t instance = 0;
  VectorXd values;
  double base_value = 0.0;
};

struct PdpCurve {
  VectorXd grid;
  VectorXd response;
};

struct Explanation {
  MethodId method = MethodId::shap;
  // Non-negative, sums to one unless all zero.
  VectorXd global_importance;
  std::vector<LocalAttribution> local_attributions;
  std::vector<PdpCurve> pdp_curves;
  std::uint64_t explain_seed = 0;
  int explained_class = 0;
  // Kernel SHAP fell back to ridge damping for at least one instance.
  bool ridge_damped = false;
  // LIME saw identical outputs for every perturbation of some instance.
  bool degenerate = false;
};

// Clamps negatives to zero and scales to unit sum; all-zero stays all-zero.
VectorXd normalize_importance(const VectorXd& raw);
// Normalised mean |attribution| across instances.
VectorXd mean_abs_importance(const std::vector<LocalAttribution>& attributions, Index features);

// Which encoded columns are numeric and which form one-hot groups.
struct FeatureLayout {
  std::vector<bool> numeric;
  std::vector<std::vector<Index>> groups;

  static FeatureLayout from(const FeatureMatrix& features);
  static FeatureLayout all_numeric(Index features);
  Index size() const { return static_cast<Index>(numeric.size()); }
};

// Probability of one class, for a batch of rows.
VectorXd class_output(const Predictor& model, const MatrixXd& rows, int explained_class);

// ---- SHAP ----------------------------------------------------------------

struct ShapConfig {
  enum class Mode { automatic, exact, sampled };
  std::size_t background_size = 50;
  std::size_t max_coalitions = 2048;
  Mode mode = Mode::automatic;
};

struct ShapResult {
  VectorXd values;
  double base_value = 0.0;
  bool ridge_damped = false;
};

// Kernel SHAP for one instance. Enumerates every coalition when
// 2^p <= max_coalitions (or mode == exact), otherwise samples paired
// coalitions; the empty and full coalitions enter as the efficiency
// constraint, so values.sum() + base_value equals the model output.
ShapResult kernel_shap(const Predictor& model, const VectorXd& instance, const MatrixXd& background,
                       int explained_class, const ShapConfig& config, std::uint64_t seed);

// Shapley kernel weight of a coalition of size s among p players.
double shapley_kernel_weight(int p, int s);

Explanation explain_shap(const Predictor& model, const MatrixXd& background, const MatrixXd& instances,
                         const std::vector<std::size_t>& instance_ids, int explained_class,
                         const ShapConfig& config, std::uint64_t seed);

// Seeded background sample of up to `size` rows.
MatrixXd sample_background(const MatrixXd& rows, std::size_t size, std::uint64_t seed);

// Exact Shapley values of an arbitrary set function over p players; bit i of
// the mask is player i.
VectorXd shapley_values(int players, const std::function<double(std::uint32_t)>& value);

// Brute-force Shapley values of the interventional value function
// v(S) = mean_b f(x_S, b_{not S}). Throws TooManyFeatures for p > 12.
VectorXd exact_shapley(const Predictor& model, const VectorXd& instance, const MatrixXd& background,
                       int explained_class);

// ---- LIME ----------------------------------------------------------------

struct LimeConfig {
  std::size_t n_samples = 1000;
  double sigma = 1.0;
  double flip_probability = 0.3;
  // <= 0 selects 0.75 * sqrt(p).
  double kernel_width = 0.0;
  std::size_t max_features = 10;
  double l2 = 1e-3;
};

struct LimeResult {
  VectorXd values;
  double base_value = 0.0;
  bool degenerate = false;
};

LimeResult explain_lime(const Predictor& model, const VectorXd& instance, const FeatureLayout& layout,
                        int explained_class, const LimeConfig& config, std::uint64_t seed);

Explanation explain_lime_set(const Predictor& model, const MatrixXd& instances,
                             const std::vector<std::size_t>& instance_ids, const FeatureLayout& layout,
                             int explained_class, const LimeConfig& config, std::uint64_t seed);

// ---- PFI / PDP -------------------------------------------------------------

// Accuracy drop when each column of the held-out rows is permuted.
Explanation explain_pfi(const Predictor& model, const MatrixXd& rows, const std::vector<int>& labels,
                        int repeats, std::uint64_t seed, int explained_class = 0);

// Quantile grid (type-7 interpolation) with duplicates removed.
VectorXd quantile_grid(const VectorXd& column, int grid_size);

Explanation explain_pdp(const Predictor& model, const MatrixXd& rows, const FeatureLayout& layout,
                        int explained_class, int grid_size = 20);

// ---- dispatch ----------------------------------------------------------------

struct ExplainerConfig {
  ShapConfig shap;
  LimeConfig lime;
  int pfi_repeats = 5;
  int pdp_grid = 20;
  std::size_t local_instances = 30;
};

// Everything needed to run any of the four methods against one model.
struct ExplainContext {
  const Predictor* model = nullptr;
  MatrixXd data;                // all preprocessed rows (pdp)
  MatrixXd eval;                // held-out rows (pfi, local instances)
  std::vector<int> eval_labels;
  MatrixXd background;
  FeatureLayout layout;
  int explained_class = 0;
};

// Per-instance seed, so an instance's explanation does not depend on which
// other instances were explained alongside it.
std::uint64_t instance_seed(std::uint64_t seed, std::size_t instance);

// Rows of ctx.eval explained by the local methods.
std::vector<std::size_t> select_instances(Index rows, std::size_t count, std::uint64_t seed);

Explanation explain(MethodId method, const ExplainContext& ctx, const std::vector<std::size_t>& instances,
                    const ExplainerConfig& config, std::uint64_t seed);

// Attribution of one local method for an arbitrary row.
VectorXd explain_row(MethodId method, const ExplainContext& ctx, const VectorXd& row,
                     const ExplainerConfig& config, std::uint64_t row_seed);

// Global importance of any method (local ones via mean |attribution|).
VectorXd global_importance(MethodId method, const ExplainContext& ctx, const std::vector<std::size_t>& instances,
                           const ExplainerConfig& config, std::uint64_t seed);

}  // namespace vxai

#endif  // VXAI_EXPLAINERS_HPP_
