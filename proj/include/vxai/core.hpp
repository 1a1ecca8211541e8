#ifndef VXAI_CORE_HPP_
#define VXAI_CORE_HPP_

#include <Eigen/Core>

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vxai {

template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

using VectorXd = Vector<double>;
using MatrixXd = Matrix<double>;
using Index = Eigen::Index;

// Every failure the toolkit reports carries one of these codes; callers
// switch on the code, the message is for humans.
enum class ErrorCode {
  MissingLabelColumn,
  RaggedRow,
  EmptyDataset,
  SingleClassLabel,
  ConfigInvalid,
  DegenerateTraining,
  DimensionMismatch,
  TooManyFeatures,
  IncompleteMetrics,
  BackendUnavailable,
  InvalidCount,
  ProfileExtractionFailed,
  InsufficientPersonas,
  SurveyIncomplete,
  NoResponsesForMethod,
  MalformedPriors,
  InvalidEntry,
  CorruptRepository,
  VersionMismatch,
  EmptyRepository,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

enum class MethodId { shap, lime, pfi, pdp };
enum class ModelId { random_forest, logistic_regression };

inline constexpr std::array<MethodId, 4> kAllMethods = {MethodId::shap, MethodId::lime,
                                                        MethodId::pfi, MethodId::pdp};
inline constexpr std::array<ModelId, 2> kAllModels = {ModelId::random_forest,
                                                      ModelId::logistic_regression};

std::string_view to_token(MethodId method);
std::string_view to_token(ModelId model);
std::optional<MethodId> parse_method(std::string_view token);
std::optional<ModelId> parse_model(std::string_view token);

// True for methods whose explanation is per instance.
constexpr bool is_local(MethodId method) {
  return method == MethodId::shap || method == MethodId::lime;
}

}  // namespace vxai

#endif  // VXAI_CORE_HPP_
