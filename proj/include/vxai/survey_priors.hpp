#ifndef VXAI_SURVEY_PRIORS_HPP_
#define VXAI_SURVEY_PRIORS_HPP_

#include "vxai/core.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace vxai {

inline constexpr std::string_view kFrequencyKey = "xai_explanation_techniques_frequency";
inline constexpr std::string_view kDomainKey = "most_frequent_xai_models_per_domain";

// Literature-survey priors. Method names are kept verbatim and in file
// order; they are a superset of the four benchmarked methods.
struct SurveyPriors {
  std::vector<std::pair<std::string, std::int64_t>> technique_frequency;
  std::vector<std::pair<std::string, std::vector<std::string>>> domain_methods;
  std::string source_note;

  std::optional<std::int64_t> frequency_of(std::string_view name) const;
  const std::vector<std::string>* methods_for(std::string_view domain) const;
};

struct PriorsReport {
  // Names that do not correspond to shap/lime/pfi/pdp.
  std::vector<std::string> unmapped_names;
};

// Recognises the usual spellings ("SHAP", "Permutation_Importance", "PFI",
// "Partial Dependence", ...).
std::optional<MethodId> map_method_name(std::string_view name);

// Throws MalformedPriors.
SurveyPriors parse_priors(std::string_view json_text, PriorsReport* report = nullptr);
SurveyPriors load_priors(const std::filesystem::path& path, PriorsReport* report = nullptr);
std::string serialize_priors(const SurveyPriors& priors);

// Later entries replace earlier ones with the same key.
SurveyPriors merge_priors(const SurveyPriors& base, const SurveyPriors& extra);

// Sum of counts over the names that map to `method`.
double method_frequency(const SurveyPriors& priors, MethodId method);

// Listed in the domain: 0.5 + 0.5 * (1 - rank / |list|), so the first entry
// scores 1.0. Otherwise frequency / max frequency over mappable methods,
// scaled into [0, 0.5]. Unknown domains use the frequency path.
double domain_bonus(const SurveyPriors& priors, std::string_view domain, MethodId method);

}  // namespace vxai

#endif  // VXAI_SURVEY_PRIORS_HPP_
