#ifndef VXAI_PERSONA_ENGINE_HPP_
#define VXAI_PERSONA_ENGINE_HPP_

#include "vxai/core.hpp"
#include "vxai/explainers.hpp"
#include "vxai/llm_backend.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vxai {

struct PersonaBackstory {
  std::string persona_id;
  std::string text;
  std::uint64_t generation_seed = 0;
};

enum class AgeBracket { from_18_to_29, from_30_to_44, from_45_to_59, from_60 };
enum class AiExpertise { novice, intermediate, expert };
enum class ExplanationPreference { visual, textual, numeric };

inline constexpr std::array<AgeBracket, 4> kAgeBrackets = {AgeBracket::from_18_to_29, AgeBracket::from_30_to_44,
                                                           AgeBracket::from_45_to_59, AgeBracket::from_60};
inline constexpr std::array<AiExpertise, 3> kExpertiseLevels = {AiExpertise::novice, AiExpertise::intermediate,
                                                                AiExpertise::expert};

std::string_view to_token(AgeBracket v);
std::string_view to_token(AiExpertise v);
std::string_view to_token(ExplanationPreference v);
std::optional<AgeBracket> parse_age_bracket(std::string_view token);
std::optional<AiExpertise> parse_expertise(std::string_view token);
std::optional<ExplanationPreference> parse_preference(std::string_view token);

struct PersonaProfile {
  std::string persona_id;
  AgeBracket age_bracket = AgeBracket::from_18_to_29;
  std::string profession;
  AiExpertise ai_expertise = AiExpertise::novice;
  ExplanationPreference explanation_preference = ExplanationPreference::visual;
  // persona_id of the backstory the profile was extracted from.
  std::string backstory_ref;

  bool operator==(const PersonaProfile&) const = default;
};

struct Ratings {
  int interpretability = 0;
  int understanding = 0;
  int trust = 0;

  bool operator==(const Ratings&) const = default;
};

struct PersonaResponse {
  std::string persona_id;
  std::string dataset_id;
  MethodId method = MethodId::shap;
  Ratings ratings;
  std::string raw_reply;
};

struct DimensionMeans {
  double interpretability = 0.0;
  double understanding = 0.0;
  double trust = 0.0;

  bool operator==(const DimensionMeans&) const = default;
};

struct MethodQual {
  DimensionMeans means;
  double qual_composite = 0.0;
  std::size_t response_count = 0;

  bool operator==(const MethodQual&) const = default;
};

struct QualRecord {
  std::map<MethodId, MethodQual> methods;
  std::string persona_set_id;

  bool operator==(const QualRecord&) const = default;
};

struct PersonaEngineConfig {
  std::string model;  // passed through to the backend; empty = backend default
  RetryPolicy retry;
  // Attempts per structured reply before the item is given up.
  int max_parse_attempts = 3;
  std::size_t max_in_flight = 4;
  AuditLog* audit = nullptr;
};

// Backend failure part-way through generation. Holds every story finished
// before the failure; pass them back as `resume` to continue.
class PartialGeneration : public Error {
 public:
  PartialGeneration(std::vector<PersonaBackstory> done, const std::string& why);
  const std::vector<PersonaBackstory>& completed() const { return completed_; }
  // Index of the next story to generate.
  std::size_t resume_token() const { return completed_.size(); }

 private:
  std::vector<PersonaBackstory> completed_;
};

std::string persona_id_for(std::size_t index);

// Throws InvalidCount for n == 0 and PartialGeneration when the backend
// stays unavailable.
std::vector<PersonaBackstory> generate_backstories(std::size_t n, LlmBackend& backend, std::uint64_t seed,
                                                   const PersonaEngineConfig& config,
                                                   std::vector<PersonaBackstory> resume = {});

// Validates a structured-extraction reply; nullopt when any field is
// missing or outside its enum.
std::optional<PersonaProfile> parse_profile_reply(std::string_view reply, const PersonaBackstory& backstory);

// Throws ProfileExtractionFailed after max_parse_attempts invalid replies.
PersonaProfile extract_profile_fields(const PersonaBackstory& backstory, LlmBackend& backend,
                                      const PersonaEngineConfig& config);

struct ExtractionOutcome {
  std::vector<PersonaProfile> profiles;
  std::vector<std::string> failed_ids;
};

// Failed personas are excluded and listed.
ExtractionOutcome extract_profiles(const std::vector<PersonaBackstory>& backstories, LlmBackend& backend,
                                   const PersonaEngineConfig& config);

// Stratum index over age_bracket x ai_expertise, age-major (0..11).
std::size_t stratum_of(const PersonaProfile& profile);
inline constexpr std::size_t kStrata = 12;

// Greedy round-robin: repeatedly take the lowest persona_id from the
// least-represented non-empty stratum. Throws InsufficientPersonas.
std::vector<PersonaProfile> select_balanced(const std::vector<PersonaProfile>& profiles, std::size_t m);

struct ExplanationSummary {
  MethodId method = MethodId::shap;
  std::vector<std::pair<std::string, double>> top_features;
  std::string curve_description;
};

ExplanationSummary summarize_explanation(const Explanation& explanation,
                                         const std::vector<std::string>& feature_names);
std::string render_summary(const ExplanationSummary& summary);

struct DatasetSummary {
  std::string dataset_id;
  std::string domain_tag;
  std::size_t n_rows = 0;
  std::size_t n_features = 0;
  std::size_t n_classes = 0;
  std::string target_description;
};

std::string build_survey_prompt(const PersonaProfile& persona, const ExplanationSummary& summary,
                                const DatasetSummary& dataset);

// Strict {interpretability, understanding, trust} integers in 1..5.
std::optional<Ratings> parse_ratings_reply(std::string_view reply);

// One prompt per persona x method; malformed replies are re-asked and then
// dropped. Responses come back sorted by (persona_id, method). Throws
// SurveyIncomplete below 50% of the expected responses.
std::vector<PersonaResponse> run_survey(const std::vector<PersonaProfile>& personas,
                                        const std::map<MethodId, ExplanationSummary>& summaries,
                                        const DatasetSummary& dataset, LlmBackend& backend, std::uint64_t seed,
                                        const PersonaEngineConfig& config);

// (mean - 1) / 4 averaged over the three dimensions.
double qual_composite(const DimensionMeans& means);

// Throws NoResponsesForMethod unless every method has a response. The
// persona set id is taken over the responding personas.
QualRecord aggregate_qual(const std::vector<PersonaResponse>& responses);

// Short stable digest of the sorted persona ids.
std::string persona_set_id(std::vector<std::string> persona_ids);

}  // namespace vxai

#endif  // VXAI_PERSONA_ENGINE_HPP_
