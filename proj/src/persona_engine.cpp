#include "vxai/persona_engine.hpp"

#include "vxai/rng.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <exception>
#include <future>
#include <set>

namespace vxai {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kAgeTokens = {"18-29", "30-44", "45-59", "60+"};
constexpr std::array<std::string_view, 3> kExpertiseTokens = {"novice", "intermediate", "expert"};
constexpr std::array<std::string_view, 3> kPreferenceTokens = {"visual", "textual", "numeric"};

template <typename Enum, std::size_t N>
std::optional<Enum> parse_token(std::string_view token, const std::array<std::string_view, N>& tokens) {
  for (std::size_t i = 0; i < N; ++i) {
    if (tokens[i] == token) return static_cast<Enum>(i);
  }
  return std::nullopt;
}

std::string_view display_name(MethodId method) {
  switch (method) {
    case MethodId::shap: return "SHAP (Shapley additive explanations)";
    case MethodId::lime: return "LIME (local interpretable model-agnostic explanations)";
    case MethodId::pfi: return "Permutation feature importance";
    case MethodId::pdp: return "Partial dependence plots";
  }
  return "";
}

// Drops a surrounding ```json fence, which chat models add despite being
// told not to.
std::string_view strip_fence(std::string_view reply) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  reply = trim(reply);
  if (reply.substr(0, 3) == "```") {
    const auto first_nl = reply.find('\n');
    const auto last = reply.rfind("```");
    if (first_nl != std::string_view::npos && last > first_nl) reply = trim(reply.substr(first_nl + 1, last - first_nl - 1));
  }
  return reply;
}

// Runs fn(i) for i in [0, count) with at most `window` calls in flight and
// returns outcomes in index order.
template <typename T, typename Fn>
std::vector<std::pair<std::optional<T>, std::exception_ptr>> run_windowed(std::size_t count, std::size_t window,
                                                                          Fn&& fn) {
  std::vector<std::pair<std::optional<T>, std::exception_ptr>> out(count);
  window = std::max<std::size_t>(window, 1);
  for (std::size_t start = 0; start < count; start += window) {
    const std::size_t end = std::min(count, start + window);
    std::vector<std::future<T>> futures;
    for (std::size_t i = start; i < end; ++i) futures.push_back(std::async(std::launch::async, fn, i));
    for (std::size_t i = start; i < end; ++i) {
      try {
        out[i].first = futures[i - start].get();
      } catch (...) {
        out[i].second = std::current_exception();
      }
    }
  }
  return out;
}

struct Exchange {
  ChatRequest request;
  std::string reply;
  bool accepted = false;
};

void audit_all(const PersonaEngineConfig& config, const std::string& kind, const std::string& subject,
               const std::vector<Exchange>& exchanges) {
  if (!config.audit) return;
  int attempt = 0;
  for (const auto& x : exchanges) config.audit->record(kind, subject, ++attempt, x.request, x.reply, x.accepted);
}

ChatRequest backstory_request(const PersonaEngineConfig& config, std::uint64_t seed) {
  ChatRequest r;
  r.model = config.model;
  r.temperature = 1.0;
  r.seed = seed;
  r.messages.push_back(
      {"user", std::string(prompt_marker::kBackstory) +
                   ", from where you were born and grew up to what you do for a living today. Mention your age, "
                   "your job, how familiar you are with artificial intelligence, and how you prefer to have "
                   "complicated things explained to you. Answer in the first person, in one paragraph."});
  return r;
}

ChatRequest extraction_request(const PersonaEngineConfig& config, const PersonaBackstory& backstory) {
  ChatRequest r;
  r.model = config.model;
  r.temperature = 0.0;
  r.seed = backstory.generation_seed;
  r.messages.push_back({"system", "You convert free text into strict JSON. Reply with JSON only."});
  r.messages.push_back(
      {"user", std::string(prompt_marker::kExtraction) +
                   " from the life story below. Return only a JSON object with the fields "
                   "\"age_bracket\" (one of \"18-29\", \"30-44\", \"45-59\", \"60+\"), \"profession\" (free text), "
                   "\"ai_expertise\" (one of \"novice\", \"intermediate\", \"expert\") and "
                   "\"explanation_preference\" (one of \"visual\", \"textual\", \"numeric\").\n\nLife story:\n" +
                   backstory.text});
  return r;
}

}  // namespace

std::string_view to_token(AgeBracket v) { return kAgeTokens[static_cast<std::size_t>(v)]; }
std::string_view to_token(AiExpertise v) { return kExpertiseTokens[static_cast<std::size_t>(v)]; }
std::string_view to_token(ExplanationPreference v) { return kPreferenceTokens[static_cast<std::size_t>(v)]; }

std::optional<AgeBracket> parse_age_bracket(std::string_view token) {
  std::string t(token);
  // Accept an en dash in place of the hyphen.
  for (std::size_t pos; (pos = t.find("\xE2\x80\x93")) != std::string::npos;) t.replace(pos, 3, "-");
  return parse_token<AgeBracket>(t, kAgeTokens);
}
std::optional<AiExpertise> parse_expertise(std::string_view token) {
  return parse_token<AiExpertise>(token, kExpertiseTokens);
}
std::optional<ExplanationPreference> parse_preference(std::string_view token) {
  return parse_token<ExplanationPreference>(token, kPreferenceTokens);
}

PartialGeneration::PartialGeneration(std::vector<PersonaBackstory> done, const std::string& why)
    : Error(ErrorCode::BackendUnavailable, why), completed_(std::move(done)) {}

std::string persona_id_for(std::size_t index) { return fmt::format("persona-{:04d}", index); }

std::vector<PersonaBackstory> generate_backstories(std::size_t n, LlmBackend& backend, std::uint64_t seed,
                                                   const PersonaEngineConfig& config,
                                                   std::vector<PersonaBackstory> resume) {
  if (n == 0) throw Error(ErrorCode::InvalidCount, "backstory count must be at least 1");
  std::vector<PersonaBackstory> stories = std::move(resume);
  if (stories.size() > n) stories.resize(n);
  const std::size_t window = std::max<std::size_t>(config.max_in_flight, 1);

  while (stories.size() < n) {
    const std::size_t start = stories.size();
    const std::size_t count = std::min(window, n - start);
    auto outcomes = run_windowed<std::string>(count, window, [&](std::size_t k) {
      return complete_with_retry(backend, backstory_request(config, derive_seed(seed, start + k)), config.retry);
    });
    for (std::size_t k = 0; k < count; ++k) {
      const std::uint64_t story_seed = derive_seed(seed, start + k);
      if (outcomes[k].second) {
        try {
          std::rethrow_exception(outcomes[k].second);
        } catch (const Error& e) {
          throw PartialGeneration(std::move(stories), e.what());
        }
      }
      std::string text = *outcomes[k].first;
      if (config.audit) config.audit->record("backstory", persona_id_for(start + k), 1,
                                             backstory_request(config, story_seed), text, !text.empty());
      if (text.empty()) {
        throw PartialGeneration(std::move(stories), "empty backstory for " + persona_id_for(start + k));
      }
      stories.push_back({persona_id_for(start + k), std::move(text), story_seed});
    }
  }
  return stories;
}

std::optional<PersonaProfile> parse_profile_reply(std::string_view reply, const PersonaBackstory& backstory) {
  json doc;
  try {
    doc = json::parse(strip_fence(reply));
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!doc.is_object()) return std::nullopt;
  auto text = [&](const char* key) -> std::optional<std::string> {
    if (!doc.contains(key) || !doc[key].is_string()) return std::nullopt;
    return doc[key].get<std::string>();
  };
  const auto age = text("age_bracket");
  const auto profession = text("profession");
  const auto expertise = text("ai_expertise");
  const auto preference = text("explanation_preference");
  if (!age || !profession || !expertise || !preference || profession->empty()) return std::nullopt;
  const auto age_v = parse_age_bracket(*age);
  const auto exp_v = parse_expertise(*expertise);
  const auto pref_v = parse_preference(*preference);
  if (!age_v || !exp_v || !pref_v) return std::nullopt;
  return PersonaProfile{backstory.persona_id, *age_v, *profession, *exp_v, *pref_v, backstory.persona_id};
}

PersonaProfile extract_profile_fields(const PersonaBackstory& backstory, LlmBackend& backend,
                                      const PersonaEngineConfig& config) {
  if (backstory.text.empty()) {
    throw Error(ErrorCode::ProfileExtractionFailed, backstory.persona_id + ": empty backstory");
  }
  ChatRequest request = extraction_request(config, backstory);
  std::vector<Exchange> exchanges;
  const int attempts = std::max(config.max_parse_attempts, 1);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    const std::string reply = complete_with_retry(backend, request, config.retry);
    const auto profile = parse_profile_reply(reply, backstory);
    exchanges.push_back({request, reply, profile.has_value()});
    if (profile) {
      audit_all(config, "profile", backstory.persona_id, exchanges);
      return *profile;
    }
    request.messages.push_back({"assistant", reply});
    request.messages.push_back({"user",
                                "That reply was not valid. Use exactly the allowed values and reply with the JSON "
                                "object only."});
  }
  audit_all(config, "profile", backstory.persona_id, exchanges);
  throw Error(ErrorCode::ProfileExtractionFailed,
              backstory.persona_id + ": no valid profile after " + std::to_string(attempts) + " attempts");
}

ExtractionOutcome extract_profiles(const std::vector<PersonaBackstory>& backstories, LlmBackend& backend,
                                   const PersonaEngineConfig& config) {
  // Audit records are written afterwards in persona order.
  PersonaEngineConfig quiet = config;
  quiet.audit = nullptr;
  auto outcomes = run_windowed<PersonaProfile>(backstories.size(), config.max_in_flight, [&](std::size_t i) {
    return extract_profile_fields(backstories[i], backend, quiet);
  });
  ExtractionOutcome result;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].first) {
      result.profiles.push_back(*outcomes[i].first);
      continue;
    }
    try {
      std::rethrow_exception(outcomes[i].second);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProfileExtractionFailed) throw;
      result.failed_ids.push_back(backstories[i].persona_id);
    }
  }
  if (config.audit) {
    for (const auto& p : result.profiles) {
      json summary = {{"age_bracket", to_token(p.age_bracket)},
                      {"profession", p.profession},
                      {"ai_expertise", to_token(p.ai_expertise)},
                      {"explanation_preference", to_token(p.explanation_preference)}};
      config.audit->record("profile", p.persona_id, 0, ChatRequest{}, summary.dump(), true);
    }
    for (const auto& id : result.failed_ids) config.audit->record("profile", id, 0, ChatRequest{}, "", false);
  }
  return result;
}

std::size_t stratum_of(const PersonaProfile& profile) {
  return static_cast<std::size_t>(profile.age_bracket) * kExpertiseLevels.size() +
         static_cast<std::size_t>(profile.ai_expertise);
}

std::vector<PersonaProfile> select_balanced(const std::vector<PersonaProfile>& profiles, std::size_t m) {
  if (m > profiles.size()) {
    throw Error(ErrorCode::InsufficientPersonas,
                "asked for " + std::to_string(m) + " personas, only " + std::to_string(profiles.size()) + " available");
  }
  std::array<std::vector<const PersonaProfile*>, kStrata> cells;
  for (const auto& p : profiles) cells[stratum_of(p)].push_back(&p);
  for (auto& cell : cells) {
    std::sort(cell.begin(), cell.end(), [](const auto* a, const auto* b) { return a->persona_id < b->persona_id; });
  }
  std::array<std::size_t, kStrata> taken{};
  std::vector<PersonaProfile> selected;
  selected.reserve(m);
  while (selected.size() < m) {
    std::size_t best = kStrata;
    for (std::size_t c = 0; c < kStrata; ++c) {
      if (taken[c] >= cells[c].size()) continue;
      if (best == kStrata || taken[c] < taken[best]) best = c;
    }
    selected.push_back(*cells[best][taken[best]++]);
  }
  return selected;
}

ExplanationSummary summarize_explanation(const Explanation& explanation,
                                         const std::vector<std::string>& feature_names) {
  ExplanationSummary s;
  s.method = explanation.method;
  const VectorXd& imp = explanation.global_importance;
  std::vector<Index> order(static_cast<std::size_t>(imp.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return imp(a) > imp(b); });
  const std::size_t top = std::min<std::size_t>(5, order.size());
  for (std::size_t k = 0; k < top; ++k) {
    const Index j = order[k];
    const auto& name = static_cast<std::size_t>(j) < feature_names.size() ? feature_names[static_cast<std::size_t>(j)]
                                                                           : fmt::format("feature_{}", j);
    s.top_features.emplace_back(name, imp(j));
  }

  if (explanation.method == MethodId::pdp && !explanation.pdp_curves.empty()) {
    std::string text;
    for (std::size_t k = 0; k < std::min<std::size_t>(3, top); ++k) {
      const auto j = static_cast<std::size_t>(order[k]);
      if (j >= explanation.pdp_curves.size()) continue;
      const auto& curve = explanation.pdp_curves[j];
      if (curve.response.size() < 2) continue;
      const double first = curve.response(0);
      const double last = curve.response(curve.response.size() - 1);
      const double lo = curve.response.minCoeff();
      const double hi = curve.response.maxCoeff();
      std::string shape;
      if (hi - lo < 1e-3) {
        shape = "stays flat";
      } else if (last - first > 0.8 * (hi - lo)) {
        shape = "rises";
      } else if (first - last > 0.8 * (hi - lo)) {
        shape = "falls";
      } else {
        shape = "moves up and down";
      }
      text += fmt::format("As {} increases, the predicted probability {} (from {:.2f} to {:.2f}, range {:.2f}-{:.2f}).\n",
                          s.top_features[k].first, shape, first, last, lo, hi);
    }
    s.curve_description = text;
  }
  return s;
}

std::string render_summary(const ExplanationSummary& summary) {
  std::string out = "Most important features (share of total importance):\n";
  for (std::size_t k = 0; k < summary.top_features.size(); ++k) {
    out += fmt::format("{}. {}: {:.1f}%\n", k + 1, summary.top_features[k].first, 100.0 * summary.top_features[k].second);
  }
  if (!summary.curve_description.empty()) out += "Partial dependence curves:\n" + summary.curve_description;
  return out;
}

std::string build_survey_prompt(const PersonaProfile& persona, const ExplanationSummary& summary,
                                const DatasetSummary& dataset) {
  return fmt::format(
      "Persona: {}\nAge bracket: {}\nProfession: {}\nAI expertise: {}\nPreferred explanation style: {}\n\n"
      "A machine learning model was trained on the dataset '{}' (domain: {}; {} rows, {} features, {} classes{}).\n"
      "Below is an explanation of the model produced with {}.\n"
      "Method: {}\nMethod id: {}\n\n{}\n"
      "{} on three items, each from 1 (strongly disagree) to 5 (strongly agree):\n"
      "1. interpretability: the explanation is easy to interpret.\n"
      "2. understanding: the explanation helps me understand how the model reaches its predictions.\n"
      "3. trust: the explanation makes me trust the model's predictions more.\n"
      "Reply with only a JSON object of the form "
      "{{\"interpretability\": <1-5>, \"understanding\": <1-5>, \"trust\": <1-5>}}.",
      persona.persona_id, to_token(persona.age_bracket), persona.profession, to_token(persona.ai_expertise),
      to_token(persona.explanation_preference), dataset.dataset_id, dataset.domain_tag, dataset.n_rows, dataset.n_features, dataset.n_classes,
      dataset.target_description.empty() ? "" : "; " + dataset.target_description, display_name(summary.method),
      display_name(summary.method), to_token(summary.method), render_summary(summary), prompt_marker::kSurvey);
}

std::optional<Ratings> parse_ratings_reply(std::string_view reply) {
  json doc;
  try {
    doc = json::parse(strip_fence(reply));
  } catch (const json::exception&) {
    return std::nullopt;
  }
  if (!doc.is_object()) return std::nullopt;
  auto rating = [&](const char* key) -> std::optional<int> {
    if (!doc.contains(key) || !doc[key].is_number_integer()) return std::nullopt;
    const auto v = doc[key].get<std::int64_t>();
    if (v < 1 || v > 5) return std::nullopt;
    return static_cast<int>(v);
  };
  const auto i = rating("interpretability");
  const auto u = rating("understanding");
  const auto t = rating("trust");
  if (!i || !u || !t) return std::nullopt;
  return Ratings{*i, *u, *t};
}

std::vector<PersonaResponse> run_survey(const std::vector<PersonaProfile>& personas,
                                        const std::map<MethodId, ExplanationSummary>& summaries,
                                        const DatasetSummary& dataset, LlmBackend& backend, std::uint64_t seed,
                                        const PersonaEngineConfig& config) {
  for (MethodId m : kAllMethods) {
    if (!summaries.count(m)) {
      throw Error(ErrorCode::IncompleteMetrics, "survey needs an explanation for " + std::string(to_token(m)));
    }
  }
  struct Task {
    const PersonaProfile* persona;
    MethodId method;
  };
  std::vector<Task> tasks;
  for (const auto& p : personas) {
    for (MethodId m : kAllMethods) tasks.push_back({&p, m});
  }

  struct Outcome {
    std::optional<PersonaResponse> response;
    std::vector<Exchange> exchanges;
  };
  const int attempts = std::max(config.max_parse_attempts, 1);
  auto outcomes = run_windowed<Outcome>(tasks.size(), config.max_in_flight, [&](std::size_t i) {
    const Task& task = tasks[i];
    const PersonaProfile& p = *task.persona;
    ChatRequest request;
    request.model = config.model;
    request.temperature = 1.0;
    request.seed = derive_seed(seed, fnv1a(p.persona_id) ^ (static_cast<std::uint64_t>(task.method) + 1) * 0x9e37u ^
                                         fnv1a(dataset.dataset_id));
    request.messages.push_back(
        {"system", "You are role-playing the person described in the next message. Answer every question as "
                   "that person would, in character."});
    request.messages.push_back({"user", build_survey_prompt(p, summaries.at(task.method), dataset)});

    Outcome outcome;
    for (int attempt = 1; attempt <= attempts; ++attempt) {
      const std::string reply = complete_with_retry(backend, request, config.retry);
      const auto ratings = parse_ratings_reply(reply);
      outcome.exchanges.push_back({request, reply, ratings.has_value()});
      if (ratings) {
        outcome.response = PersonaResponse{p.persona_id, dataset.dataset_id, task.method, *ratings, reply};
        break;
      }
      request.messages.push_back({"assistant", reply});
      request.messages.push_back(
          {"user", "That reply could not be read. Reply with only the JSON object, using whole numbers from 1 to 5."});
    }
    return outcome;
  });

  std::vector<PersonaResponse> responses;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].second) std::rethrow_exception(outcomes[i].second);
    auto& outcome = *outcomes[i].first;
    audit_all(config, "survey", tasks[i].persona->persona_id + "/" + std::string(to_token(tasks[i].method)),
              outcome.exchanges);
    if (outcome.response) responses.push_back(std::move(*outcome.response));
  }
  if (2 * responses.size() < tasks.size()) {
    throw Error(ErrorCode::SurveyIncomplete, fmt::format("collected {} of {} expected responses", responses.size(),
                                                         tasks.size()));
  }
  std::sort(responses.begin(), responses.end(), [](const PersonaResponse& a, const PersonaResponse& b) {
    return std::tie(a.persona_id, a.method) < std::tie(b.persona_id, b.method);
  });
  return responses;
}

double qual_composite(const DimensionMeans& means) {
  return ((means.interpretability - 1.0) / 4.0 + (means.understanding - 1.0) / 4.0 + (means.trust - 1.0) / 4.0) / 3.0;
}

std::string persona_set_id(std::vector<std::string> persona_ids) {
  std::sort(persona_ids.begin(), persona_ids.end());
  persona_ids.erase(std::unique(persona_ids.begin(), persona_ids.end()), persona_ids.end());
  std::string joined;
  for (const auto& id : persona_ids) joined += id + "\n";
  return fmt::format("{}x{:016x}", persona_ids.size(), fnv1a(joined));
}

QualRecord aggregate_qual(const std::vector<PersonaResponse>& responses) {
  QualRecord record;
  std::map<MethodId, std::array<double, 3>> sums;
  std::vector<std::string> ids;
  for (const auto& r : responses) {
    auto& s = sums[r.method];
    s[0] += r.ratings.interpretability;
    s[1] += r.ratings.understanding;
    s[2] += r.ratings.trust;
    ++record.methods[r.method].response_count;
    ids.push_back(r.persona_id);
  }
  for (MethodId m : kAllMethods) {
    auto it = record.methods.find(m);
    if (it == record.methods.end() || it->second.response_count == 0) {
      throw Error(ErrorCode::NoResponsesForMethod, "no responses for " + std::string(to_token(m)));
    }
    const double n = static_cast<double>(it->second.response_count);
    it->second.means = {sums[m][0] / n, sums[m][1] / n, sums[m][2] / n};
    it->second.qual_composite = qual_composite(it->second.means);
  }
  record.persona_set_id = persona_set_id(std::move(ids));
  return record;
}

}  // namespace vxai
