#include "helpers.hpp"

#include "vxai/persona_engine.hpp"

#include <doctest.h>

#include <atomic>

using namespace vxai;
using namespace vxai::testing;

namespace {

PersonaEngineConfig fast_config() {
  PersonaEngineConfig c;
  c.retry.base_delay = std::chrono::milliseconds(0);
  return c;
}

bool has(const ChatRequest& r, std::string_view marker) {
  for (const auto& m : r.messages) {
    if (m.content.find(marker) != std::string::npos) return true;
  }
  return false;
}

// Stub that starts failing after a number of backstory calls.
class FlakyBackend final : public LlmBackend {
 public:
  explicit FlakyBackend(int healthy_calls) : healthy_(healthy_calls) {}
  std::string complete(const ChatRequest& r) override {
    if (has(r, prompt_marker::kBackstory) && calls_++ >= healthy_) throw TransientBackendError("HTTP 500");
    return stub_.complete(r);
  }

 private:
  std::atomic<int> calls_{0};
  int healthy_;
  StubBackend stub_;
};

// Stub with the extraction or survey replies overridden.
class ScriptedBackend final : public LlmBackend {
 public:
  std::string extraction_reply;
  std::string survey_reply;
  std::string survey_target;  // only prompts containing this text
  std::atomic<int> survey_calls{0};

  std::string complete(const ChatRequest& r) override {
    if (!extraction_reply.empty() && has(r, prompt_marker::kExtraction)) return extraction_reply;
    if (has(r, prompt_marker::kSurvey)) {
      ++survey_calls;
      if (!survey_reply.empty() && (survey_target.empty() || has(r, survey_target))) return survey_reply;
    }
    return stub_.complete(r);
  }

 private:
  StubBackend stub_;
};

std::vector<PersonaProfile> stub_profiles(std::size_t n, std::uint64_t seed) {
  StubBackend stub;
  const auto stories = generate_backstories(n, stub, seed, fast_config());
  return extract_profiles(stories, stub, fast_config()).profiles;
}

std::map<MethodId, ExplanationSummary> summaries() {
  std::map<MethodId, ExplanationSummary> out;
  for (MethodId m : kAllMethods) {
    ExplanationSummary s;
    s.method = m;
    s.top_features = {{"income", 0.6}, {"age", 0.4}};
    if (m == MethodId::pdp) s.curve_description = "income: rises";
    out[m] = s;
  }
  return out;
}

DatasetSummary dataset_summary() { return {"toy", "finance", 100, 4, 2, "outcome (default, repaid)"}; }

PersonaResponse response(const std::string& persona, MethodId m, Ratings r) {
  PersonaResponse p;
  p.persona_id = persona;
  p.dataset_id = "d";
  p.method = m;
  p.ratings = r;
  return p;
}

}  // namespace

TEST_SUITE("persona_engine") {

TEST_CASE("stub backstories extract into valid profiles") {
  StubBackend stub;
  const auto stories = generate_backstories(12, stub, 5, fast_config());
  REQUIRE(stories.size() == 12);
  CHECK(stories[0].persona_id == "persona-0000");
  CHECK(stories[11].persona_id == "persona-0011");
  for (const auto& s : stories) CHECK_FALSE(s.text.empty());
  const auto out = extract_profiles(stories, stub, fast_config());
  CHECK(out.failed_ids.empty());
  REQUIRE(out.profiles.size() == 12);
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(out.profiles[i].persona_id == stories[i].persona_id);
    CHECK_FALSE(out.profiles[i].profession.empty());
  }
}

TEST_CASE("generation is deterministic and independent of the window") {
  StubBackend stub;
  auto serial = fast_config();
  serial.max_in_flight = 1;
  auto wide = fast_config();
  wide.max_in_flight = 8;
  const auto a = generate_backstories(20, stub, 9, serial);
  const auto b = generate_backstories(20, stub, 9, wide);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].text == b[i].text);
}

TEST_CASE("zero backstories is an invalid count") {
  StubBackend stub;
  try {
    generate_backstories(0, stub, 1, fast_config());
    FAIL("expected InvalidCount");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidCount);
  }
}

TEST_CASE("a backend outage keeps the finished stories and can resume") {
  FlakyBackend flaky(5);
  auto cfg = fast_config();
  cfg.max_in_flight = 1;
  std::vector<PersonaBackstory> done;
  try {
    generate_backstories(10, flaky, 3, cfg);
    FAIL("expected PartialGeneration");
  } catch (const PartialGeneration& e) {
    CHECK(e.code() == ErrorCode::BackendUnavailable);
    CHECK(e.resume_token() == 5);
    done = e.completed();
  }
  REQUIRE(done.size() == 5);
  StubBackend stub;
  const auto resumed = generate_backstories(10, stub, 3, cfg, done);
  const auto fresh = generate_backstories(10, stub, 3, cfg);
  REQUIRE(resumed.size() == 10);
  for (std::size_t i = 0; i < 10; ++i) CHECK(resumed[i].text == fresh[i].text);
}

TEST_CASE("an out-of-enum expertise fails extraction") {
  ScriptedBackend backend;
  backend.extraction_reply =
      R"({"age_bracket":"30-44","profession":"nurse","ai_expertise":"guru","explanation_preference":"visual"})";
  const PersonaBackstory story{"persona-0001", "I am 35 years old.", 1};
  try {
    extract_profile_fields(story, backend, fast_config());
    FAIL("expected ProfileExtractionFailed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProfileExtractionFailed);
  }
  const auto out = extract_profiles({story}, backend, fast_config());
  CHECK(out.profiles.empty());
  REQUIRE(out.failed_ids.size() == 1);
  CHECK(out.failed_ids[0] == "persona-0001");
}

TEST_CASE("profile replies") {
  const PersonaBackstory story{"persona-0002", "x", 1};
  const auto ok = parse_profile_reply(
      "```json\n{\"age_bracket\":\"45\xE2\x80\x93" "59\",\"profession\":\"pilot\",\"ai_expertise\":\"expert\","
      "\"explanation_preference\":\"numeric\"}\n```",
      story);
  REQUIRE(ok.has_value());
  CHECK(ok->age_bracket == AgeBracket::from_45_to_59);
  CHECK(ok->ai_expertise == AiExpertise::expert);
  CHECK(ok->backstory_ref == "persona-0002");
  CHECK_FALSE(parse_profile_reply(R"({"age_bracket":"45-59","profession":"pilot"})", story));
  CHECK_FALSE(parse_profile_reply("not json", story));
}

TEST_CASE("rating replies are strict") {
  CHECK(parse_ratings_reply(R"({"interpretability":4,"understanding":3,"trust":5})") == Ratings{4, 3, 5});
  CHECK_FALSE(parse_ratings_reply(R"({"interpretability":"five stars","understanding":3,"trust":5})"));
  CHECK_FALSE(parse_ratings_reply(R"({"interpretability":6,"understanding":3,"trust":5})"));
  CHECK_FALSE(parse_ratings_reply(R"({"interpretability":4.5,"understanding":3,"trust":5})"));
  CHECK_FALSE(parse_ratings_reply(R"({"understanding":3,"trust":5})"));
  CHECK_FALSE(parse_ratings_reply("five stars"));
}

TEST_CASE("balanced selection fills every stratum evenly") {
  std::vector<PersonaProfile> pool;
  std::size_t id = 0;
  for (AgeBracket age : kAgeBrackets) {
    for (AiExpertise ex : kExpertiseLevels) {
      for (int k = 0; k < 20; ++k) {
        PersonaProfile p;
        p.persona_id = persona_id_for(id++);
        p.age_bracket = age;
        p.ai_expertise = ex;
        p.profession = "clerk";
        pool.push_back(p);
      }
    }
  }
  const auto chosen = select_balanced(pool, 100);
  REQUIRE(chosen.size() == 100);
  std::array<int, kStrata> counts{};
  for (const auto& p : chosen) ++counts[stratum_of(p)];
  for (int c : counts) {
    CHECK(c >= 8);
    CHECK(c <= 9);
  }
  CHECK(select_balanced(pool, 100) == chosen);
  try {
    select_balanced(pool, 241);
    FAIL("expected InsufficientPersonas");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientPersonas);
  }
}

TEST_CASE("survey covers every persona and method") {
  const auto personas = stub_profiles(8, 2);
  StubBackend stub;
  const auto responses = run_survey(personas, summaries(), dataset_summary(), stub, 4, fast_config());
  CHECK(responses.size() == personas.size() * 4);
  for (std::size_t i = 1; i < responses.size(); ++i) {
    const auto& a = responses[i - 1];
    const auto& b = responses[i];
    CHECK((a.persona_id < b.persona_id || (a.persona_id == b.persona_id && a.method < b.method)));
  }
  const auto again = run_survey(personas, summaries(), dataset_summary(), stub, 4, fast_config());
  for (std::size_t i = 0; i < responses.size(); ++i) CHECK(again[i].ratings == responses[i].ratings);
}

TEST_CASE("malformed ratings are re-asked then dropped") {
  const auto personas = stub_profiles(6, 2);
  ScriptedBackend backend;
  backend.survey_reply = R"({"interpretability":"five stars","understanding":3,"trust":5})";
  backend.survey_target = "Persona: " + personas[0].persona_id;
  const auto responses = run_survey(personas, summaries(), dataset_summary(), backend, 4, fast_config());
  CHECK(responses.size() == (personas.size() - 1) * 4);
  for (const auto& r : responses) CHECK(r.persona_id != personas[0].persona_id);
  // Four prompts for the bad persona, each asked three times.
  CHECK(backend.survey_calls.load() == static_cast<int>((personas.size() - 1) * 4 + 4 * 3));
}

TEST_CASE("a survey below half the expected responses fails") {
  const auto personas = stub_profiles(4, 2);
  ScriptedBackend backend;
  backend.survey_reply = "five stars";
  try {
    run_survey(personas, summaries(), dataset_summary(), backend, 4, fast_config());
    FAIL("expected SurveyIncomplete");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SurveyIncomplete);
  }
}

TEST_CASE("aggregation by hand") {
  std::vector<PersonaResponse> rs;
  int k = 3;
  for (const char* id : {"p1", "p2", "p3"}) {
    for (MethodId m : kAllMethods) rs.push_back(response(id, m, {k, k, k}));
    ++k;
  }
  const auto q = aggregate_qual(rs);
  REQUIRE(q.methods.size() == 4);
  const auto& shap = q.methods.at(MethodId::shap);
  CHECK(shap.means.interpretability == doctest::Approx(4.0));
  CHECK(shap.qual_composite == doctest::Approx(0.75));
  CHECK(shap.response_count == 3);
  CHECK(q.persona_set_id == persona_set_id({"p3", "p1", "p2", "p1"}));
  CHECK(q.persona_set_id.rfind("3x", 0) == 0);

  CHECK(qual_composite({1.0, 1.0, 1.0}) == 0.0);
  CHECK(qual_composite({5.0, 5.0, 5.0}) == 1.0);
  CHECK(qual_composite({2.0, 3.0, 4.0}) == doctest::Approx(0.5));
}

TEST_CASE("aggregation needs every method") {
  std::vector<PersonaResponse> rs = {response("p1", MethodId::shap, {3, 3, 3}),
                                     response("p1", MethodId::lime, {3, 3, 3}),
                                     response("p1", MethodId::pfi, {3, 3, 3})};
  try {
    aggregate_qual(rs);
    FAIL("expected NoResponsesForMethod");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoResponsesForMethod);
  }
}

TEST_CASE("a stub bias toward pdp raises its interpretability") {
  const auto personas = stub_profiles(24, 8);
  StubBackend plain;
  StubBackend biased(StubConfig{{{MethodId::pdp, 1}}});
  const auto base = aggregate_qual(run_survey(personas, summaries(), dataset_summary(), plain, 1, fast_config()));
  const auto tilted = aggregate_qual(run_survey(personas, summaries(), dataset_summary(), biased, 1, fast_config()));
  CHECK(tilted.methods.at(MethodId::pdp).means.interpretability >
        base.methods.at(MethodId::pdp).means.interpretability);
  CHECK(tilted.methods.at(MethodId::shap) == base.methods.at(MethodId::shap));
}

TEST_CASE("pdp summaries describe the curve") {
  Explanation e;
  e.method = MethodId::pdp;
  e.global_importance = VectorXd::Zero(2);
  e.global_importance << 0.7, 0.3;
  PdpCurve up;
  up.grid = VectorXd::LinSpaced(5, 0.0, 1.0);
  up.response = VectorXd::LinSpaced(5, 0.2, 0.8);
  PdpCurve flat;
  flat.grid = up.grid;
  flat.response = VectorXd::Constant(5, 0.5);
  e.pdp_curves = {up, flat};
  const auto s = summarize_explanation(e, {"dose", "weight"});
  REQUIRE(s.top_features.size() == 2);
  CHECK(s.top_features[0].first == "dose");
  CHECK(s.curve_description.find("rises") != std::string::npos);
  const std::string text = render_summary(s);
  CHECK(text.find("dose") != std::string::npos);
}

TEST_CASE("survey prompt carries the persona and method") {
  PersonaProfile p;
  p.persona_id = "persona-0042";
  p.profession = "teacher";
  p.ai_expertise = AiExpertise::expert;
  p.explanation_preference = ExplanationPreference::textual;
  const auto prompt = build_survey_prompt(p, summaries().at(MethodId::lime), dataset_summary());
  CHECK(prompt.find("persona-0042") != std::string::npos);
  CHECK(prompt.find("teacher") != std::string::npos);
  CHECK(prompt.find("Method id: lime") != std::string::npos);
  CHECK(prompt.find(prompt_marker::kSurvey) != std::string::npos);
}

}  // TEST_SUITE
