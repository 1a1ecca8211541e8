#include "helpers.hpp"

#include "vxai/survey_priors.hpp"

#include <doctest.h>

using namespace vxai;
using namespace vxai::testing;

namespace {

SurveyPriors shipped_priors() {
  return merge_priors(load_priors(source_dir() / "data/priors/technique_frequency.json"),
                      load_priors(source_dir() / "data/priors/domain_methods.json"));
}

}  // namespace

TEST_SUITE("survey_priors") {

TEST_CASE("shipped frequencies") {
  const auto p = shipped_priors();
  CHECK(p.frequency_of("SHAP") == 175);
  CHECK(p.frequency_of("LIME") == 125);
  CHECK(p.frequency_of("PDP") == 8);
  CHECK_FALSE(p.frequency_of("Nope"));
  CHECK(method_frequency(p, MethodId::shap) == 175.0);
  CHECK(method_frequency(p, MethodId::pfi) == 25.0);
  REQUIRE(p.methods_for("finance") != nullptr);
  CHECK(*p.methods_for("finance") == std::vector<std::string>{"SHAP", "LIME"});
}

TEST_CASE("name mapping") {
  CHECK(map_method_name("SHAP") == MethodId::shap);
  CHECK(map_method_name("Permutation_Importance") == MethodId::pfi);
  CHECK(map_method_name("PFI") == MethodId::pfi);
  CHECK(map_method_name("Partial Dependence") == MethodId::pdp);
  CHECK(map_method_name("lime") == MethodId::lime);
  CHECK_FALSE(map_method_name("Grad-CAM"));
}

TEST_CASE("unmapped names are reported but kept") {
  PriorsReport report;
  const auto p = parse_priors(R"({"xai_explanation_techniques_frequency": {"SHAP": 3, "Anchors": 2}})", &report);
  CHECK(p.technique_frequency.size() == 2);
  REQUIRE(report.unmapped_names.size() == 1);
  CHECK(report.unmapped_names[0] == "Anchors");
}

TEST_CASE("domain bonus") {
  const auto p = shipped_priors();
  CHECK(domain_bonus(p, "finance", MethodId::shap) == doctest::Approx(1.0));
  CHECK(domain_bonus(p, "finance", MethodId::lime) == doctest::Approx(0.75));
  CHECK(domain_bonus(p, "finance", MethodId::pdp) == doctest::Approx(0.5 * 8.0 / 175.0));
  CHECK(domain_bonus(p, "transportation", MethodId::pdp) == doctest::Approx(1.0));
  CHECK(domain_bonus(p, "astronomy", MethodId::lime) == doctest::Approx(0.5 * 125.0 / 175.0));
  for (MethodId m : kAllMethods) {
    const double b = domain_bonus(p, "cybersecurity", m);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("malformed priors") {
  auto code_of = [](std::string_view text) {
    try {
      parse_priors(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code_of("{}") == ErrorCode::MalformedPriors);
  CHECK(code_of("not json") == ErrorCode::MalformedPriors);
  CHECK(code_of(R"({"xai_explanation_techniques_frequency": {"SHAP": "many"}})") == ErrorCode::MalformedPriors);
  CHECK(code_of(R"({"most_frequent_xai_models_per_domain": {"finance": "SHAP"}})") == ErrorCode::MalformedPriors);
}

TEST_CASE("serialization is idempotent") {
  const auto p = shipped_priors();
  const std::string once = serialize_priors(p);
  const std::string twice = serialize_priors(parse_priors(once));
  CHECK(once == twice);
  const auto back = parse_priors(once);
  CHECK(back.technique_frequency == p.technique_frequency);
  CHECK(back.domain_methods == p.domain_methods);
}

TEST_CASE("merge replaces matching keys") {
  const auto base = parse_priors(R"({"xai_explanation_techniques_frequency": {"SHAP": 3, "LIME": 2}})");
  const auto extra = parse_priors(R"({"xai_explanation_techniques_frequency": {"LIME": 9}})");
  const auto merged = merge_priors(base, extra);
  CHECK(merged.frequency_of("SHAP") == 3);
  CHECK(merged.frequency_of("LIME") == 9);
}

}  // TEST_SUITE
