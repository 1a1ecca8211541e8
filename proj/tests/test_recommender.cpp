#include "helpers.hpp"
#include "repo_fixtures.hpp"

#include "vxai/recommender.hpp"

#include <doctest.h>

using namespace vxai;
using namespace vxai::testing;

namespace {

const std::array<double, 4> kFlat = {0.5, 0.5, 0.5, 0.5};

// Log10 rows {1, 3, 2, 2} and numeric ratio {0.5, 0.5, 0, 1}: z-vectors are
// (-a, 0), (a, 0), (0, -b), (0, b) with every other component constant.
Repository compass_repo(std::size_t row_scale = 1) {
  Repository repo;
  repo.put_entry(make_entry(simple_profile("west", 10 * row_scale, 0.5), kFlat, kFlat));
  repo.put_entry(make_entry(simple_profile("east", 1000 * row_scale, 0.5), kFlat, kFlat));
  repo.put_entry(make_entry(simple_profile("south", 100 * row_scale, 0.0), kFlat, kFlat));
  repo.put_entry(make_entry(simple_profile("north", 100 * row_scale, 1.0), kFlat, kFlat));
  return repo;
}

double similarity_to(const std::vector<Neighbor>& ns, const std::string& id) {
  for (const auto& n : ns) {
    if (n.dataset_id == id) return n.similarity;
  }
  return -1.0;
}

SurveyPriors shipped_priors() {
  return merge_priors(load_priors(source_dir() / "data/priors/technique_frequency.json"),
                      load_priors(source_dir() / "data/priors/domain_methods.json"));
}

}  // namespace

TEST_SUITE("recommender") {

TEST_CASE("weights must be a convex combination") {
  CHECK_NOTHROW(validate_weights({}));
  CHECK_NOTHROW(validate_weights({1.0, 0.0, 0.0}));
  CHECK_THROWS_AS(validate_weights({0.5, 0.5, 0.5}), Error);
  CHECK_THROWS_AS(validate_weights({1.2, -0.2, 0.0}), Error);
}

TEST_CASE("profile z-scores against a hand computation") {
  const auto repo = compass_repo();
  const auto stats = profile_stats(repo);
  // log10 rows: mean 2, population std sqrt(0.5); numeric ratio: mean 0.5, std sqrt(0.125).
  CHECK(stats.mean(0) == doctest::Approx(2.0));
  CHECK(stats.std(0) == doctest::Approx(std::sqrt(0.5)));
  CHECK(stats.mean(2) == doctest::Approx(0.5));
  CHECK(stats.std(2) == doctest::Approx(std::sqrt(0.125)));
  const VectorXd z = profile_vector(simple_profile("q", 1000, 1.0), stats);
  CHECK(z(0) == doctest::Approx(1.0 / std::sqrt(0.5)));
  CHECK(z(2) == doctest::Approx(0.5 / std::sqrt(0.125)));
  for (Index j : {1, 3, 4, 5, 6, 7, 8}) CHECK(z(j) == 0.0);
  CHECK_THROWS_AS(profile_stats(Repository{}), Error);
}

TEST_CASE("cosine similarity of aligned, orthogonal and diagonal profiles") {
  const auto repo = compass_repo();
  const auto along = match_top_k(simple_profile("q", 1000, 0.5), repo, 4);
  CHECK(similarity_to(along, "east") == doctest::Approx(1.0));
  CHECK(similarity_to(along, "north") == doctest::Approx(0.0));
  CHECK(similarity_to(along, "west") == 0.0);  // cosine -1, clamped
  const auto diagonal = match_top_k(simple_profile("q", 1000, 1.0), repo, 4);
  CHECK(similarity_to(diagonal, "east") == doctest::Approx(std::sqrt(0.5)));
  CHECK(similarity_to(diagonal, "north") == doctest::Approx(std::sqrt(0.5)));
  // Ties break by id.
  CHECK(diagonal[0].dataset_id == "east");
  CHECK(diagonal[1].dataset_id == "north");
  CHECK(match_top_k(simple_profile("q", 1000, 1.0), repo, 2).size() == 2);
  CHECK(match_top_k(simple_profile("q", 1000, 1.0), repo, 10).size() == 4);
}

TEST_CASE("similarity weighting by hand") {
  Repository repo;
  repo.put_entry(make_entry(simple_profile("a", 100, 0.5), {1.0, 0.0, 0.0, 0.0}, kFlat));
  repo.put_entry(make_entry(simple_profile("b", 200, 0.5), {0.0, 0.0, 0.0, 0.0}, kFlat));
  const std::vector<Neighbor> ns = {{"a", 0.8}, {"b", 0.2}};
  const auto est = estimate_scores(ns, repo, {}, {1.0, 0.0, 0.0}, "");
  CHECK(est.scores.at(MethodId::shap) == doctest::Approx(0.8));
  CHECK(est.scores.at(MethodId::lime) == doctest::Approx(0.0));
  CHECK_FALSE(est.uniform_fallback);
  const auto uniform = estimate_scores({{"a", 0.0}, {"b", 0.0}}, repo, {}, {1.0, 0.0, 0.0}, "");
  CHECK(uniform.uniform_fallback);
  CHECK(uniform.scores.at(MethodId::shap) == doctest::Approx(0.5));
}

TEST_CASE("with only the prior weight, finance gets shap") {
  const auto rec = recommend(simple_profile("q", 300, 0.7, "finance"), compass_repo(), shipped_priors(),
                             {0.0, 0.0, 1.0});
  CHECK(rec.recommended_method == MethodId::shap);
  CHECK(rec.s_xai == doctest::Approx(1.0));
  CHECK(rec.estimated_scores.at(MethodId::lime) == doctest::Approx(0.75));
}

TEST_CASE("raising one method's repository scores never lowers its estimate") {
  const auto profile = simple_profile("q", 300, 0.7, "finance");
  const auto priors = shipped_priors();
  auto repo = compass_repo();
  double previous = recommend(profile, repo, priors, {}).estimated_scores.at(MethodId::pdp);
  for (double v : {0.6, 0.7, 0.8, 0.9, 1.0}) {
    for (const auto& e : repo.list_entries()) {
      auto bumped = e;
      bumped.quant.methods[MethodId::pdp].quant_composite = v;
      bumped.qual.methods[MethodId::pdp].qual_composite = v;
      repo.put_entry(bumped);
    }
    const double now = recommend(profile, repo, priors, {}).estimated_scores.at(MethodId::pdp);
    CHECK(now >= previous);
    previous = now;
  }
}

TEST_CASE("scaling every dataset's row count leaves the neighbors unchanged") {
  const auto a = match_top_k(simple_profile("q", 700, 0.8), compass_repo(1), 4);
  const auto b = match_top_k(simple_profile("q", 7000, 0.8), compass_repo(10), 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].dataset_id == b[i].dataset_id);
    CHECK(a[i].similarity == doctest::Approx(b[i].similarity));
  }
}

TEST_CASE("model choice follows weighted accuracy") {
  Repository repo;
  repo.put_entry(make_entry(simple_profile("near", 1000, 0.5), kFlat, kFlat, 0.70, 0.90));
  repo.put_entry(make_entry(simple_profile("far", 10, 0.5), kFlat, kFlat, 0.95, 0.60));
  repo.put_entry(make_entry(simple_profile("mid", 100, 0.5), kFlat, kFlat, 0.80, 0.80));
  const auto rec = recommend(simple_profile("q", 1000, 0.5), repo, {}, {}, 5);
  // Only "near" has positive similarity.
  CHECK(rec.model_accuracy.at(ModelId::logistic_regression) == doctest::Approx(0.90));
  CHECK(rec.recommended_model == ModelId::logistic_regression);
}

TEST_CASE("score ties fall back to prior frequency then token") {
  const auto priors = shipped_priors();
  std::map<MethodId, double> scores = {
      {MethodId::shap, 0.4}, {MethodId::lime, 0.6}, {MethodId::pfi, 0.6}, {MethodId::pdp, 0.6}};
  CHECK(pick_method(scores, priors) == MethodId::lime);
  CHECK(pick_method(scores, SurveyPriors{}) == MethodId::lime);
  scores[MethodId::lime] = 0.1;
  CHECK(pick_method(scores, SurveyPriors{}) == MethodId::pdp);
}

TEST_CASE("recommendation output") {
  const auto rec = recommend(simple_profile("q", 300, 0.7, "finance"), compass_repo(), shipped_priors(), {});
  const std::string json = recommendation_json(rec);
  CHECK(json.find("\"recommended_method\"") != std::string::npos);
  CHECK(json.find("\"neighbors\"") != std::string::npos);
  const std::string text = recommendation_text(rec);
  CHECK(text.find(std::string(to_token(rec.recommended_method))) != std::string::npos);
  CHECK(rec.k_used == 4);
  double best = 0.0;
  for (const auto& [m, s] : rec.estimated_scores) best = std::max(best, s);
  CHECK(rec.s_xai == best);
}

}  // TEST_SUITE
