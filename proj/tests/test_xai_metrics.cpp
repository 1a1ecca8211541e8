#include "helpers.hpp"

#include "vxai/xai_metrics.hpp"

#include <doctest.h>

using namespace vxai;
using namespace vxai::testing;

namespace {

struct Fixture {
  FunctionPredictor model = interaction_model(5, 17);
  ExplainContext ctx;
  ExplainerConfig explainer;
  std::vector<std::size_t> instances;

  Fixture() {
    ctx.model = &model;
    ctx.data = gaussian_rows(120, 5, 1);
    ctx.eval = gaussian_rows(40, 5, 2);
    ctx.eval_labels = predict_class(model, ctx.eval);
    ctx.background = sample_background(ctx.data, 20, 3);
    ctx.layout = FeatureLayout::all_numeric(5);
    ctx.explained_class = 1;
    explainer.lime.n_samples = 300;
    explainer.local_instances = 8;
    instances = select_instances(ctx.eval.rows(), 8, 4);
  }
};

MetricConfig small_metrics() {
  MetricConfig m;
  m.fidelity_instances = 10;
  m.stability_instances = 5;
  m.stability_perturbations = 3;
  return m;
}

Explanation scaled(Explanation e, double factor) {
  for (auto& a : e.local_attributions) a.values *= factor;
  return e;
}

}  // namespace

TEST_SUITE("xai_metrics") {

TEST_CASE("coverage count by hand") {
  VectorXd a(4);
  a << 0.5, -0.3, 0.15, 0.05;
  CHECK(coverage_count(a, 0.9) == 3.0);
  CHECK(coverage_count(a, 0.5) == 1.0);
  CHECK(coverage_count(VectorXd::Zero(4), 0.9) == 4.0);
}

TEST_CASE("simplicity is 1 when one feature carries everything") {
  Explanation e;
  e.method = MethodId::pfi;
  e.global_importance = VectorXd::Zero(6);
  e.global_importance(3) = 1.0;
  CHECK(simplicity(e) == 1.0);
  e.global_importance.setConstant(1.0 / 6.0);
  CHECK(simplicity(e) == 6.0);
}

TEST_CASE("local simplicity averages per instance") {
  Explanation e;
  e.method = MethodId::shap;
  e.global_importance = VectorXd::Constant(3, 1.0 / 3.0);
  LocalAttribution one;
  one.values = VectorXd::Unit(3, 0);
  LocalAttribution three;
  three.values = VectorXd::Ones(3);
  e.local_attributions = {one, three};
  CHECK(simplicity(e) == doctest::Approx(2.0));
}

TEST_CASE("clamped cosine") {
  VectorXd a(2);
  a << 1.0, 0.0;
  VectorXd b(2);
  b << 0.0, 1.0;
  VectorXd c(2);
  c << -1.0, 0.0;
  CHECK(mean_clamped_cosine({{a, a}}) == 1.0);
  CHECK(mean_clamped_cosine({{a, b}}) == 0.0);
  CHECK(mean_clamped_cosine({{a, c}}) == 0.0);
  CHECK(mean_clamped_cosine({{VectorXd::Zero(2), VectorXd::Zero(2)}}) == 1.0);
  CHECK(mean_clamped_cosine({{a, a}, {a, b}}) == doctest::Approx(0.5));
}

TEST_CASE("metrics stay in range for every method") {
  Fixture f;
  const auto metrics = small_metrics();
  for (MethodId m : kAllMethods) {
    CAPTURE(to_token(m));
    const auto e = explain(m, f.ctx, f.instances, f.explainer, 5);
    const double fid = fidelity(e, f.ctx, metrics, 6);
    const double simp = simplicity(e, metrics.tau);
    const double stab = stability(m, f.ctx, f.explainer, metrics, 7);
    CHECK(fid >= -1.0);
    CHECK(fid <= 1.0);
    CHECK(simp >= 1.0);
    CHECK(simp <= 5.0);
    CHECK(stab >= 0.0);
    CHECK(stab <= 1.0);
  }
}

TEST_CASE("zero perturbation gives stability of exactly one") {
  Fixture f;
  auto metrics = small_metrics();
  metrics.stability_sigma = 0.0;
  for (MethodId m : kAllMethods) {
    CAPTURE(to_token(m));
    CHECK(stability(m, f.ctx, f.explainer, metrics, 3) == 1.0);
  }
}

TEST_CASE("fidelity and simplicity ignore attribution scale") {
  Fixture f;
  const auto metrics = small_metrics();
  for (MethodId m : {MethodId::shap, MethodId::lime}) {
    const auto e = explain(m, f.ctx, f.instances, f.explainer, 5);
    const auto big = scaled(e, 7.3);
    CHECK(fidelity(big, f.ctx, metrics, 6) == doctest::Approx(fidelity(e, f.ctx, metrics, 6)).epsilon(1e-12));
    CHECK(simplicity(big) == doctest::Approx(simplicity(e)).epsilon(1e-12));
  }
  auto e = explain(MethodId::pfi, f.ctx, f.instances, f.explainer, 5);
  const double base = fidelity(e, f.ctx, metrics, 6);
  e.global_importance *= 7.3;
  CHECK(fidelity(e, f.ctx, metrics, 6) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("shap attributions track occlusion on an additive model") {
  // For an additive model the occlusion delta of feature j is the exact
  // change from zeroing it, so SHAP should correlate almost perfectly.
  VectorXd w(4);
  w << 2.0, -1.0, 0.5, 0.0;
  const FunctionPredictor model(4, 2, [w](const MatrixXd& rows) {
    MatrixXd out(rows.rows(), 2);
    out.col(1) = (0.5 + 0.05 * (rows * w).array()).matrix();
    out.col(0) = (1.0 - out.col(1).array()).matrix();
    return out;
  });
  ExplainContext ctx;
  ctx.model = &model;
  ctx.data = gaussian_rows(100, 4, 9);
  ctx.eval = gaussian_rows(30, 4, 10);
  ctx.eval_labels = predict_class(model, ctx.eval);
  ctx.background = ctx.data;
  ctx.layout = FeatureLayout::all_numeric(4);
  ctx.explained_class = 1;
  const auto instances = select_instances(ctx.eval.rows(), 10, 1);
  const auto e = explain(MethodId::shap, ctx, instances, {}, 2);
  CHECK(fidelity(e, ctx, small_metrics(), 3) > 0.9);
}

TEST_CASE("quant composite by hand") {
  MethodMetrics m;
  m.fidelity = -0.4;
  m.simplicity = 3.0;
  m.stability = 0.8;
  // mean(0, 0.8, 1 - 2/4, 0.9)
  CHECK(quant_composite(m, 5, 0.9) == doctest::Approx((0.0 + 0.8 + 0.5 + 0.9) / 4.0));
}

TEST_CASE("aggregate_quant requires every method") {
  std::map<MethodId, MethodMetrics> per;
  per[MethodId::shap] = {};
  std::map<ModelId, PerformanceMetrics> perf;
  perf[ModelId::random_forest].accuracy = 0.7;
  try {
    aggregate_quant(per, perf, 3);
    FAIL("expected IncompleteMetrics");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IncompleteMetrics);
  }
  for (MethodId m : kAllMethods) per[m] = {};
  const auto q = aggregate_quant(per, perf, 3);
  CHECK(q.methods.size() == 4);
}

TEST_CASE("best model prefers the forest on ties") {
  std::map<ModelId, PerformanceMetrics> perf;
  perf[ModelId::random_forest].accuracy = 0.8;
  perf[ModelId::logistic_regression].accuracy = 0.8;
  CHECK(best_model(perf) == ModelId::random_forest);
  perf[ModelId::logistic_regression].accuracy = 0.81;
  CHECK(best_model(perf) == ModelId::logistic_regression);
}

}  // TEST_SUITE
