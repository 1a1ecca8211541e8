#include "helpers.hpp"

#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>

using namespace vxai::testing;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(VXAI_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string quoted(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

// Small run so the CLI tests stay quick.
void write_small_config(const std::filesystem::path& path, const std::filesystem::path& dir) {
  spit(path, R"({
  "created_at": "2024-06-11T00:00:00Z",
  "models": {"n_trees": 15},
  "explainers": {"lime": {"n_samples": 150}, "local_instances": 4},
  "metrics": {"fidelity_instances": 4, "stability_instances": 2, "stability_perturbations": 2},
  "personas": {"n_backstories": 30, "m_selected": 12},
  "llm": {"retry_base_delay_ms": 0},
  "paths": {"priors": [")" + (source_dir() / "data/priors/technique_frequency.json").string() + R"(", ")" +
                 (source_dir() / "data/priors/domain_methods.json").string() + R"("], "output_dir": ")" +
                 (dir / "out").string() + R"("}
})");
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("benchmark, recommend and report") {
  const auto dir = scratch_dir("cli_ok");
  write_small_config(dir / "c.json", dir);
  const auto repo = dir / "r.vxai.jsonl";
  const std::string common = "--config " + quoted(dir / "c.json") + " --repo " + quoted(repo);
  CHECK(run_cli(common + " --seed 5 benchmark " + quoted(toy_dataset("wine_grade")) + " " +
                quoted(toy_dataset("heart_screening"))) == 0);
  REQUIRE(std::filesystem::exists(repo));
  const std::string first = slurp(repo);
  CHECK(run_cli(common + " --seed 5 benchmark " + quoted(toy_dataset("wine_grade")) + " " +
                quoted(toy_dataset("heart_screening"))) == 0);
  CHECK(slurp(repo) == first);

  CHECK(run_cli(common + " recommend " + quoted(toy_dataset("credit_risk")) + " --out " + quoted(dir / "rec")) == 0);
  CHECK(std::filesystem::exists(dir / "rec" / "recommendation_credit_risk.json"));
  CHECK(std::filesystem::exists(dir / "rec" / "recommendation_credit_risk.txt"));
  CHECK(run_cli(common + " report --out " + quoted(dir / "rep")) == 0);
  CHECK(std::filesystem::exists(dir / "rep" / "table1.csv"));
}

TEST_CASE("a failing dataset gives exit code 2 and keeps the others") {
  const auto dir = scratch_dir("cli_partial");
  write_small_config(dir / "c.json", dir);
  spit(dir / "broken.csv", "a,y\n1,0\n2\n");
  const auto repo = dir / "r.vxai.jsonl";
  CHECK(run_cli("--config " + quoted(dir / "c.json") + " --repo " + quoted(repo) + " --seed 5 benchmark " +
                quoted(toy_dataset("wine_grade")) + " " + quoted(dir / "broken.csv")) == 2);
  CHECK(slurp(repo).find("wine_grade") != std::string::npos);
}

TEST_CASE("recommend without a repository gives exit code 3") {
  const auto dir = scratch_dir("cli_norepo");
  CHECK(run_cli("--repo " + quoted(dir / "none.vxai.jsonl") + " recommend " + quoted(toy_dataset("credit_risk"))) ==
        3);
  spit(dir / "bad.vxai.jsonl", "{broken\n");
  CHECK(run_cli("--repo " + quoted(dir / "bad.vxai.jsonl") + " recommend " + quoted(toy_dataset("credit_risk"))) ==
        3);
}

TEST_CASE("too few personas gives exit code 4") {
  const auto dir = scratch_dir("cli_personas");
  write_small_config(dir / "c.json", dir);
  std::string text = slurp(dir / "c.json");
  text.replace(text.find("\"m_selected\": 12"), 16, "\"m_selected\": 31");
  spit(dir / "c.json", text);
  CHECK(run_cli("--config " + quoted(dir / "c.json") + " --seed 1 personas --out " + quoted(dir / "p.json")) == 4);
  CHECK_FALSE(std::filesystem::exists(dir / "p.json"));
}

TEST_CASE("benchmark needs a seed") {
  const auto dir = scratch_dir("cli_seed");
  CHECK(run_cli("--repo " + quoted(dir / "r.vxai.jsonl") + " benchmark " + quoted(toy_dataset("wine_grade"))) != 0);
}

}  // TEST_SUITE
