#include "service_env.hpp"

#include "cli.hpp"
#include "reviewq/eval.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace reviewq;
using nlohmann::json;
using testenv::Env;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const std::string kNow = "2024-06-01T00:00:00Z";

} // namespace

TEST_CASE("usage errors exit 2") {
  ::unsetenv("REVIEWQ_CONFIG");
  CHECK(run({}).code == 2);
  CHECK(run({"train"}).code == 2);
  CHECK(run({"--config", "/nonexistent/config.json", "train"}).code == 2);
  CHECK(run({"prioritize"}).code == 2); // --user is required
  CHECK(run({"train", "--bogus"}).code == 2);
  CHECK(run({"--format", "xml", "train"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("train on an empty store exits 1") {
  Env env("cli-empty", {});
  const auto cfg = env.write_config().string();
  const auto r = run({"--config", cfg, "train"});
  CHECK(r.code == 1);
  CHECK(r.err.find("dataset is empty") != std::string::npos);
}

TEST_CASE("config from the environment") {
  Env env("cli-env", {});
  const auto cfg = env.write_config().string();
  ::setenv("REVIEWQ_CONFIG", cfg.c_str(), 1);
  CHECK(run({"train"}).code == 1); // found the config, store is empty
  ::unsetenv("REVIEWQ_CONFIG");
}

TEST_CASE("ingest, train, prioritize, eval") {
  Env env("cli-flow");
  const auto cfg = env.write_config().string();

  auto r = run({"--config", cfg, "--now", kNow, "ingest"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("ingested 303 changes") != std::string::npos);

  r = run({"--config", cfg, "--now", kNow, "train"});
  REQUIRE(r.code == 0);
  CHECK(std::filesystem::exists(env.config.model_path));

  SUBCASE("prioritize matches the HTTP endpoint") {
    r = run({"--config", cfg, "--now", kNow, "--format", "structured-text", "prioritize",
             "--user", "u1"});
    REQUIRE(r.code == 0);
    const auto from_cli = prioritized_list_from_json(json::parse(r.out));

    REQUIRE(env.service->load_model());
    testenv::ApiServer api(*env.service);
    auto res = api.client().Get("/api/v1/prioritize?user=u1");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto from_http = prioritized_list_from_json(json::parse(res->body));
    CHECK(from_cli == from_http);

    const auto table = run({"--config", cfg, "--now", kNow, "prioritize", "--user", "u1"});
    REQUIRE(table.code == 0);
    std::istringstream lines(table.out);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    CHECK(header.rfind("RANK", 0) == 0);
    CHECK(first.find(from_http.items[0].change_id) != std::string::npos);
  }

  SUBCASE("structured text round trips through the parser") {
    r = run({"--config", cfg, "--now", kNow, "--format", "structured-text", "prioritize",
             "--user", "u1"});
    REQUIRE(r.code == 0);
    const auto doc = json::parse(r.out);
    CHECK(to_json(prioritized_list_from_json(doc)) == doc);
    CHECK_THROWS_AS(prioritized_list_from_json(json::parse(R"({"user": "u1"})")), ContractError);
  }

  SUBCASE("eval twice gives byte-identical reports") {
    const auto a = env.dir / "a.json";
    const auto b = env.dir / "b.json";
    REQUIRE(run({"--config", cfg, "eval", "--k", "5", "--seed", "7", "--out", a.string()}).code ==
            0);
    REQUIRE(run({"--config", cfg, "eval", "--k", "5", "--seed", "7", "--out", b.string()}).code ==
            0);
    CHECK(slurp(a) == slurp(b));
    CHECK(!slurp(a).empty());
    CHECK(slurp(env.dir / "a-roc.csv") == slurp(env.dir / "b-roc.csv"));
    const auto report = report_from_json(slurp(a));
    CHECK(report.folds == 5);
    CHECK(report.seed == 7);
  }
}

TEST_CASE("prioritize without a model exits 1") {
  Env env("cli-nomodel");
  const auto cfg = env.write_config().string();
  const auto r = run({"--config", cfg, "prioritize", "--user", "u1"});
  CHECK(r.code == 1);
  CHECK(r.err.find("no trained model") != std::string::npos);
}

TEST_CASE("synth writes a fixture and optionally fills the store") {
  Env env("cli-synth", {});
  const auto cfg = env.write_config().string();
  const auto spec = env.dir / "spec.json";
  std::ofstream(spec) << R"({"n_rows": 50, "seed": 9, "planted": "informative"})";
  const auto fixture = env.dir / "fixture.json";
  const auto r = run({"--config", cfg, "synth", "--spec", spec.string(), "--out",
                      fixture.string(), "--store"});
  REQUIRE(r.code == 0);
  CHECK(load_fixture_file(fixture).size() == 50);
  CHECK(env.store->size() == 50);
  CHECK(run({"synth", "--spec", (env.dir / "missing.json").string()}).code == 2);
}
