#include "reviewq/config.hpp"
#include "reviewq/errors.hpp"

#include <doctest.h>

using namespace reviewq;

TEST_CASE("defaults") {
  const auto c = parse_config("{}");
  CHECK(c.schedule.ingest_hour == 2);
  CHECK(c.schedule.retrain_weekday == std::chrono::Sunday);
  CHECK(c.schedule.retrain_hour == 3);
  CHECK(c.smoothing_alpha == 1.0);
  CHECK(c.training_age_endpoint == AgeEndpoint::Snapshot);
  CHECK(c.structure == NetworkStructure::default_structure());
}

TEST_CASE("full document") {
  const auto c = parse_config(R"({
    "review_server": {"endpoint": "https://review.example.com/r", "credentials_env": "RQ_CREDS",
                      "page_size": 50},
    "ingestion": {"window_days": 30, "training_age_endpoint": "last_update"},
    "smoothing_alpha": 0.5,
    "schedule": {"ingest_time": "04:15", "retrain_weekday": "Wed", "retrain_time": "23:59"},
    "store_path": "data/store.db",
    "model_path": "/abs/model.json",
    "server": {"host": "0.0.0.0", "port": 9000}
  })",
                              "/etc/reviewq");
  CHECK(c.review_server.endpoint == "https://review.example.com/r");
  CHECK(c.review_server.credentials_env == "RQ_CREDS");
  CHECK(c.review_server.page_size == 50);
  CHECK(c.ingest_window_days == 30);
  CHECK(c.training_age_endpoint == AgeEndpoint::LastUpdate);
  CHECK(c.smoothing_alpha == 0.5);
  CHECK(c.schedule.ingest_hour == 4);
  CHECK(c.schedule.ingest_minute == 15);
  CHECK(c.schedule.retrain_weekday == std::chrono::Wednesday);
  CHECK(c.schedule.retrain_minute == 59);
  CHECK(c.store_path == "/etc/reviewq/data/store.db");
  CHECK(c.model_path == "/abs/model.json");
  CHECK(c.server.port == 9000);
}

TEST_CASE("custom network and rules") {
  const auto c = parse_config(R"({
    "network": {
      "variables": ["test_verdict", "peer_review", "change_status"],
      "edges": [["test_verdict", "change_status"], {"parent": "peer_review", "child": "change_status"}]
    },
    "change_type_rules": [{"type": "Refactoring", "keywords": ["tidy"]}]
  })");
  CHECK(c.structure.variables.size() == 3);
  CHECK(c.structure.parents_of(var::kChangeStatus).size() == 2);
  CHECK(classify_change_type("tidy up", c.change_type_rules) == ChangeType::Refactoring);
}

TEST_CASE("rejections") {
  CHECK_THROWS_AS(parse_config("not json"), ConfigError);
  CHECK_THROWS_AS(parse_config("[]"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"smoothing_alpha": 0})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schedule": {"ingest_time": "25:00"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"schedule": {"retrain_weekday": "Someday"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"review_server": {"password": "hunter2"}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"network": {"variables": ["mystery", "change_status"],
                                               "edges": []}})"),
                  ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/reviewq.json"), ConfigError);
}
