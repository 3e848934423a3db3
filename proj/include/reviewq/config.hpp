#pragma once

// Configuration file shared by the CLI, the ingestion job and the service.
// JSON; every field has a default. Relative paths resolve against the
// directory of the config file. See docs/config.md.

#include "reviewq/bn.hpp"
#include "reviewq/etl.hpp"
#include "reviewq/gerrit.hpp"

#include <chrono>
#include <filesystem>
#include <string>

namespace reviewq {

struct ScheduleConfig {
  int ingest_hour = 2;
  int ingest_minute = 0;
  std::chrono::weekday retrain_weekday = std::chrono::Sunday;
  int retrain_hour = 3;
  int retrain_minute = 0;
  std::chrono::seconds tick{30};
  /// Health turns to WARN when the last ingest is older than this.
  std::chrono::seconds ingest_stale_after{std::chrono::hours(48)};
};

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct Config {
  ReviewServerConfig review_server;
  int ingest_window_days = 180;
  AgeEndpoint training_age_endpoint = AgeEndpoint::Snapshot;
  ChangeTypeRules change_type_rules = default_change_type_rules();
  NetworkStructure structure = NetworkStructure::default_structure();
  double smoothing_alpha = 1.0;
  ScheduleConfig schedule;
  std::filesystem::path store_path = "reviewq.db";
  std::filesystem::path model_path = "model.json";
  ServerConfig server;
};

/// Throws ConfigError with the offending field.
Config parse_config(const std::string &text,
                    const std::filesystem::path &base_dir = {});
Config load_config(const std::filesystem::path &path);

} // namespace reviewq
