#pragma once

// A review service wired to an in-process fixture server, a temp-dir store
// and a manual clock. Shared by the service, CLI and acceptance tests.

#include "reviewq/fixture_server.hpp"
#include "reviewq/gerrit.hpp"
#include "reviewq/service.hpp"
#include "reviewq/synthgen.hpp"

#include <httplib.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

namespace testenv {

using namespace reviewq;

inline const Timestamp kSnapshot = reviewq::parse_timestamp("2024-06-01T00:00:00Z");

inline nlohmann::json open_change(const std::string &id, const std::string &subject,
                                  bool mergeable, const std::string &reviewer = "u1",
                                  int verified = 1, int code_review = 0) {
  RawChange c;
  c.change_id = id;
  c.project = "demo/app";
  c.subject = subject;
  c.message = subject + "\n";
  c.created_at = kSnapshot - std::chrono::hours(20);
  c.updated_at = kSnapshot - std::chrono::hours(1);
  c.status = ChangeStatus::Open;
  c.insertions = 40;
  c.deletions = 10;
  c.revision_count = 2;
  c.verified_label = verified;
  c.code_review_label = code_review;
  c.mergeable = mergeable;
  c.reviewer_ids = {reviewer};
  return to_change_info(c);
}

/// Closed synthetic history (reviewed by "u9") plus three open requests for
/// u1: a conflicted trouble report, a clean feature and a clean trouble
/// report.
inline std::vector<nlohmann::json> default_fixture(std::size_t history_rows = 300,
                                                   std::uint64_t seed = 5) {
  const auto spec = planted_review_spec(true, history_rows, seed);
  FixtureOptions opts;
  opts.snapshot = kSnapshot;
  opts.reviewers = {"u9"};
  auto changes = emit_fixture_server_payloads(sample_dataset(spec), opts);
  changes.push_back(open_change("demo~tr-conflict", "Fix TR-101: crash on resume", false));
  changes.push_back(open_change("demo~feature", "Add CSV export", true));
  changes.push_back(open_change("demo~tr-clean", "Fix TR-102: leak in cache", true));
  return changes;
}

inline std::filesystem::path fresh_dir(const std::string &name) {
  std::random_device rd;
  const auto dir = std::filesystem::temp_directory_path() /
                   ("reviewq-" + name + "-" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

struct Env {
  std::filesystem::path dir;
  std::unique_ptr<FixtureServer> review_server;
  std::shared_ptr<ManualClock> clock;
  Config config;
  std::shared_ptr<DatasetStore> store;
  std::unique_ptr<ReviewService> service;

  explicit Env(const std::string &name, std::vector<nlohmann::json> changes = default_fixture(),
               double alpha = 1.0)
      : dir(fresh_dir(name)) {
    FixtureServer::Options fo;
    fo.now = kSnapshot;
    review_server = std::make_unique<FixtureServer>(std::move(changes), fo);
    review_server->start();
    clock = std::make_shared<ManualClock>(kSnapshot);
    config.review_server.endpoint = review_server->endpoint();
    config.review_server.retry_backoff = std::chrono::milliseconds(1);
    config.review_server.max_attempts = 2;
    config.review_server.timeout = std::chrono::seconds(10);
    config.smoothing_alpha = alpha;
    config.store_path = dir / "reviewq.db";
    config.model_path = dir / "model.json";
    store = std::make_shared<DatasetStore>(config.store_path);
    service = std::make_unique<ReviewService>(config, clock, store);
  }

  ~Env() {
    service.reset();
    store.reset();
    review_server->stop();
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  /// Writes the config as a file the CLI can read.
  std::filesystem::path write_config() const {
    const auto path = dir / "config.json";
    nlohmann::json doc = {
        {"review_server",
         {{"endpoint", config.review_server.endpoint},
          {"retry_backoff_ms", 1},
          {"max_attempts", 2}}},
        {"smoothing_alpha", config.smoothing_alpha},
        {"store_path", config.store_path.string()},
        {"model_path", config.model_path.string()},
    };
    std::ofstream(path) << doc.dump(2);
    return path;
  }
};

/// Serves a ReviewService's routes on an ephemeral port.
class ApiServer {
public:
  explicit ApiServer(ReviewService &service) {
    service.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~ApiServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }
  int port() const { return port_; }

private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

} // namespace testenv
