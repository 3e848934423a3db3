#pragma once

// In-process HTTP server speaking the subset of the review-server changes
// endpoint that GerritClient uses. Backs the tests and `reviewq fixture-serve`.
//
// Supported query terms, combined by juxtaposition (AND), "OR" and
// parentheses:
//   status:open|new|merged|abandoned|closed
//   reviewer:<id>   matches any REVIEWER username/_account_id/email
//   project:<name>
//   -age:<N>d       updated within the last N days (relative to `now`)
//   age:<N>d        updated at least N days ago

#include "reviewq/timeutil.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace reviewq {

/// Throws ContractError for unsupported syntax or terms.
bool query_matches(const nlohmann::json &change, std::string_view query,
                   Timestamp now);

/// Reads a fixture file: a JSON array of change objects in wire format.
std::vector<nlohmann::json> load_fixture_file(const std::filesystem::path &path);
void write_fixture_file(const std::filesystem::path &path,
                        const std::vector<nlohmann::json> &changes);

class FixtureServer {
public:
  struct Options {
    Timestamp now{};           ///< clock used by age: terms
    std::string basic_auth;    ///< "user:password"; empty disables auth
    std::size_t max_page = 500;
  };

  FixtureServer(std::vector<nlohmann::json> changes, Options options);
  ~FixtureServer();

  FixtureServer(const FixtureServer &) = delete;
  FixtureServer &operator=(const FixtureServer &) = delete;

  /// Bind and serve on a background thread. Port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string &host = "127.0.0.1", int port = 0);
  void stop();

  /// Blocks serving on the calling thread until stop() is called elsewhere.
  void listen_blocking(const std::string &host, int port);

  std::string endpoint() const;

  void set_changes(std::vector<nlohmann::json> changes);
  void set_now(Timestamp now);
  /// Answer the next `count` requests with `status` (503 by default).
  void fail_next(int count, int status = 503);
  /// Sleep this long before answering every request.
  void set_delay(std::chrono::milliseconds delay);

  std::size_t request_count() const { return requests_.load(); }

private:
  void install_routes();

  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_ = "127.0.0.1";
  int port_ = 0;

  mutable std::mutex mu_;
  std::vector<nlohmann::json> changes_;
  Options options_;
  int fail_count_ = 0;
  int fail_status_ = 503;
  std::chrono::milliseconds delay_{0};
  std::atomic<std::size_t> requests_{0};
};

} // namespace reviewq
