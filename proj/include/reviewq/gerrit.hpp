#pragma once

// Client and wire mapping for a Gerrit-compatible changes endpoint.
//
// Field mapping (ChangeInfo JSON -> RawChange):
//   id                               -> change_id (falls back to change_id)
//   project, subject                 -> project, subject
//   created, updated                 -> created_at, updated_at
//   status NEW|MERGED|ABANDONED      -> open|merged|abandoned
//   insertions, deletions            -> insertions, deletions
//   revisions (object)               -> revision_count = number of entries
//   revisions[current].commit.message-> message (subject when absent)
//   labels.Verified                  -> verified_label, most negative vote
//   labels.Code-Review               -> code_review_label, most negative vote
//   mergeable                        -> mergeable (absent: no conflict)
//   reviewers.REVIEWER[]             -> reviewer_ids (username, else _account_id)

#include "reviewq/etl.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace reviewq {

/// Responses from the review server start with this guard line.
inline constexpr std::string_view kXssiPrefix = ")]}'\n";

/// Throws FetchError(Protocol) with an excerpt of the payload.
RawChange parse_change_info(const nlohmann::json &info);

struct ChangesPage {
  std::vector<RawChange> changes;
  bool more = false; ///< last element carried "_more_changes": true
};

/// Parses a full response body (with or without the guard line).
ChangesPage parse_changes_response(std::string_view body);

/// Inverse of parse_change_info, used by the fixture tooling.
nlohmann::json to_change_info(const RawChange &change);

struct ReviewServerConfig {
  std::string endpoint; ///< http(s)://host[:port][/prefix]
  /// Name of the environment variable holding "user:password". Empty means
  /// anonymous access.
  std::string credentials_env;
  std::size_t page_size = 100;
  int max_attempts = 3;
  std::chrono::milliseconds retry_backoff{250};
  std::chrono::seconds timeout{30};
};

/// "status:open reviewer:<user>"
std::string open_requests_query(std::string_view user);
/// "(status:open OR -age:<days>d)"
std::string ingest_query(int window_days);

class GerritClient {
public:
  explicit GerritClient(ReviewServerConfig config);

  /// Follows pagination until a page arrives without "_more_changes".
  /// Transient failures are retried up to max_attempts per page.
  std::vector<RawChange> fetch_changes(std::string_view query) const;
  std::vector<RawChange> fetch_changes(std::string_view query,
                                       std::size_t page_size) const;

  std::size_t requests_made() const { return requests_.load(); }
  const ReviewServerConfig &config() const { return config_; }

private:
  std::string fetch_page(const std::string &path) const;

  ReviewServerConfig config_;
  std::string scheme_host_port_;
  std::string base_path_;
  mutable std::atomic<std::size_t> requests_{0};
};

std::string url_encode(std::string_view s);

} // namespace reviewq
