#include "reviewq/gerrit.hpp"

#include "reviewq/errors.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <thread>

namespace reviewq {

using nlohmann::json;

namespace {

std::string excerpt(const std::string &text, std::size_t max = 200) {
  return text.size() <= max ? text : text.substr(0, max) + "...";
}

[[noreturn]] void protocol_error(const std::string &what, const json &payload) {
  throw FetchError(FetchError::Kind::Protocol,
                   what + " in payload: " + excerpt(payload.dump()));
}

const json &required(const json &info, const char *key) {
  auto it = info.find(key);
  if (it == info.end() || it->is_null())
    protocol_error(std::string("missing field '") + key + "'", info);
  return *it;
}

std::string required_string(const json &info, const char *key) {
  const auto &v = required(info, key);
  if (!v.is_string())
    protocol_error(std::string("field '") + key + "' is not a string", info);
  return v.get<std::string>();
}

std::int64_t required_count(const json &info, const char *key) {
  const auto &v = required(info, key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    protocol_error(std::string("field '") + key + "' is not a non-negative integer",
                   info);
  return v.get<std::int64_t>();
}

Timestamp required_time(const json &info, const char *key) {
  try {
    return parse_timestamp(required_string(info, key));
  } catch (const ContractError &) {
    protocol_error(std::string("field '") + key + "' is not a timestamp", info);
  }
}

/// Most negative standing vote. Detailed votes ("all") win over the summary
/// fields of a non-detailed label.
int label_vote(const json &info, const char *label, int strongest) {
  auto labels = info.find("labels");
  if (labels == info.end() || !labels->is_object())
    return 0;
  auto l = labels->find(label);
  if (l == labels->end() || !l->is_object())
    return 0;
  if (auto all = l->find("all"); all != l->end() && all->is_array()) {
    int worst = 0;
    bool any = false;
    for (const auto &vote : *all) {
      int v = 0;
      if (auto it = vote.find("value"); it != vote.end() && it->is_number_integer())
        v = it->get<int>();
      worst = any ? std::min(worst, v) : v;
      any = true;
    }
    return std::clamp(worst, -strongest, strongest);
  }
  if (l->contains("rejected"))
    return -strongest;
  if (l->contains("disliked"))
    return -1;
  if (l->contains("approved"))
    return strongest;
  if (l->contains("recommended"))
    return 1;
  return 0;
}

std::string account_id(const json &acct) {
  if (auto u = acct.find("username"); u != acct.end() && u->is_string())
    return u->get<std::string>();
  if (auto a = acct.find("_account_id"); a != acct.end()) {
    if (a->is_number_integer())
      return std::to_string(a->get<std::int64_t>());
    if (a->is_string())
      return a->get<std::string>();
  }
  if (auto e = acct.find("email"); e != acct.end() && e->is_string())
    return e->get<std::string>();
  return {};
}

} // namespace

RawChange parse_change_info(const json &info) {
  if (!info.is_object())
    protocol_error("change entry is not an object", info);
  RawChange c;
  if (auto id = info.find("id"); id != info.end() && id->is_string())
    c.change_id = id->get<std::string>();
  else
    c.change_id = required_string(info, "change_id");
  c.project = required_string(info, "project");
  c.subject = required_string(info, "subject");
  c.created_at = required_time(info, "created");
  c.updated_at = info.contains("updated") ? required_time(info, "updated")
                                          : c.created_at;

  const auto status = required_string(info, "status");
  if (status == "NEW" || status == "DRAFT")
    c.status = ChangeStatus::Open;
  else if (status == "MERGED")
    c.status = ChangeStatus::Merged;
  else if (status == "ABANDONED")
    c.status = ChangeStatus::Abandoned;
  else
    protocol_error("unknown status '" + status + "'", info);

  c.insertions = required_count(info, "insertions");
  c.deletions = required_count(info, "deletions");

  const auto &revisions = required(info, "revisions");
  if (!revisions.is_object() || revisions.empty())
    protocol_error("field 'revisions' must be a non-empty object", info);
  c.revision_count = static_cast<std::int64_t>(revisions.size());
  if (auto cur = info.find("current_revision"); cur != info.end() && cur->is_string()) {
    auto rev = revisions.find(cur->get<std::string>());
    if (rev != revisions.end()) {
      auto commit = rev->find("commit");
      if (commit != rev->end() && commit->is_object()) {
        if (auto m = commit->find("message"); m != commit->end() && m->is_string())
          c.message = m->get<std::string>();
      }
    }
  }
  if (c.message.empty())
    c.message = c.subject;

  c.verified_label = label_vote(info, "Verified", 1);
  c.code_review_label = label_vote(info, "Code-Review", 2);

  if (auto m = info.find("mergeable"); m != info.end() && m->is_boolean()) {
    c.mergeable = m->get<bool>();
    c.mergeable_reported = true;
  } else {
    c.mergeable = true;
    c.mergeable_reported = false;
  }

  if (auto r = info.find("reviewers"); r != info.end() && r->is_object()) {
    if (auto list = r->find("REVIEWER"); list != r->end() && list->is_array())
      for (const auto &acct : *list)
        if (auto id = account_id(acct); !id.empty())
          c.reviewer_ids.push_back(std::move(id));
  }
  return c;
}

ChangesPage parse_changes_response(std::string_view body) {
  if (body.starts_with(kXssiPrefix))
    body.remove_prefix(kXssiPrefix.size());
  else if (body.starts_with(")]}'"))
    body.remove_prefix(4);
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error &) {
    throw FetchError(FetchError::Kind::Protocol,
                     "response is not JSON: " + excerpt(std::string(body)));
  }
  if (!doc.is_array())
    throw FetchError(FetchError::Kind::Protocol,
                     "expected a JSON array of changes: " + excerpt(doc.dump()));
  ChangesPage page;
  page.changes.reserve(doc.size());
  for (const auto &info : doc)
    page.changes.push_back(parse_change_info(info));
  if (!doc.empty()) {
    const auto &last = doc.back();
    auto more = last.find("_more_changes");
    page.more = more != last.end() && more->is_boolean() && more->get<bool>();
  }
  return page;
}

json to_change_info(const RawChange &c) {
  json info;
  info["id"] = c.change_id;
  info["project"] = c.project;
  info["branch"] = "master";
  info["subject"] = c.subject;
  switch (c.status) {
  case ChangeStatus::Open:
    info["status"] = "NEW";
    break;
  case ChangeStatus::Merged:
    info["status"] = "MERGED";
    break;
  case ChangeStatus::Abandoned:
    info["status"] = "ABANDONED";
    break;
  }
  info["created"] = format_server_timestamp(c.created_at);
  info["updated"] = format_server_timestamp(c.updated_at);
  if (c.mergeable_reported)
    info["mergeable"] = c.mergeable;
  info["insertions"] = c.insertions;
  info["deletions"] = c.deletions;

  const std::string voter = c.reviewer_ids.empty() ? "ci" : c.reviewer_ids.front();
  info["labels"] = {
      {"Verified", {{"all", json::array({{{"value", c.verified_label},
                                          {"username", "ci"}}})}}},
      {"Code-Review", {{"all", json::array({{{"value", c.code_review_label},
                                             {"username", voter}}})}}},
  };

  json revisions = json::object();
  std::string current;
  for (std::int64_t n = 1; n <= c.revision_count; ++n) {
    const std::string sha = "rev" + std::to_string(n);
    revisions[sha] = {{"_number", n}};
    current = sha;
  }
  revisions[current]["commit"] = {{"subject", c.subject}, {"message", c.message}};
  info["current_revision"] = current;
  info["revisions"] = revisions;

  json reviewers = json::array();
  for (const auto &id : c.reviewer_ids)
    reviewers.push_back({{"username", id}});
  info["reviewers"] = {{"REVIEWER", reviewers}};
  return info;
}

std::string open_requests_query(std::string_view user) {
  return "status:open reviewer:" + std::string(user);
}

std::string ingest_query(int window_days) {
  return "(status:open OR -age:" + std::to_string(window_days) + "d)";
}

std::string url_encode(std::string_view s) {
  static constexpr char hex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char ch : s) {
    if (std::isalnum(ch) || ch == '-' || ch == '_' || ch == '.' || ch == '~') {
      out += static_cast<char>(ch);
    } else {
      out += '%';
      out += hex[ch >> 4];
      out += hex[ch & 0xF];
    }
  }
  return out;
}

GerritClient::GerritClient(ReviewServerConfig config) : config_(std::move(config)) {
  if (config_.page_size == 0)
    throw ContractError("page_size must be at least 1");
  const auto &url = config_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError("review server endpoint '" + url + "' has no scheme");
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw ConfigError("unsupported endpoint scheme '" + scheme + "'");
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  base_path_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!base_path_.empty() && base_path_.back() == '/')
    base_path_.pop_back();
}

std::vector<RawChange> GerritClient::fetch_changes(std::string_view query) const {
  return fetch_changes(query, config_.page_size);
}

std::vector<RawChange> GerritClient::fetch_changes(std::string_view query,
                                                   std::size_t page_size) const {
  if (page_size == 0)
    throw ContractError("page_size must be at least 1");
  const bool authenticated =
      !config_.credentials_env.empty() &&
      std::getenv(config_.credentials_env.c_str()) != nullptr;
  const std::string prefix = base_path_ + (authenticated ? "/a" : "");

  std::vector<RawChange> out;
  for (std::size_t start = 0;;) {
    const std::string path = prefix + "/changes/?q=" + url_encode(query) +
                             "&n=" + std::to_string(page_size) +
                             "&S=" + std::to_string(start) +
                             "&o=DETAILED_LABELS&o=ALL_REVISIONS"
                             "&o=CURRENT_COMMIT&o=DETAILED_ACCOUNTS";
    auto page = parse_changes_response(fetch_page(path));
    start += page.changes.size();
    for (auto &c : page.changes)
      out.push_back(std::move(c));
    if (!page.more || page.changes.empty())
      break;
  }
  return out;
}

std::string GerritClient::fetch_page(const std::string &path) const {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(config_.timeout);
  client.set_read_timeout(config_.timeout);
  if (!config_.credentials_env.empty()) {
    if (const char *cred = std::getenv(config_.credentials_env.c_str())) {
      const std::string value(cred);
      const auto colon = value.find(':');
      if (colon == std::string::npos)
        throw FetchError(FetchError::Kind::Auth,
                         "credentials in $" + config_.credentials_env +
                             " must have the form user:password");
      client.set_basic_auth(value.substr(0, colon), value.substr(colon + 1));
    }
  }

  auto backoff = config_.retry_backoff;
  const int attempts = std::max(1, config_.max_attempts);
  for (int attempt = 1;; ++attempt) {
    ++requests_;
    std::string failure;
    if (auto res = client.Get(path)) {
      if (res->status == 200)
        return res->body;
      if (res->status == 401 || res->status == 403)
        throw FetchError(FetchError::Kind::Auth,
                         "review server rejected credentials (HTTP " +
                             std::to_string(res->status) + ")");
      if (res->status < 500)
        throw FetchError(FetchError::Kind::Protocol,
                         "review server answered HTTP " +
                             std::to_string(res->status) + ": " +
                             excerpt(res->body));
      failure = "HTTP " + std::to_string(res->status);
    } else {
      failure = httplib::to_string(res.error());
    }
    if (attempt >= attempts)
      throw FetchError(FetchError::Kind::Transient,
                       "review server unreachable at " + scheme_host_port_ +
                           " after " + std::to_string(attempt) +
                           " attempts: " + failure);
    spdlog::warn("review server request failed ({}), retry {}/{}", failure,
                 attempt, attempts - 1);
    std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

} // namespace reviewq
