#include "reviewq/fixture_server.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/gerrit.hpp"

#include <httplib.h>

#include <cctype>
#include <fstream>
#include <sstream>

namespace reviewq {

using nlohmann::json;

namespace {

std::vector<std::string> tokenize(std::string_view q) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty())
      out.push_back(std::move(cur));
    cur.clear();
  };
  for (char ch : q) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else if (ch == '(' || ch == ')') {
      flush();
      out.emplace_back(1, ch);
    } else {
      cur += ch;
    }
  }
  flush();
  return out;
}

std::string lower(std::string s) {
  for (auto &c : s)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool has_reviewer(const json &change, const std::string &who) {
  auto r = change.find("reviewers");
  if (r == change.end() || !r->is_object())
    return false;
  auto list = r->find("REVIEWER");
  if (list == r->end() || !list->is_array())
    return false;
  for (const auto &acct : *list)
    for (const char *key : {"username", "email", "_account_id"}) {
      auto it = acct.find(key);
      if (it == acct.end())
        continue;
      if (it->is_string() && it->get<std::string>() == who)
        return true;
      if (it->is_number_integer() && std::to_string(it->get<long long>()) == who)
        return true;
    }
  return false;
}

int parse_days(const std::string &v) {
  if (v.size() < 2 || v.back() != 'd')
    throw ContractError("unsupported age value '" + v + "' (expected <N>d)");
  try {
    return std::stoi(v.substr(0, v.size() - 1));
  } catch (const std::exception &) {
    throw ContractError("unsupported age value '" + v + "'");
  }
}

class QueryEvaluator {
public:
  QueryEvaluator(const json &change, std::vector<std::string> tokens, Timestamp now)
      : change_(change), tokens_(std::move(tokens)), now_(now) {}

  bool run() {
    if (tokens_.empty())
      throw ContractError("empty query");
    const bool r = parse_or();
    if (pos_ != tokens_.size())
      throw ContractError("unexpected token '" + tokens_[pos_] + "' in query");
    return r;
  }

private:
  // Both sides are always parsed so syntax errors surface regardless of data.
  bool parse_or() {
    bool r = parse_and();
    while (pos_ < tokens_.size() && tokens_[pos_] == "OR") {
      ++pos_;
      const bool rhs = parse_and();
      r = r || rhs;
    }
    return r;
  }

  bool parse_and() {
    bool r = true;
    bool any = false;
    while (pos_ < tokens_.size() && tokens_[pos_] != ")" && tokens_[pos_] != "OR") {
      const bool a = parse_atom();
      r = r && a;
      any = true;
    }
    if (!any)
      throw ContractError("empty query clause");
    return r;
  }

  bool parse_atom() {
    const auto &tok = tokens_[pos_++];
    if (tok == "(") {
      const bool r = parse_or();
      if (pos_ >= tokens_.size() || tokens_[pos_] != ")")
        throw ContractError("unbalanced parentheses in query");
      ++pos_;
      return r;
    }
    return term(tok);
  }

  bool term(const std::string &tok) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw ContractError("unsupported query term '" + tok + "'");
    const auto key = tok.substr(0, colon);
    const auto value = tok.substr(colon + 1);
    if (key == "status") {
      const auto status = lower(change_.value("status", ""));
      const auto want = lower(value);
      if (want == "open" || want == "new")
        return status == "new" || status == "draft";
      if (want == "closed")
        return status == "merged" || status == "abandoned";
      if (want == "merged" || want == "abandoned")
        return status == want;
      throw ContractError("unsupported status '" + value + "'");
    }
    if (key == "reviewer")
      return has_reviewer(change_, value);
    if (key == "project")
      return change_.value("project", "") == value;
    if (key == "age" || key == "-age") {
      const auto days = parse_days(value);
      const auto updated = parse_timestamp(
          change_.value("updated", change_.value("created", std::string())));
      const bool older = now_ - updated >= std::chrono::days{days};
      return key == "age" ? older : !older;
    }
    throw ContractError("unsupported query operator '" + key + "'");
  }

  const json &change_;
  std::vector<std::string> tokens_;
  Timestamp now_;
  std::size_t pos_ = 0;
};

} // namespace

bool query_matches(const json &change, std::string_view query, Timestamp now) {
  return QueryEvaluator(change, tokenize(query), now).run();
}

std::vector<json> load_fixture_file(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw StorageError("cannot open fixture file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw StorageError("fixture file " + path.string() + " is not JSON: " + e.what());
  }
  if (!doc.is_array())
    throw StorageError("fixture file " + path.string() + " must hold a JSON array");
  return doc.get<std::vector<json>>();
}

void write_fixture_file(const std::filesystem::path &path,
                        const std::vector<json> &changes) {
  std::ofstream out(path, std::ios::trunc);
  if (!out)
    throw StorageError("cannot write fixture file " + path.string());
  out << json(changes).dump(2) << "\n";
}

FixtureServer::FixtureServer(std::vector<json> changes, Options options)
    : server_(std::make_unique<httplib::Server>()), changes_(std::move(changes)),
      options_(std::move(options)) {
  install_routes();
}

FixtureServer::~FixtureServer() { stop(); }

void FixtureServer::install_routes() {
  auto handler = [this](const httplib::Request &req, httplib::Response &res,
                        bool authenticated_path) {
    ++requests_;
    std::vector<json> changes;
    Options options;
    std::chrono::milliseconds delay{0};
    int fail_status = 0;
    {
      std::lock_guard lock(mu_);
      if (fail_count_ > 0) {
        --fail_count_;
        fail_status = fail_status_;
      }
      changes = changes_;
      options = options_;
      delay = delay_;
    }
    if (delay.count() > 0)
      std::this_thread::sleep_for(delay);
    if (fail_status != 0) {
      res.status = fail_status;
      res.set_content("injected failure", "text/plain");
      return;
    }
    if (!options.basic_auth.empty()) {
      const auto expected =
          httplib::make_basic_authentication_header(
              options.basic_auth.substr(0, options.basic_auth.find(':')),
              options.basic_auth.substr(options.basic_auth.find(':') + 1))
              .second;
      if (!authenticated_path || req.get_header_value("Authorization") != expected) {
        res.status = 401;
        res.set_content("Unauthorized", "text/plain");
        return;
      }
    }

    const auto query = req.get_param_value("q");
    std::size_t limit = options.max_page;
    std::size_t start = 0;
    try {
      if (req.has_param("n"))
        limit = std::min<std::size_t>(std::stoul(req.get_param_value("n")),
                                      options.max_page);
      if (req.has_param("S"))
        start = std::stoul(req.get_param_value("S"));
    } catch (const std::exception &) {
      res.status = 400;
      res.set_content("bad paging parameters", "text/plain");
      return;
    }
    if (limit == 0)
      limit = options.max_page;

    std::vector<json> matched;
    try {
      // checked once up front so an empty fixture still rejects bad queries
      if (!query.empty())
        query_matches(json{{"status", "NEW"}, {"updated", format_timestamp(options.now)}},
                      query, options.now);
      for (const auto &c : changes)
        if (query.empty() || query_matches(c, query, options.now))
          matched.push_back(c);
    } catch (const Error &e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
      return;
    }

    json page = json::array();
    for (std::size_t i = start; i < matched.size() && page.size() < limit; ++i)
      page.push_back(matched[i]);
    if (!page.empty() && start + page.size() < matched.size())
      page.back()["_more_changes"] = true;
    res.set_content(std::string(kXssiPrefix) + page.dump(), "application/json");
  };

  server_->Get("/changes/", [handler](const httplib::Request &req,
                                      httplib::Response &res) {
    handler(req, res, false);
  });
  server_->Get("/a/changes/", [handler](const httplib::Request &req,
                                        httplib::Response &res) {
    handler(req, res, true);
  });
}

int FixtureServer::start(const std::string &host, int port) {
  host_ = host;
  port_ = port == 0 ? server_->bind_to_any_port(host) : port;
  if (port != 0 && !server_->bind_to_port(host, port))
    port_ = -1;
  if (port_ <= 0)
    throw StorageError("fixture server cannot bind " + host + ":" +
                       std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return port_;
}

void FixtureServer::listen_blocking(const std::string &host, int port) {
  host_ = host;
  port_ = port;
  if (!server_->listen(host, port))
    throw StorageError("fixture server cannot listen on " + host + ":" +
                       std::to_string(port));
}

void FixtureServer::stop() {
  if (server_)
    server_->stop();
  if (thread_.joinable())
    thread_.join();
}

std::string FixtureServer::endpoint() const {
  return "http://" + host_ + ":" + std::to_string(port_);
}

void FixtureServer::set_changes(std::vector<json> changes) {
  std::lock_guard lock(mu_);
  changes_ = std::move(changes);
}

void FixtureServer::set_now(Timestamp now) {
  std::lock_guard lock(mu_);
  options_.now = now;
}

void FixtureServer::fail_next(int count, int status) {
  std::lock_guard lock(mu_);
  fail_count_ = count;
  fail_status_ = status;
}

void FixtureServer::set_delay(std::chrono::milliseconds delay) {
  std::lock_guard lock(mu_);
  delay_ = delay;
}

} // namespace reviewq
