#include "reviewq/config.hpp"

#include "reviewq/errors.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace reviewq {

using nlohmann::json;

namespace {

void parse_hhmm(const std::string &s, int &hour, int &minute, const char *field) {
  int h = -1, m = -1;
  char tail = 0;
  if (std::sscanf(s.c_str(), "%d:%d%c", &h, &m, &tail) != 2 || h < 0 || h > 23 ||
      m < 0 || m > 59)
    throw ConfigError(std::string(field) + ": expected HH:MM, got '" + s + "'");
  hour = h;
  minute = m;
}

std::chrono::weekday parse_weekday(const std::string &s) {
  static constexpr std::array<const char *, 7> names{"Sun", "Mon", "Tue", "Wed",
                                                     "Thu", "Fri", "Sat"};
  for (unsigned i = 0; i < names.size(); ++i)
    if (s.rfind(names[i], 0) == 0)
      return std::chrono::weekday{i};
  throw ConfigError("schedule.retrain_weekday: unknown weekday '" + s + "'");
}

std::filesystem::path resolve(const std::filesystem::path &base,
                              const std::string &p) {
  std::filesystem::path path(p);
  if (path.is_absolute() || base.empty() || p == ":memory:")
    return path;
  return base / path;
}

NetworkStructure parse_network(const json &net) {
  const auto defaults = NetworkStructure::default_structure();
  NetworkStructure s;
  for (const auto &v : net.at("variables")) {
    if (v.is_string()) {
      const auto name = v.get<std::string>();
      auto known = defaults.find(name);
      if (!known)
        throw ConfigError("network.variables: '" + name +
                          "' needs explicit states ({\"name\", \"states\"})");
      s.variables.push_back(defaults.variables[*known]);
    } else {
      s.variables.push_back({v.at("name").get<std::string>(),
                             v.at("states").get<std::vector<std::string>>()});
    }
  }
  for (const auto &e : net.at("edges")) {
    if (e.is_array())
      s.edges.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
    else
      s.edges.emplace_back(e.at("parent").get<std::string>(),
                           e.at("child").get<std::string>());
  }
  try {
    s.validate();
  } catch (const StructureError &e) {
    throw ConfigError(std::string("network: ") + e.what());
  }
  return s;
}

} // namespace

Config parse_config(const std::string &text, const std::filesystem::path &base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("config must be a JSON object");

  Config c;
  try {
    if (auto rs = doc.find("review_server"); rs != doc.end()) {
      c.review_server.endpoint = rs->value("endpoint", c.review_server.endpoint);
      c.review_server.credentials_env =
          rs->value("credentials_env", c.review_server.credentials_env);
      c.review_server.page_size = rs->value("page_size", c.review_server.page_size);
      c.review_server.max_attempts = rs->value("max_attempts", c.review_server.max_attempts);
      c.review_server.retry_backoff = std::chrono::milliseconds(
          rs->value("retry_backoff_ms", c.review_server.retry_backoff.count()));
      c.review_server.timeout =
          std::chrono::seconds(rs->value("timeout_s", c.review_server.timeout.count()));
      if (rs->contains("credentials") || rs->contains("password"))
        throw ConfigError("review_server: secrets are not allowed in the config; "
                          "name an environment variable in credentials_env");
      if (c.review_server.page_size == 0)
        throw ConfigError("review_server.page_size must be at least 1");
    }
    if (auto in = doc.find("ingestion"); in != doc.end()) {
      c.ingest_window_days = in->value("window_days", c.ingest_window_days);
      const auto ep = in->value("training_age_endpoint", std::string("snapshot"));
      if (ep == "snapshot")
        c.training_age_endpoint = AgeEndpoint::Snapshot;
      else if (ep == "last_update")
        c.training_age_endpoint = AgeEndpoint::LastUpdate;
      else
        throw ConfigError("ingestion.training_age_endpoint: expected snapshot or "
                          "last_update");
    }
    if (auto rules = doc.find("change_type_rules"); rules != doc.end()) {
      c.change_type_rules.clear();
      for (const auto &r : *rules) {
        ChangeTypeRule rule;
        try {
          rule.type = parse_change_type(r.at("type").get<std::string>());
        } catch (const InputError &e) {
          throw ConfigError(std::string("change_type_rules: ") + e.what());
        }
        rule.keywords = r.at("keywords").get<std::vector<std::string>>();
        c.change_type_rules.push_back(std::move(rule));
      }
    }
    if (auto net = doc.find("network"); net != doc.end())
      c.structure = parse_network(*net);
    c.smoothing_alpha = doc.value("smoothing_alpha", c.smoothing_alpha);
    if (!(c.smoothing_alpha > 0.0))
      throw ConfigError("smoothing_alpha must be positive");

    if (auto sc = doc.find("schedule"); sc != doc.end()) {
      if (sc->contains("ingest_time"))
        parse_hhmm(sc->at("ingest_time").get<std::string>(), c.schedule.ingest_hour,
                   c.schedule.ingest_minute, "schedule.ingest_time");
      if (sc->contains("retrain_time"))
        parse_hhmm(sc->at("retrain_time").get<std::string>(), c.schedule.retrain_hour,
                   c.schedule.retrain_minute, "schedule.retrain_time");
      if (sc->contains("retrain_weekday"))
        c.schedule.retrain_weekday =
            parse_weekday(sc->at("retrain_weekday").get<std::string>());
      c.schedule.tick = std::chrono::seconds(
          sc->value("tick_seconds", c.schedule.tick.count()));
      if (c.schedule.tick.count() <= 0)
        throw ConfigError("schedule.tick_seconds must be positive");
    }
    c.store_path = resolve(base_dir, doc.value("store_path", c.store_path.string()));
    c.model_path = resolve(base_dir, doc.value("model_path", c.model_path.string()));
    if (auto sv = doc.find("server"); sv != doc.end()) {
      c.server.host = sv->value("host", c.server.host);
      c.server.port = sv->value("port", c.server.port);
    }
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  return c;
}

Config load_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

} // namespace reviewq
