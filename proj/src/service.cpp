#include "reviewq/service.hpp"

#include "reviewq/model_io.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include <algorithm>

namespace reviewq {

using nlohmann::json;

Timestamp SystemClock::now() const {
  return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
}

ServedModel ModelSlot::get() const {
  std::lock_guard lock(mu_);
  return current_;
}

std::uint64_t ModelSlot::publish(std::shared_ptr<const TrainedModel> model) {
  std::lock_guard lock(mu_);
  current_ = {std::move(model), current_.generation + 1};
  return current_.generation;
}

Timestamp next_daily_at_or_after(Timestamp t, int hour, int minute) {
  using namespace std::chrono;
  const auto day = floor<days>(t);
  Timestamp candidate = day + hours{hour} + minutes{minute};
  if (candidate < t)
    candidate += days{1};
  return candidate;
}

Timestamp next_weekly_at_or_after(Timestamp t, std::chrono::weekday wd, int hour,
                                  int minute) {
  using namespace std::chrono;
  const sys_days day = floor<days>(t);
  const auto ahead = (wd - weekday{day}).count(); // 0..6
  Timestamp candidate = day + days{ahead} + hours{hour} + minutes{minute};
  if (candidate < t)
    candidate += days{7};
  return candidate;
}

Scheduler::Scheduler(ScheduleConfig config, Job ingest, Job retrain, bool synchronous)
    : config_(config), ingest_(std::move(ingest)), retrain_(std::move(retrain)),
      synchronous_(synchronous) {
  if (!synchronous_)
    runner_ = std::jthread([this](std::stop_token st) { runner_loop(st); });
}

Scheduler::~Scheduler() {
  if (runner_.joinable()) {
    runner_.request_stop();
    cv_.notify_all();
    runner_.join();
  }
}

void Scheduler::tick(Timestamp now) {
  bool run_ingest = false;
  bool run_retrain = false;
  {
    std::lock_guard lock(mu_);
    if (!next_ingest_) {
      next_ingest_ =
          next_daily_at_or_after(now, config_.ingest_hour, config_.ingest_minute);
      next_retrain_ = next_weekly_at_or_after(now, config_.retrain_weekday,
                                              config_.retrain_hour, config_.retrain_minute);
    }
    const auto after = now + std::chrono::seconds{1};
    if (ingest_retry_.exchange(false))
      run_ingest = true;
    if (retrain_retry_.exchange(false))
      run_retrain = true;
    if (now >= *next_ingest_) {
      run_ingest = true;
      next_ingest_ =
          next_daily_at_or_after(after, config_.ingest_hour, config_.ingest_minute);
    }
    if (now >= *next_retrain_) {
      run_retrain = true;
      next_retrain_ = next_weekly_at_or_after(after, config_.retrain_weekday,
                                              config_.retrain_hour, config_.retrain_minute);
    }
  }
  if (run_ingest)
    dispatch("ingest", ingest_, ingest_busy_, ingest_retry_, now);
  if (run_retrain)
    dispatch("retrain", retrain_, retrain_busy_, retrain_retry_, now);
}

void Scheduler::dispatch(const std::string &name, Job &job, std::atomic<bool> &busy,
                         std::atomic<bool> &retry, Timestamp at) {
  if (busy.exchange(true)) {
    spdlog::warn("job={} outcome=skipped detail=\"previous run still active\"", name);
    record({name, at, "skipped", "previous run still active"});
    return;
  }
  Pending p{name, &job, &busy, &retry, at};
  if (synchronous_) {
    execute(p);
    return;
  }
  {
    std::lock_guard lock(mu_);
    queue_.push_back(p);
  }
  cv_.notify_all();
}

void Scheduler::execute(const Pending &p) {
  JobRecord r{p.name, p.at, "ok", {}};
  try {
    r.detail = (*p.job)();
    spdlog::info("job={} outcome=ok detail=\"{}\"", p.name, r.detail);
  } catch (const std::exception &e) {
    r.outcome = "failed";
    r.detail = e.what();
    spdlog::error("job={} outcome=failed detail=\"{}\"", p.name, r.detail);
    p.retry->store(true);
  }
  p.busy->store(false);
  record(std::move(r));
}

void Scheduler::record(JobRecord r) {
  std::lock_guard lock(mu_);
  history_.push_back(std::move(r));
}

void Scheduler::runner_loop(std::stop_token stop) {
  std::unique_lock lock(mu_);
  while (!stop.stop_requested()) {
    if (!cv_.wait(lock, stop, [this] { return !queue_.empty(); }))
      break;
    auto p = queue_.front();
    queue_.pop_front();
    ++in_flight_;
    lock.unlock();
    execute(p);
    lock.lock();
    --in_flight_;
    cv_.notify_all();
  }
}

void Scheduler::wait_idle() {
  if (synchronous_)
    return;
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return queue_.empty() && in_flight_ == 0; });
}

void Scheduler::run(std::stop_token stop, const Clock &clock) {
  std::mutex sleep_mu;
  std::condition_variable_any sleeper;
  while (!stop.stop_requested()) {
    tick(clock.now());
    std::unique_lock lock(sleep_mu);
    sleeper.wait_for(lock, stop, config_.tick, [] { return false; });
  }
}

std::vector<JobRecord> Scheduler::history() const {
  std::lock_guard lock(mu_);
  return history_;
}

std::size_t Scheduler::count(std::string_view job, std::string_view outcome) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(history_.begin(), history_.end(), [&](const JobRecord &r) {
        return r.job == job && r.outcome == outcome;
      }));
}

std::optional<Timestamp> Scheduler::next_ingest() const {
  std::lock_guard lock(mu_);
  return next_ingest_;
}

std::optional<Timestamp> Scheduler::next_retrain() const {
  std::lock_guard lock(mu_);
  return next_retrain_;
}

ReviewService::ReviewService(Config config, std::shared_ptr<const Clock> clock,
                             std::shared_ptr<DatasetStore> store)
    : config_(std::move(config)), clock_(std::move(clock)), store_(std::move(store)),
      client_(config_.review_server), started_at_(clock_->now()) {
  scheduler_ = std::make_unique<Scheduler>(
      config_.schedule,
      [this] {
        const auto s = ingest();
        return "fetched=" + std::to_string(s.fetched) +
               " closed=" + std::to_string(s.closed);
      },
      [this] {
        const auto t = retrain();
        return "rows=" + std::to_string(t.training_rows) +
               " generation=" + std::to_string(t.generation);
      });
}

ReviewService::~ReviewService() { stop(); }

bool ReviewService::load_model() {
  std::error_code ec;
  if (!std::filesystem::exists(config_.model_path, ec))
    return false;
  try {
    auto model = load_model_file(config_.model_path);
    model.validate();
    {
      std::lock_guard lock(stamps_mu_);
      last_train_at_ = model.trained_at;
    }
    slot_.publish(std::make_shared<const TrainedModel>(std::move(model)));
    spdlog::info("loaded model from {}", config_.model_path.string());
    return true;
  } catch (const Error &e) {
    spdlog::warn("ignoring model file {}: {}", config_.model_path.string(), e.what());
    return false;
  }
}

void ReviewService::initialize() {
  if (load_model())
    return;
  try {
    retrain();
  } catch (const EmptyDatasetError &) {
    spdlog::warn("no model file and the dataset is empty; prioritization is "
                 "unavailable until the first retrain");
  }
}

IngestSummary ReviewService::ingest() {
  IngestSummary s;
  s.at = clock_->now();
  const auto changes = client_.fetch_changes(ingest_query(config_.ingest_window_days));
  std::vector<IngestedChange> rows;
  rows.reserve(changes.size());
  for (const auto &c : changes) {
    try {
      rows.push_back(transform_change(c, s.at, config_.change_type_rules,
                                      config_.training_age_endpoint));
    } catch (const ClockSkewError &e) {
      spdlog::warn("skipping change: {}", e.what());
      continue;
    }
    if (rows.back().outcome)
      ++s.closed;
  }
  store_->store_dataset(rows);
  s.fetched = rows.size();
  std::lock_guard lock(stamps_mu_);
  last_ingest_at_ = s.at;
  return s;
}

TrainSummary ReviewService::retrain() {
  std::lock_guard train_lock(train_mu_);
  const auto rows = store_->load_dataset();
  const auto now = clock_->now();
  auto model = std::make_shared<const TrainedModel>(
      train_model(rows, config_.structure, config_.smoothing_alpha, now));
  if (hooks_.before_publish)
    hooks_.before_publish(*model);
  TrainSummary summary{model->training_rows, model->trained_at, 0};
  summary.generation = slot_.publish(model);
  {
    std::lock_guard lock(stamps_mu_);
    last_train_at_ = now;
  }
  try {
    save_model_file(*model, config_.model_path);
  } catch (const Error &e) {
    spdlog::error("model trained but not persisted: {}", e.what());
  }
  return summary;
}

PrioritizedList ReviewService::prioritize_user(const std::string &user) const {
  const auto served = slot_.get();
  if (!served.model)
    throw NoModelError();
  auto changes = client_.fetch_changes(open_requests_query(user));
  std::erase_if(changes,
                [](const RawChange &c) { return c.status != ChangeStatus::Open; });
  PrioritizedList list;
  list.user = user;
  list.model_trained_at = served.model->trained_at;
  list.model_generation = served.generation;
  list.items = score_and_prioritize(*served.model, changes, clock_->now(),
                                    config_.change_type_rules);
  return list;
}

HealthReport ReviewService::health() const {
  HealthReport h;
  h.model_loaded = static_cast<bool>(slot_.get().model);
  {
    std::lock_guard lock(stamps_mu_);
    h.last_ingest_at = last_ingest_at_;
    h.last_train_at = last_train_at_;
  }
  const auto reference = h.last_ingest_at.value_or(started_at_);
  if (clock_->now() - reference > config_.schedule.ingest_stale_after) {
    h.ok = false;
    h.reason = h.last_ingest_at ? "last ingest is older than the staleness limit"
                                : "no ingest since startup within the staleness limit";
  } else if (!h.model_loaded) {
    h.ok = false;
    h.reason = "no model loaded";
  }
  return h;
}

json ReviewService::model_info() const {
  const auto served = slot_.get();
  if (!served.model)
    throw NoModelError();
  const auto &m = *served.model;
  json vars = json::array();
  for (const auto &v : m.structure.variables)
    vars.push_back({{"name", v.name}, {"states", v.states}});
  json edges = json::array();
  for (const auto &[p, c] : m.structure.edges)
    edges.push_back({p, c});
  auto cuts = [](const CutPair &c) {
    return json{{"lower_cut", c.lower_cut}, {"upper_cut", c.upper_cut}};
  };
  return {{"model_generation", served.generation},
          {"format_version", std::string(kModelFormatVersion)},
          {"trained_at", format_timestamp(m.trained_at)},
          {"training_rows", m.training_rows},
          {"smoothing_alpha", m.smoothing_alpha},
          {"structure", {{"variables", vars}, {"edges", edges}}},
          {"bins",
           {{"method", m.bins.method},
            {"age_minutes", cuts(m.bins.age_minutes)},
            {"size_lines", cuts(m.bins.size_lines)},
            {"revision_count", cuts(m.bins.revision_count)}}}};
}

namespace {

void reply(httplib::Response &res, int status, const json &body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void reply_error(httplib::Response &res, int status, const std::string &message) {
  reply(res, status, {{"error", message}});
}

} // namespace

void ReviewService::mount(httplib::Server &server) {
  server.Get("/api/v1/prioritize", [this](const httplib::Request &req,
                                          httplib::Response &res) {
    const auto user = req.get_param_value("user");
    if (user.empty())
      return reply_error(res, 400, "query parameter 'user' is required");
    try {
      reply(res, 200, to_json(prioritize_user(user)));
    } catch (const NoModelError &e) {
      reply_error(res, 503, e.what());
    } catch (const FetchError &e) {
      res.set_header("Retry-After", "60");
      reply(res, 502, {{"error", e.what()}, {"retry_after_s", 60}});
    } catch (const std::exception &e) {
      reply_error(res, 500, e.what());
    }
  });

  server.Post("/api/v1/retrain", [this](const httplib::Request &,
                                        httplib::Response &res) {
    try {
      const auto s = retrain();
      reply(res, 200,
            {{"training_rows", s.training_rows},
             {"trained_at", format_timestamp(s.trained_at)},
             {"model_generation", s.generation}});
    } catch (const EmptyDatasetError &e) {
      reply_error(res, 409, e.what());
    } catch (const std::exception &e) {
      reply_error(res, 500, std::string("training failed; previous model kept: ") +
                                e.what());
    }
  });

  server.Get("/api/v1/model/info", [this](const httplib::Request &,
                                          httplib::Response &res) {
    try {
      reply(res, 200, model_info());
    } catch (const NoModelError &e) {
      reply_error(res, 503, e.what());
    }
  });

  server.Get("/api/v1/health", [this](const httplib::Request &,
                                      httplib::Response &res) {
    const auto h = health();
    json body = {{"status", h.ok ? "ok" : "warn"},
                 {"model_loaded", h.model_loaded},
                 {"last_ingest_at", h.last_ingest_at ? json(format_timestamp(*h.last_ingest_at))
                                                     : json(nullptr)},
                 {"last_train_at", h.last_train_at ? json(format_timestamp(*h.last_train_at))
                                                   : json(nullptr)}};
    if (!h.reason.empty())
      body["reason"] = h.reason;
    reply(res, 200, body);
  });
}

void ReviewService::serve() {
  server_ = std::make_unique<httplib::Server>();
  mount(*server_);
  scheduler_thread_ = std::jthread(
      [this](std::stop_token st) { scheduler_->run(st, *clock_); });
  spdlog::info("serving on {}:{}", config_.server.host, config_.server.port);
  if (!server_->listen(config_.server.host, config_.server.port))
    throw StorageError("cannot listen on " + config_.server.host + ":" +
                       std::to_string(config_.server.port));
}

void ReviewService::stop() {
  if (server_)
    server_->stop();
  if (scheduler_thread_.joinable()) {
    scheduler_thread_.request_stop();
    scheduler_thread_.join();
  }
}

} // namespace reviewq
