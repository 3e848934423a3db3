#pragma once

// Long-running side of the system: the served model, the ingest/retrain
// jobs, their scheduler, and the HTTP API under /api/v1.

#include "reviewq/config.hpp"
#include "reviewq/dataset_store.hpp"
#include "reviewq/errors.hpp"
#include "reviewq/pipeline.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace reviewq {

class Clock {
public:
  virtual ~Clock() = default;
  virtual Timestamp now() const = 0;
};

class SystemClock final : public Clock {
public:
  Timestamp now() const override;
};

/// Clock driven by the caller; used for scheduler and health tests.
class ManualClock final : public Clock {
public:
  explicit ManualClock(Timestamp start) : now_(start.time_since_epoch().count()) {}
  Timestamp now() const override { return Timestamp{std::chrono::seconds{now_.load()}}; }
  void set(Timestamp t) { now_ = t.time_since_epoch().count(); }
  void advance(std::chrono::seconds d) { now_ += d.count(); }

private:
  std::atomic<std::int64_t> now_;
};

/// A served model plus the generation number it was published under.
struct ServedModel {
  std::shared_ptr<const TrainedModel> model;
  std::uint64_t generation = 0;
};

/// Holder of the current model. Readers take a snapshot and keep using it;
/// publish() replaces it in one step.
class ModelSlot {
public:
  ServedModel get() const;
  std::uint64_t publish(std::shared_ptr<const TrainedModel> model);

private:
  mutable std::mutex mu_;
  ServedModel current_;
};

struct JobRecord {
  std::string job; ///< "ingest" or "retrain"
  Timestamp at{};
  std::string outcome; ///< "ok", "failed" or "skipped"
  std::string detail;
};

/// Fires the daily ingest and the weekly retrain. Jobs run on one background
/// runner thread (or inline when synchronous); a job that is still running
/// when it comes due again is skipped and recorded as such. Failures are
/// logged and recorded, never propagated, and the job runs again on the
/// following tick until it succeeds.
class Scheduler {
public:
  using Job = std::function<std::string()>; ///< returns a detail string

  Scheduler(ScheduleConfig config, Job ingest, Job retrain, bool synchronous = false);
  ~Scheduler();

  Scheduler(const Scheduler &) = delete;
  Scheduler &operator=(const Scheduler &) = delete;

  /// Run every job whose occurrence is <= now and not yet handled. The
  /// first call only establishes the first occurrences at or after `now`.
  void tick(Timestamp now);

  /// Tick on `clock` every config.tick until stop is requested.
  void run(std::stop_token stop, const Clock &clock);

  /// Block until the runner has nothing queued or running.
  void wait_idle();

  std::vector<JobRecord> history() const;
  std::size_t count(std::string_view job, std::string_view outcome) const;

  std::optional<Timestamp> next_ingest() const;
  std::optional<Timestamp> next_retrain() const;

private:
  struct Pending {
    std::string name;
    Job *job;
    std::atomic<bool> *busy;
    std::atomic<bool> *retry;
    Timestamp at;
  };

  void dispatch(const std::string &name, Job &job, std::atomic<bool> &busy,
                std::atomic<bool> &retry, Timestamp at);
  void execute(const Pending &p);
  void record(JobRecord r);
  void runner_loop(std::stop_token stop);

  ScheduleConfig config_;
  Job ingest_;
  Job retrain_;
  bool synchronous_;

  std::atomic<bool> ingest_busy_{false};
  std::atomic<bool> retrain_busy_{false};
  std::atomic<bool> ingest_retry_{false};
  std::atomic<bool> retrain_retry_{false};

  mutable std::mutex mu_;
  std::condition_variable_any cv_;
  std::deque<Pending> queue_;
  std::size_t in_flight_ = 0;
  std::vector<JobRecord> history_;
  std::optional<Timestamp> next_ingest_;
  std::optional<Timestamp> next_retrain_;
  std::jthread runner_;
};

/// First daily occurrence of hh:mm at or after `t`.
Timestamp next_daily_at_or_after(Timestamp t, int hour, int minute);
/// First weekly occurrence of (weekday, hh:mm) at or after `t`.
Timestamp next_weekly_at_or_after(Timestamp t, std::chrono::weekday wd, int hour,
                                  int minute);

struct IngestSummary {
  std::size_t fetched = 0;
  std::size_t closed = 0;
  Timestamp at{};
};

struct TrainSummary {
  std::size_t training_rows = 0;
  Timestamp trained_at{};
  std::uint64_t generation = 0;
};

struct HealthReport {
  bool ok = true;
  bool model_loaded = false;
  std::optional<Timestamp> last_ingest_at;
  std::optional<Timestamp> last_train_at;
  std::string reason;
};

class ReviewService {
public:
  struct Hooks {
    /// Called after training, before the new model is published.
    std::function<void(const TrainedModel &)> before_publish;
  };

  ReviewService(Config config, std::shared_ptr<const Clock> clock,
                std::shared_ptr<DatasetStore> store);
  ~ReviewService();

  /// Load the model file if present and valid, else train from the store.
  /// Leaves the service without a model if the store has no closed rows.
  void initialize();
  /// Publish the model file if it is present and valid; false otherwise.
  bool load_model();

  IngestSummary ingest();
  /// Throws EmptyDatasetError; any other failure leaves the old model in place.
  TrainSummary retrain();

  /// Live-fetches the user's open requests and ranks them with the current
  /// model. Throws NoModelError when nothing is loaded, FetchError when the
  /// review server fails.
  PrioritizedList prioritize_user(const std::string &user) const;

  ServedModel current_model() const { return slot_.get(); }
  HealthReport health() const;
  nlohmann::json model_info() const;

  void set_hooks(Hooks hooks) { hooks_ = std::move(hooks); }

  /// Registers the /api/v1 routes on `server`.
  void mount(httplib::Server &server);

  /// Bind, start the scheduler thread and serve until stop() (blocking).
  void serve();
  void stop();

  Scheduler &scheduler() { return *scheduler_; }
  const Config &config() const { return config_; }

private:
  Config config_;
  std::shared_ptr<const Clock> clock_;
  std::shared_ptr<DatasetStore> store_;
  GerritClient client_;
  ModelSlot slot_;
  Hooks hooks_;
  std::mutex train_mu_;
  Timestamp started_at_;
  mutable std::mutex stamps_mu_;
  std::optional<Timestamp> last_ingest_at_;
  std::optional<Timestamp> last_train_at_;
  std::unique_ptr<Scheduler> scheduler_;
  std::unique_ptr<httplib::Server> server_;
  std::jthread scheduler_thread_;
};

class NoModelError : public Error {
public:
  NoModelError() : Error("no trained model is loaded") {}
};

} // namespace reviewq
