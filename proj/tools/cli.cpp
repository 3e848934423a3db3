#include "cli.hpp"

#include "reviewq/config.hpp"
#include "reviewq/dataset_store.hpp"
#include "reviewq/eval.hpp"
#include "reviewq/fixture_server.hpp"
#include "reviewq/service.hpp"
#include "reviewq/synthgen.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace reviewq::cli {

namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

class UsageError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Logs go to stderr so that stdout stays machine-readable; `serve` is the
// exception and logs to stdout.
void route_logs(bool to_stdout) {
  const char *name = to_stdout ? "reviewq-out" : "reviewq-err";
  auto logger = spdlog::get(name);
  if (!logger)
    logger = to_stdout ? spdlog::stdout_logger_mt(name) : spdlog::stderr_logger_mt(name);
  spdlog::set_default_logger(logger);
}

struct Options {
  std::string config_path;
  std::string format = "table";
  std::string now;

  std::string user;

  std::size_t k = 5;
  std::uint64_t seed = 0;
  std::string eval_out = "eval-report.json";
  std::string roc_out;

  std::string synth_spec;
  std::string synth_out = "fixture.json";
  bool synth_store = false;

  std::string fixture_path;
  std::string host = "127.0.0.1";
  int port = 8081;
  std::string fixture_now;
  std::string fixture_auth;
};

Config require_config(const Options &o) {
  std::string path = o.config_path;
  if (path.empty())
    if (const char *env = std::getenv("REVIEWQ_CONFIG"))
      path = env;
  if (path.empty())
    throw UsageError("no config file: pass --config or set REVIEWQ_CONFIG");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec))
    throw UsageError("config file not found: " + path);
  return load_config(path);
}

std::string read_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string &path, const std::string &text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f)
    throw StorageError("cannot write " + path);
}

std::shared_ptr<const Clock> make_clock(const Options &o) {
  if (o.now.empty())
    return std::make_shared<SystemClock>();
  try {
    return std::make_shared<ManualClock>(parse_timestamp(o.now));
  } catch (const ContractError &e) {
    throw UsageError(std::string("--now: ") + e.what());
  }
}

std::unique_ptr<ReviewService> make_service(const Config &config, const Options &o) {
  auto store = std::make_shared<DatasetStore>(config.store_path);
  return std::make_unique<ReviewService>(config, make_clock(o), std::move(store));
}

int cmd_ingest(const Options &o, std::ostream &out) {
  const auto svc = make_service(require_config(o), o);
  const auto s = svc->ingest();
  if (o.format == "table")
    out << "ingested " << s.fetched << " changes (" << s.closed << " closed) at "
        << format_timestamp(s.at) << "\n";
  else
    out << json{{"fetched", s.fetched}, {"closed", s.closed}, {"at", format_timestamp(s.at)}}
               .dump(2)
        << "\n";
  return kOk;
}

int cmd_train(const Options &o, std::ostream &out) {
  const auto config = require_config(o);
  const auto svc = make_service(config, o);
  const auto s = svc->retrain();
  if (o.format == "table")
    out << "trained on " << s.training_rows << " closed changes; model written to "
        << config.model_path.string() << "\n";
  else
    out << json{{"training_rows", s.training_rows},
                {"trained_at", format_timestamp(s.trained_at)},
                {"model_path", config.model_path.string()}}
               .dump(2)
        << "\n";
  return kOk;
}

int cmd_prioritize(const Options &o, std::ostream &out) {
  const auto config = require_config(o);
  const auto svc = make_service(config, o);
  if (!svc->load_model())
    throw NoModelError();
  const auto list = svc->prioritize_user(o.user);
  if (o.format == "table")
    out << render_table(list);
  else
    out << to_json(list).dump(2) << "\n";
  return kOk;
}

int cmd_eval(const Options &o, std::ostream &out) {
  const auto config = require_config(o);
  const DatasetStore store(config.store_path);
  const auto rows = store.load_closed();
  if (rows.empty())
    throw EmptyDatasetError();
  const auto report =
      cross_validate_raw(rows, config.structure, config.smoothing_alpha, o.k, o.seed);
  const auto doc = report_to_json(report);
  write_file(o.eval_out, doc);
  std::string roc = o.roc_out;
  if (roc.empty()) {
    std::filesystem::path p(o.eval_out);
    roc = (p.parent_path() / (p.stem().string() + "-roc.csv")).string();
  }
  write_file(roc, roc_table_csv(report));
  if (o.format == "table") {
    out << "folds " << report.folds << ", rows " << report.rows << ", seed " << report.seed
        << "\n";
    out << "rmse " << report.aggregate_rmse << " (constant 0.5: "
        << report.constant_baseline_rmse << ")\n";
    out << "mae  " << report.aggregate_mae << "\n";
    out << "auc  " << report.auc << "\n";
    out << "report " << o.eval_out << ", roc " << roc << "\n";
  } else {
    out << doc << "\n";
  }
  return kOk;
}

int cmd_synth(const Options &o, std::ostream &out) {
  const auto req = parse_synth_spec(read_file(o.synth_spec));
  const auto rows = sample_dataset(req.spec);
  write_fixture_file(o.synth_out, emit_fixture_server_payloads(rows, req.fixture));
  std::size_t stored = 0;
  if (o.synth_store) {
    const auto config = require_config(o);
    DatasetStore store(config.store_path);
    const auto ingested = realize_ingested(rows, req.fixture);
    store.store_dataset(ingested);
    stored = ingested.size();
  }
  if (o.format == "table") {
    out << "wrote " << rows.size() << " changes to " << o.synth_out << "\n";
    if (o.synth_store)
      out << "stored " << stored << " rows\n";
  } else {
    out << json{{"rows", rows.size()}, {"fixture", o.synth_out}, {"stored", stored}}.dump(2)
        << "\n";
  }
  return kOk;
}

int cmd_serve(const Options &o) {
  const auto config = require_config(o);
  route_logs(true);
  const auto svc = make_service(config, o);
  svc->initialize();
  svc->serve();
  return kOk;
}

int cmd_fixture_serve(const Options &o) {
  route_logs(true);
  FixtureServer::Options fo;
  fo.now = o.fixture_now.empty()
               ? std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now())
               : parse_timestamp(o.fixture_now);
  fo.basic_auth = o.fixture_auth;
  FixtureServer server(load_fixture_file(o.fixture_path), fo);
  spdlog::info("fixture server on {}:{}", o.host, o.port);
  server.listen_blocking(o.host, o.port);
  return kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  route_logs(false);
  Options o;
  CLI::App app{"Code review request prioritization", "reviewq"};
  app.require_subcommand(1);
  app.add_option("--config", o.config_path, "Config file (default: $REVIEWQ_CONFIG)");
  app.add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"table", "structured-text"}));
  app.add_option("--now", o.now, "Evaluate as of this time (ISO-8601 UTC) instead of the clock");

  auto *ingest = app.add_subcommand("ingest", "Fetch changes into the dataset store");
  auto *train = app.add_subcommand("train", "Train a model from the dataset store");
  auto *prio = app.add_subcommand("prioritize", "Rank a reviewer's open requests");
  prio->add_option("--user", o.user, "Reviewer id")->required();
  auto *eval = app.add_subcommand("eval", "k-fold cross-validation on the store");
  eval->add_option("--k", o.k, "Folds")->check(CLI::Range(2, 1000));
  eval->add_option("--seed", o.seed, "Shuffle seed");
  eval->add_option("--out", o.eval_out, "Report file");
  eval->add_option("--roc", o.roc_out, "ROC table file (default: <out>-roc.csv)");
  auto *synth = app.add_subcommand("synth", "Generate a synthetic fixture");
  synth->add_option("--spec", o.synth_spec, "Planted spec file")->required();
  synth->add_option("--out", o.synth_out, "Fixture file to write");
  synth->add_flag("--store", o.synth_store, "Also load the rows into the dataset store");
  auto *serve = app.add_subcommand("serve", "Run the HTTP API and scheduler");
  auto *fserve = app.add_subcommand("fixture-serve", "Serve a fixture file as a review server");
  fserve->add_option("--fixture", o.fixture_path, "Fixture file")->required();
  fserve->add_option("--host", o.host);
  fserve->add_option("--port", o.port);
  fserve->add_option("--now", o.fixture_now, "Clock for age: queries (ISO-8601)");
  fserve->add_option("--auth", o.fixture_auth, "Require basic auth user:password");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*ingest)
      return cmd_ingest(o, out);
    if (*train)
      return cmd_train(o, out);
    if (*prio)
      return cmd_prioritize(o, out);
    if (*eval)
      return cmd_eval(o, out);
    if (*synth)
      return cmd_synth(o, out);
    if (*serve)
      return cmd_serve(o);
    if (*fserve)
      return cmd_fixture_serve(o);
  } catch (const UsageError &e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kFailed;
  }
  return kUsage;
}

} // namespace reviewq::cli
