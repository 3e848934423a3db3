#include "reviewq/dataset_store.hpp"

#include "reviewq/errors.hpp"

#include <sqlite3.h>

#include <memory>

namespace reviewq {

namespace {

struct StmtDeleter {
  void operator()(sqlite3_stmt *s) const { sqlite3_finalize(s); }
};
using Stmt = std::unique_ptr<sqlite3_stmt, StmtDeleter>;

Stmt prepare(sqlite3 *db, const char *sql) {
  sqlite3_stmt *raw = nullptr;
  if (sqlite3_prepare_v2(db, sql, -1, &raw, nullptr) != SQLITE_OK)
    throw StorageError(std::string("dataset store: ") + sqlite3_errmsg(db));
  return Stmt(raw);
}

std::string column_text(sqlite3_stmt *s, int col) {
  const auto *p = sqlite3_column_text(s, col);
  return p ? reinterpret_cast<const char *>(p) : "";
}

constexpr const char *kSelect =
    "SELECT change_id, project, subject, age_minutes, size_lines, revision_count,"
    " test_verdict, peer_review, change_type, merge_conflict, outcome"
    " FROM changes";

IngestedChange read_row(sqlite3_stmt *s) {
  IngestedChange c;
  c.change_id = column_text(s, 0);
  c.project = column_text(s, 1);
  c.subject = column_text(s, 2);
  c.raw.age_minutes = sqlite3_column_double(s, 3);
  c.raw.size_lines = sqlite3_column_int64(s, 4);
  c.raw.revision_count = sqlite3_column_int64(s, 5);
  c.test_verdict = sqlite3_column_int(s, 6);
  c.peer_review = sqlite3_column_int(s, 7);
  c.change_type = parse_change_type(column_text(s, 8));
  c.merge_conflict = parse_merge_conflict(column_text(s, 9));
  if (sqlite3_column_type(s, 10) != SQLITE_NULL)
    c.outcome = parse_outcome(column_text(s, 10));
  return c;
}

} // namespace

DatasetStore::DatasetStore(const std::filesystem::path &path) {
  if (path != ":memory:" && path.has_parent_path() &&
      !std::filesystem::exists(path.parent_path()))
    throw StorageError("dataset store directory does not exist: " +
                       path.parent_path().string());
  if (sqlite3_open_v2(path.c_str(), &db_,
                      SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE |
                          SQLITE_OPEN_FULLMUTEX,
                      nullptr) != SQLITE_OK) {
    std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw StorageError("cannot open dataset store " + path.string() + ": " + msg);
  }
  sqlite3_busy_timeout(db_, 5000);
  exec("CREATE TABLE IF NOT EXISTS changes ("
       " seq INTEGER PRIMARY KEY AUTOINCREMENT,"
       " change_id TEXT NOT NULL UNIQUE,"
       " project TEXT NOT NULL,"
       " subject TEXT NOT NULL,"
       " age_minutes REAL NOT NULL,"
       " size_lines INTEGER NOT NULL,"
       " revision_count INTEGER NOT NULL,"
       " test_verdict INTEGER NOT NULL,"
       " peer_review INTEGER NOT NULL,"
       " change_type TEXT NOT NULL,"
       " merge_conflict TEXT NOT NULL,"
       " outcome TEXT)");
}

DatasetStore::~DatasetStore() { sqlite3_close(db_); }

void DatasetStore::exec(const char *sql) const {
  char *err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw StorageError("dataset store: " + msg);
  }
}

void DatasetStore::store_dataset(std::span<const IngestedChange> rows) {
  std::lock_guard lock(mu_);
  exec("BEGIN IMMEDIATE");
  try {
    auto stmt = prepare(
        db_,
        "INSERT INTO changes (change_id, project, subject, age_minutes,"
        " size_lines, revision_count, test_verdict, peer_review, change_type,"
        " merge_conflict, outcome) VALUES (?,?,?,?,?,?,?,?,?,?,?)"
        " ON CONFLICT(change_id) DO UPDATE SET project=excluded.project,"
        " subject=excluded.subject, age_minutes=excluded.age_minutes,"
        " size_lines=excluded.size_lines, revision_count=excluded.revision_count,"
        " test_verdict=excluded.test_verdict, peer_review=excluded.peer_review,"
        " change_type=excluded.change_type, merge_conflict=excluded.merge_conflict,"
        " outcome=excluded.outcome");
    for (const auto &r : rows) {
      sqlite3_reset(stmt.get());
      sqlite3_bind_text(stmt.get(), 1, r.change_id.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_text(stmt.get(), 2, r.project.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_text(stmt.get(), 3, r.subject.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_double(stmt.get(), 4, r.raw.age_minutes);
      sqlite3_bind_int64(stmt.get(), 5, r.raw.size_lines);
      sqlite3_bind_int64(stmt.get(), 6, r.raw.revision_count);
      sqlite3_bind_int(stmt.get(), 7, r.test_verdict);
      sqlite3_bind_int(stmt.get(), 8, r.peer_review);
      const std::string type(to_string(r.change_type));
      const std::string conflict(to_string(r.merge_conflict));
      sqlite3_bind_text(stmt.get(), 9, type.c_str(), -1, SQLITE_TRANSIENT);
      sqlite3_bind_text(stmt.get(), 10, conflict.c_str(), -1, SQLITE_TRANSIENT);
      if (r.outcome) {
        const std::string outcome(to_string(*r.outcome));
        sqlite3_bind_text(stmt.get(), 11, outcome.c_str(), -1, SQLITE_TRANSIENT);
      } else {
        sqlite3_bind_null(stmt.get(), 11);
      }
      if (sqlite3_step(stmt.get()) != SQLITE_DONE)
        throw StorageError(std::string("dataset store: ") + sqlite3_errmsg(db_));
    }
    stmt.reset();
    exec("COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
}

std::vector<IngestedChange> DatasetStore::load_dataset() const {
  std::lock_guard lock(mu_);
  auto stmt = prepare(db_, (std::string(kSelect) + " ORDER BY seq").c_str());
  std::vector<IngestedChange> out;
  int rc;
  while ((rc = sqlite3_step(stmt.get())) == SQLITE_ROW)
    out.push_back(read_row(stmt.get()));
  if (rc != SQLITE_DONE)
    throw StorageError(std::string("dataset store: ") + sqlite3_errmsg(db_));
  return out;
}

std::vector<IngestedChange> DatasetStore::load_closed() const {
  auto rows = load_dataset();
  std::erase_if(rows, [](const IngestedChange &r) { return !r.outcome; });
  return rows;
}

std::size_t DatasetStore::size() const {
  std::lock_guard lock(mu_);
  auto stmt = prepare(db_, "SELECT COUNT(*) FROM changes");
  if (sqlite3_step(stmt.get()) != SQLITE_ROW)
    throw StorageError(std::string("dataset store: ") + sqlite3_errmsg(db_));
  return static_cast<std::size_t>(sqlite3_column_int64(stmt.get(), 0));
}

} // namespace reviewq
