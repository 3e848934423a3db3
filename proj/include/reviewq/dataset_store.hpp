#pragma once

// Embedded single-file dataset store (SQLite). Schema:
//
//   CREATE TABLE changes (
//     seq            INTEGER PRIMARY KEY AUTOINCREMENT,  -- insertion order
//     change_id      TEXT NOT NULL UNIQUE,
//     project        TEXT NOT NULL,
//     subject        TEXT NOT NULL,
//     age_minutes    REAL NOT NULL,
//     size_lines     INTEGER NOT NULL,
//     revision_count INTEGER NOT NULL,
//     test_verdict   INTEGER NOT NULL,   -- -1..+1
//     peer_review    INTEGER NOT NULL,   -- -2..+2
//     change_type    TEXT NOT NULL,      -- TroubleReport|Feature|Refactoring
//     merge_conflict TEXT NOT NULL,      -- No|Yes
//     outcome        TEXT                -- merged|abandoned|NULL (open)
//   );
//
// Re-storing a change_id updates its row in place, keeping its position.

#include "reviewq/etl.hpp"

#include <filesystem>
#include <mutex>
#include <span>
#include <vector>

struct sqlite3;

namespace reviewq {

class DatasetStore {
public:
  /// Opens (creating if needed) the store file. ":memory:" is accepted.
  /// Throws StorageError.
  explicit DatasetStore(const std::filesystem::path &path);
  ~DatasetStore();

  DatasetStore(const DatasetStore &) = delete;
  DatasetStore &operator=(const DatasetStore &) = delete;

  /// Upsert keyed by change_id, in one transaction.
  void store_dataset(std::span<const IngestedChange> rows);

  /// All rows in insertion order.
  std::vector<IngestedChange> load_dataset() const;

  /// Rows with an outcome, in insertion order.
  std::vector<IngestedChange> load_closed() const;

  std::size_t size() const;

private:
  void exec(const char *sql) const;

  sqlite3 *db_ = nullptr;
  mutable std::mutex mu_;
};

} // namespace reviewq
