#pragma once

// Transform side of the ingestion pipeline: raw review-server records to
// numeric factors, tercile binning, change-type classification.

#include "reviewq/bins.hpp"
#include "reviewq/factors.hpp"
#include "reviewq/timeutil.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace reviewq {

enum class ChangeStatus { Open, Merged, Abandoned };

std::string_view to_string(ChangeStatus s);

/// One review request as extracted from the review server.
struct RawChange {
  std::string change_id;
  std::string project;
  Timestamp created_at{};
  Timestamp updated_at{};
  ChangeStatus status = ChangeStatus::Open;
  std::int64_t insertions = 0;
  std::int64_t deletions = 0;
  std::int64_t revision_count = 1;
  int verified_label = 0;    ///< -1, 0, +1
  int code_review_label = 0; ///< -2 .. +2
  bool mergeable = true;
  bool mergeable_reported = true; ///< false when the server omitted the flag
  std::string subject;
  std::string message;
  std::vector<std::string> reviewer_ids;

  bool operator==(const RawChange &) const = default;
};

struct RawFactors {
  double age_minutes = 0.0;
  std::int64_t size_lines = 0;
  std::int64_t revision_count = 1;

  bool operator==(const RawFactors &) const = default;
};

/// A change after transform but before binning. This is what the dataset
/// store holds: bins are fitted at training time, so the numeric values
/// have to survive until then.
struct IngestedChange {
  std::string change_id;
  std::string project;
  std::string subject;
  RawFactors raw;
  int test_verdict = 0;
  int peer_review = 0;
  ChangeType change_type = ChangeType::Feature;
  MergeConflict merge_conflict = MergeConflict::No;
  std::optional<Outcome> outcome;

  bool operator==(const IngestedChange &) const = default;
};

struct ChangeTypeRule {
  ChangeType type = ChangeType::Feature;
  std::vector<std::string> keywords;
};
using ChangeTypeRules = std::vector<ChangeTypeRule>;

/// TroubleReport: fix, tr-, bug, fault. Refactoring: refactor, cleanup,
/// restructure. Anything else is a Feature.
ChangeTypeRules default_change_type_rules();

/// Case-insensitive keyword match. When several types match, the highest
/// priority wins (TroubleReport > Feature > Refactoring); no match is Feature.
ChangeType classify_change_type(std::string_view message,
                                const ChangeTypeRules &rules);

/// Throws ClockSkewError when `now` precedes the change's creation.
RawFactors compute_raw_factors(const RawChange &change, Timestamp now);

/// Nearest-rank 33 1/3 and 66 2/3 percentiles (1-based rank ceil(p*n)).
/// When ties would leave the middle or upper bin empty and there are at
/// least three distinct values, the cut moves to the previous distinct value,
/// or the upper cut to the next one when the lower cut is the minimum.
/// Throws FitError naming `factor` when `values` is empty.
CutPair fit_terciles(std::span<const double> values, std::string_view factor);

BinThresholds fit_bins(std::span<const double> age_minutes,
                       std::span<const double> size_lines,
                       std::span<const double> revision_count);

/// Fit on the raw factors of `rows`.
BinThresholds fit_bins(std::span<const IngestedChange> rows);

/// 0, 1 or 2. Values equal to a cut belong to the lower bin.
int bin_of(double value, const CutPair &cuts);

FactorVector discretize(const IngestedChange &change, const BinThresholds &bins);
std::vector<FactorVector> discretize(std::span<const IngestedChange> rows,
                                     const BinThresholds &bins);

/// Where the age of a closed change is measured to when building training
/// rows. Open changes always use `now`.
enum class AgeEndpoint { Snapshot, LastUpdate };

/// Review-server record to stored row. Conflict comes from the mergeable
/// flag (absent = no conflict); outcome is set only for closed changes.
IngestedChange transform_change(const RawChange &change, Timestamp now,
                                const ChangeTypeRules &rules,
                                AgeEndpoint closed_age_endpoint = AgeEndpoint::Snapshot);

} // namespace reviewq
