#include "reviewq/etl.hpp"

#include "reviewq/errors.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cctype>

namespace reviewq {

std::string_view to_string(ChangeStatus s) {
  switch (s) {
  case ChangeStatus::Open:
    return "open";
  case ChangeStatus::Merged:
    return "merged";
  case ChangeStatus::Abandoned:
    return "abandoned";
  }
  return "open";
}

ChangeTypeRules default_change_type_rules() {
  return {
      {ChangeType::TroubleReport, {"fix", "tr-", "bug", "fault"}},
      {ChangeType::Refactoring, {"refactor", "cleanup", "restructure"}},
  };
}

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

} // namespace

ChangeType classify_change_type(std::string_view message,
                                const ChangeTypeRules &rules) {
  const auto text = lower(message);
  std::optional<ChangeType> best;
  for (const auto &rule : rules) {
    const bool hit = std::any_of(rule.keywords.begin(), rule.keywords.end(),
                                 [&](const std::string &k) {
                                   return !k.empty() &&
                                          text.find(lower(k)) != std::string::npos;
                                 });
    // enum order is the priority order
    if (hit && (!best || rule.type < *best))
      best = rule.type;
  }
  return best.value_or(ChangeType::Feature);
}

RawFactors compute_raw_factors(const RawChange &change, Timestamp now) {
  if (now < change.created_at)
    throw ClockSkewError("change " + change.change_id + " was created at " +
                         format_timestamp(change.created_at) + ", after " +
                         format_timestamp(now));
  return {minutes_between(change.created_at, now),
          change.insertions + change.deletions, change.revision_count};
}

CutPair fit_terciles(std::span<const double> values, std::string_view factor) {
  if (values.empty())
    throw FitError("cannot fit bins for '" + std::string(factor) +
                   "': no training values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  // 1-based ranks ceil(n/3) and ceil(2n/3), in integer arithmetic
  const std::size_t lower_rank = (n + 2) / 3;
  const std::size_t upper_rank = (2 * n + 2) / 3;
  CutPair cuts{sorted[lower_rank - 1], sorted[upper_rank - 1]};

  // Heavy ties can leave the middle or upper bin empty. With three or more
  // distinct values, step the offending cut down to the previous distinct
  // value so every bin keeps at least one member. A lower cut already at
  // the minimum pushes the upper cut up instead.
  std::vector<double> distinct = sorted;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 3) {
    auto previous = [&](double v) {
      return *(std::lower_bound(distinct.begin(), distinct.end(), v) - 1);
    };
    auto next = [&](double v) { return *std::upper_bound(distinct.begin(), distinct.end(), v); };
    if (cuts.upper_cut == distinct.back())
      cuts.upper_cut = previous(cuts.upper_cut);
    if (cuts.lower_cut >= cuts.upper_cut) {
      if (cuts.upper_cut > distinct.front())
        cuts.lower_cut = previous(cuts.upper_cut);
      else
        cuts.upper_cut = next(cuts.lower_cut);
    }
  }
  return cuts;
}

BinThresholds fit_bins(std::span<const double> age_minutes,
                       std::span<const double> size_lines,
                       std::span<const double> revision_count) {
  BinThresholds b;
  b.age_minutes = fit_terciles(age_minutes, "age_minutes");
  b.size_lines = fit_terciles(size_lines, "size_lines");
  b.revision_count = fit_terciles(revision_count, "revision_count");
  return b;
}

BinThresholds fit_bins(std::span<const IngestedChange> rows) {
  std::vector<double> age, size, revs;
  age.reserve(rows.size());
  size.reserve(rows.size());
  revs.reserve(rows.size());
  for (const auto &r : rows) {
    age.push_back(r.raw.age_minutes);
    size.push_back(static_cast<double>(r.raw.size_lines));
    revs.push_back(static_cast<double>(r.raw.revision_count));
  }
  return fit_bins(age, size, revs);
}

int bin_of(double value, const CutPair &cuts) {
  if (value <= cuts.lower_cut)
    return 0;
  if (value <= cuts.upper_cut)
    return 1;
  return 2;
}

FactorVector discretize(const IngestedChange &change, const BinThresholds &bins) {
  FactorVector fv;
  fv.change_id = change.change_id;
  fv.age_cat = static_cast<AgeCategory>(bin_of(change.raw.age_minutes, bins.age_minutes));
  fv.size_cat = static_cast<SizeCategory>(
      bin_of(static_cast<double>(change.raw.size_lines), bins.size_lines));
  fv.patches_cat = static_cast<PatchesCategory>(
      bin_of(static_cast<double>(change.raw.revision_count), bins.revision_count));
  fv.test_verdict = change.test_verdict;
  fv.peer_review = change.peer_review;
  fv.change_type = change.change_type;
  fv.merge_conflict = change.merge_conflict;
  fv.outcome = change.outcome;
  return fv;
}

std::vector<FactorVector> discretize(std::span<const IngestedChange> rows,
                                     const BinThresholds &bins) {
  std::vector<FactorVector> out;
  out.reserve(rows.size());
  for (const auto &r : rows)
    out.push_back(discretize(r, bins));
  return out;
}

IngestedChange transform_change(const RawChange &change, Timestamp now,
                                const ChangeTypeRules &rules,
                                AgeEndpoint closed_age_endpoint) {
  IngestedChange row;
  row.change_id = change.change_id;
  row.project = change.project;
  row.subject = change.subject;

  Timestamp endpoint = now;
  if (change.status != ChangeStatus::Open &&
      closed_age_endpoint == AgeEndpoint::LastUpdate)
    endpoint = std::max(change.updated_at, change.created_at);
  row.raw = compute_raw_factors(change, endpoint);

  row.test_verdict = std::clamp(change.verified_label, -1, 1);
  row.peer_review = std::clamp(change.code_review_label, -2, 2);
  row.change_type = classify_change_type(
      change.message.empty() ? std::string_view(change.subject)
                             : std::string_view(change.message),
      rules);
  if (!change.mergeable_reported)
    spdlog::warn("change {} has no mergeable flag; assuming no merge conflict",
                 change.change_id);
  row.merge_conflict = change.mergeable_reported && !change.mergeable
                           ? MergeConflict::Yes
                           : MergeConflict::No;
  switch (change.status) {
  case ChangeStatus::Merged:
    row.outcome = Outcome::Merged;
    break;
  case ChangeStatus::Abandoned:
    row.outcome = Outcome::Abandoned;
    break;
  case ChangeStatus::Open:
    break;
  }
  return row;
}

} // namespace reviewq
