#pragma once

// Discretized factor vectors: the bridge between ingested review requests
// and the Bayesian network.

#include "reviewq/bn.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace reviewq {

enum class AgeCategory { Young, Medium, Old };
enum class SizeCategory { Small, Medium, Large };
enum class PatchesCategory { Low, Medium, High };
enum class ChangeType { TroubleReport, Feature, Refactoring };
enum class MergeConflict { No, Yes };
enum class Outcome { Abandoned, Merged };

std::string_view to_string(AgeCategory c);
std::string_view to_string(SizeCategory c);
std::string_view to_string(PatchesCategory c);
std::string_view to_string(ChangeType t);
std::string_view to_string(MergeConflict m);
std::string_view to_string(Outcome o);

/// Verdict labels as they appear in the network: "-1", "0", "+1", "+2".
std::string verdict_label(int vote);

// Parsers throw InputError on unknown labels.
AgeCategory parse_age_category(std::string_view s);
SizeCategory parse_size_category(std::string_view s);
PatchesCategory parse_patches_category(std::string_view s);
ChangeType parse_change_type(std::string_view s);
MergeConflict parse_merge_conflict(std::string_view s);
Outcome parse_outcome(std::string_view s);
int parse_verdict(std::string_view s);

struct FactorVector {
  std::string change_id;
  AgeCategory age_cat = AgeCategory::Young;
  SizeCategory size_cat = SizeCategory::Small;
  PatchesCategory patches_cat = PatchesCategory::Low;
  int test_verdict = 0; ///< -1, 0, +1
  int peer_review = 0;  ///< -2 .. +2
  ChangeType change_type = ChangeType::Feature;
  MergeConflict merge_conflict = MergeConflict::No;
  std::optional<Outcome> outcome; ///< present only for closed changes

  bool operator==(const FactorVector &) const = default;
};

/// Evidence over the five in-network factors.
Evidence to_evidence(const FactorVector &fv);

/// Complete assignment including change_status; requires an outcome.
Assignment to_assignment(const FactorVector &fv);

} // namespace reviewq
