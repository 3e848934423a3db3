#include "reviewq/factors.hpp"

#include "reviewq/errors.hpp"

#include <array>

namespace reviewq {

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<std::string_view, N> &names,
             const char *what) {
  for (std::size_t i = 0; i < N; ++i)
    if (names[i] == s)
      return static_cast<E>(i);
  throw InputError("unknown " + std::string(what) + " '" + std::string(s) + "'");
}

constexpr std::array<std::string_view, 3> kAgeNames{"Young", "Medium", "Old"};
constexpr std::array<std::string_view, 3> kSizeNames{"Small", "Medium", "Large"};
constexpr std::array<std::string_view, 3> kPatchNames{"Low", "Medium", "High"};
constexpr std::array<std::string_view, 3> kTypeNames{"TroubleReport", "Feature",
                                                     "Refactoring"};
constexpr std::array<std::string_view, 2> kConflictNames{"No", "Yes"};
constexpr std::array<std::string_view, 2> kOutcomeNames{"abandoned", "merged"};

} // namespace

std::string_view to_string(AgeCategory c) { return kAgeNames[static_cast<int>(c)]; }
std::string_view to_string(SizeCategory c) { return kSizeNames[static_cast<int>(c)]; }
std::string_view to_string(PatchesCategory c) {
  return kPatchNames[static_cast<int>(c)];
}
std::string_view to_string(ChangeType t) { return kTypeNames[static_cast<int>(t)]; }
std::string_view to_string(MergeConflict m) {
  return kConflictNames[static_cast<int>(m)];
}
std::string_view to_string(Outcome o) { return kOutcomeNames[static_cast<int>(o)]; }

AgeCategory parse_age_category(std::string_view s) {
  return parse_enum<AgeCategory>(s, kAgeNames, "age category");
}
SizeCategory parse_size_category(std::string_view s) {
  return parse_enum<SizeCategory>(s, kSizeNames, "size category");
}
PatchesCategory parse_patches_category(std::string_view s) {
  return parse_enum<PatchesCategory>(s, kPatchNames, "patches category");
}
ChangeType parse_change_type(std::string_view s) {
  return parse_enum<ChangeType>(s, kTypeNames, "change type");
}
MergeConflict parse_merge_conflict(std::string_view s) {
  return parse_enum<MergeConflict>(s, kConflictNames, "merge conflict value");
}
Outcome parse_outcome(std::string_view s) {
  return parse_enum<Outcome>(s, kOutcomeNames, "outcome");
}

std::string verdict_label(int vote) {
  return vote > 0 ? "+" + std::to_string(vote) : std::to_string(vote);
}

int parse_verdict(std::string_view s) {
  for (int v = -2; v <= 2; ++v)
    if (verdict_label(v) == s)
      return v;
  throw InputError("unknown verdict '" + std::string(s) + "'");
}

Evidence to_evidence(const FactorVector &fv) {
  Evidence e;
  e.assignments.emplace(var::kAge, to_string(fv.age_cat));
  e.assignments.emplace(var::kSize, to_string(fv.size_cat));
  e.assignments.emplace(var::kPatches, to_string(fv.patches_cat));
  e.assignments.emplace(var::kTestVerdict, verdict_label(fv.test_verdict));
  e.assignments.emplace(var::kPeerReview, verdict_label(fv.peer_review));
  return e;
}

Assignment to_assignment(const FactorVector &fv) {
  if (!fv.outcome)
    throw InputError("change " + fv.change_id + " has no outcome");
  auto a = to_evidence(fv).assignments;
  a.emplace(var::kChangeStatus, to_string(*fv.outcome));
  return a;
}

} // namespace reviewq
