#pragma once

#include "reviewq/factors.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace reviewq {

struct PrioritizedItem {
  std::string change_id;
  std::string subject;
  MergeConflict merge_conflict = MergeConflict::No;
  ChangeType change_type = ChangeType::Feature;
  double merge_probability = 0.5;
  double age_minutes = 0.0;
  std::size_t rank = 0; ///< 1-based, 0 until prioritized
  bool degraded = false; ///< probability is the fallback, not an inference

  bool operator==(const PrioritizedItem &) const = default;
};

/// Orders by: no conflict first; TroubleReport, Feature, Refactoring;
/// merge probability descending; older first; change_id ascending. The key
/// chain is total, so the result does not depend on input order.
/// Throws ContractError if a probability is outside [0, 1].
std::vector<PrioritizedItem> prioritize(std::vector<PrioritizedItem> items);

/// True when `a` must be ranked ahead of `b`.
bool ranks_before(const PrioritizedItem &a, const PrioritizedItem &b);

} // namespace reviewq
