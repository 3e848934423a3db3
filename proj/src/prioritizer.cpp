#include "reviewq/prioritizer.hpp"

#include "reviewq/errors.hpp"

#include <algorithm>
#include <cmath>

namespace reviewq {

bool ranks_before(const PrioritizedItem &a, const PrioritizedItem &b) {
  if (a.merge_conflict != b.merge_conflict)
    return a.merge_conflict == MergeConflict::No;
  if (a.change_type != b.change_type)
    return a.change_type < b.change_type;
  if (a.merge_probability != b.merge_probability)
    return a.merge_probability > b.merge_probability;
  if (a.age_minutes != b.age_minutes)
    return a.age_minutes > b.age_minutes;
  return a.change_id < b.change_id;
}

std::vector<PrioritizedItem> prioritize(std::vector<PrioritizedItem> items) {
  for (const auto &it : items)
    if (!(it.merge_probability >= 0.0 && it.merge_probability <= 1.0))
      throw ContractError("change " + it.change_id +
                          " has merge probability outside [0, 1]");
  std::stable_sort(items.begin(), items.end(), ranks_before);
  for (std::size_t i = 0; i < items.size(); ++i)
    items[i].rank = i + 1;
  return items;
}

} // namespace reviewq
