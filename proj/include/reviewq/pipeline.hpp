#pragma once

// Training and prioritization steps shared by the CLI and the HTTP service,
// so both paths produce identical results for identical state.

#include "reviewq/bn.hpp"
#include "reviewq/etl.hpp"
#include "reviewq/prioritizer.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reviewq {

/// Fits tercile bins on the closed rows, discretizes them and learns the
/// CPTs. Open rows are ignored. Throws EmptyDatasetError when no closed rows
/// remain.
TrainedModel train_model(std::span<const IngestedChange> rows,
                         const NetworkStructure &structure, double alpha,
                         Timestamp trained_at);

/// Factors measured at `now` with the model's bins, merge probability by
/// inference (0.5 and degraded when the evidence is impossible), then
/// prioritize().
std::vector<PrioritizedItem>
score_and_prioritize(const TrainedModel &model, std::span<const RawChange> open_changes,
                     Timestamp now, const ChangeTypeRules &rules);

struct PrioritizedList {
  std::string user;
  Timestamp model_trained_at{};
  std::uint64_t model_generation = 0;
  std::vector<PrioritizedItem> items;

  bool operator==(const PrioritizedList &) const = default;
};

nlohmann::json to_json(const PrioritizedList &list);
/// Throws ContractError on a malformed document.
PrioritizedList prioritized_list_from_json(const nlohmann::json &doc);

/// Fixed-width table: rank, change_id, type, conflict, probability, subject.
std::string render_table(const PrioritizedList &list);

} // namespace reviewq
