#include "reviewq/pipeline.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/kernels.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace reviewq {

using nlohmann::json;

TrainedModel train_model(std::span<const IngestedChange> rows,
                         const NetworkStructure &structure, double alpha,
                         Timestamp trained_at) {
  std::vector<IngestedChange> closed;
  for (const auto &r : rows)
    if (r.outcome)
      closed.push_back(r);
  if (closed.empty())
    throw EmptyDatasetError();

  const auto bins = fit_bins(closed);
  std::vector<Assignment> assignments;
  assignments.reserve(closed.size());
  for (const auto &r : closed)
    assignments.push_back(to_assignment(discretize(r, bins)));
  auto model = learn_cpts(assignments, structure, alpha, bins, trained_at);
  model.validate();
  return model;
}

std::vector<PrioritizedItem>
score_and_prioritize(const TrainedModel &model, std::span<const RawChange> open_changes,
                     Timestamp now, const ChangeTypeRules &rules) {
  std::vector<IngestedChange> rows;
  std::vector<Evidence> evidence;
  rows.reserve(open_changes.size());
  evidence.reserve(open_changes.size());
  for (const auto &c : open_changes) {
    // A creation time ahead of our clock is skew on the server side; such a
    // change is simply brand new.
    const Timestamp measured_at = std::max(now, c.created_at);
    rows.push_back(transform_change(c, measured_at, rules));
    auto ev = to_evidence(discretize(rows.back(), model.bins));
    // Only factors the network knows about become evidence.
    std::erase_if(ev.assignments, [&](const auto &kv) {
      return !model.structure.find(kv.first);
    });
    evidence.push_back(std::move(ev));
  }

  const auto results = kernels::infer_batch(model, evidence);
  std::vector<PrioritizedItem> items;
  items.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    PrioritizedItem it;
    it.change_id = rows[i].change_id;
    it.subject = rows[i].subject;
    it.merge_conflict = rows[i].merge_conflict;
    it.change_type = rows[i].change_type;
    it.merge_probability = results[i].probability;
    it.degraded = results[i].degenerate;
    it.age_minutes = rows[i].raw.age_minutes;
    if (it.degraded)
      spdlog::warn("change {}: evidence impossible under the model, using 0.5",
                   it.change_id);
    items.push_back(std::move(it));
  }
  return prioritize(std::move(items));
}

json to_json(const PrioritizedList &list) {
  json items = json::array();
  for (const auto &it : list.items)
    items.push_back({{"rank", it.rank},
                     {"change_id", it.change_id},
                     {"subject", it.subject},
                     {"change_type", std::string(to_string(it.change_type))},
                     {"merge_conflict", std::string(to_string(it.merge_conflict))},
                     {"merge_probability", it.merge_probability},
                     {"age_minutes", it.age_minutes},
                     {"degraded", it.degraded}});
  return {{"user", list.user},
          {"model_trained_at", format_timestamp(list.model_trained_at)},
          {"model_generation", list.model_generation},
          {"items", items}};
}

PrioritizedList prioritized_list_from_json(const json &doc) {
  try {
    PrioritizedList list;
    list.user = doc.at("user").get<std::string>();
    list.model_trained_at = parse_timestamp(doc.at("model_trained_at").get<std::string>());
    list.model_generation = doc.at("model_generation").get<std::uint64_t>();
    for (const auto &j : doc.at("items")) {
      PrioritizedItem it;
      it.rank = j.at("rank").get<std::size_t>();
      it.change_id = j.at("change_id").get<std::string>();
      it.subject = j.at("subject").get<std::string>();
      it.change_type = parse_change_type(j.at("change_type").get<std::string>());
      it.merge_conflict = parse_merge_conflict(j.at("merge_conflict").get<std::string>());
      it.merge_probability = j.at("merge_probability").get<double>();
      it.age_minutes = j.at("age_minutes").get<double>();
      it.degraded = j.at("degraded").get<bool>();
      list.items.push_back(std::move(it));
    }
    return list;
  } catch (const json::exception &e) {
    throw ContractError(std::string("malformed prioritized list: ") + e.what());
  } catch (const InputError &e) {
    throw ContractError(std::string("malformed prioritized list: ") + e.what());
  }
}

std::string render_table(const PrioritizedList &list) {
  std::ostringstream os;
  char line[512];
  std::snprintf(line, sizeof line, "%-5s %-40s %-14s %-8s %-11s %s\n", "RANK",
                "CHANGE", "TYPE", "CONFLICT", "PROBABILITY", "SUBJECT");
  os << line;
  for (const auto &it : list.items) {
    std::snprintf(line, sizeof line, "%-5zu %-40s %-14s %-8s %-11.4f %s%s\n", it.rank,
                  it.change_id.c_str(), std::string(to_string(it.change_type)).c_str(),
                  std::string(to_string(it.merge_conflict)).c_str(),
                  it.merge_probability, it.subject.c_str(),
                  it.degraded ? " (estimated)" : "");
    os << line;
  }
  if (list.items.empty())
    os << "no open review requests\n";
  return os.str();
}

} // namespace reviewq
