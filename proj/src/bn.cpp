#include "reviewq/bn.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace reviewq {

namespace {

const std::vector<std::pair<std::string_view, std::vector<std::string>>> &
factor_domains() {
  static const std::vector<std::pair<std::string_view, std::vector<std::string>>>
      domains = {
          {var::kAge, {"Young", "Medium", "Old"}},
          {var::kSize, {"Small", "Medium", "Large"}},
          {var::kPatches, {"Low", "Medium", "High"}},
          {var::kTestVerdict, {"-1", "0", "+1"}},
          {var::kPeerReview, {"-2", "-1", "0", "+1", "+2"}},
          {var::kChangeStatus,
           {std::string(kAbandoned), std::string(kMerged)}},
      };
  return domains;
}

} // namespace

std::optional<std::size_t>
CategoricalVariable::state_index(std::string_view label) const {
  for (std::size_t i = 0; i < states.size(); ++i)
    if (states[i] == label)
      return i;
  return std::nullopt;
}

std::optional<std::size_t>
NetworkStructure::find(std::string_view name) const {
  for (std::size_t i = 0; i < variables.size(); ++i)
    if (variables[i].name == name)
      return i;
  return std::nullopt;
}

std::size_t NetworkStructure::index_of(std::string_view name) const {
  if (auto i = find(name))
    return *i;
  throw StructureError("unknown variable '" + std::string(name) + "'");
}

std::vector<std::string>
NetworkStructure::parents_of(std::string_view child) const {
  std::vector<std::string> out;
  for (const auto &[parent, c] : edges)
    if (c == child)
      out.push_back(parent);
  return out;
}

std::vector<std::size_t> NetworkStructure::topological_order() const {
  const std::size_t n = variables.size();
  std::vector<std::vector<std::size_t>> children(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto &[p, c] : edges) {
    const auto pi = index_of(p);
    const auto ci = index_of(c);
    children[pi].push_back(ci);
    ++indegree[ci];
  }
  // Kahn's algorithm, lowest index first so the order is deterministic.
  std::set<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i)
    if (indegree[i] == 0)
      ready.insert(i);
  std::vector<std::size_t> order;
  order.reserve(n);
  while (!ready.empty()) {
    const auto v = *ready.begin();
    ready.erase(ready.begin());
    order.push_back(v);
    for (auto c : children[v])
      if (--indegree[c] == 0)
        ready.insert(c);
  }
  if (order.size() != n)
    throw StructureError("network edges contain a cycle");
  return order;
}

void NetworkStructure::validate() const {
  std::set<std::string, std::less<>> names;
  for (const auto &v : variables) {
    if (v.name.empty())
      throw StructureError("variable with empty name");
    if (!names.insert(v.name).second)
      throw StructureError("duplicate variable '" + v.name + "'");
    if (v.states.size() < 2)
      throw StructureError("variable '" + v.name + "' needs at least 2 states");
    std::set<std::string> labels(v.states.begin(), v.states.end());
    if (labels.size() != v.states.size())
      throw StructureError("variable '" + v.name + "' has duplicate states");
    for (const auto &[fname, domain] : factor_domains())
      if (v.name == fname && v.states != domain)
        throw StructureError("variable '" + v.name +
                             "' must use its canonical state domain");
  }
  if (!find(var::kChangeStatus))
    throw StructureError("network has no change_status node");

  std::set<std::pair<std::string, std::string>> seen;
  for (const auto &[p, c] : edges) {
    if (!find(p))
      throw StructureError("edge names undeclared variable '" + p + "'");
    if (!find(c))
      throw StructureError("edge names undeclared variable '" + c + "'");
    if (p == c)
      throw StructureError("self-loop on '" + p + "'");
    if (p == var::kChangeStatus)
      throw StructureError("change_status is terminal and cannot have children");
    if (!seen.insert({p, c}).second)
      throw StructureError("duplicate edge " + p + " -> " + c);
  }
  (void)topological_order();
}

NetworkStructure NetworkStructure::default_structure() {
  NetworkStructure s;
  for (const auto &[name, domain] : factor_domains())
    s.variables.push_back({std::string(name), domain});
  for (auto f : {var::kAge, var::kSize, var::kPatches, var::kTestVerdict,
                 var::kPeerReview})
    s.edges.emplace_back(std::string(f), std::string(var::kChangeStatus));
  return s;
}

std::size_t Cpt::row_count() const {
  std::size_t n = 1;
  for (auto c : parent_cardinalities)
    n *= c;
  return n;
}

std::size_t Cpt::row_index(std::span<const std::size_t> parent_states) const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < parent_cardinalities.size(); ++i)
    r = r * parent_cardinalities[i] + parent_states[i];
  return r;
}

std::vector<std::size_t> Cpt::parent_states_of(std::size_t row) const {
  std::vector<std::size_t> out(parent_cardinalities.size());
  for (std::size_t i = parent_cardinalities.size(); i-- > 0;) {
    out[i] = row % parent_cardinalities[i];
    row /= parent_cardinalities[i];
  }
  return out;
}

const Cpt &TrainedModel::cpt_for(std::string_view variable) const {
  for (const auto &c : cpts)
    if (c.variable == variable)
      return c;
  throw StructureError("no CPT for variable '" + std::string(variable) + "'");
}

void TrainedModel::validate() const {
  structure.validate();
  if (!(smoothing_alpha > 0.0) || !std::isfinite(smoothing_alpha))
    throw LoadError("smoothing_alpha must be positive");
  if (cpts.size() != structure.variables.size())
    throw LoadError("expected one CPT per variable");
  for (std::size_t v = 0; v < structure.variables.size(); ++v) {
    const auto &var_def = structure.variables[v];
    const auto &cpt = cpts[v];
    if (cpt.variable != var_def.name)
      throw LoadError("CPT " + std::to_string(v) + " is for '" + cpt.variable +
                      "', expected '" + var_def.name + "'");
    if (cpt.parent_order != structure.parents_of(var_def.name))
      throw LoadError("CPT for '" + cpt.variable +
                      "' has a parent order that does not match the edges");
    if (cpt.state_count != var_def.states.size())
      throw LoadError("CPT for '" + cpt.variable + "' has wrong state count");
    for (std::size_t i = 0; i < cpt.parent_order.size(); ++i) {
      const auto &pv = structure.variables[structure.index_of(cpt.parent_order[i])];
      if (cpt.parent_cardinalities.size() != cpt.parent_order.size() ||
          cpt.parent_cardinalities[i] != pv.states.size())
        throw LoadError("CPT for '" + cpt.variable +
                        "' has wrong parent cardinalities");
    }
    if (cpt.probabilities.size() != cpt.row_count() * cpt.state_count)
      throw LoadError("CPT for '" + cpt.variable + "' has wrong table size");
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      double sum = 0.0;
      for (double p : cpt.row(r)) {
        if (!(p >= 0.0 && p <= 1.0))
          throw LoadError("CPT for '" + cpt.variable + "' row " +
                          std::to_string(r) + " has a probability outside [0,1]");
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance)
        throw LoadError("CPT for '" + cpt.variable + "' row " +
                        std::to_string(r) + " sums to " + std::to_string(sum));
    }
  }
}

TrainedModel learn_cpts(std::span<const Assignment> rows,
                        const NetworkStructure &structure, double alpha,
                        const BinThresholds &bins, Timestamp trained_at) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ContractError("smoothing alpha must be a positive finite number");
  structure.validate();

  const std::size_t n_vars = structure.variables.size();
  kernels::IndexedRows indexed;
  indexed.n_vars = n_vars;
  indexed.cells.resize(rows.size() * n_vars);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto &row = rows[r];
    for (const auto &[name, label] : row)
      if (!structure.find(name))
        throw InputError("row " + std::to_string(r) + ": unknown variable '" +
                         name + "'");
    for (std::size_t v = 0; v < n_vars; ++v) {
      const auto &def = structure.variables[v];
      auto it = row.find(def.name);
      if (it == row.end())
        throw InputError("row " + std::to_string(r) + ": missing variable '" +
                         def.name + "'");
      auto s = def.state_index(it->second);
      if (!s)
        throw InputError("row " + std::to_string(r) + ": unknown state '" +
                         it->second + "' for variable '" + def.name + "'");
      indexed.cells[r * n_vars + v] = static_cast<std::uint16_t>(*s);
    }
  }

  TrainedModel model;
  model.structure = structure;
  model.bins = bins;
  model.trained_at = trained_at;
  model.training_rows = rows.size();
  model.smoothing_alpha = alpha;
  model.cpts.reserve(n_vars);

  for (std::size_t v = 0; v < n_vars; ++v) {
    const auto &def = structure.variables[v];
    Cpt cpt;
    cpt.variable = def.name;
    cpt.parent_order = structure.parents_of(def.name);
    cpt.state_count = def.states.size();

    kernels::Family family;
    family.child = v;
    family.child_card = def.states.size();
    for (const auto &p : cpt.parent_order) {
      const auto pi = structure.index_of(p);
      family.parents.push_back(pi);
      family.parent_cards.push_back(structure.variables[pi].states.size());
    }
    cpt.parent_cardinalities = family.parent_cards;

    const auto counts = kernels::count_family(indexed, family);
    cpt.probabilities.resize(counts.size());
    const double k = static_cast<double>(cpt.state_count);
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      std::uint64_t parent_total = 0;
      for (std::size_t s = 0; s < cpt.state_count; ++s)
        parent_total += counts[r * cpt.state_count + s];
      const double denom = static_cast<double>(parent_total) + alpha * k;
      for (std::size_t s = 0; s < cpt.state_count; ++s)
        cpt.probabilities[r * cpt.state_count + s] =
            (static_cast<double>(counts[r * cpt.state_count + s]) + alpha) /
            denom;
    }
    model.cpts.push_back(std::move(cpt));
  }
  return model;
}

IndexedNetwork::IndexedNetwork(const TrainedModel &model) : model_(&model) {
  const auto &s = model.structure;
  cards_.reserve(s.variables.size());
  parents_.reserve(s.variables.size());
  for (std::size_t v = 0; v < s.variables.size(); ++v) {
    cards_.push_back(s.variables[v].states.size());
    std::vector<std::size_t> ps;
    for (const auto &p : model.cpts[v].parent_order)
      ps.push_back(s.index_of(p));
    parents_.push_back(std::move(ps));
  }
  status_ = s.index_of(var::kChangeStatus);
  merged_ = *s.variables[status_].state_index(kMerged);
}

std::vector<int> IndexedNetwork::encode(const Evidence &evidence) const {
  const auto &s = model_->structure;
  std::vector<int> fixed(cards_.size(), -1);
  for (const auto &[name, label] : evidence.assignments) {
    if (name == var::kChangeStatus)
      throw InputError("change_status cannot be given as evidence");
    auto v = s.find(name);
    if (!v)
      throw InputError("evidence names unknown variable '" + name + "'");
    auto st = s.variables[*v].state_index(label);
    if (!st)
      throw InputError("evidence state '" + label + "' is not in the domain of '" +
                       name + "'");
    fixed[*v] = static_cast<int>(*st);
  }
  return fixed;
}

double IndexedNetwork::joint(std::span<const std::size_t> states) const {
  double p = 1.0;
  for (std::size_t v = 0; v < cards_.size() && p != 0.0; ++v) {
    const auto &cpt = model_->cpts[v];
    std::size_t r = 0;
    for (std::size_t i = 0; i < parents_[v].size(); ++i)
      r = r * cpt.parent_cardinalities[i] + states[parents_[v][i]];
    p *= cpt.probabilities[r * cpt.state_count + states[v]];
  }
  return p;
}

std::pair<double, double>
IndexedNetwork::posterior_mass(std::span<const int> fixed) const {
  const std::size_t n = cards_.size();
  std::vector<std::size_t> states(n, 0);
  std::vector<std::size_t> free_vars;
  for (std::size_t v = 0; v < n; ++v) {
    if (v == status_)
      continue;
    if (fixed[v] >= 0)
      states[v] = static_cast<std::size_t>(fixed[v]);
    else
      free_vars.push_back(v);
  }

  double merged = 0.0;
  double total = 0.0;
  for (;;) {
    for (std::size_t s = 0; s < cards_[status_]; ++s) {
      states[status_] = s;
      const double j = joint(states);
      total += j;
      if (s == merged_)
        merged += j;
    }
    // odometer over the unobserved variables
    std::size_t i = 0;
    for (; i < free_vars.size(); ++i) {
      auto &st = states[free_vars[i]];
      if (++st < cards_[free_vars[i]])
        break;
      st = 0;
    }
    if (i == free_vars.size())
      break;
  }
  return {merged, total};
}

double joint_probability(const TrainedModel &model,
                         const Assignment &assignment) {
  const auto &s = model.structure;
  std::vector<std::size_t> states(s.variables.size());
  std::string missing;
  for (std::size_t v = 0; v < s.variables.size(); ++v) {
    const auto &def = s.variables[v];
    auto it = assignment.find(def.name);
    if (it == assignment.end()) {
      missing += missing.empty() ? def.name : ", " + def.name;
      continue;
    }
    auto st = def.state_index(it->second);
    if (!st)
      throw InputError("state '" + it->second + "' is not in the domain of '" +
                       def.name + "'");
    states[v] = *st;
  }
  if (!missing.empty())
    throw InputError("incomplete assignment; missing: " + missing);
  return IndexedNetwork(model).joint(states);
}

double infer_merge_probability(const TrainedModel &model,
                               const Evidence &evidence) {
  const IndexedNetwork net(model);
  const auto fixed = net.encode(evidence);
  const auto [merged, total] = net.posterior_mass(fixed);
  if (!(total > 0.0))
    throw DegenerateEvidenceError("evidence has zero probability under the model");
  return std::clamp(merged / total, 0.0, 1.0);
}

} // namespace reviewq
