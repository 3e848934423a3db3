#pragma once

// Independent reference implementations used by the unit tests and the
// acceptance suite. Deliberately naive: string-keyed lookups, full
// enumeration, direct summation. Nothing here calls the code under test
// except to read its data structures.

#include "reviewq/bn.hpp"
#include "reviewq/prioritizer.hpp"
#include "reviewq/rng.hpp"
#include "reviewq/synthgen.hpp"

#include <cmath>
#include <string>
#include <tuple>
#include <vector>

namespace oracle {

using namespace reviewq;

/// P(v = state | parents) read from the CPT by recomputing the row offset.
inline double cpt_entry(const TrainedModel &m, const std::string &v, const Assignment &full) {
  const Cpt *cpt = nullptr;
  for (const auto &c : m.cpts)
    if (c.variable == v)
      cpt = &c;
  const auto &var_states = m.structure.variables[m.structure.index_of(v)].states;
  std::size_t row = 0;
  for (std::size_t i = 0; i < cpt->parent_order.size(); ++i) {
    const auto &p = cpt->parent_order[i];
    const auto &pstates = m.structure.variables[m.structure.index_of(p)].states;
    std::size_t s = 0;
    while (pstates[s] != full.at(p))
      ++s;
    row = row * pstates.size() + s;
  }
  std::size_t s = 0;
  while (var_states[s] != full.at(v))
    ++s;
  return cpt->probabilities[row * var_states.size() + s];
}

inline double joint(const TrainedModel &m, const Assignment &full) {
  double p = 1.0;
  for (const auto &v : m.structure.variables)
    p *= cpt_entry(m, v.name, full);
  return p;
}

/// Every complete assignment consistent with `evidence`.
inline std::vector<Assignment> completions(const TrainedModel &m, const Assignment &evidence) {
  std::vector<Assignment> out{Assignment{}};
  for (const auto &v : m.structure.variables) {
    std::vector<Assignment> next;
    for (const auto &partial : out) {
      for (const auto &s : v.states) {
        if (auto it = evidence.find(v.name); it != evidence.end() && it->second != s)
          continue;
        auto a = partial;
        a[v.name] = s;
        next.push_back(std::move(a));
      }
    }
    out = std::move(next);
  }
  return out;
}

/// Brute-force P(change_status = merged | evidence); NaN when impossible.
inline double merge_probability(const TrainedModel &m, const Assignment &evidence) {
  double merged = 0.0;
  double total = 0.0;
  for (const auto &a : completions(m, evidence)) {
    const double p = joint(m, a);
    total += p;
    if (a.at(std::string(var::kChangeStatus)) == kMerged)
      merged += p;
  }
  return total > 0.0 ? merged / total : std::nan("");
}

/// Random DAG over 2..6 variables with 2..5 states each; change_status is
/// the last, two-state, childless node.
inline NetworkStructure random_structure(Rng &rng) {
  NetworkStructure s;
  const std::size_t n = 2 + uniform_index(rng, 5);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    CategoricalVariable v{"x" + std::to_string(i), {}};
    const std::size_t k = 2 + uniform_index(rng, 4);
    for (std::size_t j = 0; j < k; ++j)
      v.states.push_back("s" + std::to_string(j));
    s.variables.push_back(std::move(v));
  }
  s.variables.push_back({std::string(var::kChangeStatus),
                         {std::string(kAbandoned), std::string(kMerged)}});
  for (std::size_t child = 1; child < n; ++child)
    for (std::size_t parent = 0; parent < child; ++parent)
      if (unit_double(rng) < 0.4)
        s.edges.emplace_back(s.variables[parent].name, s.variables[child].name);
  return s;
}

inline TrainedModel random_model(Rng &rng) {
  TrainedModel m;
  m.structure = random_structure(rng);
  m.cpts = random_cpts(m.structure, rng, 0.02);
  return m;
}

/// Each non-status variable observed with probability 1/2.
inline Assignment random_evidence(const TrainedModel &m, Rng &rng) {
  Assignment e;
  for (const auto &v : m.structure.variables) {
    if (v.name == var::kChangeStatus || unit_double(rng) < 0.5)
      continue;
    e[v.name] = v.states[uniform_index(rng, v.states.size())];
  }
  return e;
}

inline double rmse(const std::vector<double> &p, const std::vector<double> &a) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i)
    acc += static_cast<long double>(p[i] - a[i]) * (p[i] - a[i]);
  return static_cast<double>(std::sqrt(acc / p.size()));
}

inline double mae(const std::vector<double> &p, const std::vector<double> &a) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < p.size(); ++i)
    acc += std::fabs(a[i] - p[i]);
  return static_cast<double>(acc / p.size());
}

/// Mann-Whitney U / (n_pos * n_neg), ties counted as one half.
inline double mann_whitney_auc(const std::vector<double> &p, const std::vector<int> &y) {
  double wins = 0.0;
  std::size_t pos = 0;
  std::size_t neg = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] == 1)
      ++pos;
    else
      ++neg;
  }
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (y[i] != 1)
      continue;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (y[j] != 0)
        continue;
      if (p[i] > p[j])
        wins += 1.0;
      else if (p[i] == p[j])
        wins += 0.5;
    }
  }
  return wins / (static_cast<double>(pos) * static_cast<double>(neg));
}

/// Lexicographic key: smaller sorts first.
inline auto priority_key(const PrioritizedItem &it) {
  return std::make_tuple(it.merge_conflict == MergeConflict::Yes ? 1 : 0,
                         static_cast<int>(it.change_type), -it.merge_probability,
                         -it.age_minutes, it.change_id);
}

/// Selection sort on the key; O(n^2) and obviously correct.
inline std::vector<PrioritizedItem> prioritize(std::vector<PrioritizedItem> items) {
  for (std::size_t i = 0; i < items.size(); ++i) {
    std::size_t best = i;
    for (std::size_t j = i + 1; j < items.size(); ++j)
      if (priority_key(items[j]) < priority_key(items[best]))
        best = j;
    std::swap(items[i], items[best]);
    items[i].rank = i + 1;
  }
  return items;
}

/// Random items with deliberate ties on every key but change_id.
inline std::vector<PrioritizedItem> random_items(Rng &rng, std::size_t n) {
  static const double probs[] = {0.0, 0.25, 0.5, 0.5, 0.75, 1.0};
  static const double ages[] = {10.0, 60.0, 60.0, 1440.0};
  std::vector<PrioritizedItem> items(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto &it = items[i];
    it.change_id = "c" + std::to_string(uniform_index(rng, 1000000)) + "-" + std::to_string(i);
    it.merge_conflict = uniform_index(rng, 4) == 0 ? MergeConflict::Yes : MergeConflict::No;
    it.change_type = static_cast<ChangeType>(uniform_index(rng, 3));
    it.merge_probability = uniform_index(rng, 3) == 0 ? unit_double(rng)
                                                     : probs[uniform_index(rng, 6)];
    it.age_minutes = ages[uniform_index(rng, 4)];
    it.subject = "s" + std::to_string(i);
  }
  return items;
}

/// Planted network small enough that N=5000 samples pin every CPT entry:
/// age -> size, test_verdict -> change_status, plus three roots.
inline TrainedModel recovery_planted_model() {
  TrainedModel m;
  m.structure = NetworkStructure::default_structure();
  m.structure.edges = {{std::string(var::kAge), std::string(var::kSize)},
                       {std::string(var::kTestVerdict), std::string(var::kChangeStatus)}};
  auto cpt = [&](const std::string &v, std::vector<double> probs) {
    Cpt c;
    c.variable = v;
    c.parent_order = m.structure.parents_of(v);
    for (const auto &p : c.parent_order)
      c.parent_cardinalities.push_back(m.structure.variables[m.structure.index_of(p)].states.size());
    c.state_count = m.structure.variables[m.structure.index_of(v)].states.size();
    c.probabilities = std::move(probs);
    return c;
  };
  for (const auto &v : m.structure.variables) {
    if (v.name == var::kAge)
      m.cpts.push_back(cpt(v.name, {0.3, 0.4, 0.3}));
    else if (v.name == var::kSize)
      m.cpts.push_back(cpt(v.name, {0.6, 0.3, 0.1, 0.3, 0.4, 0.3, 0.1, 0.3, 0.6}));
    else if (v.name == var::kPatches)
      m.cpts.push_back(cpt(v.name, {0.5, 0.3, 0.2}));
    else if (v.name == var::kTestVerdict)
      m.cpts.push_back(cpt(v.name, {0.3, 0.3, 0.4}));
    else if (v.name == var::kPeerReview)
      m.cpts.push_back(cpt(v.name, {0.1, 0.2, 0.3, 0.25, 0.15}));
    else // change_status: abandoned, merged
      m.cpts.push_back(cpt(v.name, {0.8, 0.2, 0.5, 0.5, 0.15, 0.85}));
  }
  m.validate();
  return m;
}

} // namespace oracle
