#pragma once

// Discrete Bayesian network: structure, conditional probability tables,
// smoothed maximum-likelihood learning and exact inference by enumeration.

#include "reviewq/bins.hpp"
#include "reviewq/timeutil.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace reviewq {

/// Variable names used by the default review-request network.
namespace var {
inline constexpr std::string_view kAge = "age";
inline constexpr std::string_view kSize = "size";
inline constexpr std::string_view kPatches = "num_patches";
inline constexpr std::string_view kTestVerdict = "test_verdict";
inline constexpr std::string_view kPeerReview = "peer_review";
inline constexpr std::string_view kChangeStatus = "change_status";
} // namespace var

inline constexpr std::string_view kMerged = "merged";
inline constexpr std::string_view kAbandoned = "abandoned";

struct CategoricalVariable {
  std::string name;
  std::vector<std::string> states;

  std::optional<std::size_t> state_index(std::string_view label) const;

  bool operator==(const CategoricalVariable &) const = default;
};

struct NetworkStructure {
  std::vector<CategoricalVariable> variables;
  std::vector<std::pair<std::string, std::string>> edges; ///< (parent, child)

  /// Throws StructureError if any invariant is broken: unknown edge
  /// endpoint, duplicate variable or state, fewer than two states, a cycle,
  /// or a change_status node that is missing or has children.
  void validate() const;

  std::optional<std::size_t> find(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;

  /// Parents of `child` in edge declaration order.
  std::vector<std::string> parents_of(std::string_view child) const;

  /// Variable indices, parents before children. Throws StructureError on a
  /// cycle.
  std::vector<std::size_t> topological_order() const;

  /// The five review factors as direct parents of change_status.
  static NetworkStructure default_structure();

  bool operator==(const NetworkStructure &) const = default;
};

/// Conditional probability table of one variable. Rows are laid out in
/// mixed radix over `parent_order` (first parent most significant); each
/// row holds one probability per state of the variable.
struct Cpt {
  std::string variable;
  std::vector<std::string> parent_order;
  std::vector<std::size_t> parent_cardinalities;
  std::size_t state_count = 0;
  std::vector<double> probabilities;

  std::size_t row_count() const;
  std::size_t row_index(std::span<const std::size_t> parent_states) const;
  std::vector<std::size_t> parent_states_of(std::size_t row) const;

  std::span<const double> row(std::size_t r) const {
    return {probabilities.data() + r * state_count, state_count};
  }
  std::span<double> row(std::size_t r) {
    return {probabilities.data() + r * state_count, state_count};
  }

  bool operator==(const Cpt &) const = default;
};

struct TrainedModel {
  NetworkStructure structure;
  std::vector<Cpt> cpts; ///< one per variable, in structure order
  BinThresholds bins;
  Timestamp trained_at{};
  std::size_t training_rows = 0;
  double smoothing_alpha = 1.0;

  /// Checks structure, CPT coverage, row sums (1e-9) and ranges.
  /// Throws StructureError or LoadError.
  void validate() const;

  const Cpt &cpt_for(std::string_view variable) const;

  bool operator==(const TrainedModel &) const = default;
};

/// Complete or partial mapping from variable name to state label.
using Assignment = std::map<std::string, std::string, std::less<>>;

struct Evidence {
  Assignment assignments;
};

inline constexpr double kRowSumTolerance = 1e-9;

/// Smoothed maximum-likelihood CPTs:
///   P(v=s | u) = (count(v=s,u) + alpha) / (count(u) + alpha * |states(v)|)
/// Every row must assign a valid state to every variable.
TrainedModel learn_cpts(std::span<const Assignment> rows,
                        const NetworkStructure &structure, double alpha,
                        const BinThresholds &bins = {},
                        Timestamp trained_at = {});

/// Product of CPT entries for a complete assignment.
double joint_probability(const TrainedModel &model,
                         const Assignment &assignment);

/// P(change_status = merged | evidence) by exact enumeration over every
/// completion of the unobserved variables. Throws DegenerateEvidenceError
/// when the evidence has zero probability.
double infer_merge_probability(const TrainedModel &model,
                               const Evidence &evidence);

/// Compact index form of a model used by the inference and learning
/// kernels. Cheap to build; holds a reference to the model's tables.
class IndexedNetwork {
public:
  explicit IndexedNetwork(const TrainedModel &model);

  std::size_t size() const { return cards_.size(); }
  std::size_t cardinality(std::size_t v) const { return cards_[v]; }
  std::size_t status_index() const { return status_; }
  std::size_t merged_state() const { return merged_; }

  /// Map evidence to per-variable state indices (-1 = unobserved).
  /// Throws InputError for unknown names/states or observed change_status.
  std::vector<int> encode(const Evidence &evidence) const;

  /// Product of CPT entries for a complete index assignment.
  double joint(std::span<const std::size_t> states) const;

  /// Unnormalized (merged mass, total mass) for encoded evidence.
  std::pair<double, double> posterior_mass(std::span<const int> fixed) const;

private:
  const TrainedModel *model_;
  std::vector<std::size_t> cards_;
  std::vector<std::vector<std::size_t>> parents_;
  std::size_t status_ = 0;
  std::size_t merged_ = 0;
};

} // namespace reviewq
