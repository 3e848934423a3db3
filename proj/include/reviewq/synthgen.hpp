#pragma once

// Synthetic datasets and review-server fixtures drawn from a planted
// ground-truth network.

#include "reviewq/bn.hpp"
#include "reviewq/etl.hpp"
#include "reviewq/factors.hpp"
#include "reviewq/rng.hpp"

#include <nlohmann/json.hpp>

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace reviewq {

struct SideMarginals {
  /// Indexed by ChangeType.
  std::array<double, 3> change_type{0.3, 0.5, 0.2};
  double merge_conflict_yes = 0.15;
  /// Fraction of rows emitted as still-open changes (outcome dropped).
  double open_fraction = 0.0;
};

struct PlantedSpec {
  NetworkStructure structure;
  std::vector<Cpt> true_cpts;
  BinThresholds bins; ///< used when emitting raw values
  std::size_t n_rows = 0;
  std::uint64_t seed = 0;
  SideMarginals side;

  /// Structure and CPT invariants, side-marginal ranges, and that every
  /// category of every factor has a representable raw value under `bins`.
  void validate() const;

  /// The planted network as a model (for inference and comparisons).
  TrainedModel model() const;
};

/// Bins with comfortable gaps: age 60/1440 minutes, size 20/200 lines,
/// revisions 2/5.
BinThresholds default_synthetic_bins();

/// Default structure with change_status depending strongly on the factors
/// (informative=true) or not at all (P(merged)=0.5 everywhere).
PlantedSpec planted_review_spec(bool informative, std::size_t n_rows,
                                std::uint64_t seed);

/// CPTs with rows drawn from a symmetric Dirichlet-like scheme; every entry is
/// at least `floor` before normalization.
std::vector<Cpt> random_cpts(const NetworkStructure &structure, Rng &rng,
                             double floor = 0.02);

/// Ancestral sampling of complete assignments from a model.
std::vector<Assignment> sample_assignments(const TrainedModel &model,
                                           std::size_t n, std::uint64_t seed);

/// Ancestral sampling in topological order plus independent side factors.
/// Requires the five factor variables and change_status in the structure.
std::vector<FactorVector> sample_dataset(const PlantedSpec &spec);

/// Representative raw values for a category: midpoint of the bin interval
/// (the open upper bin is taken to end at 2 * upper_cut).
double representative_age_minutes(AgeCategory c, const CutPair &cuts);
std::int64_t representative_size_lines(SizeCategory c, const CutPair &cuts);
std::int64_t representative_revisions(PatchesCategory c, const CutPair &cuts);

struct FixtureOptions {
  BinThresholds bins = default_synthetic_bins();
  Timestamp snapshot{};
  std::vector<std::string> reviewers{"u1", "u2", "u3"};
  std::string project = "synth/core";
};

/// Raw review-server record consistent with `fv` under `options.bins`
/// when measured at `options.snapshot`.
RawChange realize_change(const FactorVector &fv, std::size_t row,
                         const FixtureOptions &options);

/// Raw rows (as the store holds them) consistent with the factor vectors.
std::vector<IngestedChange> realize_ingested(const std::vector<FactorVector> &rows,
                                             const FixtureOptions &options);

/// Wire-format change objects, one per row.
std::vector<nlohmann::json>
emit_fixture_server_payloads(const std::vector<FactorVector> &rows,
                             const FixtureOptions &options);

/// Parses a planted-spec document (see docs/synth-spec.md).
struct SynthRequest {
  PlantedSpec spec;
  FixtureOptions fixture;
};
SynthRequest parse_synth_spec(const std::string &text);

} // namespace reviewq
