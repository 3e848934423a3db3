#pragma once

// Evaluation harness: error metrics, k-fold cross-validation, ROC/AUC.

#include "reviewq/bn.hpp"
#include "reviewq/etl.hpp"
#include "reviewq/factors.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace reviewq {

/// sqrt(sum((predicted_i - actual_i)^2) / n). Throws ContractError on empty
/// or mismatched input.
double rmse(std::span<const double> predicted, std::span<const double> actual);

/// sum(|actual_i - predicted_i|) / n.
double mae(std::span<const double> predicted, std::span<const double> actual);

/// Partition of 0..n-1 into k shuffled folds whose sizes differ by at most
/// one. Requires 2 <= k <= n.
std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;

  bool operator==(const RocPoint &) const = default;
};

struct RocCurve {
  std::vector<RocPoint> points; ///< from (0,0) to (1,1)
  double auc = 0.0;
};

/// Threshold sweep over the distinct predicted values, trapezoidal area.
/// Labels are 0/1 and both classes must be present.
RocCurve roc_auc(std::span<const double> predicted, std::span<const int> labels);

/// Counts after rounding probabilities at 0.5 (>= 0.5 predicts merged).
struct ConfusionCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;

  bool operator==(const ConfusionCounts &) const = default;
};

ConfusionCounts rounded_confusion(std::span<const double> predicted,
                                  std::span<const int> labels);

struct FoldMetrics {
  double rmse = 0.0;
  double mae = 0.0;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;

  bool operator==(const FoldMetrics &) const = default;
};

struct EvalReport {
  std::size_t folds = 0;
  std::uint64_t seed = 0;
  std::size_t rows = 0;
  std::vector<FoldMetrics> per_fold;
  double aggregate_rmse = 0.0; ///< mean of fold values
  double aggregate_mae = 0.0;
  double pooled_rmse = 0.0; ///< over all out-of-fold predictions at once
  double pooled_mae = 0.0;
  double constant_baseline_rmse = 0.0; ///< predicting 0.5 everywhere
  std::vector<RocPoint> roc_points;
  double auc = 0.0;
  ConfusionCounts rounded;

  bool operator==(const EvalReport &) const = default;
};

/// k-fold CV over already discretized rows. Each fold trains with
/// learn_cpts on the other folds and predicts with full factor evidence;
/// outcomes are encoded merged=1, abandoned=0.
EvalReport cross_validate(std::span<const FactorVector> dataset,
                          const NetworkStructure &structure, double alpha,
                          std::size_t k = 5, std::uint64_t seed = 0);

/// As above on raw rows; tercile bins are fitted on each training fold only.
EvalReport cross_validate_raw(std::span<const IngestedChange> dataset,
                              const NetworkStructure &structure, double alpha,
                              std::size_t k = 5, std::uint64_t seed = 0);

std::string report_to_json(const EvalReport &report);
EvalReport report_from_json(const std::string &text);

/// "fpr,tpr" header plus one line per ROC point.
std::string roc_table_csv(const EvalReport &report);

} // namespace reviewq
