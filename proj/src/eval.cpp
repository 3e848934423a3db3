#include "reviewq/eval.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/kernels.hpp"
#include "reviewq/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace reviewq {

namespace {

void check_pair(std::span<const double> predicted, std::span<const double> actual) {
  if (predicted.empty())
    throw ContractError("metric over empty vectors");
  if (predicted.size() != actual.size())
    throw ContractError("predicted and actual lengths differ (" +
                        std::to_string(predicted.size()) + " vs " +
                        std::to_string(actual.size()) + ")");
}

} // namespace

double rmse(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - actual[i];
    sum += d * d;
  }
  return std::sqrt(sum / static_cast<double>(predicted.size()));
}

double mae(std::span<const double> predicted, std::span<const double> actual) {
  check_pair(predicted, actual);
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    sum += std::abs(actual[i] - predicted[i]);
  return sum / static_cast<double>(predicted.size());
}

std::vector<std::vector<std::size_t>> kfold_split(std::size_t n, std::size_t k,
                                                  std::uint64_t seed) {
  if (k < 2 || k > n)
    throw ContractError("k-fold split needs 2 <= k <= n (k=" + std::to_string(k) +
                        ", n=" + std::to_string(n) + ")");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle_in_place(order, rng);
  std::vector<std::vector<std::size_t>> folds(k);
  for (std::size_t i = 0; i < n; ++i)
    folds[i % k].push_back(order[i]);
  for (auto &f : folds)
    std::sort(f.begin(), f.end());
  return folds;
}

RocCurve roc_auc(std::span<const double> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size())
    throw ContractError("predictions and labels differ in length");
  std::size_t positives = 0;
  for (int l : labels) {
    if (l != 0 && l != 1)
      throw ContractError("labels must be 0 or 1");
    positives += static_cast<std::size_t>(l);
  }
  const std::size_t negatives = labels.size() - positives;
  if (positives == 0 || negatives == 0)
    throw ContractError("ROC needs both classes among the labels");

  std::vector<std::size_t> order(predicted.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return predicted[a] > predicted[b];
  });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  double area = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = predicted[order[i]];
    const auto prev = curve.points.back();
    for (; i < order.size() && predicted[order[i]] == threshold; ++i) {
      if (labels[order[i]] == 1)
        ++tp;
      else
        ++fp;
    }
    const RocPoint p{static_cast<double>(fp) / static_cast<double>(negatives),
                     static_cast<double>(tp) / static_cast<double>(positives)};
    area += (p.fpr - prev.fpr) * (p.tpr + prev.tpr) / 2.0;
    curve.points.push_back(p);
  }
  curve.auc = area;
  return curve;
}

ConfusionCounts rounded_confusion(std::span<const double> predicted,
                                  std::span<const int> labels) {
  if (predicted.size() != labels.size())
    throw ContractError("predictions and labels differ in length");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool says_merged = predicted[i] >= 0.5;
    if (labels[i] == 1)
      ++(says_merged ? c.true_positive : c.false_negative);
    else
      ++(says_merged ? c.false_positive : c.true_negative);
  }
  return c;
}

namespace {

struct FoldData {
  std::vector<Assignment> train;
  std::vector<Evidence> test;
};

using FoldBuilder = std::function<FoldData(std::span<const std::size_t> train_idx,
                                           std::span<const std::size_t> test_idx)>;

EvalReport run_cv(std::size_t n, std::span<const int> labels,
                  const NetworkStructure &structure, double alpha, std::size_t k,
                  std::uint64_t seed, const FoldBuilder &build) {
  if (k < 2)
    throw ContractError("cross-validation needs at least 2 folds");
  if (n < k)
    throw ContractError("dataset has " + std::to_string(n) + " rows, fewer than " +
                        std::to_string(k) + " folds");
  const auto folds = kfold_split(n, k, seed);

  EvalReport report;
  report.folds = k;
  report.seed = seed;
  report.rows = n;
  std::vector<double> pooled_pred(n, 0.0);

  for (std::size_t f = 0; f < k; ++f) {
    std::vector<std::size_t> train_idx;
    train_idx.reserve(n - folds[f].size());
    for (std::size_t g = 0; g < k; ++g)
      if (g != f)
        train_idx.insert(train_idx.end(), folds[g].begin(), folds[g].end());
    std::sort(train_idx.begin(), train_idx.end());

    const auto data = build(train_idx, folds[f]);
    const auto model = learn_cpts(data.train, structure, alpha);
    const auto results = kernels::infer_batch(model, data.test);

    std::vector<double> pred, actual;
    for (std::size_t j = 0; j < folds[f].size(); ++j) {
      pred.push_back(results[j].probability);
      actual.push_back(static_cast<double>(labels[folds[f][j]]));
      pooled_pred[folds[f][j]] = results[j].probability;
    }
    report.per_fold.push_back(
        {rmse(pred, actual), mae(pred, actual), train_idx.size(), folds[f].size()});
  }

  for (const auto &fm : report.per_fold) {
    report.aggregate_rmse += fm.rmse;
    report.aggregate_mae += fm.mae;
  }
  report.aggregate_rmse /= static_cast<double>(k);
  report.aggregate_mae /= static_cast<double>(k);

  std::vector<double> actual(labels.begin(), labels.end());
  report.pooled_rmse = rmse(pooled_pred, actual);
  report.pooled_mae = mae(pooled_pred, actual);
  report.constant_baseline_rmse = rmse(std::vector<double>(n, 0.5), actual);
  report.rounded = rounded_confusion(pooled_pred, labels);

  const bool both_classes = std::find(labels.begin(), labels.end(), 0) != labels.end() &&
                            std::find(labels.begin(), labels.end(), 1) != labels.end();
  if (both_classes) {
    auto roc = roc_auc(pooled_pred, labels);
    report.roc_points = std::move(roc.points);
    report.auc = roc.auc;
  } else {
    // ROC is undefined with one class; report the chance diagonal.
    report.roc_points = {{0.0, 0.0}, {1.0, 1.0}};
    report.auc = 0.5;
  }
  return report;
}

template <typename Row> std::vector<int> outcome_labels(std::span<const Row> rows) {
  std::vector<int> labels;
  labels.reserve(rows.size());
  for (const auto &r : rows) {
    if (!r.outcome)
      throw ContractError("cross-validation row " + r.change_id + " is still open");
    labels.push_back(*r.outcome == Outcome::Merged ? 1 : 0);
  }
  return labels;
}

} // namespace

EvalReport cross_validate(std::span<const FactorVector> dataset,
                          const NetworkStructure &structure, double alpha,
                          std::size_t k, std::uint64_t seed) {
  const auto labels = outcome_labels(dataset);
  return run_cv(dataset.size(), labels, structure, alpha, k, seed,
                [&](std::span<const std::size_t> train_idx,
                    std::span<const std::size_t> test_idx) {
                  FoldData d;
                  for (auto i : train_idx)
                    d.train.push_back(to_assignment(dataset[i]));
                  for (auto i : test_idx)
                    d.test.push_back(to_evidence(dataset[i]));
                  return d;
                });
}

EvalReport cross_validate_raw(std::span<const IngestedChange> dataset,
                              const NetworkStructure &structure, double alpha,
                              std::size_t k, std::uint64_t seed) {
  const auto labels = outcome_labels(dataset);
  return run_cv(dataset.size(), labels, structure, alpha, k, seed,
                [&](std::span<const std::size_t> train_idx,
                    std::span<const std::size_t> test_idx) {
                  std::vector<IngestedChange> train_rows;
                  for (auto i : train_idx)
                    train_rows.push_back(dataset[i]);
                  const auto bins = fit_bins(train_rows);
                  FoldData d;
                  for (const auto &r : train_rows)
                    d.train.push_back(to_assignment(discretize(r, bins)));
                  for (auto i : test_idx)
                    d.test.push_back(to_evidence(discretize(dataset[i], bins)));
                  return d;
                });
}

std::string report_to_json(const EvalReport &r) {
  using nlohmann::json;
  json folds = json::array();
  for (const auto &f : r.per_fold)
    folds.push_back({{"rmse", f.rmse},
                     {"mae", f.mae},
                     {"train_rows", f.train_rows},
                     {"test_rows", f.test_rows}});
  json roc = json::array();
  for (const auto &p : r.roc_points)
    roc.push_back({p.fpr, p.tpr});
  json doc = {
      {"folds", r.folds},
      {"seed", r.seed},
      {"rows", r.rows},
      {"per_fold", folds},
      {"aggregate_rmse", r.aggregate_rmse},
      {"aggregate_mae", r.aggregate_mae},
      {"pooled_rmse", r.pooled_rmse},
      {"pooled_mae", r.pooled_mae},
      {"constant_baseline_rmse", r.constant_baseline_rmse},
      {"roc_points", roc},
      {"auc", r.auc},
      {"rounded_confusion",
       {{"true_positive", r.rounded.true_positive},
        {"false_positive", r.rounded.false_positive},
        {"true_negative", r.rounded.true_negative},
        {"false_negative", r.rounded.false_negative}}},
  };
  return doc.dump(2) + "\n";
}

EvalReport report_from_json(const std::string &text) {
  using nlohmann::json;
  try {
    const auto doc = json::parse(text);
    EvalReport r;
    r.folds = doc.at("folds").get<std::size_t>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.rows = doc.at("rows").get<std::size_t>();
    for (const auto &f : doc.at("per_fold"))
      r.per_fold.push_back({f.at("rmse").get<double>(), f.at("mae").get<double>(),
                            f.at("train_rows").get<std::size_t>(),
                            f.at("test_rows").get<std::size_t>()});
    r.aggregate_rmse = doc.at("aggregate_rmse").get<double>();
    r.aggregate_mae = doc.at("aggregate_mae").get<double>();
    r.pooled_rmse = doc.at("pooled_rmse").get<double>();
    r.pooled_mae = doc.at("pooled_mae").get<double>();
    r.constant_baseline_rmse = doc.at("constant_baseline_rmse").get<double>();
    for (const auto &p : doc.at("roc_points"))
      r.roc_points.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    r.auc = doc.at("auc").get<double>();
    const auto &c = doc.at("rounded_confusion");
    r.rounded = {c.at("true_positive").get<std::size_t>(),
                 c.at("false_positive").get<std::size_t>(),
                 c.at("true_negative").get<std::size_t>(),
                 c.at("false_negative").get<std::size_t>()};
    if (r.per_fold.size() != r.folds)
      throw ContractError("per_fold length differs from folds");
    return r;
  } catch (const nlohmann::json::exception &e) {
    throw ContractError(std::string("malformed evaluation report: ") + e.what());
  }
}

std::string roc_table_csv(const EvalReport &report) {
  std::ostringstream os;
  os.precision(17);
  os << "fpr,tpr\n";
  for (const auto &p : report.roc_points)
    os << p.fpr << "," << p.tpr << "\n";
  return os.str();
}

} // namespace reviewq
