#pragma once

// Data-parallel kernels. Each has an OpenMP version used in production and a
// serial reference kept for tests and the benchmark.

#include "reviewq/bn.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace reviewq::kernels {

/// Row-major table of state indices, one column per network variable.
struct IndexedRows {
  std::size_t n_vars = 0;
  std::vector<std::uint16_t> cells;

  std::size_t rows() const { return n_vars == 0 ? 0 : cells.size() / n_vars; }
  std::uint16_t at(std::size_t row, std::size_t var) const {
    return cells[row * n_vars + var];
  }
};

/// Description of one CPT family: child column, parent columns (most
/// significant first) and cardinalities.
struct Family {
  std::size_t child = 0;
  std::size_t child_card = 0;
  std::vector<std::size_t> parents;
  std::vector<std::size_t> parent_cards;

  std::size_t cells() const;
};

/// counts[row * child_card + state] over all data rows.
std::vector<std::uint64_t> count_family(const IndexedRows &rows,
                                        const Family &family);
std::vector<std::uint64_t> count_family_serial(const IndexedRows &rows,
                                               const Family &family);

struct InferenceResult {
  double probability = 0.5;
  bool degenerate = false; ///< evidence impossible; probability is the 0.5 fallback
};

/// Merge probability for many evidence sets at once. Evidence is validated
/// up front (InputError), degenerate evidence yields the 0.5 fallback.
std::vector<InferenceResult> infer_batch(const TrainedModel &model,
                                         std::span<const Evidence> evidence);
std::vector<InferenceResult>
infer_batch_serial(const TrainedModel &model,
                   std::span<const Evidence> evidence);

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

} // namespace reviewq::kernels
