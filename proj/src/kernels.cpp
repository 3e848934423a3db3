#include "reviewq/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace reviewq::kernels {

std::size_t Family::cells() const {
  std::size_t n = child_card;
  for (auto c : parent_cards)
    n *= c;
  return n;
}

namespace {

inline std::size_t cell_of(const IndexedRows &rows, const Family &f,
                           std::size_t r) {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < f.parents.size(); ++i)
    idx = idx * f.parent_cards[i] + rows.at(r, f.parents[i]);
  return idx * f.child_card + rows.at(r, f.child);
}

} // namespace

std::vector<std::uint64_t> count_family_serial(const IndexedRows &rows,
                                               const Family &family) {
  std::vector<std::uint64_t> counts(family.cells(), 0);
  for (std::size_t r = 0; r < rows.rows(); ++r)
    ++counts[cell_of(rows, family, r)];
  return counts;
}

std::vector<std::uint64_t> count_family(const IndexedRows &rows,
                                        const Family &family) {
  const std::size_t n_cells = family.cells();
  std::vector<std::uint64_t> counts(n_cells, 0);
  std::uint64_t *out = counts.data();
  const auto n = static_cast<std::int64_t>(rows.rows());
#pragma omp parallel for reduction(+ : out[:n_cells]) schedule(static)
  for (std::int64_t r = 0; r < n; ++r)
    ++out[cell_of(rows, family, static_cast<std::size_t>(r))];
  return counts;
}

namespace {

InferenceResult finish(std::pair<double, double> mass) {
  const auto [merged, total] = mass;
  if (!(total > 0.0))
    return {0.5, true};
  double p = merged / total;
  p = p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
  return {p, false};
}

std::vector<std::vector<int>> encode_all(const IndexedNetwork &net,
                                         std::span<const Evidence> evidence) {
  std::vector<std::vector<int>> encoded;
  encoded.reserve(evidence.size());
  for (const auto &e : evidence)
    encoded.push_back(net.encode(e));
  return encoded;
}

} // namespace

std::vector<InferenceResult>
infer_batch_serial(const TrainedModel &model,
                   std::span<const Evidence> evidence) {
  const IndexedNetwork net(model);
  const auto encoded = encode_all(net, evidence);
  std::vector<InferenceResult> out;
  out.reserve(encoded.size());
  for (const auto &fixed : encoded)
    out.push_back(finish(net.posterior_mass(fixed)));
  return out;
}

std::vector<InferenceResult> infer_batch(const TrainedModel &model,
                                         std::span<const Evidence> evidence) {
  const IndexedNetwork net(model);
  const auto encoded = encode_all(net, evidence);
  std::vector<InferenceResult> out(encoded.size());
  const auto n = static_cast<std::int64_t>(encoded.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::int64_t i = 0; i < n; ++i)
    out[static_cast<std::size_t>(i)] =
        finish(net.posterior_mass(encoded[static_cast<std::size_t>(i)]));
  return out;
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

} // namespace reviewq::kernels
