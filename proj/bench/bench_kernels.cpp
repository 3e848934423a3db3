// OpenMP kernels against their serial references.
//
//   ./bench_kernels --benchmark_counters_tabular=true
//   OMP_NUM_THREADS=4 ./bench_kernels

#include "reviewq/kernels.hpp"
#include "reviewq/synthgen.hpp"

#include <benchmark/benchmark.h>

using namespace reviewq;

namespace {

kernels::IndexedRows make_rows(std::size_t n) {
  const auto spec = planted_review_spec(true, 1, 1);
  const auto rows = sample_assignments(spec.model(), n, 17);
  const auto &s = spec.structure;
  kernels::IndexedRows out;
  out.n_vars = s.variables.size();
  out.cells.reserve(n * out.n_vars);
  for (const auto &r : rows)
    for (const auto &v : s.variables)
      out.cells.push_back(static_cast<std::uint16_t>(*v.state_index(r.at(v.name))));
  return out;
}

kernels::Family status_family() {
  const auto s = NetworkStructure::default_structure();
  kernels::Family f;
  f.child = s.index_of(var::kChangeStatus);
  f.child_card = 2;
  for (const auto &p : s.parents_of(var::kChangeStatus)) {
    f.parents.push_back(s.index_of(p));
    f.parent_cards.push_back(s.variables[s.index_of(p)].states.size());
  }
  return f;
}

std::vector<Evidence> make_evidence(std::size_t n) {
  const auto spec = planted_review_spec(true, n, 23);
  std::vector<Evidence> out;
  for (const auto &fv : sample_dataset(spec)) {
    auto ev = to_evidence(fv);
    if (out.size() % 3 == 0)
      ev.assignments.erase(std::string(var::kAge)); // some queries marginalize
    out.push_back(std::move(ev));
  }
  return out;
}

template <bool Parallel> void BM_CountFamily(benchmark::State &state) {
  const auto rows = make_rows(static_cast<std::size_t>(state.range(0)));
  const auto fam = status_family();
  for (auto _ : state) {
    auto counts = Parallel ? kernels::count_family(rows, fam) : kernels::count_family_serial(rows, fam);
    benchmark::DoNotOptimize(counts.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

template <bool Parallel> void BM_InferBatch(benchmark::State &state) {
  const auto model = planted_review_spec(true, 1, 1).model();
  const auto ev = make_evidence(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    auto r = Parallel ? kernels::infer_batch(model, ev) : kernels::infer_batch_serial(model, ev);
    benchmark::DoNotOptimize(r.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
  state.counters["threads"] = Parallel ? kernels::max_threads() : 1;
}

} // namespace

BENCHMARK(BM_CountFamily<false>)->Name("count_family/serial")->Arg(10000)->Arg(200000);
BENCHMARK(BM_CountFamily<true>)->Name("count_family/openmp")->Arg(10000)->Arg(200000);
BENCHMARK(BM_InferBatch<false>)->Name("infer_batch/serial")->Arg(100)->Arg(5000);
BENCHMARK(BM_InferBatch<true>)->Name("infer_batch/openmp")->Arg(100)->Arg(5000);

BENCHMARK_MAIN();
