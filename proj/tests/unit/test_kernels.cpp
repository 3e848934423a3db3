#include "oracles.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/kernels.hpp"

#include <doctest.h>

using namespace reviewq;

TEST_CASE("count_family: parallel equals serial reference") {
  Rng rng(9);
  for (std::size_t n : {0u, 1u, 7u, 1000u, 20000u}) {
    kernels::IndexedRows rows;
    rows.n_vars = 3;
    for (std::size_t i = 0; i < n; ++i) {
      rows.cells.push_back(static_cast<std::uint16_t>(uniform_index(rng, 3)));
      rows.cells.push_back(static_cast<std::uint16_t>(uniform_index(rng, 4)));
      rows.cells.push_back(static_cast<std::uint16_t>(uniform_index(rng, 2)));
    }
    const kernels::Family fam{2, 2, {0, 1}, {3, 4}};
    const auto par = kernels::count_family(rows, fam);
    const auto ser = kernels::count_family_serial(rows, fam);
    CHECK(par == ser);
    std::uint64_t total = 0;
    for (auto c : par)
      total += c;
    CHECK(total == n);
  }
}

TEST_CASE("count_family: hand counts") {
  kernels::IndexedRows rows{2, {0, 1, 0, 1, 1, 0, 2, 1}};
  const kernels::Family fam{1, 2, {0}, {3}};
  CHECK(kernels::count_family(rows, fam) == std::vector<std::uint64_t>{0, 2, 1, 0, 0, 1});
}

TEST_CASE("infer_batch: parallel equals serial and single inference") {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto m = oracle::random_model(rng);
    std::vector<Evidence> ev;
    for (int i = 0; i < 64; ++i)
      ev.push_back({oracle::random_evidence(m, rng)});
    const auto par = kernels::infer_batch(m, ev);
    const auto ser = kernels::infer_batch_serial(m, ev);
    REQUIRE(par.size() == ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i) {
      CHECK(par[i].probability == ser[i].probability);
      CHECK(par[i].probability == infer_merge_probability(m, ev[i]));
      CHECK_FALSE(par[i].degenerate);
    }
  }
}

TEST_CASE("infer_batch: impossible evidence falls back to 0.5") {
  TrainedModel m;
  m.structure.variables = {{"x", {"a", "b"}}, {std::string(var::kChangeStatus), {"abandoned", "merged"}}};
  m.structure.edges = {{"x", std::string(var::kChangeStatus)}};
  m.cpts = {{"x", {}, {}, 2, {1.0, 0.0}},
            {std::string(var::kChangeStatus), {"x"}, {2}, 2, {0.3, 0.7, 0.5, 0.5}}};
  const std::vector<Evidence> ev{{{{"x", "b"}}}, {{{"x", "a"}}}};
  const auto r = kernels::infer_batch(m, ev);
  CHECK(r[0].degenerate);
  CHECK(r[0].probability == 0.5);
  CHECK_FALSE(r[1].degenerate);
  CHECK(r[1].probability == doctest::Approx(0.7));
}

TEST_CASE("infer_batch: invalid evidence is rejected up front") {
  const auto m = oracle::recovery_planted_model();
  const std::vector<Evidence> ev{{{{"age", "Young"}}}, {{{"age", "Ancient"}}}};
  CHECK_THROWS_AS(kernels::infer_batch(m, ev), InputError);
}
