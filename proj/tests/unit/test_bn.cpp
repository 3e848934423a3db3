#include "oracles.hpp"

#include "reviewq/errors.hpp"

#include <doctest.h>

using namespace reviewq;

namespace {

const std::string kStatus{var::kChangeStatus};

NetworkStructure status_only() {
  return {{{kStatus, {"abandoned", "merged"}}}, {}};
}

NetworkStructure size_status() {
  NetworkStructure s;
  s.variables = {{"size", {"Small", "Medium", "Large"}}, {kStatus, {"abandoned", "merged"}}};
  s.edges = {{"size", kStatus}};
  return s;
}

Assignment row(std::string size, std::string status) {
  return {{"size", std::move(size)}, {kStatus, std::move(status)}};
}

// x (2 states) -> size (3 states) -> change_status, with hand-picked CPTs.
TrainedModel hand_model() {
  TrainedModel m;
  m.structure.variables = {{"x", {"a", "b"}},
                           {"size", {"Small", "Medium", "Large"}},
                           {kStatus, {"abandoned", "merged"}}};
  m.structure.edges = {{"x", "size"}, {"size", kStatus}};
  m.cpts = {
      {"x", {}, {}, 2, {0.4, 0.6}},
      {"size", {"x"}, {2}, 3, {0.5, 0.3, 0.2, 0.1, 0.3, 0.6}},
      {kStatus, {"size"}, {3}, 2, {0.2, 0.8, 0.5, 0.5, 0.7, 0.3}},
  };
  m.validate();
  return m;
}

} // namespace

TEST_CASE("learn_cpts: smoothing with no data is uniform") {
  const auto m = learn_cpts({}, status_only(), 1.0);
  CHECK(m.cpt_for(kStatus).probabilities == std::vector<double>{0.5, 0.5});
}

TEST_CASE("learn_cpts: eight merged rows give 9/10") {
  std::vector<Assignment> rows(8, Assignment{{kStatus, "merged"}});
  const auto m = learn_cpts(rows, status_only(), 1.0);
  CHECK(m.cpt_for(kStatus).probabilities[1] == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(m.training_rows == 8);
}

TEST_CASE("learn_cpts: 20-row hand tally") {
  // Small: 5 merged, 2 abandoned. Medium: 3 merged, 3 abandoned.
  // Large: 1 merged, 6 abandoned.
  std::vector<Assignment> rows;
  for (int i = 0; i < 5; ++i) rows.push_back(row("Small", "merged"));
  for (int i = 0; i < 2; ++i) rows.push_back(row("Small", "abandoned"));
  for (int i = 0; i < 3; ++i) rows.push_back(row("Medium", "merged"));
  for (int i = 0; i < 3; ++i) rows.push_back(row("Medium", "abandoned"));
  rows.push_back(row("Large", "merged"));
  for (int i = 0; i < 6; ++i) rows.push_back(row("Large", "abandoned"));
  REQUIRE(rows.size() == 20);

  const auto m = learn_cpts(rows, size_status(), 1.0);
  const auto &size = m.cpt_for("size").probabilities;
  CHECK(size[0] == doctest::Approx(8.0 / 23));
  CHECK(size[1] == doctest::Approx(7.0 / 23));
  CHECK(size[2] == doctest::Approx(8.0 / 23));
  const auto &st = m.cpt_for(kStatus).probabilities;
  CHECK(st[0] == doctest::Approx(3.0 / 9)); // Small, abandoned
  CHECK(st[1] == doctest::Approx(6.0 / 9));
  CHECK(st[2] == doctest::Approx(4.0 / 8)); // Medium
  CHECK(st[3] == doctest::Approx(4.0 / 8));
  CHECK(st[4] == doctest::Approx(7.0 / 9)); // Large
  CHECK(st[5] == doctest::Approx(2.0 / 9));
}

TEST_CASE("learn_cpts: rejects unknown states and missing variables") {
  CHECK_THROWS_AS(learn_cpts(std::vector<Assignment>{row("Huge", "merged")}, size_status(), 1.0),
                  InputError);
  CHECK_THROWS_AS(learn_cpts(std::vector<Assignment>{{{"size", "Small"}}}, size_status(), 1.0),
                  InputError);
  CHECK_THROWS_AS(learn_cpts({}, size_status(), 0.0), ContractError);
}

TEST_CASE("learn_cpts: rows sum to one on random structures and data") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto truth = oracle::random_model(rng);
    const auto rows = sample_assignments(truth, uniform_index(rng, 200), rng());
    const double alpha = 0.1 + 3.0 * unit_double(rng);
    const auto m = learn_cpts(rows, truth.structure, alpha);
    for (const auto &cpt : m.cpts)
      for (std::size_t r = 0; r < cpt.row_count(); ++r) {
        double sum = 0.0;
        for (double p : cpt.row(r))
          sum += p;
        CHECK(std::fabs(sum - 1.0) <= 1e-9);
      }
  }
}

TEST_CASE("learn_cpts: huge alpha is close to uniform") {
  Rng rng(5);
  const auto truth = oracle::random_model(rng);
  const auto rows = sample_assignments(truth, 500, 3);
  const auto m = learn_cpts(rows, truth.structure, 1e6);
  for (const auto &cpt : m.cpts)
    for (double p : cpt.probabilities)
      CHECK(p == doctest::Approx(1.0 / cpt.state_count).epsilon(1e-3));
}

TEST_CASE("learn_cpts: recovers a planted model") {
  const auto truth = oracle::recovery_planted_model();
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto rows = sample_assignments(truth, 5000, seed);
    const auto m = learn_cpts(rows, truth.structure, 1.0);
    for (std::size_t v = 0; v < m.cpts.size(); ++v)
      for (std::size_t i = 0; i < m.cpts[v].probabilities.size(); ++i)
        CHECK(std::fabs(m.cpts[v].probabilities[i] - truth.cpts[v].probabilities[i]) <= 0.05);
  }
}

TEST_CASE("joint_probability") {
  SUBCASE("uniform binary pair") {
    TrainedModel m;
    m.structure.variables = {{"x", {"a", "b"}}, {kStatus, {"abandoned", "merged"}}};
    m.cpts = {{"x", {}, {}, 2, {0.5, 0.5}}, {kStatus, {}, {}, 2, {0.5, 0.5}}};
    CHECK(joint_probability(m, {{"x", "b"}, {kStatus, "abandoned"}}) == 0.25);
  }
  SUBCASE("single variable") {
    TrainedModel m;
    m.structure = status_only();
    m.cpts = {{kStatus, {}, {}, 2, {0.1, 0.9}}};
    CHECK(joint_probability(m, {{kStatus, "merged"}}) == doctest::Approx(0.9));
  }
  SUBCASE("hand multiplication") {
    // P(x=b) * P(size=Large | b) * P(merged | Large) = 0.6 * 0.6 * 0.3
    CHECK(joint_probability(hand_model(), {{"x", "b"}, {"size", "Large"}, {kStatus, "merged"}}) ==
          doctest::Approx(0.108));
  }
  SUBCASE("incomplete assignment") {
    CHECK_THROWS_AS(joint_probability(hand_model(), {{"x", "b"}}), InputError);
  }
}

TEST_CASE("infer_merge_probability") {
  SUBCASE("uniform CPTs, no evidence") {
    TrainedModel m;
    m.structure = size_status();
    m.cpts = {{"size", {}, {}, 3, {1.0 / 3, 1.0 / 3, 1.0 / 3}},
              {kStatus, {"size"}, {3}, 2, {0.5, 0.5, 0.5, 0.5, 0.5, 0.5}}};
    CHECK(infer_merge_probability(m, {}) == doctest::Approx(0.5));
  }
  SUBCASE("full evidence on parents is a table lookup") {
    CHECK(infer_merge_probability(hand_model(), {{{"x", "a"}, {"size", "Medium"}}}) ==
          doctest::Approx(0.5));
  }
  SUBCASE("partial evidence size=Large matches enumeration") {
    const auto m = hand_model();
    const double p = infer_merge_probability(m, {{{"size", "Large"}}});
    CHECK(std::fabs(p - oracle::merge_probability(m, {{"size", "Large"}})) <= 1e-12);
    CHECK(p == doctest::Approx(0.3));
  }
  SUBCASE("evidence on x only") {
    // P(merged | x=a) = 0.5*0.8 + 0.3*0.5 + 0.2*0.3
    CHECK(infer_merge_probability(hand_model(), {{{"x", "a"}}}) == doctest::Approx(0.61));
  }
  SUBCASE("impossible evidence") {
    auto m = hand_model();
    m.cpts[1].probabilities = {1.0, 0.0, 0.0, 0.1, 0.3, 0.6};
    CHECK_THROWS_AS(infer_merge_probability(m, {{{"x", "a"}, {"size", "Large"}}}),
                    DegenerateEvidenceError);
  }
  SUBCASE("unknown variable or observed status") {
    CHECK_THROWS_AS(infer_merge_probability(hand_model(), {{{"nope", "a"}}}), InputError);
    CHECK_THROWS_AS(infer_merge_probability(hand_model(), {{{kStatus, "merged"}}}), InputError);
  }
}

TEST_CASE("infer_merge_probability matches enumeration on random networks") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_model(rng);
    const auto ev = oracle::random_evidence(m, rng);
    CHECK(std::fabs(infer_merge_probability(m, {ev}) - oracle::merge_probability(m, ev)) <= 1e-9);
  }
}

TEST_CASE("inference does not depend on the order evidence was built in") {
  const auto m = hand_model();
  Evidence a;
  a.assignments.emplace("size", "Small");
  a.assignments.emplace("x", "b");
  Evidence b;
  b.assignments.emplace("x", "b");
  b.assignments.emplace("size", "Small");
  CHECK(infer_merge_probability(m, a) == infer_merge_probability(m, b));
}

TEST_CASE("structure validation") {
  auto s = NetworkStructure::default_structure();
  CHECK_NOTHROW(s.validate());
  CHECK(s.parents_of(var::kChangeStatus).size() == 5);

  SUBCASE("cycle") {
    auto c = size_status();
    c.variables.insert(c.variables.begin(), {"y", {"a", "b"}});
    c.edges.emplace_back("y", "size");
    c.edges.emplace_back("size", "y");
    CHECK_THROWS_AS(c.validate(), StructureError);
  }
  SUBCASE("status with a child") {
    auto c = size_status();
    c.variables.push_back({"z", {"a", "b"}});
    c.edges.emplace_back(kStatus, "z");
    CHECK_THROWS_AS(c.validate(), StructureError);
  }
  SUBCASE("missing status") {
    NetworkStructure c{{{"x", {"a", "b"}}}, {}};
    CHECK_THROWS_AS(c.validate(), StructureError);
  }
  SUBCASE("single-state variable") {
    auto c = size_status();
    c.variables.push_back({"z", {"only"}});
    CHECK_THROWS_AS(c.validate(), StructureError);
  }
  SUBCASE("unknown edge endpoint") {
    auto c = size_status();
    c.edges.emplace_back("ghost", kStatus);
    CHECK_THROWS_AS(c.validate(), StructureError);
  }
}
