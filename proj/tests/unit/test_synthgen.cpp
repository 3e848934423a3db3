#include "oracles.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/gerrit.hpp"

#include <doctest.h>

using namespace reviewq;

namespace {

const Timestamp kSnapshot = parse_timestamp("2024-06-01T00:00:00Z");

PlantedSpec uniform_spec(std::size_t n) {
  auto spec = planted_review_spec(false, n, 21);
  for (auto &cpt : spec.true_cpts)
    for (auto &p : cpt.probabilities)
      p = 1.0 / cpt.state_count;
  spec.side.change_type = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  return spec;
}

} // namespace

TEST_CASE("zero rows") {
  CHECK(sample_dataset(planted_review_spec(true, 0, 1)).empty());
}

TEST_CASE("all merged when P(merged)=1") {
  auto spec = planted_review_spec(false, 300, 2);
  auto &status = spec.true_cpts[spec.structure.index_of(var::kChangeStatus)];
  for (std::size_t r = 0; r < status.row_count(); ++r) {
    status.row(r)[0] = 0.0;
    status.row(r)[1] = 1.0;
  }
  for (const auto &fv : sample_dataset(spec))
    CHECK(fv.outcome == Outcome::Merged);
}

TEST_CASE("uniform CPTs give uniform marginals") {
  const auto rows = sample_dataset(uniform_spec(5000));
  int age[3] = {}, size[3] = {}, patches[3] = {}, test[3] = {}, review[5] = {}, type[3] = {};
  for (const auto &fv : rows) {
    ++age[static_cast<int>(fv.age_cat)];
    ++size[static_cast<int>(fv.size_cat)];
    ++patches[static_cast<int>(fv.patches_cat)];
    ++test[fv.test_verdict + 1];
    ++review[fv.peer_review + 2];
    ++type[static_cast<int>(fv.change_type)];
  }
  auto near = [](int count, double p) { return std::fabs(count / 5000.0 - p) <= 0.03; };
  for (int i = 0; i < 3; ++i) {
    CHECK(near(age[i], 1.0 / 3));
    CHECK(near(size[i], 1.0 / 3));
    CHECK(near(patches[i], 1.0 / 3));
    CHECK(near(test[i], 1.0 / 3));
    CHECK(near(type[i], 1.0 / 3));
  }
  for (int i = 0; i < 5; ++i)
    CHECK(near(review[i], 0.2));
}

TEST_CASE("seeded determinism") {
  const auto spec = planted_review_spec(true, 200, 5);
  CHECK(sample_dataset(spec) == sample_dataset(spec));
  FixtureOptions opts;
  opts.snapshot = kSnapshot;
  const auto rows = sample_dataset(spec);
  CHECK(emit_fixture_server_payloads(rows, opts) == emit_fixture_server_payloads(rows, opts));
}

TEST_CASE("fixture round trip reproduces factor vectors") {
  FixtureOptions opts;
  opts.snapshot = kSnapshot;
  auto spec = planted_review_spec(true, 100, 6);
  spec.side.open_fraction = 0.2;
  const auto rows = sample_dataset(spec);
  const auto payloads = emit_fixture_server_payloads(rows, opts);
  REQUIRE(payloads.size() == rows.size());
  const auto rules = default_change_type_rules();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto raw = parse_change_info(payloads[i]);
    const auto back = discretize(transform_change(raw, kSnapshot, rules), opts.bins);
    CHECK(back == rows[i]);
  }
}

TEST_CASE("payload field mapping") {
  FixtureOptions opts;
  opts.snapshot = kSnapshot;
  FactorVector fv;
  fv.change_id = "x";
  fv.age_cat = AgeCategory::Old;
  fv.test_verdict = -1;
  fv.outcome = Outcome::Merged;
  const auto j = emit_fixture_server_payloads({fv}, opts)[0];
  CHECK(j["labels"]["Verified"]["all"][0]["value"] == -1);
  const auto raw = parse_change_info(j);
  CHECK(minutes_between(raw.created_at, kSnapshot) > opts.bins.age_minutes.upper_cut);
}

TEST_CASE("spec validation") {
  auto spec = planted_review_spec(true, 10, 1);
  spec.side.merge_conflict_yes = 1.5;
  CHECK_THROWS(spec.validate());
  auto spec2 = planted_review_spec(true, 10, 1);
  spec2.bins.size_lines = {0, 0};
  CHECK_THROWS(spec2.validate());
}

TEST_CASE("synth spec documents") {
  const auto req = parse_synth_spec(R"({"n_rows": 12, "seed": 3, "planted": "uninformative",
      "snapshot": "2024-02-01T00:00:00Z", "reviewers": ["a"]})");
  CHECK(req.spec.n_rows == 12);
  CHECK(req.spec.seed == 3);
  CHECK(req.fixture.reviewers == std::vector<std::string>{"a"});
  CHECK(req.fixture.snapshot == parse_timestamp("2024-02-01T00:00:00Z"));
  CHECK_THROWS(parse_synth_spec(R"({"planted": "maybe"})"));
  CHECK_THROWS(parse_synth_spec("[1,2"));
}
