#include "reviewq/synthgen.hpp"

#include "reviewq/errors.hpp"
#include "reviewq/gerrit.hpp"
#include "reviewq/model_io.hpp"

#include <cmath>
#include <cstdio>

namespace reviewq {

using nlohmann::json;

BinThresholds default_synthetic_bins() {
  BinThresholds b;
  b.age_minutes = {60.0, 1440.0};
  b.size_lines = {20.0, 200.0};
  b.revision_count = {2.0, 5.0};
  return b;
}

double representative_age_minutes(AgeCategory c, const CutPair &cuts) {
  switch (c) {
  case AgeCategory::Young:
    return cuts.lower_cut / 2.0;
  case AgeCategory::Medium:
    return (cuts.lower_cut + cuts.upper_cut) / 2.0;
  case AgeCategory::Old:
    return cuts.upper_cut > 0.0 ? cuts.upper_cut * 1.5 : cuts.upper_cut + 1.0;
  }
  return 0.0;
}

std::int64_t representative_size_lines(SizeCategory c, const CutPair &cuts) {
  switch (c) {
  case SizeCategory::Small:
    return static_cast<std::int64_t>(std::floor(std::max(cuts.lower_cut, 0.0) / 2.0));
  case SizeCategory::Medium: {
    auto v = static_cast<std::int64_t>(std::floor((cuts.lower_cut + cuts.upper_cut) / 2.0));
    if (static_cast<double>(v) <= cuts.lower_cut)
      v = static_cast<std::int64_t>(std::floor(cuts.lower_cut)) + 1;
    return v;
  }
  case SizeCategory::Large: {
    auto v = static_cast<std::int64_t>(std::ceil(cuts.upper_cut * 1.5));
    if (static_cast<double>(v) <= cuts.upper_cut)
      v = static_cast<std::int64_t>(std::floor(cuts.upper_cut)) + 1;
    return v;
  }
  }
  return 0;
}

std::int64_t representative_revisions(PatchesCategory c, const CutPair &cuts) {
  switch (c) {
  case PatchesCategory::Low:
    // revision counts start at 1, so the low bin is [1, lower_cut]
    return std::max<std::int64_t>(
        1, static_cast<std::int64_t>(std::floor((1.0 + cuts.lower_cut) / 2.0)));
  case PatchesCategory::Medium: {
    auto v = static_cast<std::int64_t>(std::floor((cuts.lower_cut + cuts.upper_cut) / 2.0));
    if (static_cast<double>(v) <= cuts.lower_cut)
      v = static_cast<std::int64_t>(std::floor(cuts.lower_cut)) + 1;
    return v;
  }
  case PatchesCategory::High: {
    auto v = static_cast<std::int64_t>(std::ceil(cuts.upper_cut * 1.5));
    if (static_cast<double>(v) <= cuts.upper_cut)
      v = static_cast<std::int64_t>(std::floor(cuts.upper_cut)) + 1;
    return v;
  }
  }
  return 1;
}

namespace {

// Age is carried in whole seconds on the wire.
double wire_age_minutes(AgeCategory c, const CutPair &cuts) {
  return std::round(representative_age_minutes(c, cuts) * 60.0) / 60.0;
}

bool has_factor_variables(const NetworkStructure &s) {
  for (auto name : {var::kAge, var::kSize, var::kPatches, var::kTestVerdict,
                    var::kPeerReview, var::kChangeStatus})
    if (!s.find(name))
      return false;
  return true;
}

} // namespace

void PlantedSpec::validate() const {
  model().validate();
  if (!has_factor_variables(structure))
    throw ContractError("planted structure must contain the five review factors "
                        "and change_status");
  double type_total = 0.0;
  for (double p : side.change_type) {
    if (!(p >= 0.0))
      throw ContractError("change_type marginals must be non-negative");
    type_total += p;
  }
  if (!(type_total > 0.0))
    throw ContractError("change_type marginals must not all be zero");
  for (double p : {side.merge_conflict_yes, side.open_fraction})
    if (!(p >= 0.0 && p <= 1.0))
      throw ContractError("side-factor probabilities must lie in [0, 1]");

  for (int c = 0; c < 3; ++c) {
    if (bin_of(wire_age_minutes(static_cast<AgeCategory>(c), bins.age_minutes),
               bins.age_minutes) != c ||
        wire_age_minutes(static_cast<AgeCategory>(c), bins.age_minutes) < 0.0)
      throw ContractError("age bins cannot represent category " + std::to_string(c));
    const auto size = representative_size_lines(static_cast<SizeCategory>(c), bins.size_lines);
    if (bin_of(static_cast<double>(size), bins.size_lines) != c)
      throw ContractError("size bins cannot represent category " + std::to_string(c));
    const auto revs = representative_revisions(static_cast<PatchesCategory>(c),
                                               bins.revision_count);
    if (bin_of(static_cast<double>(revs), bins.revision_count) != c)
      throw ContractError("revision bins cannot represent category " +
                          std::to_string(c));
  }
}

TrainedModel PlantedSpec::model() const {
  TrainedModel m;
  m.structure = structure;
  m.cpts = true_cpts;
  m.bins = bins;
  m.training_rows = 0;
  m.smoothing_alpha = 1.0;
  return m;
}

namespace {

Cpt empty_cpt(const NetworkStructure &s, std::size_t v) {
  Cpt cpt;
  cpt.variable = s.variables[v].name;
  cpt.parent_order = s.parents_of(cpt.variable);
  cpt.state_count = s.variables[v].states.size();
  for (const auto &p : cpt.parent_order)
    cpt.parent_cardinalities.push_back(s.variables[s.index_of(p)].states.size());
  cpt.probabilities.assign(cpt.row_count() * cpt.state_count, 0.0);
  return cpt;
}

void set_root(Cpt &cpt, std::initializer_list<double> probs) {
  std::size_t i = 0;
  for (double p : probs)
    cpt.probabilities[i++] = p;
}

} // namespace

PlantedSpec planted_review_spec(bool informative, std::size_t n_rows,
                                std::uint64_t seed) {
  PlantedSpec spec;
  spec.structure = NetworkStructure::default_structure();
  spec.bins = default_synthetic_bins();
  spec.n_rows = n_rows;
  spec.seed = seed;

  const auto &s = spec.structure;
  for (std::size_t v = 0; v < s.variables.size(); ++v)
    spec.true_cpts.push_back(empty_cpt(s, v));
  set_root(spec.true_cpts[s.index_of(var::kAge)], {0.35, 0.35, 0.30});
  set_root(spec.true_cpts[s.index_of(var::kSize)], {0.40, 0.35, 0.25});
  set_root(spec.true_cpts[s.index_of(var::kPatches)], {0.45, 0.35, 0.20});
  set_root(spec.true_cpts[s.index_of(var::kTestVerdict)], {0.20, 0.10, 0.70});
  set_root(spec.true_cpts[s.index_of(var::kPeerReview)], {0.08, 0.17, 0.30, 0.25, 0.20});

  auto &status = spec.true_cpts[s.index_of(var::kChangeStatus)];
  const auto merged = *s.variables[s.index_of(var::kChangeStatus)].state_index(kMerged);
  // parent order: age, size, num_patches, test_verdict, peer_review
  const double age_effect[] = {1.0, 0.0, -2.0};
  const double size_effect[] = {1.0, 0.0, -1.5};
  const double patch_effect[] = {0.6, 0.0, -1.2};
  const double test_effect[] = {-3.0, -0.5, 2.0};
  const double review_effect[] = {-4.0, -2.0, 0.0, 1.5, 3.5};
  for (std::size_t r = 0; r < status.row_count(); ++r) {
    double p = 0.5;
    if (informative) {
      const auto ps = status.parent_states_of(r);
      const double score = age_effect[ps[0]] + size_effect[ps[1]] +
                           patch_effect[ps[2]] + test_effect[ps[3]] +
                           review_effect[ps[4]];
      p = 1.0 / (1.0 + std::exp(-score));
    }
    status.row(r)[merged] = p;
    status.row(r)[1 - merged] = 1.0 - p;
  }
  return spec;
}

std::vector<Cpt> random_cpts(const NetworkStructure &structure, Rng &rng,
                             double floor) {
  std::vector<Cpt> out;
  for (std::size_t v = 0; v < structure.variables.size(); ++v) {
    auto cpt = empty_cpt(structure, v);
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      auto row = cpt.row(r);
      double total = 0.0;
      for (auto &p : row) {
        p = floor + unit_double(rng);
        total += p;
      }
      for (auto &p : row)
        p /= total;
    }
    out.push_back(std::move(cpt));
  }
  return out;
}

std::vector<Assignment> sample_assignments(const TrainedModel &model,
                                           std::size_t n, std::uint64_t seed) {
  const auto &s = model.structure;
  const auto order = s.topological_order();
  Rng rng(seed);
  std::vector<Assignment> out;
  out.reserve(n);
  std::vector<std::size_t> states(s.variables.size());
  std::vector<std::vector<std::size_t>> parent_idx(s.variables.size());
  for (std::size_t v = 0; v < s.variables.size(); ++v)
    for (const auto &p : model.cpts[v].parent_order)
      parent_idx[v].push_back(s.index_of(p));

  for (std::size_t i = 0; i < n; ++i) {
    for (auto v : order) {
      const auto &cpt = model.cpts[v];
      std::vector<std::size_t> ps;
      for (auto p : parent_idx[v])
        ps.push_back(states[p]);
      states[v] = sample_categorical(cpt.row(cpt.row_index(ps)), rng);
    }
    Assignment a;
    for (std::size_t v = 0; v < s.variables.size(); ++v)
      a.emplace(s.variables[v].name, s.variables[v].states[states[v]]);
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<FactorVector> sample_dataset(const PlantedSpec &spec) {
  spec.validate();
  const auto model = spec.model();
  const auto rows = sample_assignments(model, spec.n_rows, spec.seed);
  // side factors come from an independent stream so that the network sample
  // does not shift when only the side marginals change
  Rng side_rng(spec.seed ^ 0x9E3779B97F4A7C15ULL);

  std::vector<FactorVector> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto &a = rows[i];
    FactorVector fv;
    char id[64];
    std::snprintf(id, sizeof id, "synth~%016llx~%06zu",
                  static_cast<unsigned long long>(spec.seed), i);
    fv.change_id = id;
    fv.age_cat = parse_age_category(a.at(std::string(var::kAge)));
    fv.size_cat = parse_size_category(a.at(std::string(var::kSize)));
    fv.patches_cat = parse_patches_category(a.at(std::string(var::kPatches)));
    fv.test_verdict = parse_verdict(a.at(std::string(var::kTestVerdict)));
    fv.peer_review = parse_verdict(a.at(std::string(var::kPeerReview)));
    fv.outcome = parse_outcome(a.at(std::string(var::kChangeStatus)));
    fv.change_type = static_cast<ChangeType>(sample_categorical(spec.side.change_type, side_rng));
    fv.merge_conflict = unit_double(side_rng) < spec.side.merge_conflict_yes
                            ? MergeConflict::Yes
                            : MergeConflict::No;
    if (unit_double(side_rng) < spec.side.open_fraction)
      fv.outcome.reset();
    out.push_back(std::move(fv));
  }
  return out;
}

namespace {

std::string subject_for(ChangeType t, std::size_t row) {
  switch (t) {
  case ChangeType::TroubleReport:
    return "Fix TR-" + std::to_string(4000 + row) + ": wrong timeout in session pool";
  case ChangeType::Feature:
    return "Add configurable limit " + std::to_string(row) + " to the scheduler";
  case ChangeType::Refactoring:
    return "Refactor session handling in module " + std::to_string(row);
  }
  return {};
}

} // namespace

RawChange realize_change(const FactorVector &fv, std::size_t row,
                         const FixtureOptions &options) {
  RawChange c;
  c.change_id = fv.change_id;
  c.project = options.project;
  const double age = wire_age_minutes(fv.age_cat, options.bins.age_minutes);
  c.created_at = options.snapshot -
                 std::chrono::seconds(static_cast<std::int64_t>(std::llround(age * 60.0)));
  c.updated_at = options.snapshot;
  if (!fv.outcome)
    c.status = ChangeStatus::Open;
  else
    c.status = *fv.outcome == Outcome::Merged ? ChangeStatus::Merged
                                              : ChangeStatus::Abandoned;
  const auto size = representative_size_lines(fv.size_cat, options.bins.size_lines);
  c.deletions = size / 3;
  c.insertions = size - c.deletions;
  c.revision_count = representative_revisions(fv.patches_cat, options.bins.revision_count);
  c.verified_label = fv.test_verdict;
  c.code_review_label = fv.peer_review;
  c.mergeable = fv.merge_conflict == MergeConflict::No;
  c.mergeable_reported = true;
  c.subject = subject_for(fv.change_type, row);
  c.message = c.subject + "\n\nChange-Id: I" + std::to_string(100000 + row) + "\n";
  if (!options.reviewers.empty())
    c.reviewer_ids.push_back(options.reviewers[row % options.reviewers.size()]);
  return c;
}

std::vector<IngestedChange> realize_ingested(const std::vector<FactorVector> &rows,
                                             const FixtureOptions &options) {
  std::vector<IngestedChange> out;
  out.reserve(rows.size());
  const auto rules = default_change_type_rules();
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back(transform_change(realize_change(rows[i], i, options),
                                   options.snapshot, rules));
  return out;
}

std::vector<json> emit_fixture_server_payloads(const std::vector<FactorVector> &rows,
                                               const FixtureOptions &options) {
  std::vector<json> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back(to_change_info(realize_change(rows[i], i, options)));
  return out;
}

namespace {

CutPair cuts_of(const json &j, const CutPair &fallback) {
  if (j.is_null())
    return fallback;
  return {j.at("lower_cut").get<double>(), j.at("upper_cut").get<double>()};
}

} // namespace

SynthRequest parse_synth_spec(const std::string &text) {
  SynthRequest req;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error &e) {
    throw ConfigError(std::string("synth spec is not JSON: ") + e.what());
  }
  try {
    const auto n_rows = doc.value("n_rows", std::size_t{1000});
    const auto seed = doc.value("seed", std::uint64_t{1});
    const auto &planted = doc.contains("planted") ? doc.at("planted") : json("informative");
    if (planted.is_string()) {
      const auto kind = planted.get<std::string>();
      if (kind != "informative" && kind != "uninformative")
        throw ConfigError("planted must be \"informative\", \"uninformative\" or a "
                          "model document");
      req.spec = planted_review_spec(kind == "informative", n_rows, seed);
    } else {
      const auto model = deserialize_model(planted.dump());
      req.spec.structure = model.structure;
      req.spec.true_cpts = model.cpts;
      req.spec.n_rows = n_rows;
      req.spec.seed = seed;
      req.spec.bins = default_synthetic_bins();
    }
    if (doc.contains("bins")) {
      const auto &b = doc.at("bins");
      const auto base = req.spec.bins;
      req.spec.bins.age_minutes = cuts_of(b.value("age_minutes", json()), base.age_minutes);
      req.spec.bins.size_lines = cuts_of(b.value("size_lines", json()), base.size_lines);
      req.spec.bins.revision_count =
          cuts_of(b.value("revision_count", json()), base.revision_count);
    }
    if (doc.contains("side_marginals")) {
      const auto &sm = doc.at("side_marginals");
      if (sm.contains("change_type")) {
        const auto &ct = sm.at("change_type");
        for (int t = 0; t < 3; ++t)
          req.spec.side.change_type[t] =
              ct.value(std::string(to_string(static_cast<ChangeType>(t))),
                       req.spec.side.change_type[t]);
      }
      req.spec.side.merge_conflict_yes =
          sm.value("merge_conflict_yes", req.spec.side.merge_conflict_yes);
      req.spec.side.open_fraction = sm.value("open_fraction", req.spec.side.open_fraction);
    }
    req.fixture.bins = req.spec.bins;
    req.fixture.snapshot = parse_timestamp(doc.value("snapshot", "2024-06-01T00:00:00Z"));
    if (doc.contains("reviewers"))
      req.fixture.reviewers = doc.at("reviewers").get<std::vector<std::string>>();
    req.fixture.project = doc.value("project", req.fixture.project);
  } catch (const json::exception &e) {
    throw ConfigError(std::string("invalid synth spec: ") + e.what());
  }
  req.spec.validate();
  return req;
}

} // namespace reviewq
