#include "reviewq/model_io.hpp"

#include "reviewq/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace reviewq {

using nlohmann::json;

namespace {

json cuts_to_json(const CutPair &c) {
  return {{"lower_cut", c.lower_cut}, {"upper_cut", c.upper_cut}};
}

json bins_to_json(const BinThresholds &b) {
  return {{"method", b.method},
          {"age_minutes", cuts_to_json(b.age_minutes)},
          {"size_lines", cuts_to_json(b.size_lines)},
          {"revision_count", cuts_to_json(b.revision_count)}};
}

[[noreturn]] void fail(const std::string &where, const std::string &what) {
  throw LoadError(where + ": " + what);
}

const json &member(const json &obj, const char *key, const std::string &where) {
  if (!obj.is_object())
    fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end())
    fail(where, std::string("missing field '") + key + "'");
  return *it;
}

std::string as_string(const json &j, const std::string &where) {
  if (!j.is_string())
    fail(where, "expected a string");
  return j.get<std::string>();
}

double as_number(const json &j, const std::string &where) {
  if (!j.is_number())
    fail(where, "expected a number");
  return j.get<double>();
}

const json &as_array(const json &j, const std::string &where) {
  if (!j.is_array())
    fail(where, "expected an array");
  return j;
}

std::vector<std::string> string_list(const json &j, const std::string &where) {
  std::vector<std::string> out;
  const auto &arr = as_array(j, where);
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(as_string(arr[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

CutPair cuts_from_json(const json &j, const std::string &where) {
  CutPair c;
  c.lower_cut = as_number(member(j, "lower_cut", where), where + ".lower_cut");
  c.upper_cut = as_number(member(j, "upper_cut", where), where + ".upper_cut");
  if (c.lower_cut > c.upper_cut)
    fail(where, "lower_cut exceeds upper_cut");
  return c;
}

} // namespace

std::string serialize_model(const TrainedModel &model) {
  json vars = json::array();
  for (const auto &v : model.structure.variables)
    vars.push_back({{"name", v.name}, {"states", v.states}});
  json edges = json::array();
  for (const auto &[p, c] : model.structure.edges)
    edges.push_back({{"parent", p}, {"child", c}});

  json cpts = json::array();
  for (std::size_t v = 0; v < model.cpts.size(); ++v) {
    const auto &cpt = model.cpts[v];
    std::vector<const CategoricalVariable *> parent_defs;
    for (const auto &p : cpt.parent_order)
      parent_defs.push_back(
          &model.structure.variables[model.structure.index_of(p)]);
    json rows = json::array();
    for (std::size_t r = 0; r < cpt.row_count(); ++r) {
      json labels = json::array();
      const auto ps = cpt.parent_states_of(r);
      for (std::size_t i = 0; i < ps.size(); ++i)
        labels.push_back(parent_defs[i]->states[ps[i]]);
      const auto row = cpt.row(r);
      rows.push_back({{"parents", labels},
                      {"probabilities", std::vector<double>(row.begin(), row.end())}});
    }
    cpts.push_back({{"variable", cpt.variable},
                    {"parent_order", cpt.parent_order},
                    {"rows", rows}});
  }

  json doc = {{"version", std::string(kModelFormatVersion)},
              {"structure", {{"variables", vars}, {"edges", edges}}},
              {"cpts", cpts},
              {"bins", bins_to_json(model.bins)},
              {"trained_at", format_timestamp(model.trained_at)},
              {"training_rows", model.training_rows},
              {"smoothing_alpha", model.smoothing_alpha}};
  return doc.dump(2) + "\n";
}

TrainedModel deserialize_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error &e) {
    throw LoadError(std::string("malformed model document: ") + e.what());
  }

  const auto version = as_string(member(doc, "version", "$"), "$.version");
  if (version != kModelFormatVersion)
    throw VersionError("unsupported model format version '" + version + "'");

  TrainedModel model;
  const auto &st = member(doc, "structure", "$");
  const auto &vars = as_array(member(st, "variables", "$.structure"),
                              "$.structure.variables");
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const std::string where = "$.structure.variables[" + std::to_string(i) + "]";
    CategoricalVariable v;
    v.name = as_string(member(vars[i], "name", where), where + ".name");
    v.states = string_list(member(vars[i], "states", where), where + ".states");
    model.structure.variables.push_back(std::move(v));
  }
  const auto &edges =
      as_array(member(st, "edges", "$.structure"), "$.structure.edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "$.structure.edges[" + std::to_string(i) + "]";
    model.structure.edges.emplace_back(
        as_string(member(edges[i], "parent", where), where + ".parent"),
        as_string(member(edges[i], "child", where), where + ".child"));
  }
  try {
    model.structure.validate();
  } catch (const StructureError &e) {
    fail("$.structure", e.what());
  }

  const auto &cpts = as_array(member(doc, "cpts", "$"), "$.cpts");
  if (cpts.size() != model.structure.variables.size())
    fail("$.cpts", "expected " +
                       std::to_string(model.structure.variables.size()) +
                       " tables, found " + std::to_string(cpts.size()));
  for (std::size_t c = 0; c < cpts.size(); ++c) {
    const std::string where = "$.cpts[" + std::to_string(c) + "]";
    Cpt cpt;
    cpt.variable = as_string(member(cpts[c], "variable", where), where + ".variable");
    const auto expected_var = model.structure.variables[c];
    if (cpt.variable != expected_var.name)
      fail(where, "expected table for '" + expected_var.name + "'");
    cpt.parent_order =
        string_list(member(cpts[c], "parent_order", where), where + ".parent_order");
    if (cpt.parent_order != model.structure.parents_of(cpt.variable))
      fail(where + ".parent_order", "does not match the structure's edges");
    cpt.state_count = expected_var.states.size();
    std::vector<const CategoricalVariable *> parent_defs;
    for (const auto &p : cpt.parent_order) {
      parent_defs.push_back(&model.structure.variables[model.structure.index_of(p)]);
      cpt.parent_cardinalities.push_back(parent_defs.back()->states.size());
    }
    cpt.probabilities.assign(cpt.row_count() * cpt.state_count, 0.0);
    std::vector<bool> seen(cpt.row_count(), false);

    const auto &rows = as_array(member(cpts[c], "rows", where), where + ".rows");
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const std::string rwhere = where + ".rows[" + std::to_string(r) + "]";
      const auto labels =
          string_list(member(rows[r], "parents", rwhere), rwhere + ".parents");
      if (labels.size() != parent_defs.size())
        fail(rwhere, "wrong number of parent states");
      std::vector<std::size_t> ps;
      for (std::size_t i = 0; i < labels.size(); ++i) {
        auto s = parent_defs[i]->state_index(labels[i]);
        if (!s)
          fail(rwhere, "unknown state '" + labels[i] + "' for parent '" +
                           parent_defs[i]->name + "'");
        ps.push_back(*s);
      }
      const auto idx = cpt.row_index(ps);
      if (seen[idx])
        fail(rwhere, "duplicate row");
      seen[idx] = true;
      const auto &probs =
          as_array(member(rows[r], "probabilities", rwhere), rwhere + ".probabilities");
      if (probs.size() != cpt.state_count)
        fail(rwhere, "expected " + std::to_string(cpt.state_count) +
                         " probabilities");
      double sum = 0.0;
      for (std::size_t s = 0; s < probs.size(); ++s) {
        const double p = as_number(probs[s], rwhere + ".probabilities[" +
                                                 std::to_string(s) + "]");
        if (!(p >= 0.0 && p <= 1.0))
          fail(rwhere, "probability outside [0,1]");
        cpt.probabilities[idx * cpt.state_count + s] = p;
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowSumTolerance) {
        std::ostringstream os;
        os << "row sums to " << sum << ", expected 1";
        fail(rwhere, os.str());
      }
    }
    for (std::size_t r = 0; r < seen.size(); ++r)
      if (!seen[r])
        fail(where + ".rows", "missing row for parent configuration " +
                                  std::to_string(r));
    model.cpts.push_back(std::move(cpt));
  }

  const auto &bins = member(doc, "bins", "$");
  model.bins.method = as_string(member(bins, "method", "$.bins"), "$.bins.method");
  model.bins.age_minutes =
      cuts_from_json(member(bins, "age_minutes", "$.bins"), "$.bins.age_minutes");
  model.bins.size_lines =
      cuts_from_json(member(bins, "size_lines", "$.bins"), "$.bins.size_lines");
  model.bins.revision_count = cuts_from_json(
      member(bins, "revision_count", "$.bins"), "$.bins.revision_count");

  try {
    model.trained_at =
        parse_timestamp(as_string(member(doc, "trained_at", "$"), "$.trained_at"));
  } catch (const ContractError &e) {
    fail("$.trained_at", e.what());
  }
  const auto &rows = member(doc, "training_rows", "$");
  if (!rows.is_number_unsigned())
    fail("$.training_rows", "expected a non-negative integer");
  model.training_rows = rows.get<std::size_t>();
  model.smoothing_alpha =
      as_number(member(doc, "smoothing_alpha", "$"), "$.smoothing_alpha");
  if (!(model.smoothing_alpha > 0.0))
    fail("$.smoothing_alpha", "must be positive");
  return model;
}

void save_model_file(const TrainedModel &model,
                     const std::filesystem::path &path) {
  const auto text = serialize_model(model);
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw StorageError("cannot write model file " + tmp.string());
    out << text;
    if (!out.flush())
      throw StorageError("cannot write model file " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw StorageError("cannot replace model file " + path.string() + ": " +
                       ec.message());
}

TrainedModel load_model_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw LoadError("cannot open model file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_model(ss.str());
}

} // namespace reviewq
