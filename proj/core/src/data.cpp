#include "mixl/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "mixl/errors.hpp"
#include "mixl/io.hpp"

namespace mixl {

std::size_t ChoiceDataset::attribute_index(const std::string& name) const {
  auto it = std::find(attribute_names.begin(), attribute_names.end(), name);
  if (it == attribute_names.end()) throw Error(ErrorCode::UnknownAttribute, "no attribute named '" + name + "'");
  return static_cast<std::size_t>(it - attribute_names.begin());
}

std::size_t ChoiceDataset::n_tasks() const {
  std::size_t n = 0;
  for (const auto& p : persons) n += p.tasks.size();
  return n;
}

void validate(const ChoiceDataset& dataset) {
  if (dataset.attribute_levels.size() != dataset.attribute_names.size()) {
    throw Error(ErrorCode::InvalidSpec, "attribute_levels must align with attribute_names");
  }
  std::set<std::string> ids;
  for (const auto& person : dataset.persons) {
    if (!ids.insert(person.id).second) throw Error(ErrorCode::DuplicatePerson, "person '" + person.id + "' repeated");
    if (dataset.mode == DatasetMode::RpPair) {
      for (const char* key : {kCigIndicator, kEcigIndicator}) {
        auto it = person.covariates.find(key);
        if (it == person.covariates.end()) {
          throw Error(ErrorCode::MissingIndicator, "person '" + person.id + "' lacks indicator " + key);
        }
        if (it->second != 0.0 && it->second != 1.0) {
          throw Error(ErrorCode::MissingIndicator, "person '" + person.id + "' indicator " + key + " is not 0/1");
        }
      }
      for (const auto& name : dataset.covariate_names) {
        auto it = person.covariates.find(name);
        if (it == person.covariates.end() || !std::isfinite(it->second)) {
          throw Error(ErrorCode::MissingAttributeValue, "person '" + person.id + "' lacks covariate " + name);
        }
      }
      continue;
    }
    if (person.tasks.empty()) throw Error(ErrorCode::TaskWithoutChoice, "person '" + person.id + "' has no tasks");
    for (const auto& task : person.tasks) {
      if (task.alternatives.size() < 2) {
        throw Error(ErrorCode::TooFewAlternatives, "person '" + person.id + "' has a task with fewer than 2 alternatives");
      }
      if (task.chosen >= task.alternatives.size()) {
        throw Error(ErrorCode::TaskWithoutChoice, "person '" + person.id + "' has an out-of-range chosen index");
      }
      for (const auto& alt : task.alternatives) {
        if (alt.x.size() != dataset.attribute_names.size()) {
          throw Error(ErrorCode::MissingAttributeValue, "attribute vector size mismatch for person '" + person.id + "'");
        }
        for (double v : alt.x) {
          if (!std::isfinite(v)) throw Error(ErrorCode::NonNumericAttribute, "non-finite attribute for person '" + person.id + "'");
        }
      }
    }
  }
}

namespace {

std::size_t require_column(const io::CsvTable& table, const std::string& name) {
  std::size_t idx = table.column(name);
  if (idx == std::string::npos) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
  return idx;
}

double parse_flag(const std::string& cell, const std::string& what, std::size_t row) {
  double v = 0.0;
  if (!io::parse_double(cell, v) || (v != 0.0 && v != 1.0)) {
    throw Error(ErrorCode::NonNumericAttribute, what + " must be 0/1 (row " + std::to_string(row + 2) + ")");
  }
  return v;
}

template <class T>
std::size_t intern(std::vector<T>& values, const T& value) {
  auto it = std::find(values.begin(), values.end(), value);
  if (it != values.end()) return static_cast<std::size_t>(it - values.begin());
  values.push_back(value);
  return values.size() - 1;
}

}  // namespace

ChoiceDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t c_person = require_column(table, schema.person);
  const std::size_t c_task = require_column(table, schema.task);
  const std::size_t c_alt = require_column(table, schema.alternative);
  const std::size_t c_chosen = require_column(table, schema.chosen);
  std::vector<std::size_t> c_attr;
  for (const auto& a : schema.attributes) c_attr.push_back(require_column(table, a));
  for (const auto& c : schema.categorical) {
    if (std::find(schema.attributes.begin(), schema.attributes.end(), c) == schema.attributes.end()) {
      throw Error(ErrorCode::UnknownAttribute, "categorical column '" + c + "' is not listed among attributes");
    }
  }

  ChoiceDataset ds;
  ds.mode = DatasetMode::StatedPanel;
  ds.attribute_names = schema.attributes;
  ds.attribute_levels.assign(schema.attributes.size(), {});
  std::vector<bool> categorical(schema.attributes.size(), false);
  for (std::size_t a = 0; a < schema.attributes.size(); ++a) {
    categorical[a] = std::find(schema.categorical.begin(), schema.categorical.end(), schema.attributes[a]) !=
                     schema.categorical.end();
  }

  std::unordered_map<std::string, std::size_t> person_index;
  // Per person: task id -> task position; chosen counts tracked alongside.
  std::vector<std::unordered_map<std::string, std::size_t>> task_index;
  std::vector<std::vector<std::size_t>> chosen_count;

  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string& pid = row[c_person];
    auto [pit, inserted] = person_index.try_emplace(pid, ds.persons.size());
    if (inserted) {
      ds.persons.push_back(PanelPerson{pid, {}, {}});
      task_index.emplace_back();
      chosen_count.emplace_back();
    }
    const std::size_t p = pit->second;
    auto [tit, tnew] = task_index[p].try_emplace(row[c_task], ds.persons[p].tasks.size());
    if (tnew) {
      ds.persons[p].tasks.emplace_back();
      chosen_count[p].push_back(0);
    }
    const std::size_t t = tit->second;
    Task& task = ds.persons[p].tasks[t];

    Alternative alt;
    alt.label = row[c_alt];
    intern(ds.alternative_labels, alt.label);
    alt.x.resize(c_attr.size());
    for (std::size_t a = 0; a < c_attr.size(); ++a) {
      const std::string& cell = row[c_attr[a]];
      if (cell.empty()) {
        throw Error(ErrorCode::MissingAttributeValue,
                    "empty '" + schema.attributes[a] + "' cell at row " + std::to_string(r + 2));
      }
      if (categorical[a]) {
        alt.x[a] = static_cast<double>(intern(ds.attribute_levels[a], cell));
      } else if (!io::parse_double(cell, alt.x[a]) || !std::isfinite(alt.x[a])) {
        throw Error(ErrorCode::NonNumericAttribute,
                    "'" + schema.attributes[a] + "' value '" + cell + "' at row " + std::to_string(r + 2));
      }
    }
    if (parse_flag(row[c_chosen], schema.chosen, r) == 1.0) {
      task.chosen = task.alternatives.size();
      ++chosen_count[p][t];
    }
    task.alternatives.push_back(std::move(alt));
  }

  for (std::size_t p = 0; p < ds.persons.size(); ++p) {
    for (std::size_t t = 0; t < ds.persons[p].tasks.size(); ++t) {
      if (chosen_count[p][t] == 0) {
        throw Error(ErrorCode::TaskWithoutChoice, "person '" + ds.persons[p].id + "' task " + std::to_string(t + 1));
      }
      if (chosen_count[p][t] > 1) {
        throw Error(ErrorCode::TaskWithMultipleChoices,
                    "person '" + ds.persons[p].id + "' task " + std::to_string(t + 1));
      }
    }
  }
  validate(ds);
  return ds;
}

std::string to_long_csv(const ChoiceDataset& dataset, const LongCsvSchema& schema) {
  std::string out;
  out += io::csv_field(schema.person) + "," + io::csv_field(schema.task) + "," + io::csv_field(schema.alternative) +
         "," + io::csv_field(schema.chosen);
  for (const auto& a : dataset.attribute_names) out += "," + io::csv_field(a);
  out += "\n";
  for (const auto& person : dataset.persons) {
    for (std::size_t t = 0; t < person.tasks.size(); ++t) {
      const Task& task = person.tasks[t];
      for (std::size_t i = 0; i < task.alternatives.size(); ++i) {
        const Alternative& alt = task.alternatives[i];
        out += io::csv_field(person.id) + "," + std::to_string(t + 1) + "," + io::csv_field(alt.label) + "," +
               (i == task.chosen ? "1" : "0");
        for (std::size_t a = 0; a < alt.x.size(); ++a) {
          out += ",";
          if (dataset.is_categorical(a)) {
            out += io::csv_field(dataset.attribute_levels[a].at(static_cast<std::size_t>(alt.x[a])));
          } else {
            out += io::format_double(alt.x[a]);
          }
        }
        out += "\n";
      }
    }
  }
  return out;
}

void write_long_csv(const ChoiceDataset& dataset, const std::filesystem::path& path, const LongCsvSchema& schema) {
  io::write_file_atomic(path, to_long_csv(dataset, schema));
}

ChoiceDataset load_rp_csv(const std::filesystem::path& path, const RpCsvSchema& schema) {
  const io::CsvTable table = io::read_csv(path);
  const std::size_t c_person = require_column(table, schema.person);
  const std::size_t c_cig = table.column(schema.cig);
  const std::size_t c_ecig = table.column(schema.ecig);
  if (c_cig == std::string::npos) throw Error(ErrorCode::MissingIndicator, "column '" + schema.cig + "' not found");
  if (c_ecig == std::string::npos) throw Error(ErrorCode::MissingIndicator, "column '" + schema.ecig + "' not found");
  std::vector<std::size_t> c_cov;
  for (const auto& z : schema.covariates) c_cov.push_back(require_column(table, z));

  ChoiceDataset ds;
  ds.mode = DatasetMode::RpPair;
  ds.covariate_names = schema.covariates;
  ds.alternative_labels = {"cig", "ecig"};
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    PanelPerson person;
    person.id = row[c_person];
    person.covariates[kCigIndicator] = parse_flag(row[c_cig], schema.cig, r);
    person.covariates[kEcigIndicator] = parse_flag(row[c_ecig], schema.ecig, r);
    for (std::size_t z = 0; z < c_cov.size(); ++z) {
      double v = 0.0;
      if (!io::parse_double(row[c_cov[z]], v) || !std::isfinite(v)) {
        throw Error(ErrorCode::NonNumericAttribute,
                    "'" + schema.covariates[z] + "' value '" + row[c_cov[z]] + "' at row " + std::to_string(r + 2));
      }
      person.covariates[schema.covariates[z]] = v;
    }
    ds.persons.push_back(std::move(person));
  }
  validate(ds);
  return ds;
}

std::string dummy_column_name(const std::string& attribute, const std::string& level) {
  return attribute + "_" + level;
}

ChoiceDataset apply_coding(const ChoiceDataset& dataset, const CodingPlan& plan) {
  const std::size_t n_attr = dataset.attribute_names.size();
  // Levels per dummy-coded attribute (first-appearance order) and the reference position.
  std::vector<const CodingRule*> rule_for(n_attr, nullptr);
  for (const auto& rule : plan) {
    const std::size_t a = dataset.attribute_index(rule.attribute);
    rule_for[a] = &rule;
  }

  std::vector<std::vector<std::string>> levels(n_attr);
  std::vector<std::vector<double>> numeric_levels(n_attr);
  for (std::size_t a = 0; a < n_attr; ++a) {
    if (!rule_for[a] || rule_for[a]->kind != CodingRule::Kind::Dummy) continue;
    if (dataset.is_categorical(a)) {
      levels[a] = dataset.attribute_levels[a];
    } else {
      for (const auto& person : dataset.persons)
        for (const auto& task : person.tasks)
          for (const auto& alt : task.alternatives) intern(numeric_levels[a], alt.x[a]);
      for (double v : numeric_levels[a]) levels[a].push_back(io::format_double(v));
    }
    if (std::find(levels[a].begin(), levels[a].end(), rule_for[a]->reference) == levels[a].end()) {
      throw Error(ErrorCode::UnknownLevel,
                  "reference level '" + rule_for[a]->reference + "' not found for attribute '" + rule_for[a]->attribute + "'");
    }
  }

  ChoiceDataset out;
  out.mode = dataset.mode;
  out.alternative_labels = dataset.alternative_labels;
  out.covariate_names = dataset.covariate_names;
  // Column map: for each source attribute, the list of (output column, level index or npos).
  struct Emit {
    std::size_t source;
    std::size_t level;  // npos => copy value through
  };
  std::vector<Emit> emits;
  for (std::size_t a = 0; a < n_attr; ++a) {
    if (rule_for[a] && rule_for[a]->kind == CodingRule::Kind::Dummy) {
      for (std::size_t l = 0; l < levels[a].size(); ++l) {
        if (levels[a][l] == rule_for[a]->reference) continue;
        out.attribute_names.push_back(dummy_column_name(dataset.attribute_names[a], levels[a][l]));
        out.attribute_levels.emplace_back();
        emits.push_back({a, l});
      }
    } else {
      out.attribute_names.push_back(dataset.attribute_names[a]);
      out.attribute_levels.push_back(dataset.attribute_levels[a]);
      emits.push_back({a, std::string::npos});
    }
  }

  out.persons.reserve(dataset.persons.size());
  for (const auto& person : dataset.persons) {
    PanelPerson np{person.id, {}, person.covariates};
    np.tasks.reserve(person.tasks.size());
    for (const auto& task : person.tasks) {
      Task nt;
      nt.chosen = task.chosen;
      for (const auto& alt : task.alternatives) {
        Alternative na{alt.label, std::vector<double>(emits.size(), 0.0)};
        for (std::size_t c = 0; c < emits.size(); ++c) {
          const Emit& e = emits[c];
          if (e.level == std::string::npos) {
            na.x[c] = alt.x[e.source];
            continue;
          }
          std::size_t level = 0;
          if (dataset.is_categorical(e.source)) {
            level = static_cast<std::size_t>(alt.x[e.source]);
          } else {
            level = intern(numeric_levels[e.source], alt.x[e.source]);
          }
          na.x[c] = level == e.level ? 1.0 : 0.0;
        }
        nt.alternatives.push_back(std::move(na));
      }
      np.tasks.push_back(std::move(nt));
    }
    out.persons.push_back(std::move(np));
  }
  return out;
}

}  // namespace mixl
