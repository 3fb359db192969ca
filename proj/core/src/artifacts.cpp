#include "mixl/artifacts.hpp"

#include <cmath>
#include <limits>

#include <json.hpp>

#include "mixl/errors.hpp"
#include "mixl/io.hpp"

namespace mixl {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidArtifact, what); }

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    bad(std::string("not valid JSON: ") + e.what());
  }
}

void check_version(const json& j) {
  if (!j.is_object() || !j.contains("schema_version")) bad("missing schema_version");
  if (j.at("schema_version") != kSchemaVersion) {
    bad("unsupported schema_version " + j.at("schema_version").dump());
  }
}

// Non-finite values travel as null.
double num(const json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

template <typename T>
T opt(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

json data_json(const DataSource& d) {
  json j;
  if (d.mode == DatasetMode::RpPair) {
    j["format"] = "rp";
    j["person"] = d.rp_schema.person;
    j["cig"] = d.rp_schema.cig;
    j["ecig"] = d.rp_schema.ecig;
    j["covariates"] = d.rp_schema.covariates;
  } else {
    j["format"] = "long";
    j["person"] = d.long_schema.person;
    j["task"] = d.long_schema.task;
    j["alternative"] = d.long_schema.alternative;
    j["chosen"] = d.long_schema.chosen;
    j["attributes"] = d.long_schema.attributes;
    j["categorical"] = d.long_schema.categorical;
  }
  json coding = json::array();
  for (const auto& r : d.coding) {
    json c{{"attribute", r.attribute}, {"kind", r.kind == CodingRule::Kind::Dummy ? "dummy" : "continuous"}};
    if (r.kind == CodingRule::Kind::Dummy) c["reference"] = r.reference;
    coding.push_back(c);
  }
  j["coding"] = coding;
  return j;
}

DataSource data_from(const json& j) {
  DataSource d;
  const auto format = opt<std::string>(j, "format", "long");
  if (format == "rp") {
    d.mode = DatasetMode::RpPair;
    d.rp_schema.person = opt<std::string>(j, "person", "person");
    d.rp_schema.cig = opt<std::string>(j, "cig", "cig");
    d.rp_schema.ecig = opt<std::string>(j, "ecig", "ecig");
    d.rp_schema.covariates = opt<std::vector<std::string>>(j, "covariates", {});
  } else if (format == "long") {
    d.long_schema.person = opt<std::string>(j, "person", "person");
    d.long_schema.task = opt<std::string>(j, "task", "task");
    d.long_schema.alternative = opt<std::string>(j, "alternative", "alternative");
    d.long_schema.chosen = opt<std::string>(j, "chosen", "chosen");
    d.long_schema.attributes = opt<std::vector<std::string>>(j, "attributes", {});
    d.long_schema.categorical = opt<std::vector<std::string>>(j, "categorical", {});
  } else {
    bad("unknown data format '" + format + "'");
  }
  if (j.contains("coding")) {
    for (const auto& c : j.at("coding")) {
      CodingRule r;
      r.attribute = c.at("attribute").get<std::string>();
      const auto kind = opt<std::string>(c, "kind", "continuous");
      if (kind == "dummy") {
        r.kind = CodingRule::Kind::Dummy;
        r.reference = c.at("reference").get<std::string>();
      } else if (kind != "continuous") {
        bad("unknown coding kind '" + kind + "'");
      }
      d.coding.push_back(r);
    }
  }
  return d;
}

json spec_json(const ModelSpec& spec) {
  json j;
  j["space"] = spec.space == Space::Wtp ? "wtp" : "preference";
  if (!spec.price_coefficient.empty()) j["price_coefficient"] = spec.price_coefficient;
  json coefs = json::array();
  for (const auto& c : spec.coefficients) {
    json e{{"name", c.name()}, {"family", std::string(family_name(c.mixing.family))}};
    if (!c.attribute.empty()) e["attribute"] = c.attribute;
    if (!c.asc_label.empty()) e["asc"] = c.asc_label;
    if (!c.outcome.empty()) e["outcome"] = c.outcome;
    if (c.mixing.positive) e["positive"] = true;
    if (c.mixing.pin_at_offset) e["pin_at_offset"] = true;
    if (!c.follow_family) e["follow_family"] = false;
    coefs.push_back(e);
  }
  j["coefficients"] = coefs;
  if (spec.rp) j["rp"] = {{"covariates", spec.rp->covariates}};
  return j;
}

ModelSpec spec_from(const json& j) {
  ModelSpec spec;
  const auto space = opt<std::string>(j, "space", "preference");
  if (space == "wtp") {
    spec.space = Space::Wtp;
  } else if (space != "preference") {
    bad("unknown space '" + space + "'");
  }
  spec.price_coefficient = opt<std::string>(j, "price_coefficient", "");
  for (const auto& e : j.at("coefficients")) {
    CoefficientSpec c;
    c.mixing.coefficient = e.at("name").get<std::string>();
    c.mixing.family = parse_family(opt<std::string>(e, "family", "fixed"));
    c.mixing.positive = opt<bool>(e, "positive", false);
    c.mixing.pin_at_offset = opt<bool>(e, "pin_at_offset", false);
    c.attribute = opt<std::string>(e, "attribute", "");
    c.asc_label = opt<std::string>(e, "asc", "");
    c.outcome = opt<std::string>(e, "outcome", "");
    c.follow_family = opt<bool>(e, "follow_family", true);
    spec.coefficients.push_back(c);
  }
  if (j.contains("rp")) spec.rp = RpBlock{opt<std::vector<std::string>>(j.at("rp"), "covariates", {})};
  return spec;
}

template <typename F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    bad(e.what());
  }
}

}  // namespace

ModelConfig parse_model_config(const std::string& json_text) {
  const json j = parse_json(json_text);
  check_version(j);
  return guarded([&] {
    ModelConfig c;
    if (j.contains("data")) c.data = data_from(j.at("data"));
    c.spec = spec_from(j.at("model"));
    validate_spec(c.spec);
    return c;
  });
}

std::string model_config_json(const ModelConfig& config) {
  json j{{"schema_version", kSchemaVersion}, {"data", data_json(config.data)}, {"model", spec_json(config.spec)}};
  return j.dump(2) + "\n";
}

ModelConfig load_model_config(const std::filesystem::path& path) { return parse_model_config(io::read_text(path)); }

ChoiceDataset load_dataset(const std::filesystem::path& path, const DataSource& source) {
  ChoiceDataset raw = source.mode == DatasetMode::RpPair ? load_rp_csv(path, source.rp_schema)
                                                          : load_long_csv(path, source.long_schema);
  if (source.coding.empty()) return raw;
  return apply_coding(raw, source.coding);
}

std::string fit_json(const FitResult& fit, const std::optional<DataSource>& data) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "fit";
  j["model_id"] = fit.model_id;
  j["model"] = spec_json(fit.spec);
  if (data) j["data"] = data_json(*data);
  if (!fit.data_path.empty()) j["data_path"] = fit.data_path;
  json params = json::array();
  for (const auto& p : fit.parameters) {
    params.push_back({{"name", p.name},
                      {"estimate", p.estimate},
                      {"se", p.se ? json(*p.se) : json(nullptr)},
                      {"reported", p.reported}});
  }
  j["parameters"] = params;
  j["ll"] = fit.ll;
  j["aic"] = fit.aic;
  j["bic"] = fit.bic;
  j["n_obs"] = fit.n_obs;
  j["n_params"] = fit.n_params;
  j["convergence"] = {{"status", std::string(status_name(fit.convergence.status))},
                      {"gradient_norm", fit.convergence.gradient_norm},
                      {"iterations", fit.convergence.iterations}};
  j["settings"] = {{"seed", fit.fingerprint.seed},
                   {"n_draws", fit.fingerprint.n_draws},
                   {"families", fit.fingerprint.families}};
  j["n_floored"] = fit.n_floored;
  j["person_ids"] = fit.person_ids;
  j["person_likelihoods"] = fit.person_likelihoods;
  return j.dump(2) + "\n";
}

FitArtifact parse_fit(const std::string& json_text) {
  const json j = parse_json(json_text);
  check_version(j);
  if (opt<std::string>(j, "kind", "") != "fit") bad("not a fit artifact");
  return guarded([&] {
    FitArtifact a;
    FitResult& f = a.fit;
    f.model_id = j.at("model_id").get<std::string>();
    f.spec = spec_from(j.at("model"));
    if (j.contains("data")) a.data = data_from(j.at("data"));
    f.data_path = opt<std::string>(j, "data_path", "");
    for (const auto& p : j.at("parameters")) {
      ParameterEstimate e;
      e.name = p.at("name").get<std::string>();
      e.estimate = num(p.at("estimate"));
      if (!p.at("se").is_null()) e.se = p.at("se").get<double>();
      e.reported = num(p.at("reported"));
      f.parameters.push_back(e);
    }
    f.ll = num(j.at("ll"));
    f.aic = num(j.at("aic"));
    f.bic = num(j.at("bic"));
    f.n_obs = j.at("n_obs").get<std::size_t>();
    f.n_params = j.at("n_params").get<std::size_t>();
    const auto& c = j.at("convergence");
    f.convergence.status = parse_status(c.at("status").get<std::string>());
    f.convergence.gradient_norm = num(c.at("gradient_norm"));
    f.convergence.iterations = c.at("iterations").get<std::size_t>();
    const auto& s = j.at("settings");
    f.fingerprint.seed = s.at("seed").get<std::uint64_t>();
    f.fingerprint.n_draws = s.at("n_draws").get<std::size_t>();
    f.fingerprint.families = s.at("families").get<std::map<std::string, std::string>>();
    f.n_floored = opt<std::size_t>(j, "n_floored", 0);
    f.person_ids = j.at("person_ids").get<std::vector<std::string>>();
    for (const auto& v : j.at("person_likelihoods")) f.person_likelihoods.push_back(num(v));
    return a;
  });
}

void write_fit(const std::filesystem::path& path, const FitResult& fit, const std::optional<DataSource>& data) {
  io::write_file_atomic(path, fit_json(fit, data));
}

FitArtifact read_fit(const std::filesystem::path& path) { return parse_fit(io::read_text(path)); }

std::string ma_json(const MAResult& ma) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "ma";
  j["model_ids"] = ma.model_ids;
  j["constituents"] = ma.constituent_paths;
  j["theta"] = ma.theta;  // infinities become null
  j["weights"] = ma.weights;
  j["ll"] = ma.ll;
  j["n_params"] = ma.n_params;
  j["aic"] = ma.aic;
  j["convergence"] = {{"status", std::string(status_name(ma.convergence.status))},
                      {"gradient_norm", ma.convergence.gradient_norm},
                      {"iterations", ma.convergence.iterations}};
  j["person_ids"] = ma.person_ids;
  j["person_likelihoods"] = ma.person_likelihoods;
  return j.dump(2) + "\n";
}

MAResult parse_ma(const std::string& json_text) {
  const json j = parse_json(json_text);
  check_version(j);
  if (opt<std::string>(j, "kind", "") != "ma") bad("not a model-averaging artifact");
  return guarded([&] {
    MAResult m;
    m.model_ids = j.at("model_ids").get<std::vector<std::string>>();
    m.constituent_paths = opt<std::vector<std::string>>(j, "constituents", {});
    for (const auto& v : j.at("theta")) m.theta.push_back(num(v));
    m.weights = j.at("weights").get<std::vector<double>>();
    m.ll = num(j.at("ll"));
    m.n_params = j.at("n_params").get<std::size_t>();
    m.aic = num(j.at("aic"));
    const auto& c = j.at("convergence");
    m.convergence.status = parse_status(c.at("status").get<std::string>());
    m.convergence.gradient_norm = num(c.at("gradient_norm"));
    m.convergence.iterations = c.at("iterations").get<std::size_t>();
    m.person_ids = j.at("person_ids").get<std::vector<std::string>>();
    for (const auto& v : j.at("person_likelihoods")) m.person_likelihoods.push_back(num(v));
    if (m.weights.size() != m.model_ids.size()) bad("weights do not match model_ids");
    if (m.theta.size() != m.weights.size()) bad("theta does not match model_ids");
    for (std::size_t k = 0; k < m.theta.size(); ++k) {
      if (std::isnan(m.theta[k])) m.theta[k] = m.weights[k] > 0.0 ? INFINITY : -INFINITY;
    }
    return m;
  });
}

void write_ma(const std::filesystem::path& path, const MAResult& ma) { io::write_file_atomic(path, ma_json(ma)); }

MAResult read_ma(const std::filesystem::path& path) { return parse_ma(io::read_text(path)); }

std::string artifact_kind(const std::filesystem::path& path) {
  const json j = parse_json(io::read_text(path));
  check_version(j);
  const auto kind = guarded([&] { return opt<std::string>(j, "kind", ""); });
  if (kind != "fit" && kind != "ma") bad(path.string() + " is neither a fit nor a model-averaging artifact");
  return kind;
}

}  // namespace mixl
