#include "cli.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixl/artifacts.hpp"
#include "mixl/averaging.hpp"
#include "mixl/errors.hpp"
#include "mixl/estimation.hpp"
#include "mixl/io.hpp"
#include "mixl/postest.hpp"
#include "mixl/simgen.hpp"

namespace mixl::cli {

namespace fs = std::filesystem;
using io::format_double;

namespace {

constexpr const char* kOutDirEnv = "MIXL_OUT_DIR";

[[noreturn]] void usage(const std::string& message) { throw Error(ErrorCode::Usage, message); }

// Error text without the "Code: " prefix.
std::string bare_message(const Error& e) {
  const std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Usage: return 2;
    case ErrorCategory::Data: return 3;
    case ErrorCategory::Estimation: return 4;
  }
  return 1;
}

void report(std::ostream& err, std::string_view code, const std::string& message) {
  err << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
}

fs::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  usage(std::string("--out is required (or set ") + kOutDirEnv + ")");
}

// Path of `target` as seen from directory `base`, in generic form.
std::string relative_to(const fs::path& target, const fs::path& base) {
  const fs::path rel = fs::weakly_canonical(fs::absolute(target)).lexically_relative(fs::weakly_canonical(fs::absolute(base)));
  return rel.empty() ? fs::absolute(target).generic_string() : rel.generic_string();
}

fs::path resolve(const fs::path& base, const std::string& stored) {
  const fs::path p(stored);
  return p.is_absolute() ? p : base / p;
}

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  for (const auto& c : cells) {
    if (!s.empty()) s += ",";
    s += io::csv_field(c);
  }
  return s + "\n";
}

// ---------------------------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  std::string out;
  std::uint64_t seed = 1;
  std::size_t persons = 1000;
  std::size_t tasks = 10;
  std::size_t truth_samples = 100000;
  std::size_t bins = kDefaultBins;
};

struct SimulateOutputs {
  SimConfig config;
  fs::path data;
  fs::path spec;
  fs::path wtp_spec;
};

DataSource sim_source(const SimConfig& cfg) {
  DataSource d;
  d.long_schema = sim_schema(cfg);
  d.coding = sim_coding(cfg);
  return d;
}

SimulateOutputs simulate(const SimulateOptions& o, const fs::path& dir, std::ostream& out) {
  SimulateOutputs r;
  r.config = default_sim_config(o.seed);
  r.config.n_persons = o.persons;
  r.config.n_tasks = o.tasks;
  const SimOutput sim = generate(r.config);

  r.data = dir / "data.csv";
  r.spec = dir / "spec.json";
  r.wtp_spec = dir / "spec_wtp.json";
  write_long_csv(sim.dataset, r.data, sim_schema(r.config));
  io::write_file_atomic(dir / "truth.csv", truth_table_csv(sim));
  const UnconditionalDraws truth = sample_truth(r.config, o.truth_samples, o.seed + 3);
  io::write_file_atomic(dir / "truth_density.csv", density_csv(density_grid(truth, o.bins)));
  io::write_file_atomic(r.spec, model_config_json({sim_source(r.config), sim_model_spec(r.config)}));
  io::write_file_atomic(r.wtp_spec, model_config_json({sim_source(r.config), sim_wtp_spec(r.config)}));
  out << "simulated " << o.persons << " persons x " << o.tasks << " tasks -> " << r.data.generic_string() << "\n";
  return r;
}

// ---------------------------------------------------------------------------------------------
// estimate

struct EstimateOptions {
  std::string data;
  std::string spec;
  std::string family;
  std::string id;
  std::string out;
  std::size_t draws = 500;
  std::uint64_t seed = 1;
  std::size_t starts = 1;
  std::size_t max_iter = 500;
  bool warm_start = false;
  bool no_se = false;
};

EstimateSettings settings_from(const EstimateOptions& o) {
  if (o.draws < 1) usage("--draws must be >= 1");
  if (o.starts < 1) usage("--starts must be >= 1");
  EstimateSettings s;
  s.n_draws = o.draws;
  s.seed = o.seed;
  s.warm_start = o.warm_start;
  s.compute_std_errors = !o.no_se;
  s.optimizer.n_starts = o.starts;
  s.optimizer.max_iter = o.max_iter;
  return s;
}

FitResult fit_family(const ModelSpec& spec, const ChoiceDataset& ds, const EstimateSettings& settings,
                     const std::string& id, const std::string& family_label) {
  try {
    return estimate(spec, ds, settings, id);
  } catch (const Error& e) {
    throw Error(e.code(), "family " + family_label + ": " + bare_message(e));
  }
}

std::string summary_header() { return "model,n_params,ll,aic,bic,n_obs,status,iterations\n"; }

std::string summary_line(const FitResult& f) {
  return csv_row({f.model_id, std::to_string(f.n_params), format_double(f.ll), format_double(f.aic),
                  format_double(f.bic), std::to_string(f.n_obs), std::string(status_name(f.convergence.status)),
                  std::to_string(f.convergence.iterations)});
}

void print_fit(std::ostream& out, const FitResult& f, const fs::path& path) {
  out << f.model_id << ": ll=" << format_double(f.ll) << " aic=" << format_double(f.aic)
      << " status=" << status_name(f.convergence.status) << " -> " << path.generic_string() << "\n";
}

std::vector<std::pair<std::string, fs::path>> estimate_batch(const ModelConfig& cfg, const fs::path& data_path,
                                                              const ChoiceDataset& ds,
                                                              const std::vector<std::optional<Family>>& families,
                                                              const std::string& id, const EstimateSettings& settings,
                                                              const fs::path& dir, std::ostream& out,
                                                              std::vector<FitResult>* fits) {
  std::vector<std::pair<std::string, fs::path>> written;
  for (const auto& fam : families) {
    const std::string label = fam ? std::string(family_name(*fam)) : (id.empty() ? "model" : id);
    const std::string model_id = id.empty() || families.size() > 1 ? label : id;
    const ModelSpec spec = fam ? with_family(cfg.spec, *fam) : cfg.spec;
    FitResult fit = fit_family(spec, ds, settings, model_id, label);
    fit.data_path = relative_to(data_path, dir);
    const fs::path path = dir / ("fit_" + model_id + ".json");
    write_fit(path, fit, cfg.data);
    print_fit(out, fit, path);
    written.emplace_back(model_id, path);
    if (fits) fits->push_back(std::move(fit));
  }
  return written;
}

std::vector<std::optional<Family>> families_for(const std::string& flag) {
  if (flag.empty()) return {std::nullopt};
  if (flag == "all") return {std::begin(kRandomFamilies), std::end(kRandomFamilies)};
  return {parse_family(flag)};
}

void cmd_estimate(const EstimateOptions& o, std::ostream& out) {
  const EstimateSettings settings = settings_from(o);
  const fs::path dir = output_dir(o.out);
  const ModelConfig cfg = load_model_config(o.spec);
  const ChoiceDataset ds = load_dataset(o.data, cfg.data);
  const auto families = families_for(o.family);
  std::vector<FitResult> fits;
  estimate_batch(cfg, o.data, ds, families, o.id, settings, dir, out, &fits);
  if (families.size() > 1) {
    std::string summary = summary_header();
    for (const auto& f : fits) summary += summary_line(f);
    io::write_file_atomic(dir / "summary.csv", summary);
  }
}

// ---------------------------------------------------------------------------------------------
// artifacts on disk

struct LoadedFit {
  FitResult fit;
  std::optional<DataSource> data;
  fs::path path;
};

struct Loaded {
  std::optional<MAResult> ma;
  std::vector<LoadedFit> fits;
  std::string stem;
};

LoadedFit load_fit(const fs::path& path) {
  FitArtifact a = read_fit(path);
  return {std::move(a.fit), std::move(a.data), path};
}

Loaded load_artifact(const fs::path& path) {
  Loaded l;
  l.stem = path.stem().string();
  if (artifact_kind(path) == "fit") {
    l.fits.push_back(load_fit(path));
    return l;
  }
  l.ma = read_ma(path);
  if (l.ma->constituent_paths.size() != l.ma->model_ids.size()) {
    throw Error(ErrorCode::InvalidArtifact, path.generic_string() + " does not list its constituent artifacts");
  }
  for (std::size_t k = 0; k < l.ma->model_ids.size(); ++k) {
    LoadedFit f = load_fit(resolve(path.parent_path(), l.ma->constituent_paths[k]));
    if (f.fit.model_id != l.ma->model_ids[k]) {
      throw Error(ErrorCode::ConstituentMismatch,
                  f.path.generic_string() + " holds '" + f.fit.model_id + "', expected '" + l.ma->model_ids[k] + "'");
    }
    l.fits.push_back(std::move(f));
  }
  return l;
}

std::vector<FitResult> fits_of(const Loaded& l) {
  std::vector<FitResult> v;
  for (const auto& f : l.fits) v.push_back(f.fit);
  return v;
}

ChoiceDataset dataset_for(const LoadedFit& f, const std::string& data_flag, const std::string& spec_flag) {
  DataSource source;
  if (!spec_flag.empty()) {
    source = load_model_config(spec_flag).data;
  } else if (f.data) {
    source = *f.data;
  } else {
    throw Error(ErrorCode::InvalidArtifact, f.path.generic_string() + " does not describe its data; pass --spec");
  }
  fs::path data;
  if (!data_flag.empty()) {
    data = data_flag;
  } else if (!f.fit.data_path.empty()) {
    data = resolve(f.path.parent_path(), f.fit.data_path);
  } else {
    throw Error(ErrorCode::InvalidArtifact, f.path.generic_string() + " does not reference a dataset; pass --data");
  }
  return load_dataset(data, source);
}

// ---------------------------------------------------------------------------------------------
// average

struct AverageOptions {
  std::vector<std::string> fits;
  std::string out;
  std::string name = "ma";
};

MAResult average_paths(const std::vector<fs::path>& paths, const fs::path& dir) {
  if (paths.size() < 2) usage("model averaging needs at least two --fits");
  std::vector<FitResult> fits;
  for (const auto& p : paths) fits.push_back(load_fit(p).fit);
  MAResult ma;
  try {
    ma = average(fits);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::PersonSetMismatch) throw;
    std::string listed;
    for (const auto& p : paths) listed += (listed.empty() ? "" : ", ") + p.generic_string();
    throw Error(e.code(), bare_message(e) + " [" + listed + "]");
  }
  for (const auto& p : paths) ma.constituent_paths.push_back(relative_to(p, dir));
  return ma;
}

std::string weights_csv(const MAResult& ma) {
  std::string s = "model,path,theta,weight\n";
  for (std::size_t k = 0; k < ma.model_ids.size(); ++k) {
    s += csv_row({ma.model_ids[k], ma.constituent_paths.empty() ? "" : ma.constituent_paths[k],
                  format_double(ma.theta[k]), format_double(ma.weights[k])});
  }
  return s;
}

void print_ma(std::ostream& out, const std::string& name, const MAResult& ma) {
  out << name << ": ll=" << format_double(ma.ll) << " aic=" << format_double(ma.aic) << " weights";
  for (std::size_t k = 0; k < ma.model_ids.size(); ++k) out << " " << ma.model_ids[k] << "=" << format_double(ma.weights[k]);
  out << "\n";
}

void cmd_average(const AverageOptions& o, std::ostream& out) {
  const fs::path dir = output_dir(o.out);
  std::vector<fs::path> paths(o.fits.begin(), o.fits.end());
  const MAResult ma = average_paths(paths, dir);
  write_ma(dir / (o.name + ".json"), ma);
  io::write_file_atomic(dir / (o.name == "ma" ? "weights.csv" : "weights_" + o.name + ".csv"), weights_csv(ma));
  print_ma(out, o.name, ma);
}

// ---------------------------------------------------------------------------------------------
// predict / wtp / density

struct PostOptions {
  std::string artifact;
  std::string data;
  std::string spec;
  std::string out;
  std::uint64_t seed = 1;
  std::size_t samples = 100000;
  std::size_t bins = kDefaultBins;
};

ShareTable shares_of(const Loaded& l, const ChoiceDataset& ds) {
  if (l.ma) return predict_shares(*l.ma, fits_of(l), ds);
  return predict_shares(l.fits.front().fit, ds);
}

std::string shares_csv(const std::string& model, const ShareTable& t, bool with_model) {
  std::string s;
  for (std::size_t i = 0; i < t.labels.size(); ++i) {
    if (with_model) {
      s += csv_row({model, t.labels[i], t.groups[i], format_double(t.shares[i])});
    } else {
      s += csv_row({t.labels[i], t.groups[i], format_double(t.shares[i])});
    }
  }
  return s;
}

void cmd_predict(const PostOptions& o, std::ostream& out) {
  const fs::path dir = output_dir(o.out);
  const Loaded l = load_artifact(o.artifact);
  const ChoiceDataset ds = dataset_for(l.fits.front(), o.data, o.spec);
  const ShareTable t = shares_of(l, ds);
  const fs::path path = dir / ("shares_" + l.stem + ".csv");
  io::write_file_atomic(path, "label,group,share\n" + shares_csv(l.stem, t, false));
  for (std::size_t i = 0; i < t.labels.size(); ++i) out << t.labels[i] << " " << format_double(t.shares[i]) << "\n";
}

std::string wtp_csv(const WtpSummary& w) {
  std::string s = "attribute,method,wtp_mean,wtp_lower,wtp_upper,mrs_mean,mrs_lower,mrs_upper\n";
  for (const auto& r : w.rows) {
    s += csv_row({r.attribute, r.method, format_double(r.mean), format_double(r.lower), format_double(r.upper),
                  format_double(r.mrs_mean()), format_double(r.mrs_lower()), format_double(r.mrs_upper())});
  }
  return s;
}

void cmd_wtp(const PostOptions& o, std::ostream& out) {
  const fs::path dir = output_dir(o.out);
  const Loaded l = load_artifact(o.artifact);
  const WtpSummary w = l.ma ? wtp_summary(*l.ma, fits_of(l), o.seed) : wtp_summary(l.fits.front().fit, o.seed);
  io::write_file_atomic(dir / ("wtp_" + l.stem + ".csv"), wtp_csv(w));
  for (const auto& r : w.rows) {
    out << r.attribute << " " << format_double(r.mean) << " (" << format_double(r.lower) << ", "
        << format_double(r.upper) << ")\n";
  }
}

UnconditionalDraws unconditionals_of(const Loaded& l, std::size_t n, std::uint64_t seed) {
  if (l.ma) return sample_ma_unconditionals(*l.ma, fits_of(l), n, seed);
  return sample_unconditionals(l.fits.front().fit, n, seed);
}

void cmd_density(const PostOptions& o, std::ostream& out) {
  if (o.bins < 2) usage("--bins must be >= 2");
  if (o.samples < 1) usage("--samples must be >= 1");
  const fs::path dir = output_dir(o.out);
  const Loaded l = load_artifact(o.artifact);
  const auto grids = density_grid(unconditionals_of(l, o.samples, o.seed), o.bins);
  const fs::path path = dir / ("density_" + l.stem + ".csv");
  io::write_file_atomic(path, density_csv(grids));
  out << grids.size() << " density grids -> " << path.generic_string() << "\n";
}

// ---------------------------------------------------------------------------------------------
// replicate-sim

struct ReplicateOptions {
  SimulateOptions sim;
  std::size_t draws = 500;
  std::size_t starts = 1;
  std::size_t max_iter = 500;
  bool warm_start = false;
  bool include_at = false;
};

void cmd_replicate(const ReplicateOptions& o, std::ostream& out) {
  if (o.draws < 1) usage("--draws must be >= 1");
  if (o.sim.bins < 2) usage("--bins must be >= 2");
  const fs::path dir = output_dir(o.sim.out);
  const SimulateOutputs sim = simulate(o.sim, dir, out);
  const ModelConfig cfg = load_model_config(sim.spec);
  const ModelConfig wtp_cfg = load_model_config(sim.wtp_spec);
  const ChoiceDataset ds = load_dataset(sim.data, cfg.data);

  EstimateSettings settings;
  settings.n_draws = o.draws;
  settings.seed = o.sim.seed;
  settings.warm_start = o.warm_start;
  settings.optimizer.n_starts = o.starts;
  settings.optimizer.max_iter = o.max_iter;

  const fs::path fit_dir = dir / "fits";
  std::vector<FitResult> fits;
  const auto written = estimate_batch(cfg, sim.data, ds, families_for("all"), "", settings, fit_dir, out, &fits);
  std::vector<FitResult> wtp_fits;
  estimate_batch(wtp_cfg, sim.data, ds, {Family::Normal}, "wtp_normal", settings, fit_dir, out, &wtp_fits);

  std::map<std::string, fs::path> path_of(written.begin(), written.end());
  std::map<std::string, const FitResult*> fit_of;
  for (const auto& f : fits) fit_of[f.model_id] = &f;

  std::vector<std::pair<std::string, std::vector<std::string>>> groups{
      {"ma_sut", {"normal", "uniform", "triangular"}},
      {"ma_sut_ln_lu", {"normal", "uniform", "triangular", "lognormal", "loguniform"}},
      {"ma_all", {"normal", "uniform", "triangular", "lognormal", "loguniform", "fm2", "fm3"}},
  };
  if (o.include_at) groups.back().second.push_back("at");

  const fs::path ma_dir = dir / "ma";
  std::map<std::string, MAResult> mas;
  std::string weights = "group,model,weight\n";
  for (const auto& [name, members] : groups) {
    std::vector<fs::path> paths;
    for (const auto& m : members) paths.push_back(path_of.at(m));
    MAResult ma = average_paths(paths, ma_dir);
    write_ma(ma_dir / (name + ".json"), ma);
    for (std::size_t k = 0; k < ma.model_ids.size(); ++k) {
      weights += csv_row({name, ma.model_ids[k], format_double(ma.weights[k])});
    }
    print_ma(out, name, ma);
    mas.emplace(name, std::move(ma));
  }
  io::write_file_atomic(ma_dir / "weights.csv", weights);

  // Model comparison with MA rows under the conservative parameter count.
  std::string summary = summary_header();
  for (const auto& f : fits) summary += summary_line(f);
  const double n_obs = static_cast<double>(ds.n_tasks());
  for (const auto& [name, members] : groups) {
    const MAResult& ma = mas.at(name);
    const double bic = static_cast<double>(ma.n_params) * std::log(n_obs) - 2.0 * ma.ll;
    summary += csv_row({name, std::to_string(ma.n_params), format_double(ma.ll), format_double(ma.aic),
                        format_double(bic), std::to_string(ds.n_tasks()),
                        std::string(status_name(ma.convergence.status)), std::to_string(ma.convergence.iterations)});
  }
  io::write_file_atomic(dir / "fit_summary.csv", summary);

  const MAResult& ma_all = mas.at("ma_all");
  std::vector<FitResult> ma_fits;
  for (const auto& id : ma_all.model_ids) ma_fits.push_back(*fit_of.at(id));

  std::string shares = "model,label,group,share\n";
  for (const auto& f : fits) shares += shares_csv(f.model_id, predict_shares(f, ds), true);
  shares += shares_csv("ma_all", predict_shares(ma_all, ma_fits, ds), true);
  io::write_file_atomic(dir / "shares.csv", shares);

  io::write_file_atomic(dir / "wtp.csv", wtp_csv(wtp_summary(wtp_fits.front(), o.sim.seed)));

  // Densities of the all-normal fit, the full average and the truth on shared bins.
  const UnconditionalDraws truth = sample_truth(sim.config, o.sim.truth_samples, o.sim.seed + 3);
  const UnconditionalDraws normal = sample_unconditionals(*fit_of.at("normal"), o.sim.truth_samples, o.sim.seed + 1);
  const UnconditionalDraws averaged = sample_ma_unconditionals(ma_all, ma_fits, o.sim.truth_samples, o.sim.seed + 2);
  std::string density = "source,coefficient,bin,center,density\n";
  std::string recovery = "coefficient,model,l1\n";
  for (const auto& t : truth.coefficients) {
    const auto& n = normal.at(t.coefficient).values;
    const auto& a = averaged.at(t.coefficient).values;
    std::vector<double> all(t.values);
    all.insert(all.end(), n.begin(), n.end());
    all.insert(all.end(), a.begin(), a.end());
    const auto [lo, hi] = padded_range(all);
    const std::pair<std::string, const std::vector<double>*> sources[] = {
        {"truth", &t.values}, {"normal", &n}, {"ma_all", &a}};
    std::map<std::string, DensityGrid> grids;
    for (const auto& [src, values] : sources) {
      DensityGrid g = histogram(*values, o.sim.bins, lo, hi);
      for (std::size_t b = 0; b < g.n_bins(); ++b) {
        density += csv_row({src, t.coefficient, std::to_string(b), format_double(g.center(b)), format_double(g.density[b])});
      }
      grids.emplace(src, std::move(g));
    }
    for (const char* model : {"normal", "ma_all"}) {
      const double l1 = recovery_score(grids.at(model), grids.at("truth"));
      recovery += csv_row({t.coefficient, model, format_double(l1)});
      if (t.coefficient == "branded") out << "branded L1 " << model << " " << format_double(l1) << "\n";
    }
  }
  io::write_file_atomic(dir / "density.csv", density);
  io::write_file_atomic(dir / "recovery.csv", recovery);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mixed logit estimation, model averaging and simulation"};
  app.name("mixl");
  app.require_subcommand(1);

  SimulateOptions sim;
  auto* c_sim = app.add_subcommand("simulate", "Generate the simulated drug-choice dataset and its truth");
  c_sim->add_option("--out", sim.out, "Output directory");
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--persons", sim.persons, "Number of respondents")->check(CLI::PositiveNumber);
  c_sim->add_option("--tasks", sim.tasks, "Choice tasks per respondent")->check(CLI::PositiveNumber);
  c_sim->add_option("--truth-samples", sim.truth_samples, "Samples behind the truth densities")->check(CLI::PositiveNumber);
  c_sim->add_option("--bins", sim.bins, "Density bins")->check(CLI::Range(2, 1000000));

  std::vector<std::string> family_names{"all"};
  for (const auto f : {Family::Fixed, Family::Normal, Family::Uniform, Family::Triangular, Family::Lognormal,
                       Family::Loguniform, Family::AsymTriangular, Family::Fm2, Family::Fm3}) {
    family_names.emplace_back(family_name(f));
  }

  EstimateOptions est;
  auto* c_est = app.add_subcommand("estimate", "Fit a model by simulated maximum likelihood");
  c_est->add_option("--data", est.data, "Long-format CSV")->required()->check(CLI::ExistingFile);
  c_est->add_option("--spec", est.spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  c_est->add_option("--family", est.family, "Mixing family for every coefficient, or 'all' for a batch")
      ->check(CLI::IsMember(family_names));
  c_est->add_option("--id", est.id, "Model id for a single fit");
  c_est->add_option("--draws", est.draws, "MLHS draws per person");
  c_est->add_option("--seed", est.seed, "Draw seed");
  c_est->add_option("--starts", est.starts, "Optimizer starts");
  c_est->add_option("--max-iter", est.max_iter, "BFGS iteration cap");
  c_est->add_flag("--warm-start", est.warm_start, "Start means at the MNL estimates");
  c_est->add_flag("--no-se", est.no_se, "Skip standard errors");
  c_est->add_option("--out", est.out, "Output directory");

  AverageOptions avg;
  auto* c_avg = app.add_subcommand("average", "Estimate model-averaging weights over fitted models");
  c_avg->add_option("--fits", avg.fits, "Fit artifacts")->required()->check(CLI::ExistingFile);
  c_avg->add_option("--name", avg.name, "Artifact name");
  c_avg->add_option("--out", avg.out, "Output directory");

  PostOptions post;
  auto add_post = [&](const char* name, const char* help) {
    auto* c = app.add_subcommand(name, help);
    c->add_option("--artifact", post.artifact, "Fit or model-averaging artifact")->required()->check(CLI::ExistingFile);
    c->add_option("--out", post.out, "Output directory");
    c->add_option("--seed", post.seed, "Sampling seed");
    return c;
  };
  auto* c_pred = add_post("predict", "Predicted shares by sample enumeration");
  c_pred->add_option("--data", post.data, "Dataset override")->check(CLI::ExistingFile);
  c_pred->add_option("--spec", post.spec, "Model spec whose data layout reads --data")->check(CLI::ExistingFile);
  auto* c_wtp = add_post("wtp", "Willingness-to-pay summary of a WTP-space model");
  auto* c_den = add_post("density", "Density grids of unconditional coefficient draws");
  c_den->add_option("--samples", post.samples, "Unconditional samples");
  c_den->add_option("--bins", post.bins, "Histogram bins");

  ReplicateOptions rep;
  auto* c_rep = app.add_subcommand("replicate-sim", "Full simulated-data pipeline");
  c_rep->add_option("--out", rep.sim.out, "Output directory");
  c_rep->add_option("--seed", rep.sim.seed, "Seed for data, draws and sampling");
  c_rep->add_option("--persons", rep.sim.persons, "Number of respondents")->check(CLI::PositiveNumber);
  c_rep->add_option("--tasks", rep.sim.tasks, "Choice tasks per respondent")->check(CLI::PositiveNumber);
  c_rep->add_option("--draws", rep.draws, "MLHS draws per person");
  c_rep->add_option("--samples", rep.sim.truth_samples, "Unconditional and truth samples")->check(CLI::PositiveNumber);
  c_rep->add_option("--bins", rep.sim.bins, "Density bins");
  c_rep->add_option("--starts", rep.starts, "Optimizer starts");
  c_rep->add_option("--max-iter", rep.max_iter, "BFGS iteration cap");
  c_rep->add_flag("--warm-start", rep.warm_start, "Start means at the MNL estimates");
  c_rep->add_flag("--include-at", rep.include_at, "Add the asymmetric triangular fit to the full average");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    report(err, "Usage", e.what());
    return 2;
  }

  try {
    if (c_sim->parsed()) {
      simulate(sim, output_dir(sim.out), out);
    } else if (c_est->parsed()) {
      cmd_estimate(est, out);
    } else if (c_avg->parsed()) {
      cmd_average(avg, out);
    } else if (c_pred->parsed()) {
      cmd_predict(post, out);
    } else if (c_wtp->parsed()) {
      cmd_wtp(post, out);
    } else if (c_den->parsed()) {
      cmd_density(post, out);
    } else if (c_rep->parsed()) {
      cmd_replicate(rep, out);
    }
  } catch (const Error& e) {
    report(err, to_string(e.code()), bare_message(e));
    return exit_code(category(e.code()));
  } catch (const std::exception& e) {
    report(err, "Io", e.what());
    return 3;
  }
  return 0;
}

}  // namespace mixl::cli
