#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "mixl/data.hpp"
#include "mixl/draws.hpp"
#include "mixl/models.hpp"

namespace mixl::testing {

/// Dataset with numeric attributes x0..x{K-1}; labels are "a0", "a1", ... by position.
inline ChoiceDataset random_dataset(Rng& rng, std::size_t n_persons, std::size_t n_tasks, std::size_t n_alts,
                                    std::size_t n_attrs) {
  ChoiceDataset ds;
  for (std::size_t k = 0; k < n_attrs; ++k) {
    ds.attribute_names.push_back("x" + std::to_string(k));
    ds.attribute_levels.emplace_back();
  }
  for (std::size_t j = 0; j < n_alts; ++j) ds.alternative_labels.push_back("a" + std::to_string(j));
  for (std::size_t n = 0; n < n_persons; ++n) {
    PanelPerson p;
    p.id = "p" + std::to_string(n);
    for (std::size_t t = 0; t < n_tasks; ++t) {
      Task task;
      for (std::size_t j = 0; j < n_alts; ++j) {
        Alternative a;
        a.label = ds.alternative_labels[j];
        for (std::size_t k = 0; k < n_attrs; ++k) a.x.push_back(std::round(8.0 * rng.uniform() - 4.0) / 2.0);
        task.alternatives.push_back(a);
      }
      task.chosen = rng.index(n_alts);
      p.tasks.push_back(task);
    }
    ds.persons.push_back(p);
  }
  return ds;
}

/// One term per attribute, all of `family`.
inline ModelSpec attribute_spec(const ChoiceDataset& ds, Family family) {
  ModelSpec spec;
  for (const auto& a : ds.attribute_names) {
    CoefficientSpec c;
    c.mixing = {"b_" + a, family};
    c.attribute = a;
    spec.coefficients.push_back(c);
  }
  return spec;
}

/// Direct evaluation of sum_n ln( 1/R sum_r prod_t P(chosen | beta_nr) ) with per-person,
/// per-draw coefficient vectors supplied by the caller.
template <typename BetaFn>
double brute_force_panel_ll(const ChoiceDataset& ds, std::size_t n_draws, BetaFn beta_of) {
  double ll = 0.0;
  for (std::size_t n = 0; n < ds.persons.size(); ++n) {
    double sum = 0.0;
    for (std::size_t r = 0; r < n_draws; ++r) {
      const std::vector<double> beta = beta_of(n, r);
      double prod = 1.0;
      for (const auto& task : ds.persons[n].tasks) {
        double denom = 0.0;
        std::vector<double> e;
        for (const auto& alt : task.alternatives) {
          double v = 0.0;
          for (std::size_t k = 0; k < beta.size(); ++k) v += beta[k] * alt.x[k];
          e.push_back(std::exp(v));
          denom += e.back();
        }
        prod *= e[task.chosen] / denom;
      }
      sum += prod;
    }
    ll += std::log(sum / static_cast<double>(n_draws));
  }
  return ll;
}

/// Scratch directory removed on scope exit.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("mixl_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace mixl::testing
