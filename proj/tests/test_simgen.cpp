#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "mixl/errors.hpp"
#include "mixl/simgen.hpp"
#include "support.hpp"

using namespace mixl;

namespace {

SimConfig fixed_truth(std::size_t n, std::uint64_t seed, double price_beta) {
  SimConfig c = default_sim_config(seed);
  c.n_persons = n;
  for (auto& t : c.truth) {
    t.mixture.clear();
    t.mixing.family = Family::Fixed;
    t.params = {t.coefficient() == "price" ? price_beta : 0.0};
  }
  return c;
}

std::vector<double> chosen_position_shares(const ChoiceDataset& ds) {
  std::vector<double> out(4, 0.0);
  for (const auto& p : ds.persons)
    for (const auto& t : p.tasks) out[t.chosen] += 1.0 / static_cast<double>(ds.n_tasks());
  return out;
}

}  // namespace

TEST_CASE("default configuration") {
  const auto c = default_sim_config();
  CHECK(c.n_persons == 1000);
  CHECK(c.n_tasks == 10);
  CHECK(coded_columns(c) == std::vector<std::string>{"branded", "country_foreign", "characteristic_fast_acting",
                                                     "characteristic_double_strength", "side_effects", "price"});
  const auto out = generate(c);
  std::size_t rows = 0;
  for (const auto& p : out.dataset.persons)
    for (const auto& t : p.tasks) rows += t.alternatives.size();
  CHECK(rows == 40000);
  CHECK(to_long_csv(out.dataset, sim_schema(c)).size() > 0);
}

TEST_CASE("zero utilities choose every position about equally") {
  const auto out = generate(fixed_truth(2000, 5, 0.0));
  for (double s : chosen_position_shares(out.dataset)) CHECK(std::abs(s - 0.25) < 0.01);
}

TEST_CASE("a steep price coefficient picks the cheapest alternative") {
  const auto c = fixed_truth(300, 6, -10.0);
  const auto out = generate(c);
  const std::size_t price = out.dataset.attribute_index("price");
  std::size_t cheapest = 0, total = 0;
  for (const auto& p : out.dataset.persons)
    for (const auto& t : p.tasks) {
      double lo = INFINITY;
      for (const auto& a : t.alternatives) lo = std::min(lo, a.x[price]);
      cheapest += t.alternatives[t.chosen].x[price] == lo;
      ++total;
    }
  CHECK(static_cast<double>(cheapest) / static_cast<double>(total) > 0.99);
}

TEST_CASE("generation is deterministic in the seed") {
  auto c = default_sim_config(17);
  c.n_persons = 50;
  const auto a = generate(c), b = generate(c);
  CHECK(a.dataset == b.dataset);
  CHECK(a.betas == b.betas);
  c.seed = 18;
  CHECK(!(generate(c).dataset == a.dataset));
}

TEST_CASE("person coefficients follow the truth") {
  auto c = default_sim_config(3);
  c.n_persons = 20000;
  c.n_tasks = 1;
  const auto out = generate(c);
  REQUIRE(out.betas.size() == c.n_persons);
  REQUIRE(out.coefficient_names == coded_columns(c));
  for (std::size_t k = 0; k < c.truth.size(); ++k) {
    double s = 0.0, ss = 0.0;
    for (const auto& b : out.betas) {
      s += b[k];
      ss += b[k] * b[k];
    }
    const double n = static_cast<double>(out.betas.size());
    const double m = s / n, sd = std::sqrt(ss / n - m * m);
    CAPTURE(out.coefficient_names[k]);
    CHECK(std::abs(m - c.truth[k].mean()) < 4.0 * sd / std::sqrt(n));
  }
  for (const auto& b : out.betas) CHECK(b[5] < 0.0);
}

TEST_CASE("empirical choices match the average logit probabilities") {
  const auto c = default_sim_config(9);
  const auto out = generate(c);
  const auto coded = apply_coding(out.dataset, sim_coding(c));
  std::vector<std::size_t> col;
  for (const auto& name : out.coefficient_names) col.push_back(coded.attribute_index(name));

  std::vector<double> expected(4, 0.0), var(4, 0.0), observed(4, 0.0);
  for (std::size_t n = 0; n < coded.persons.size(); ++n) {
    for (const auto& t : coded.persons[n].tasks) {
      std::vector<double> v;
      for (const auto& a : t.alternatives) {
        double u = 0.0;
        for (std::size_t k = 0; k < col.size(); ++k) u += out.betas[n][k] * a.x[col[k]];
        v.push_back(u);
      }
      const auto p = mnl_prob(v);
      for (std::size_t j = 0; j < 4; ++j) {
        expected[j] += p[j];
        var[j] += p[j] * (1 - p[j]);
      }
      observed[t.chosen] += 1.0;
    }
  }
  const double tasks = static_cast<double>(coded.n_tasks());
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(std::abs(observed[j] - expected[j]) < 4.0 * std::sqrt(var[j]));
    CHECK(std::abs(observed[j] - expected[j]) / tasks <= 0.01);
  }
}

TEST_CASE("the branded column marks branded labels") {
  auto c = default_sim_config(2);
  c.n_persons = 5;
  const auto out = generate(c);
  const std::size_t b = out.dataset.attribute_index("branded");
  for (const auto& p : out.dataset.persons)
    for (const auto& t : p.tasks)
      for (const auto& a : t.alternatives) CHECK(a.x[b] == (a.label == "branded" ? 1.0 : 0.0));
}

TEST_CASE("config errors") {
  auto c = default_sim_config();
  c.n_persons = 3;
  c.attributes[0].levels.clear();
  c.attributes[0].values.clear();
  CHECK_THROWS_AS(generate(c), Error);

  auto d = default_sim_config();
  d.n_persons = 3;
  d.truth.pop_back();
  try {
    generate(d);
    FAIL("expected InvalidSpec");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSpec);
  }
}

TEST_CASE("specs built from the config validate and cover the coded columns") {
  const auto c = default_sim_config();
  for (Family f : kRandomFamilies) {
    const auto s = sim_model_spec(c, f);
    validate_spec(s);
    CHECK(s.coefficients.size() == 6);
    const auto w = sim_wtp_spec(c, f);
    validate_spec(w);
    CHECK(w.space == Space::Wtp);
  }
}

TEST_CASE("truth samples and density export") {
  const auto c = default_sim_config();
  const auto d = sample_truth(c, 5000, 4);
  CHECK(d.coefficients.size() == 6);
  const auto& br = d.at("branded").values;
  const double below = static_cast<double>(std::count_if(br.begin(), br.end(), [](double v) { return v < 0; }));
  CHECK(std::abs(below / 5000.0 - 0.5) < 0.03);
  const auto csv = density_csv(density_grid(d, 10));
  CHECK(csv.rfind("coefficient,bin,center,lower,upper,density\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 61);
}
