#include <doctest.h>

#include <cmath>
#include <numeric>

#include "mixl/errors.hpp"
#include "mixl/models.hpp"
#include "support.hpp"

using namespace mixl;
using mixl::testing::brute_force_panel_ll;
using mixl::testing::random_dataset;
using mixl::testing::rel_diff;

namespace {

Task make_task(std::vector<std::vector<double>> xs, std::size_t chosen, std::vector<std::string> labels = {}) {
  Task t;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    t.alternatives.push_back({labels.empty() ? "a" + std::to_string(i) : labels[i], xs[i]});
  }
  t.chosen = chosen;
  return t;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

ChoiceDataset rp_dataset(Rng& rng, std::size_t n) {
  ChoiceDataset ds;
  ds.mode = DatasetMode::RpPair;
  ds.covariate_names = {"age"};
  ds.alternative_labels = {"cig", "ecig"};
  for (std::size_t i = 0; i < n; ++i) {
    PanelPerson p;
    p.id = std::to_string(i);
    p.covariates = {{kCigIndicator, static_cast<double>(rng.index(2))},
                    {kEcigIndicator, static_cast<double>(rng.index(2))},
                    {"age", std::round(10 * rng.uniform()) / 5.0}};
    ds.persons.push_back(p);
  }
  return ds;
}

ModelSpec rp_spec() {
  ModelSpec spec;
  spec.rp = RpBlock{{"age"}};
  auto term = [](std::string name, std::string outcome, std::string attr) {
    CoefficientSpec c;
    c.mixing = {std::move(name), Family::Fixed};
    c.outcome = std::move(outcome);
    c.attribute = std::move(attr);
    return c;
  };
  spec.coefficients = {term("asc_cig", "cig", ""), term("g_cig_age", "cig", "age"), term("asc_ecig", "ecig", ""),
                       term("g_ecig_age", "ecig", "age")};
  return spec;
}

}  // namespace

TEST_CASE("softmax examples") {
  const auto p = mnl_prob(std::vector<double>{0, 0, 0});
  for (double v : p) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
  const auto q = mnl_prob(std::vector<double>{std::log(2.0), 0.0});
  CHECK(q[0] == doctest::Approx(2.0 / 3).epsilon(1e-15));
  const auto r = mnl_prob(std::vector<double>{1000.0, 0.0});
  CHECK(std::isfinite(r[0]));
  CHECK(r[0] == doctest::Approx(1.0));
  CHECK(r[1] >= 0.0);
}

TEST_CASE("softmax simplex and translation invariance") {
  Rng rng(3);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<double> v(2 + rng.index(6));
    for (double& x : v) x = 40 * rng.uniform() - 20;
    const auto p = mnl_prob(v);
    CHECK(std::abs(std::accumulate(p.begin(), p.end(), 0.0) - 1.0) < 1e-12);
    const double shift = 100 * rng.uniform() - 50;
    for (double& x : v) x += shift;
    const auto q = mnl_prob(v);
    for (std::size_t i = 0; i < p.size(); ++i) CHECK(std::abs(p[i] - q[i]) < 1e-12);
  }
}

TEST_CASE("utility construction") {
  ModelSpec spec;
  CoefficientSpec b;
  b.mixing = {"b", Family::Fixed};
  b.attribute = "x";
  spec.coefficients = {b};
  const Task t = make_task({{1.0}, {0.0}}, 0);
  CHECK(build_utility(spec, {"x"}, t, {{"b", 2.0}}) == std::vector<double>{2.0, 0.0});
  CHECK(build_utility(spec, {"x"}, t, {{"b", 0.0}}) == std::vector<double>{0.0, 0.0});
  CHECK_THROWS_AS(build_utility(spec, {"x"}, t, {}), Error);

  CoefficientSpec asc;
  asc.mixing = {"asc_optout", Family::Fixed};
  asc.asc_label = "optout";
  spec.coefficients.push_back(asc);
  const Task t2 = make_task({{1.0}, {0.0}}, 0, {"product", "optout"});
  CHECK(build_utility(spec, {"x"}, t2, {{"b", 2.0}, {"asc_optout", -1.0}}) == std::vector<double>{2.0, -1.0});
}

TEST_CASE("WTP-space utility scales the bracket by the price coefficient") {
  ModelSpec spec;
  spec.space = Space::Wtp;
  spec.price_coefficient = "price";
  CoefficientSpec price;
  price.mixing = {"price", Family::Lognormal};
  price.attribute = "price";
  CoefficientSpec menthol;
  menthol.mixing = {"w_menthol", Family::Normal};
  menthol.attribute = "menthol";
  spec.coefficients = {price, menthol};
  const Task t = make_task({{10.0, 1.0}, {10.0, 0.0}}, 0);
  const auto v = build_utility(spec, {"price", "menthol"}, t, {{"price", -0.5}, {"w_menthol", -5.90}});
  CHECK(v[0] == doctest::Approx(-2.05).epsilon(1e-14));
  CHECK(v[1] == doctest::Approx(-5.0).epsilon(1e-14));

  spec.coefficients[0].mixing.family = Family::Normal;
  CHECK_THROWS_AS(validate_spec(spec), Error);
}

TEST_CASE("all-fixed model equals the closed-form MNL log-likelihood for any draw count") {
  Rng rng(8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = random_dataset(rng, 1 + rng.index(6), 1 + rng.index(5), 2 + rng.index(3), 1 + rng.index(3));
    const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Fixed);
    std::vector<double> beta;
    for (std::size_t k = 0; k < ds.attribute_names.size(); ++k) beta.push_back(2 * rng.uniform() - 1);
    const double oracle = brute_force_panel_ll(ds, 1, [&](std::size_t, std::size_t) { return beta; });
    for (std::size_t R : {1, 7, 50}) {
      const auto draws = make_simulation_draws(spec, ds.persons.size(), R, 5);
      const auto res = mixed_panel_ll(spec, ds, draws, beta);
      CHECK(rel_diff(res.ll, oracle) < 1e-12);
    }
  }
}

TEST_CASE("zero parameters give -sum ln J") {
  Rng rng(9);
  const auto ds = random_dataset(rng, 5, 3, 4, 2);
  for (Family f : {Family::Fixed, Family::Normal, Family::Uniform}) {
    const ModelSpec spec = mixl::testing::attribute_spec(ds, f);
    const auto draws = make_simulation_draws(spec, 5, 10, 1);
    const std::vector<double> zeros(layout(spec).size(), 0.0);
    CHECK(rel_diff(mixed_panel_ll(spec, ds, draws, zeros).ll, -15.0 * std::log(4.0)) < 1e-12);
  }
}

TEST_CASE("normal coefficient matches brute-force enumeration over draws") {
  Rng rng(10);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t N = 1 + rng.index(2), R = 1 + rng.index(3);
    const auto ds = random_dataset(rng, N, 1 + rng.index(3), 2 + rng.index(2), 2);
    ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Normal);
    spec.coefficients[1].mixing.family = Family::Fixed;
    const std::vector<double> params{0.3, 1.1, -0.7};
    const auto draws = make_simulation_draws(spec, N, R, 100 + static_cast<std::uint64_t>(rep));
    const double oracle = brute_force_panel_ll(ds, R, [&](std::size_t n, std::size_t r) {
      return std::vector<double>{0.3 + 1.1 * draws.normal(n, r, 0), -0.7};
    });
    CHECK(std::abs(mixed_panel_ll(spec, ds, draws, params).ll - oracle) < 1e-12);
  }
}

TEST_CASE("hand-computed single task with two draws") {
  ChoiceDataset ds;
  ds.attribute_names = {"x"};
  ds.attribute_levels = {{}};
  ds.alternative_labels = {"a0", "a1"};
  ds.persons.push_back({"1", {make_task({{1.0}, {0.0}}, 0)}, {}});
  const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Normal);
  const auto draws = make_simulation_draws(spec, 1, 2, 4);
  const double z0 = draws.normal(0, 0, 0), z1 = draws.normal(0, 1, 0);
  const double expected = std::log(0.5 * (sigmoid(0.5 + 2 * z0) + sigmoid(0.5 + 2 * z1)));
  CHECK(std::abs(mixed_panel_ll(spec, ds, draws, std::vector<double>{0.5, 2.0}).ll - expected) < 1e-14);
}

TEST_CASE("draw order does not matter and zero spread ignores the draw count") {
  Rng rng(12);
  const auto ds = random_dataset(rng, 4, 3, 3, 2);
  const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Normal);
  const auto draws = make_simulation_draws(spec, 4, 9, 2);
  // reverse the draw index of every person
  std::vector<double> u(draws.uniform.values().begin(), draws.uniform.values().end());
  const std::size_t R = 9, D = 2;
  std::vector<double> rev(u.size());
  for (std::size_t p = 0; p < 4; ++p)
    for (std::size_t r = 0; r < R; ++r)
      for (std::size_t d = 0; d < D; ++d) rev[(p * R + r) * D + d] = u[(p * R + (R - 1 - r)) * D + d];
  SimulationDraws flipped = draws;
  flipped.uniform = DrawBlock(4, R, D, DrawKind::Uniform01, 2, rev);
  flipped.normal = to_std_normal(flipped.uniform);
  const std::vector<double> params{0.4, 0.9, -0.3, 0.5};
  CHECK(std::abs(mixed_panel_ll(spec, ds, draws, params).ll - mixed_panel_ll(spec, ds, flipped, params).ll) < 1e-12);

  const std::vector<double> pinned{0.4, 0.0, -0.3, 0.0};
  const double a = mixed_panel_ll(spec, ds, make_simulation_draws(spec, 4, 3, 1), pinned).ll;
  const double b = mixed_panel_ll(spec, ds, make_simulation_draws(spec, 4, 40, 9), pinned).ll;
  CHECK(std::abs(a - b) < 1e-12);
}

TEST_CASE("every family evaluates against the enumeration oracle") {
  Rng rng(13);
  const auto ds = random_dataset(rng, 2, 3, 3, 1);
  for (Family f : kRandomFamilies) {
    CAPTURE(family_name(f));
    const ModelSpec spec = mixl::testing::attribute_spec(ds, f);
    std::vector<double> params;
    switch (f) {
      case Family::AsymTriangular: params = {-1.0, 1.0, 0.2}; break;
      case Family::Fm2: params = {0.1, 0.5, -0.4}; break;
      case Family::Fm3: params = {0.1, 0.5, -0.4, 0.3}; break;
      default: params = {0.2, 0.6};
    }
    const auto draws = make_simulation_draws(spec, 2, 3, 6);
    const double oracle = brute_force_panel_ll(ds, 3, [&](std::size_t n, std::size_t r) {
      const double u = draws.uniform(n, r, 0);
      const double z = draws.normal(n, r, 0);
      const auto& p = params;
      switch (f) {
        case Family::Normal: return std::vector<double>{p[0] + p[1] * z};
        case Family::Uniform: return std::vector<double>{p[0] + p[1] * u};
        case Family::Triangular: return std::vector<double>{p[0] + p[1] * (u + draws.uniform(n, r, 1))};
        case Family::Lognormal: return std::vector<double>{-std::exp(p[0] + p[1] * z)};
        case Family::Loguniform: return std::vector<double>{-std::exp(p[0] + p[1] * u)};
        case Family::AsymTriangular: {
          const double a = p[0], b = p[1], mode = 0.5 * (a + b) + p[2];
          const double fm = (mode - a) / (b - a);
          return std::vector<double>{u <= fm ? a + std::sqrt(u * (b - a) * (mode - a))
                                             : b - std::sqrt((1 - u) * (b - a) * (b - mode))};
        }
        case Family::Fm2: return std::vector<double>{p[0] + p[1] * u + p[2] * u * u};
        case Family::Fm3: return std::vector<double>{p[0] + p[1] * u + p[2] * u * u + p[3] * u * u * u};
        default: return std::vector<double>{};
      }
    });
    CHECK(std::abs(mixed_panel_ll(spec, ds, draws, params).ll - oracle) < 1e-12);
  }
}

TEST_CASE("probability floor is applied and counted") {
  ChoiceDataset ds;
  ds.attribute_names = {"x"};
  ds.attribute_levels = {{}};
  ds.alternative_labels = {"a0", "a1"};
  ds.persons.push_back({"1", {make_task({{1.0}, {0.0}}, 1)}, {}});
  ds.persons.push_back({"2", {make_task({{1.0}, {0.0}}, 0)}, {}});
  const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Fixed);
  const auto res = mixed_panel_ll(spec, ds, make_simulation_draws(spec, 2, 1, 1), std::vector<double>{1000.0});
  CHECK(res.n_floored == 1);
  CHECK(res.person_prob[0] == kProbabilityFloor);
  CHECK(res.ll == doctest::Approx(std::log(kProbabilityFloor)));
}

TEST_CASE("dimension and mode mismatches are rejected") {
  Rng rng(14);
  const auto ds = random_dataset(rng, 2, 2, 2, 2);
  const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Normal);
  const auto small = make_simulation_draws(mixl::testing::attribute_spec(ds, Family::Fixed), 2, 5, 1);
  try {
    mixed_panel_ll(spec, ds, small, std::vector<double>{0, 1, 0, 1});
    FAIL("expected DrawDimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DrawDimensionMismatch);
  }
  CHECK_THROWS_AS(rp_pair_ll(rp_spec(), ds, small, std::vector<double>(5, 0.0)), Error);
}

TEST_CASE("dual binary logit with an error component") {
  Rng rng(21);
  const auto ds = rp_dataset(rng, 6);
  const ModelSpec spec = rp_spec();
  const auto draws = make_simulation_draws(spec, 6, 3, 17);

  const std::vector<double> zero(5, 0.0);
  CHECK(rel_diff(rp_pair_ll(spec, ds, draws, zero).ll, 6 * 2 * std::log(0.5)) < 1e-12);

  // sigma_rho = 0: two independent closed-form binary logits
  const std::vector<double> p{0.3, -0.2, -0.5, 0.4, 0.0};
  double oracle = 0.0;
  for (const auto& person : ds.persons) {
    const double age = person.covariates.at("age");
    const double pc = sigmoid(0.3 - 0.2 * age), pe = sigmoid(-0.5 + 0.4 * age);
    oracle += std::log(person.covariates.at(kCigIndicator) == 1 ? pc : 1 - pc);
    oracle += std::log(person.covariates.at(kEcigIndicator) == 1 ? pe : 1 - pe);
  }
  CHECK(rel_diff(rp_pair_ll(spec, ds, draws, p).ll, oracle) < 1e-12);

  // sigma_rho = 1: enumerate persons x draws
  std::vector<double> q = p;
  q[4] = 1.0;
  double brute = 0.0;
  for (std::size_t n = 0; n < 2; ++n) {
    const auto& person = ds.persons[n];
    const double age = person.covariates.at("age");
    const double c = person.covariates.at(kCigIndicator), e = person.covariates.at(kEcigIndicator);
    double sum = 0.0;
    for (std::size_t r = 0; r < 3; ++r) {
      const double rho = draws.normal(n, r, 0);
      const double pc = sigmoid(0.3 - 0.2 * age + rho), pe = sigmoid(-0.5 + 0.4 * age + rho);
      sum += std::pow(pc, c) * std::pow(1 - pc, 1 - c) * std::pow(pe, e) * std::pow(1 - pe, 1 - e);
    }
    brute += std::log(sum / 3.0);
  }
  ChoiceDataset two = ds;
  two.persons.resize(2);
  const auto draws2 = make_simulation_draws(spec, 2, 3, 17);
  CHECK(draws2.normal(1, 2, 0) == draws.normal(1, 2, 0));
  CHECK(std::abs(rp_pair_ll(spec, two, draws2, q).ll - brute) < 1e-12);

  // outcome probabilities of one person sum to one over the four outcome pairs
  double total = 0.0;
  for (double c : {0.0, 1.0})
    for (double e : {0.0, 1.0}) {
      ChoiceDataset one = two;
      one.persons.resize(1);
      one.persons[0].covariates[kCigIndicator] = c;
      one.persons[0].covariates[kEcigIndicator] = e;
      total += rp_pair_ll(spec, one, make_simulation_draws(spec, 1, 3, 17), q).person_prob[0];
    }
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("shares by label") {
  Rng rng(22);
  auto ds = random_dataset(rng, 3, 2, 4, 2);
  const ModelSpec spec = mixl::testing::attribute_spec(ds, Family::Normal);
  const auto draws = make_simulation_draws(spec, 3, 5, 1);
  const CompiledModel model(spec, ds, draws);
  const auto zero = model.shares(std::vector<double>(4, 0.0));
  for (double s : zero.shares) CHECK(s == doctest::Approx(0.25).epsilon(1e-14));
  const auto t = model.shares(std::vector<double>{0.5, 1.0, -0.5, 0.3});
  CHECK(std::abs(std::accumulate(t.shares.begin(), t.shares.end(), 0.0) - 1.0) < 1e-12);

  // relabel to two groups of two: shares aggregate
  for (auto& p : ds.persons)
    for (auto& task : p.tasks)
      for (std::size_t j = 0; j < 4; ++j) task.alternatives[j].label = j < 2 ? "branded" : "unbranded";
  ds.alternative_labels = {"branded", "unbranded"};
  const CompiledModel grouped(spec, ds, draws);
  const auto g = grouped.shares(std::vector<double>{0.5, 1.0, -0.5, 0.3});
  REQUIRE(g.labels.size() == 2);
  CHECK(std::abs(g.shares[0] - (t.shares[0] + t.shares[1])) < 1e-12);
}
