#include <doctest.h>

#include <algorithm>

#include "mixl/data.hpp"
#include "mixl/errors.hpp"
#include "support.hpp"

using namespace mixl;
using mixl::testing::TempDir;
using mixl::testing::write_text;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::Usage;
}

LongCsvSchema price_schema() {
  LongCsvSchema s;
  s.attributes = {"price"};
  return s;
}

}  // namespace

TEST_CASE("smallest panel loads with the chosen index") {
  TempDir dir;
  write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,0,2\n1,1,B,1,3\n");
  const auto ds = load_long_csv(dir / "d.csv", price_schema());
  REQUIRE(ds.persons.size() == 1);
  CHECK(ds.persons[0].tasks.size() == 1);
  CHECK(ds.persons[0].tasks[0].chosen == 1);
  CHECK(ds.persons[0].tasks[0].alternatives[1].x[0] == 3.0);
  CHECK(ds.alternative_labels == std::vector<std::string>{"A", "B"});
}

TEST_CASE("row order within a task is the alternative order, tasks group across interleaved rows") {
  TempDir dir;
  write_text(dir / "d.csv",
             "person,task,alternative,chosen,price\n"
             "1,1,B,0,5\n2,1,A,1,1\n1,1,A,1,4\n2,1,B,0,2\n1,2,A,0,1\n1,2,B,1,2\n");
  const auto ds = load_long_csv(dir / "d.csv", price_schema());
  REQUIRE(ds.persons.size() == 2);
  CHECK(ds.persons[0].id == "1");
  CHECK(ds.persons[0].tasks.size() == 2);
  CHECK(ds.persons[0].tasks[0].alternatives[0].label == "B");
  CHECK(ds.persons[0].tasks[0].chosen == 1);
  CHECK(ds.persons[1].tasks[0].chosen == 0);
}

TEST_CASE("load errors") {
  TempDir dir;
  SUBCASE("no choice in a task") {
    write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,0,2\n1,1,B,0,3\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::TaskWithoutChoice);
  }
  SUBCASE("two choices in a task") {
    write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,1,2\n1,1,B,1,3\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::TaskWithMultipleChoices);
  }
  SUBCASE("missing column") {
    write_text(dir / "d.csv", "person,task,alternative,chosen\n1,1,A,1\n1,1,B,0\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::MissingColumn);
  }
  SUBCASE("text in a numeric attribute") {
    write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,1,cheap\n1,1,B,0,3\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::NonNumericAttribute);
  }
  SUBCASE("empty cell is not imputed") {
    write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,1,\n1,1,B,0,3\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::MissingAttributeValue);
  }
  SUBCASE("single-alternative task") {
    write_text(dir / "d.csv", "person,task,alternative,chosen,price\n1,1,A,1,2\n");
    CHECK(code_of([&] { load_long_csv(dir / "d.csv", price_schema()); }) == ErrorCode::TooFewAlternatives);
  }
}

TEST_CASE("validate rejects duplicate person ids") {
  Rng rng(3);
  auto ds = mixl::testing::random_dataset(rng, 2, 1, 2, 1);
  ds.persons[1].id = ds.persons[0].id;
  CHECK(code_of([&] { validate(ds); }) == ErrorCode::DuplicatePerson);
}

namespace {

ChoiceDataset flavour_dataset() {
  TempDir dir;
  write_text(dir / "f.csv",
             "person,task,alternative,chosen,flavour,price\n"
             "1,1,x,1,tobacco,4\n1,1,y,0,menthol,5\n1,2,x,0,fruit,4\n1,2,y,1,sweet,6\n"
             "2,1,x,0,sweet,5\n2,1,y,1,tobacco,4\n");
  LongCsvSchema s;
  s.attributes = {"flavour", "price"};
  s.categorical = {"flavour"};
  return load_long_csv(dir / "f.csv", s);
}

}  // namespace

TEST_CASE("dummy coding of a four-level attribute") {
  const auto raw = flavour_dataset();
  CHECK(raw.attribute_levels[0] == std::vector<std::string>{"tobacco", "menthol", "fruit", "sweet"});
  const auto coded = apply_coding(raw, {{"flavour", CodingRule::Kind::Dummy, "tobacco"}});
  CHECK(coded.attribute_names ==
        std::vector<std::string>{"flavour_menthol", "flavour_fruit", "flavour_sweet", "price"});
  // tobacco rows are all zero, price passes through untouched
  const auto& t = coded.persons[0].tasks[0].alternatives[0];
  CHECK(t.x == std::vector<double>{0, 0, 0, 4});
  const auto& m = coded.persons[0].tasks[0].alternatives[1];
  CHECK(m.x == std::vector<double>{1, 0, 0, 5});

  for (const auto& p : coded.persons)
    for (const auto& task : p.tasks)
      for (std::size_t j = 0; j < task.alternatives.size(); ++j) {
        const auto& x = task.alternatives[j].x;
        const double ones = x[0] + x[1] + x[2];
        CHECK(ones <= 1.0);
        const auto& raw_alt = raw.persons[&p - &coded.persons[0]].tasks[&task - &p.tasks[0]].alternatives[j];
        CHECK((ones == 0.0) == (raw_alt.x[0] == 0.0));  // level 0 is tobacco
      }
}

TEST_CASE("coding errors") {
  const auto raw = flavour_dataset();
  CHECK(code_of([&] { apply_coding(raw, {{"flavour", CodingRule::Kind::Dummy, "mint"}}); }) == ErrorCode::UnknownLevel);
  CHECK(code_of([&] { apply_coding(raw, {{"colour", CodingRule::Kind::Dummy, "red"}}); }) == ErrorCode::UnknownAttribute);
}

TEST_CASE("continuous rule is the identity") {
  const auto raw = flavour_dataset();
  const auto coded = apply_coding(raw, {{"price", CodingRule::Kind::Continuous, ""}});
  CHECK(coded == raw);
}

TEST_CASE("numeric attributes can be dummy coded by value") {
  const auto raw = flavour_dataset();
  const auto coded = apply_coding(raw, {{"price", CodingRule::Kind::Dummy, "4"}});
  CHECK(coded.attribute_names == std::vector<std::string>{"flavour", "price_5", "price_6"});
}

TEST_CASE("export and reload round-trips") {
  TempDir dir;
  const auto raw = flavour_dataset();
  LongCsvSchema s;
  s.attributes = {"flavour", "price"};
  s.categorical = {"flavour"};
  write_long_csv(raw, dir / "out.csv", s);
  CHECK(load_long_csv(dir / "out.csv", s) == raw);

  // property: random numeric panels survive the round trip
  Rng rng(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto ds = mixl::testing::random_dataset(rng, 1 + rng.index(5), 1 + rng.index(4), 2 + rng.index(3),
                                                  1 + rng.index(3));
    LongCsvSchema ns;
    ns.attributes = ds.attribute_names;
    write_long_csv(ds, dir / "r.csv", ns);
    const auto back = load_long_csv(dir / "r.csv", ns);
    CHECK(back.persons == ds.persons);
    CHECK(back.attribute_names == ds.attribute_names);
  }
}

TEST_CASE("revealed-preference file") {
  TempDir dir;
  write_text(dir / "rp.csv", "person,cig,ecig,age\n1,1,0,30\n2,0,1,45\n3,1,1,22\n");
  RpCsvSchema s;
  s.covariates = {"age"};
  const auto ds = load_rp_csv(dir / "rp.csv", s);
  CHECK(ds.mode == DatasetMode::RpPair);
  REQUIRE(ds.persons.size() == 3);
  CHECK(ds.persons[1].covariates.at(kCigIndicator) == 0.0);
  CHECK(ds.persons[1].covariates.at(kEcigIndicator) == 1.0);
  CHECK(ds.persons[2].covariates.at("age") == 22.0);

  write_text(dir / "bad.csv", "person,cig,ecig,age\n1,2,0,30\n");
  CHECK(code_of([&] { load_rp_csv(dir / "bad.csv", s); }) == ErrorCode::NonNumericAttribute);
  write_text(dir / "none.csv", "person,cig,age\n1,1,30\n");
  CHECK(code_of([&] { load_rp_csv(dir / "none.csv", s); }) == ErrorCode::MissingIndicator);
}

TEST_CASE("quoted fields, CRLF and a byte-order mark are tolerated") {
  TempDir dir;
  write_text(dir / "q.csv", "\xEF\xBB\xBFperson,task,alternative,chosen,price\r\n\"p,1\",1,\"A\",1,2\r\n\"p,1\",1,B,0,3\r\n");
  const auto ds = load_long_csv(dir / "q.csv", price_schema());
  CHECK(ds.persons[0].id == "p,1");
}
