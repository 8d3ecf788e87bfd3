#include <fstream>

#include <gtest/gtest.h>

#include "homchain/cli.hpp"
#include "homchain/io.hpp"

using namespace homchain;

namespace {

Json minimal() {
  return Json::parse(R"({
    "schema": "homchain/1",
    "distribution": {"kind": "iid_uniform_box", "box": {"delta": [1, 2], "epsilon": [3, 4]}}
  })");
}

std::vector<std::string> violations(const Json& j) {
  try {
    config_from_json(j);
  } catch (const ValidationError& e) {
    return e.violations();
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

} // namespace

TEST(Config, MinimalDefaults) {
  const auto c = config_from_json(minimal());
  EXPECT_EQ(c.name, "run");
  EXPECT_EQ(c.seed, 1u);
  EXPECT_EQ(c.distribution.kind, DistributionKind::iid_uniform_box);
  EXPECT_EQ(c.distribution.K, 1);
  EXPECT_EQ(c.schedule, (std::vector<std::int64_t>{200, 800}));
  EXPECT_FALSE(c.z.has_value());
  EXPECT_FALSE(c.table_fixture.has_value());
}

TEST(Config, ShippedExamplesLoad) {
  for (const char* name : {"uniform_box", "two_valued", "deterministic", "markov", "nonstationary_fixture", "nonconvex_table"}) {
    const auto c = load_config(std::string(HOMCHAIN_EXAMPLES_DIR) + "/" + name + ".json");
    EXPECT_EQ(c.name, name);
  }
}

TEST(Config, SchemaRequired) {
  auto j = minimal();
  j["schema"] = "homchain/0";
  EXPECT_TRUE(mentions(violations(j), "schema"));
  j.erase("schema");
  EXPECT_TRUE(mentions(violations(j), "schema"));
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
  auto j = minimal();
  j["sampels"] = 4;
  EXPECT_TRUE(mentions(violations(j), "'sampels'"));
  j = minimal();
  j["distribution"]["box"]["delta_lo"] = 1;
  EXPECT_TRUE(mentions(violations(j), "'delta_lo'"));
  j = minimal();
  j["solver"] = Json{{"gradtol", 1e-9}};
  EXPECT_TRUE(mentions(violations(j), "'gradtol'"));
  j = minimal();
  j["verify"] = Json{{"probes", 3}};
  EXPECT_TRUE(mentions(violations(j), "'probes'"));
}

TEST(Config, CollectsAllViolations) {
  auto j = minimal();
  j["z_grid"] = {1.0, 0.5};
  j["schedule"] = {100};
  j["samples"] = 1;
  j["oracle"] = Json{{"grid_step", 0.1}};
  const auto v = violations(j);
  EXPECT_TRUE(mentions(v, "z_grid"));
  EXPECT_TRUE(mentions(v, "schedule"));
  EXPECT_TRUE(mentions(v, "samples"));
  EXPECT_TRUE(mentions(v, "grid_step"));
}

TEST(Config, DistributionValidation) {
  auto j = minimal();
  j["distribution"] = Json::parse(R"({"kind": "iid_discrete", "support": [
      {"potential": {"delta": 1, "epsilon": 1}, "probability": 0.5},
      {"potential": {"delta": 2, "epsilon": 1}, "probability": 0.4}]})");
  EXPECT_FALSE(violations(j).empty());
  j["distribution"]["support"][1]["probability"] = 0.5;
  EXPECT_TRUE(violations(j).empty());
  j["distribution"]["kind"] = "gaussian";
  EXPECT_THROW(config_from_json(j), std::exception);
}

TEST(Config, WrongTypeReported) {
  auto j = minimal();
  j["samples"] = "many";
  EXPECT_TRUE(mentions(violations(j), "samples"));
}

TEST(Config, MissingFileAndBadJson) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), std::runtime_error);
  const auto path = std::filesystem::temp_directory_path() / "homchain_bad.json";
  write_text(path, "{ not json");
  EXPECT_THROW(load_config(path.string()), ValidationError);
}

TEST(Config, HashIsStableAndSensitive) {
  const auto a = config_from_json(minimal());
  const auto b = config_from_json(Json::parse(minimal().dump(2)));
  EXPECT_EQ(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
  auto j = minimal();
  j["seed"] = 2;
  EXPECT_NE(config_from_json(j).hash(), a.hash());
}

TEST(Hash, Fnv1aReferenceValues) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Distribution, JsonRoundTripPreservesHash) {
  const std::vector<DistributionSpec> specs = {
      DistributionSpec::uniform_box({1, 2, 3, 4}, 2), two_valued_spec(), markov_example_spec(),
      DistributionSpec::deterministic(PotentialSpec::shifted(1.5, 2.0, 0.3))};
  for (const auto& s : specs) {
    const auto back = distribution_from_json(to_json(s));
    EXPECT_EQ(spec_hash(back), spec_hash(s));
    EXPECT_EQ(back.K, s.K);
  }
}

TEST(Format, ShortestRoundTripAndInfinity) {
  for (double v : {0.1, -3.5, 1e-300, 123456.789, 2.0 / 3.0}) EXPECT_EQ(parse_double(format_double(v)), v);
  EXPECT_EQ(format_double(kInf), "inf");
  EXPECT_EQ(parse_double("inf"), kInf);
  EXPECT_THROW(parse_double("abc"), std::exception);
}

TEST(TableCsv, WriteAndReadBack) {
  JhomTable t;
  t.z_grid = {-1.0, 0.5, 2.0};
  t.values = {kInf, 12.25, -3.5};
  t.ci = {0.0, 0.125, 0.01};
  t.notes.assign(3, "");
  const auto text = table_csv(t, "00000000deadbeef");
  EXPECT_EQ(text.rfind("# config_hash: 00000000deadbeef\nz,value,ci\n", 0), 0u);
  EXPECT_NE(text.find("-1,inf,0\n"), std::string::npos);
  const auto back = read_table_csv(text);
  EXPECT_EQ(back.z_grid, t.z_grid);
  EXPECT_EQ(back.values, t.values);
  EXPECT_EQ(back.ci, t.ci);
  EXPECT_THROW(read_table_csv("z,J,ci\n1,2,3\n"), ValidationError);
  EXPECT_THROW(read_table_csv("z,value,ci\n1,2\n"), ValidationError);
}

TEST(TableMeta, CarriesHashesAndFailures) {
  JhomTable t;
  t.z_grid = {1.0, 2.0};
  t.values = {1.0, std::nan("")};
  t.ci = {0.0, 0.0};
  t.notes = {"", "solver failed"};
  t.meta.K = 1;
  const auto j = table_meta_json(t, "abc");
  EXPECT_EQ(j["config_hash"], "abc");
  EXPECT_EQ(j["schema"], kSchema);
  ASSERT_EQ(j["failures"].size(), 1u);
  EXPECT_EQ(j["failures"][0]["z"], 2.0);
}

TEST(TableValidate, RejectsBadTables) {
  JhomTable t;
  t.z_grid = {0.0, 1.0};
  t.values = {1.0, 2.0};
  t.ci = {0.0, 0.0};
  t.notes.assign(2, "");
  EXPECT_THROW(t.validate(), ValidationError);
  t.values[0] = kInf;
  EXPECT_NO_THROW(t.validate());
  t.z_grid = {1.0, 1.0};
  EXPECT_THROW(t.validate(), ValidationError);
}

TEST(DeformationCsv, Columns) {
  const auto text = deformation_csv(Deformation::affine(2, 3.0), "h");
  EXPECT_EQ(text, "# config_hash: h\ni,x,u\n0,0,0\n1,0.5,1.5\n2,1,3\n");
}
