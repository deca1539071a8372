#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "netspec/config.hpp"
#include "netspec/errors.hpp"
#include "netspec/io.hpp"

using namespace netspec;

namespace {

TEST(ConfigParse, SectionsCommentsAndLists) {
  ConfigMap c = ConfigMap::from_string(
      "# top comment\n"
      "env = kuramoto   # trailing comment\n"
      "seeds = 3, 5 7\n"
      "\n"
      "[env.kuramoto]\n"
      "n = 12\n"
      "dt = 0.02\n"
      "[train]\n"
      "kappa = 2\n");
  EXPECT_EQ(c.get_string("env"), "kuramoto");
  EXPECT_EQ(c.get_int("env.kuramoto.n"), 12);
  EXPECT_DOUBLE_EQ(c.get_double("env.kuramoto.dt"), 0.02);
  EXPECT_EQ(c.get_int("train.kappa"), 2);
  std::vector<std::uint64_t> seeds = c.get_uint_list("seeds");
  ASSERT_EQ(seeds.size(), 3u);
  EXPECT_EQ(seeds[0], 3u);
  EXPECT_EQ(seeds[2], 7u);
  EXPECT_TRUE(c.has("train.kappa"));
  EXPECT_FALSE(c.has("train.eta"));
}

TEST(ConfigParse, DefaultsApplyOnlyWhenMissing) {
  ConfigMap c = ConfigMap::from_string("x = 4\n");
  EXPECT_EQ(c.get_int("x", 9), 4);
  EXPECT_EQ(c.get_int("y", 9), 9);
  EXPECT_DOUBLE_EQ(c.get_double("z", 1.5), 1.5);
  EXPECT_EQ(c.get_string("w", "dflt"), "dflt");
}

TEST(ConfigParse, ErrorsCarryOriginAndLine) {
  try {
    ConfigMap::from_string("a = 1\nbroken line\n", "test.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("test.ini:2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ConfigMap::from_string("[unclosed\n"), ConfigError);
  EXPECT_THROW(ConfigMap::from_string("= novalue\n"), ConfigError);
  EXPECT_THROW(ConfigMap::from_string("a = 1\na = 2\n"), ConfigError);  // duplicate
  try {
    ConfigMap::from_string("[s]\nk = 1\n[s]\nk = 2\n", "dup.ini");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("s.k"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, NumbersRejectTrailingGarbage) {
  ConfigMap c = ConfigMap::from_string("a = 12x\nb = 1.5.3\nc = 7\n");
  EXPECT_THROW(c.get_int("a"), ConfigError);
  EXPECT_THROW(c.get_double("b"), ConfigError);
  EXPECT_EQ(c.get_int("c"), 7);
}

TEST(ConfigParse, MissingRequiredKeyNamesField) {
  ConfigMap c = ConfigMap::from_string("env = thermal\n");
  try {
    load_run_config(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("train.kappa"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, UnknownKeysAreHardErrors) {
  ConfigMap c = ConfigMap::from_string(
      "env = thermal\n[train]\nkappa = 1\n[env.thermal]\ntypo_key = 3\n");
  try {
    load_run_config(c);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("env.thermal.typo_key"), std::string::npos) << e.what();
  }
}

TEST(ConfigParse, LoadThermalRunConfig) {
  ConfigMap c = ConfigMap::from_string(
      "env = thermal\n"
      "seeds = 0,1\n"
      "out = results\n"
      "[env.thermal]\n"
      "n = 10\n"
      "zeta_ij = 0.4\n"
      "alpha_i = 3.0\n"
      "[train]\n"
      "kappa = 1\n"
      "kappa_pi = 1\n"
      "m = 50\n"
      "ms = 200\n"
      "eta = 0.2\n"
      "sigma_pi = 1.0\n"
      "normalize = global\n");
  RunConfig rc = load_run_config(c);
  EXPECT_EQ(rc.env_name, "thermal");
  EXPECT_EQ(rc.thermal.n, 10);
  EXPECT_DOUBLE_EQ(rc.thermal.zeta_ij, 0.4);
  EXPECT_DOUBLE_EQ(rc.thermal.alpha, 3.0);
  EXPECT_EQ(rc.train.kappa, 1);
  EXPECT_EQ(rc.train.m, 50);
  EXPECT_EQ(rc.train.Ms, 200);
  EXPECT_EQ(rc.train.normalization, GradNormalization::kGlobal);
  EXPECT_EQ(rc.out_dir, "results");
  ASSERT_EQ(rc.seeds.size(), 2u);
  // untouched params keep library defaults
  EXPECT_DOUBLE_EQ(rc.thermal.gamma, 0.75);
  EXPECT_DOUBLE_EQ(rc.thermal.rho, 3.0);
}

TEST(ConfigParse, KuramotoPresetsAndDefaults) {
  ConfigMap c = ConfigMap::from_string("env = kuramoto\n[train]\nkappa = 2\n");
  RunConfig rc = load_run_config(c);
  EXPECT_EQ(rc.kuramoto.n, 40);
  EXPECT_EQ(rc.train.horizon, 800);  // long-horizon default for this env
  EXPECT_EQ(rc.train.K, 200);
  EXPECT_EQ(rc.seeds.size(), 5u);  // default seed set

  ConfigMap cd = ConfigMap::from_string(
      "env = kuramoto\n[env.kuramoto]\npreset = draft\n[train]\nkappa = 2\nhorizon = 100\n");
  RunConfig rd = load_run_config(cd);
  EXPECT_EQ(rd.kuramoto.n, 20);
  EXPECT_DOUBLE_EQ(rd.kuramoto.omega_target, 0.75);
  EXPECT_DOUBLE_EQ(rd.kuramoto.amax, 3.0);
  EXPECT_EQ(rd.train.horizon, 100);  // explicit key overrides preset default
}

TEST(ConfigParse, TrainKappaOptionalWhenRequested) {
  ConfigMap c = ConfigMap::from_string("env = kuramoto\n[decay]\nkappa_max = 3\n");
  RunConfig rc = load_run_config(c, /*require_train_kappa=*/false);
  EXPECT_EQ(rc.decay_kappa_max, 3);
  EXPECT_EQ(rc.train.kappa, 1);  // library default retained
}

TEST(ConfigParse, RejectsBadEnvAndEmptySeeds) {
  EXPECT_THROW(load_run_config(ConfigMap::from_string("env = cartpole\n")), ConfigError);
  EXPECT_THROW(load_run_config(ConfigMap::from_string("env = thermal\nseeds =\n")), ConfigError);
  EXPECT_THROW(
      load_run_config(ConfigMap::from_string("env = thermal\n[train]\nkappa = 1\nnormalize = l2\n")),
      ConfigError);
}

TEST(ConfigParse, FromFileReportsPathInErrors) {
  std::string path = ::testing::TempDir() + "cfg_bad.ini";
  {
    std::ofstream f(path);
    f << "a = 1\nnonsense\n";
  }
  try {
    ConfigMap::from_file(path);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(path + ":2"), std::string::npos) << e.what();
  }
  std::remove(path.c_str());
  EXPECT_THROW(ConfigMap::from_file("/nonexistent/nowhere.ini"), ConfigError);
}

TEST(Hashing, Fnv1aKnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);    // offset basis
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);   // published test vector
  EXPECT_EQ(fnv1a64_hex(""), "fnv1a64:cbf29ce484222325");
  EXPECT_NE(fnv1a64("ab"), fnv1a64("ba"));
}

TEST(Formatting, DoublesRoundTripAndAreShort) {
  for (double v : {0.1, 1.0 / 3.0, 12345.6789, 1e-300, -0.0, 3.0, 0.3 + 0.3 + 0.3}) {
    std::string s = format_double(v);
    EXPECT_EQ(std::strtod(s.c_str(), nullptr), v) << s;
  }
  EXPECT_EQ(format_double(3.0), "3");
  EXPECT_EQ(format_double(0.5), "0.5");
}

TEST(Csv, SchemaMarkerHeaderAndRows) {
  std::string path = ::testing::TempDir() + "csv_test.csv";
  {
    CsvWriter w(path, {"a", "b"});
    w.row(std::vector<double>{1.5, 2.0});
    w.row(std::vector<std::string>{"x", "y"});
    EXPECT_THROW(w.row(std::vector<double>{1.0}), ConfigError);  // wrong cell count
  }
  std::ifstream f(path);
  std::string l1, l2, l3, l4;
  std::getline(f, l1);
  std::getline(f, l2);
  std::getline(f, l3);
  std::getline(f, l4);
  EXPECT_EQ(l1, "# schema=v1");
  EXPECT_EQ(l2, "a,b");
  EXPECT_EQ(l3, "1.5,2");
  EXPECT_EQ(l4, "x,y");
  std::remove(path.c_str());
}

TEST(Csv, RejectsUnwritablePath) {
  EXPECT_THROW(CsvWriter("/nonexistent/dir/file.csv", {"a"}), ConfigError);
}

}  // namespace
