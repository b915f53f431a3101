#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "kinlab/lab/commands.hpp"

namespace fs = std::filesystem;
using namespace kinlab::lab;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("kinlab_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Runs the lab binary; returns its exit code.
int lab(const std::string& command, const std::string& config, const std::string& out, const std::string& extra = "") {
  const fs::path cfg = scratch() / (out + ".json");
  std::ofstream(cfg) << config;
  const std::string cmd = std::string(KINLAB_LAB_EXE) + " " + command + " --config " + cfg.string() + " --out " +
                          (scratch() / out).string() + " " + extra + " > " + (scratch() / (out + ".log")).string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

json summary(const std::string& out) { return json::parse(slurp(scratch() / out / "summary.json")); }

std::string without_wall_clock(std::string s) {
  const auto at = s.find("\"wall_clock_seconds\"");
  return at == std::string::npos ? s : s.substr(0, at);
}

}  // namespace

TEST(Config, UnknownKeyIsHardError) {
  GeometryParams p;
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "sampels": 4})")), kinlab::ConfigError);
}

TEST(Config, SeedMandatory) {
  GeometryParams p;
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"samples": 4})")), kinlab::ConfigError);
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": -1})")), kinlab::ConfigError);
}

TEST(Config, CapsAndTypes) {
  GeometryParams p;
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "samples": 10000000})")), kinlab::ConfigError);
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "samples": 2.5})")), kinlab::ConfigError);
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "dims": [4]})")), kinlab::ConfigError);
  HolderParams h;
  EXPECT_THROW(holder_schema(h).apply(json::parse(R"({"seed": 1, "boundary": "neumann"})")), kinlab::ConfigError);
  KernelParams k;
  EXPECT_THROW(kernel_schema(k).apply(json::parse(R"({"seed": 1, "d": 3})")), kinlab::ConfigError);
}

TEST(Config, CommandKeyMustMatch) {
  GeometryParams p;
  EXPECT_NO_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "command": "verify-geometry"})")));
  EXPECT_THROW(geometry_schema(p).apply(json::parse(R"({"seed": 1, "command": "covering"})")), kinlab::ConfigError);
}

TEST(Config, HashDependsOnResolvedValues) {
  GeometryParams a, b, c;
  const auto ra = geometry_schema(a).apply(json::parse(R"({"seed": 1})"));
  const auto rb = geometry_schema(b).apply(json::parse(R"({"samples": 10000, "seed": 1})"));
  const auto rc = geometry_schema(c).apply(json::parse(R"({"seed": 2})"));
  EXPECT_EQ(config_hash(ra), config_hash(rb));  // explicit default == implicit default
  EXPECT_NE(config_hash(ra), config_hash(rc));
}

TEST(Report, CsvFloatsHave17Digits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0 / 0.0), "inf");
  Table t{"x", {"a", "b", "c"}, {{1L, 0.1, std::string("p,q")}}};
  EXPECT_EQ(table_csv(t), "a,b,c\n1,0.10000000000000001,\"p,q\"\n");
}

TEST(Cli, GeometryDefaultsPass) {
  EXPECT_EQ(lab("verify-geometry", R"({"seed": 3, "samples": 400})", "geo"), 0);
  const auto s = summary("geo");
  EXPECT_TRUE(s["pass"].get<bool>());
  EXPECT_EQ(s["seed"].get<int>(), 3);
  EXPECT_EQ(s["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(fs::exists(scratch() / "geo" / "distance_pairs.csv"));
}

TEST(Cli, BrokenToleranceFailsOptimality) {
  EXPECT_EQ(lab("verify-geometry", R"({"seed": 3, "samples": 200, "tol": 1000})", "geo_tol"), 2);
  for (const auto& c : summary("geo_tol")["checks"]) {
    const auto name = c["name"].get<std::string>();
    EXPECT_EQ(c["pass"].get<bool>(), name != "optimality") << name;
  }
}

TEST(Cli, ZeroSamplesIsVacuousPassWithWarning) {
  EXPECT_EQ(lab("verify-geometry", R"({"seed": 3, "samples": 0})", "geo_zero"), 0);
  EXPECT_FALSE(summary("geo_zero")["warnings"].empty());
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(lab("verify-geometry", R"({"seed": 3, "sampels": 10})", "bad_key"), 3);
  EXPECT_EQ(lab("verify-geometry", R"({"samples": 10})", "no_seed"), 3);
  EXPECT_EQ(lab("verify-geometry", "{not json", "bad_json"), 3);
  EXPECT_EQ(lab("verify-kernel", R"({"seed": 1, "d": 3})", "bad_d"), 3);
  EXPECT_EQ(lab("verify-geometry", R"({"seed": 3})", "bad_jobs", "--jobs 0"), 3);
}

TEST(Cli, CoarseAdjointFlagged) {
  EXPECT_EQ(lab("verify-kernel",
                R"({"seed": 1, "adjoint_coarse": [6, 6, 7], "adjoint_fine": [8, 8, 7], "young_pairs": 0,
                    "residual_meshes": [24, 48], "residual_order": 0, "weak_resolutions": [16, 32]})",
                "kern_coarse"),
            2);
  for (const auto& c : summary("kern_coarse")["checks"])
    if (c["name"] == "adjoint_identity") EXPECT_FALSE(c["pass"].get<bool>());
}

TEST(Cli, ReportsByteIdenticalAcrossRerunsAndJobs) {
  const std::string cfg = R"({"seed": 11, "vitali_families": 2, "maximal_instances": 4, "interval_families": 50, "ink_instances": 4})";
  ASSERT_EQ(lab("covering", cfg, "cov_a", "--jobs 1"), 0);
  ASSERT_EQ(lab("covering", cfg, "cov_b", "--jobs 3"), 0);
  EXPECT_EQ(without_wall_clock(slurp(scratch() / "cov_a" / "summary.json")),
            without_wall_clock(slurp(scratch() / "cov_b" / "summary.json")));
  for (const auto& e : fs::directory_iterator(scratch() / "cov_a"))
    if (e.path().extension() == ".csv") EXPECT_EQ(slurp(e.path()), slurp(scratch() / "cov_b" / e.path().filename())) << e.path();
}

TEST(Cli, CoveringEmptyFamiliesVacuous) {
  EXPECT_EQ(lab("covering", R"({"seed": 1, "vitali_families": 0, "maximal_instances": 0, "interval_families": 0, "ink_instances": 0})",
                "cov_empty"),
            0);
  EXPECT_EQ(summary("cov_empty")["warnings"].size(), 4u);
}

TEST(Cli, HolderConstantDataSentinel) {
  EXPECT_EQ(lab("holder-scan",
                R"({"seed": 1, "kinds": ["random"], "ratios": [0.5], "instances": 1, "n": 32, "refine": false,
                    "boundary": "constant", "smooth_n": 64})",
                "holder_const"),
            0);
  const auto s = summary("holder_const");
  for (const auto& c : s["checks"])
    if (c["name"] == "smooth_alpha") EXPECT_EQ(c["metrics"]["alpha"], "inf");
}

TEST(Cli, HolderCheckerboardPositive) {
  EXPECT_EQ(lab("holder-scan", R"({"seed": 1, "kinds": ["checkerboard"], "ratios": [0.2], "instances": 1, "n": 64, "smooth": false})",
                "holder_cb"),
            0);
  EXPECT_TRUE(fs::exists(scratch() / "holder_cb" / "holder_alpha_histogram.csv"));
  EXPECT_TRUE(fs::exists(scratch() / "holder_cb" / "holder_profiles.csv"));
}

TEST(Cli, HarnackConstantAndSigned) {
  EXPECT_EQ(lab("harnack", R"({"seed": 1, "instances": 1, "initial": "constant", "n_coarse": 32, "n_fine": 64, "expansion_instances": 0})",
                "harn_const"),
            0);
  for (const auto& c : summary("harn_const")["checks"])
    if (c["name"] == "harnack_finite") EXPECT_NEAR(c["metrics"]["max_quotient"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(lab("harnack", R"({"seed": 1, "instances": 1, "initial": "signed", "n_coarse": 32, "n_fine": 64, "expansion_instances": 0})",
                "harn_signed"),
            3);
}

TEST(Cli, SchemaListing) {
  const int st = std::system((std::string(KINLAB_LAB_EXE) + " schema harnack > " + (scratch() / "schema.md").string()).c_str());
  ASSERT_EQ(WEXITSTATUS(st), 0);
  EXPECT_NE(slurp(scratch() / "schema.md").find("`omega`"), std::string::npos);
}
