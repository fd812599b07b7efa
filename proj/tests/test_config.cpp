#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "nlh/config.hpp"
#include "nlh/report.hpp"

using namespace nlh;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"(mode: limit
model: {N: 3, alpha: -1, beta: 0, p: 5}
)";

std::string error_text(const std::string& yaml, ErrorCode expect) {
  try {
    parse_config_string(yaml);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), expect) << e.what();
    return e.what();
  }
  ADD_FAILURE() << "config accepted:\n" << yaml;
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nlh_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(NLH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.yaml";
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

const char* kSmallLimit = R"(mode: limit
model: {N: 3, alpha: -1, beta: 0, p: 5}
grid: {n: 32, eta: 0.03}
)";

}  // namespace

TEST(Config, MinimalConfigGetsDefaults) {
  const RunConfig c = parse_config_string(kMinimal);
  EXPECT_EQ(c.mode, Mode::Limit);
  EXPECT_EQ(c.dim, 3);
  EXPECT_EQ(c.points, 64);
  EXPECT_TRUE(c.side_auto);
  EXPECT_DOUBLE_EQ(c.eta, kDefaultEta);
  EXPECT_EQ(c.params.regime, Regime::A);
  const TorusGrid g = c.make_grid();
  EXPECT_NEAR(g.spacing(), kDefaultSpacing, 0.05);
  EXPECT_EQ(c.weight.kind, WeightKind::Constant);
}

TEST(Config, ExponentOutsideTheWindow) {
  const std::string msg = error_text("mode: limit\nmodel: {N: 3, alpha: -1, beta: 0, p: 3}\n", ErrorCode::ValidationError);
  EXPECT_NE(msg.find("(4, inf)"), std::string::npos) << msg;
  EXPECT_NE(msg.find("InvalidExponent"), std::string::npos) << msg;
}

TEST(Config, DoubleRootIsNamed) {
  const std::string msg = error_text("mode: limit\nmodel: {N: 3, alpha: 1, beta: -2, p: 5}\n", ErrorCode::ValidationError);
  EXPECT_NE(msg.find("DoubleRoot"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyReportsTheLine) {
  const std::string msg = error_text("mode: limit\nmodel: {N: 3, p: 5}\ngrid:\n  n: 32\n  spacing: 2\n", ErrorCode::ValidationError);
  EXPECT_NE(msg.find("spacing"), std::string::npos) << msg;
  EXPECT_NE(msg.find("line 5"), std::string::npos) << msg;
}

TEST(Config, MalformedYamlIsAParseError) {
  const std::string msg = error_text("mode: limit\nmodel: {N: 3, p: 5\ngrid: [\n", ErrorCode::ParseError);
  EXPECT_NE(msg.find("line"), std::string::npos) << msg;
  const std::string conv = error_text("mode: limit\nmodel:\n  N: three\n", ErrorCode::ParseError);
  EXPECT_NE(conv.find("line 3"), std::string::npos) << conv;
}

TEST(Config, ModeConflictAndMissingMode) {
  error_text("model: {N: 3, p: 5}\n", ErrorCode::ValidationError);
  try {
    parse_config_string(kMinimal, Mode::Solve);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
  }
  EXPECT_EQ(parse_config_string("model: {N: 3, p: 5}\n", Mode::Limit).mode, Mode::Limit);
}

TEST(Config, SweepFromKList) {
  const RunConfig c = parse_config_string(R"(mode: energy-comparison
model: {N: 3, p: 5}
weight: {kind: gaussian_bumps, floor: 0.3, bumps: [{center: [0, 0, 0], height: 0.7, width: 1}]}
sweep: {k_list: [2, 4, 8]}
)");
  ASSERT_EQ(c.eps_list.size(), 3u);
  EXPECT_DOUBLE_EQ(c.eps_list[2], 0.125);
  error_text(R"(mode: energy-comparison
model: {N: 3, p: 5}
sweep: {eps_list: [0.1, 0.2]}
)", ErrorCode::ValidationError);
}

TEST(Config, WeightValidation) {
  error_text(R"(mode: solve
model: {N: 3, p: 5}
weight: {kind: gaussian_bumps, floor: 0.3, bumps: [{center: [0, 0], height: 0.7, width: 1}]}
)", ErrorCode::ValidationError);
  error_text(R"(mode: solve
model: {N: 3, p: 5}
weight: {kind: gaussian_bumps, floor: -0.3, bumps: [{center: [0, 0, 0], height: 0.7, width: 1}]}
)", ErrorCode::ValidationError);
}

TEST(Config, YamlRoundTrip) {
  const RunConfig c = parse_config_string(R"(mode: multiplicity
model: {N: 3, alpha: -1, beta: 0, p: 5}
grid: {n: 32, L: 30, eta: 0.05}
weight: {kind: gaussian_bumps, floor: 0.3, bumps: [{center: [-1.5, 0, 0], height: 0.7, width: 0.75}, {center: [1.5, 0, 0], height: 0.7, width: 0.75}]}
sweep: {eps: 0.125}
output: {directory: /tmp/x, label: two}
)");
  const RunConfig back = parse_config_string(emit_yaml(config_to_yaml(c)));
  EXPECT_EQ(back.mode, c.mode);
  EXPECT_EQ(back.side, 30.0);
  EXPECT_EQ(back.eta, 0.05);
  EXPECT_EQ(back.eps, 0.125);
  EXPECT_EQ(back.weight.bumps.size(), 2u);
  EXPECT_EQ(back.label, "two");
  EXPECT_EQ(back.r_list, c.r_list);
  EXPECT_EQ(back.seed_width, c.seed_width);
}

TEST(Report, NumbersUseADotAndRoundTrip) {
  EXPECT_EQ(format_number(0.5), "0.5");
  EXPECT_EQ(format_number(-1e-20), "-1e-20");
  EXPECT_EQ(std::stod(format_number(0.1)), 0.1);
  CsvTable t({"a", "b"});
  t.add(1.25).add(std::string("x"));
  t.end_row();
  std::ostringstream os;
  t.write(os);
  EXPECT_EQ(os.str(), "a,b\n1.25,x\n");
}

TEST(Cli, LimitRunWritesOutputs) {
  const fs::path d = scratch_dir("limit");
  const fs::path cfg = write_config(d, kSmallLimit);
  ASSERT_EQ(run_cli("limit --config " + cfg.string() + " --out " + d.string() + " --label a"), 0);
  for (const char* f : {"a_summary.yaml", "a_report.yaml", "a_field.bin", "a_u.bin", "a_trace.csv"}) {
    EXPECT_TRUE(fs::exists(d / f)) << f;
  }
  const GridField v = read_field_binary((d / "a_field.bin").string());
  EXPECT_EQ(v.grid.dim(), 3);
  EXPECT_EQ(v.grid.points(), 32);
  const YAML::Node s = YAML::LoadFile((d / "a_summary.yaml").string());
  EXPECT_EQ(s["status"].as<std::string>(), "ok");
}

TEST(Cli, OutputIsDeterministic) {
  const fs::path d = scratch_dir("determinism");
  const fs::path cfg = write_config(d, kSmallLimit);
  ASSERT_EQ(run_cli("limit --config " + cfg.string() + " --out " + d.string() + " --label x"), 0);
  ASSERT_EQ(run_cli("limit --config " + cfg.string() + " --out " + d.string() + " --label y"), 0);
  EXPECT_EQ(slurp(d / "x_trace.csv"), slurp(d / "y_trace.csv"));
  EXPECT_EQ(slurp(d / "x_field.bin"), slurp(d / "y_field.bin"));
}

TEST(Cli, NonConvergenceExitsWithTwoAndStillWrites) {
  const fs::path d = scratch_dir("cap");
  const fs::path cfg = write_config(d, std::string(kSmallLimit) + "solver: {max_iter: 2}\n");
  EXPECT_EQ(run_cli("limit --config " + cfg.string() + " --out " + d.string() + " --label c"), 2);
  EXPECT_TRUE(fs::exists(d / "c_summary.yaml"));
  EXPECT_TRUE(fs::exists(d / "c_field.bin"));
}

TEST(Cli, ErrorsExitWithOne) {
  const fs::path d = scratch_dir("errors");
  const fs::path cfg = write_config(d, R"(mode: concentration
model: {N: 2, alpha: -1, beta: 0, p: 7}
weight: {kind: constant, level: 1}
sweep: {eps_list: [0.5, 0.25]}
)");
  EXPECT_EQ(run_cli("concentration --config " + cfg.string() + " --out " + d.string()), 1);
  EXPECT_EQ(run_cli("limit --config " + (d / "missing.yaml").string()), 1);
  EXPECT_NE(run_cli("limit"), 0);
}
