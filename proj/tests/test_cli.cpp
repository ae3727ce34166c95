#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "voxsar/cli/app.hpp"

using namespace voxsar;
using namespace voxsar::cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "voxsar");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
  const auto *info = ::testing::UnitTest::GetInstance()->current_test_info();
  auto dir = fs::temp_directory_path() / "voxsar_cli_tests" / (std::string(info->test_suite_name()) + "_" + info->name());
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_file(const fs::path &p, const std::string &text) {
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char *mini_config = "outer_radius_mm = 18\n"
                          "resolution_mm = 2\n"
                          "distances_mm = 4, 8\n"
                          "powers_w = 0.01, 0.1\n"
                          "powers_dbm =\n"
                          "densities = 0.3\n"
                          "thermal_powers_w = 0.1\n"
                          "duration_s = 600\n";

std::vector<std::string> data_lines(const std::string &csv) {
  std::vector<std::string> out;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#')
      out.push_back(line);
  return out;
}

std::vector<std::string> fields(const std::string &line) {
  std::vector<std::string> out;
  for (auto f : text::split(line, ','))
    out.emplace_back(f);
  return out;
}

} // namespace

TEST(Config, UnknownKeysReportedTogether) {
  const auto dir = scratch_dir();
  const auto cfg = write_file(dir / "bad.cfg", "seed = 1\nfrequncy_ghz = 6\nresoluton_mm = 1\nno equals sign\n");
  const auto r = run({"phantom-gen", "--config", cfg, "--out", (dir / "p.vxp").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("frequncy_ghz"), std::string::npos);
  EXPECT_NE(r.err.find("resoluton_mm"), std::string::npos);
  EXPECT_NE(r.err.find("expected key = value"), std::string::npos);
  EXPECT_EQ(r.err.rfind("error: config: ", 0), 0u);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1);
}

TEST(Config, DuplicateKeyRejected) {
  Config c;
  try {
    c.merge_text("seed = 1\nseed = 2\n", "x.cfg");
    FAIL();
  } catch (const ConfigError &e) {
    ASSERT_EQ(e.problems().size(), 1u);
    EXPECT_NE(e.problems()[0].find("x.cfg:2"), std::string::npos);
  }
}

TEST(Config, BadValuesReportedTogether) {
  Config c;
  c.merge_overrides({"courant=fast", "resolution_mm=-1", "distances_mm=5,x", "source=horn"});
  try {
    resolve_settings(c);
    FAIL();
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.problems().size(), 4u) << e.what();
  }
}

TEST(Config, MissingRequiredKeys) {
  auto r = run({"sar"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("missing required key 'phasor_file'"), std::string::npos);
  r = run({"bioheat", "--set", "courant=2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("phasor_file"), std::string::npos);
  EXPECT_NE(r.err.find("courant"), std::string::npos);
  r = run({"phantom-gen"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--out"), std::string::npos);
}

TEST(Config, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"teleport"}).code, 2);
  EXPECT_EQ(run({"sweep", "--threads", "many"}).code, 2);
  const auto help = run({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("sweep"), std::string::npos);
}

TEST(Config, DensitiesConflictWithPhantomFile) {
  const auto r = run({"sweep", "--set", "phantom_file=x.vxp", "--densities", "0.2"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("densities"), std::string::npos);
}

TEST(Config, HashCoversEveryKey) {
  Config a, b;
  b.set("seed", "12346");
  EXPECT_NE(fnv1a_hex(canonical_config(a)), fnv1a_hex(canonical_config(b)));
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Powers, DbmConversion) {
  EXPECT_DOUBLE_EQ(dbm_to_watts(10.0), 0.01);
  EXPECT_DOUBLE_EQ(dbm_to_watts(0.0), 0.001);
  EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
}

TEST(Powers, MergedSortedAndDeduplicated) {
  Config c;
  c.set("powers_w", "0.01, 0.001, 0.5");
  c.set("powers_dbm", "0, 10");
  const auto s = resolve_settings(c);
  EXPECT_EQ(s.powers, (std::vector<double>{0.001, 0.01, 0.5}));
  c.set("powers_w", "");
  c.set("powers_dbm", "");
  EXPECT_THROW(resolve_settings(c), ConfigError);
}

TEST(Powers, DefaultListSpansMilliwattToHalfWatt) {
  const auto s = resolve_settings(Config{});
  EXPECT_DOUBLE_EQ(s.powers.front(), 0.001);
  EXPECT_DOUBLE_EQ(s.powers.back(), 0.5);
  EXPECT_EQ(s.distances_mm, (std::vector<double>{5, 10, 15, 20, 25, 30}));
}

TEST(Errors, ExitCodesByCategory) {
  const auto dir = scratch_dir();
  std::ofstream(dir / "trunc.vxp") << phantom_magic << "\ndims 2 2 2\nresolution_m 0.001\nmaterials 1\n"
                                   << voxsar::detail::format_material(default_materials().materials[0]) << "\n\n"
                                   << std::string(7, '\0');
  auto r = run({"simulate", "--out", (dir / "x.phasor").string(), "--set", "phantom_file=" + (dir / "trunc.vxp").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: phantom_format: ", 0), 0u);

  r = run({"sar", "--set", "phasor_file=" + (dir / "missing.phasor").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_EQ(r.err.rfind("error: io: ", 0), 0u);

  r = run({"simulate", "--out", (dir / "x.phasor").string(), "--set", "outer_radius_mm=8", "--set",
           "distance_mm=4.5"});
  EXPECT_EQ(r.code, 4);
  EXPECT_EQ(r.err.rfind("error: invalid_argument: ", 0), 0u);

  r = run({"phantom-gen", "--out", (dir / "p.vxp").string(), "--set", "cluster_count=0", "--set",
           "fibroglandular_fraction=0.4"});
  EXPECT_EQ(r.code, 4);
}

TEST(PhantomGen, WritesLoadablePhantom) {
  const auto dir = scratch_dir();
  const auto path = (dir / "p.vxp").string();
  const auto r = run({"phantom-gen", "--out", path, "--set", "outer_radius_mm=10", "--seed", "4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto ph = load_phantom(path);
  PhantomSpec spec;
  spec.outer_radius = 0.01;
  spec.seed = 4;
  EXPECT_EQ(ph.voxels, generate_phantom(spec, 1e-3).voxels);
}

class MiniSweep : public ::testing::Test {
protected:
  static inline std::string csv;
  static inline fs::path dir;

  static void SetUpTestSuite() {
    dir = fs::temp_directory_path() / "voxsar_cli_tests" / "mini";
    fs::remove_all(dir);
    fs::create_directories(dir);
    write_file(dir / "mini.cfg", mini_config);
    const auto r = run({"sweep", "--config", (dir / "mini.cfg").string(), "--out", (dir / "sweep.csv").string()});
    ASSERT_EQ(r.code, 0) << r.err;
    csv = slurp(dir / "sweep.csv");
  }
};

TEST_F(MiniSweep, MatchesGoldenFile) {
  const auto golden = data_lines(slurp(fs::path(VOXSAR_TEST_DATA) / "golden_mini_sweep.csv"));
  const auto got = data_lines(csv);
  ASSERT_EQ(got.size(), golden.size());
  EXPECT_EQ(got[0], csv_columns);
  EXPECT_EQ(got[0], golden[0]);
  for (std::size_t n = 1; n < got.size(); ++n) {
    const auto g = fields(golden[n]), v = fields(got[n]);
    ASSERT_EQ(g.size(), v.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
      const auto a = text::parse_double(g[f]), b = text::parse_double(v[f]);
      if (a && b)
        EXPECT_NEAR(*b, *a, 1e-6 * std::abs(*a)) << "row " << n << " column " << f;
      else
        EXPECT_EQ(v[f], g[f]) << "row " << n << " column " << f;
    }
  }
}

TEST_F(MiniSweep, ProvenanceHeader) {
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# voxsar ", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line, "# command sweep");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# config_hash ", 0), 0u);
  EXPECT_NE(csv.find("# distances_mm = 4, 8\n"), std::string::npos);
  EXPECT_NE(csv.find("# courant = 0.5\n"), std::string::npos);
}

TEST_F(MiniSweep, RowOrderAndThermalColumn) {
  const auto rows = data_lines(csv);
  ASSERT_EQ(rows.size(), 5u);
  const double expect[4][2] = {{4, 0.01}, {4, 0.1}, {8, 0.01}, {8, 0.1}};
  for (int n = 0; n < 4; ++n) {
    const auto f = fields(rows[n + 1]);
    ASSERT_EQ(f.size(), 12u);
    EXPECT_EQ(*text::parse_double(f[0]), expect[n][0]);
    EXPECT_EQ(*text::parse_double(f[1]), expect[n][1]);
    EXPECT_EQ(f[10], "true");
    EXPECT_EQ(f[11].empty(), expect[n][1] != 0.1);
  }
}

TEST_F(MiniSweep, PowerRowsScaleLinearly) {
  const auto rows = data_lines(csv);
  for (int d = 0; d < 2; ++d) {
    const auto lo = fields(rows[1 + 2 * d]), hi = fields(rows[2 + 2 * d]);
    for (int col : {3, 4, 5}) {
      const double a = *text::parse_double(lo[col]) / 0.01, b = *text::parse_double(hi[col]) / 0.1;
      EXPECT_NEAR(a, b, 1e-10 * b);
    }
  }
}

TEST_F(MiniSweep, DeterministicAcrossThreadCounts) {
  const auto out = (dir / "again.csv").string();
  const auto r = run({"sweep", "--config", (dir / "mini.cfg").string(), "--out", out, "--threads", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(out), csv);
}

TEST_F(MiniSweep, StagedPipelineReproducesSweepRows) {
  const auto cfg = (dir / "mini.cfg").string();
  const auto ph = (dir / "stage.vxp").string(), phasor = (dir / "stage.phasor").string();
  auto r = run({"phantom-gen", "--config", cfg, "--out", ph, "--set", "fibroglandular_fraction=0.3"});
  ASSERT_EQ(r.code, 0) << r.err;
  // the phantom file replaces the density list
  std::string staged = mini_config;
  staged.erase(staged.find("densities = 0.3\n"), 16);
  write_file(dir / "staged.cfg", staged);
  const auto scfg = (dir / "staged.cfg").string();
  r = run({"simulate", "--config", scfg, "--out", phasor, "--set", "phantom_file=" + ph, "--set", "distance_mm=8"});
  ASSERT_EQ(r.code, 0) << r.err;
  r = run({"sar", "--config", scfg, "--set", "phantom_file=" + ph, "--set", "phasor_file=" + phasor, "--set",
           "sar_file=" + (dir / "sar.field").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto staged_rows = data_lines(r.out);
  const auto sweep_rows = data_lines(csv);
  ASSERT_EQ(staged_rows.size(), 3u);
  EXPECT_EQ(staged_rows[1], sweep_rows[3]);
  EXPECT_EQ(staged_rows[2], sweep_rows[4]);
  EXPECT_EQ(slurp(dir / "sar.field").rfind(std::string(field_magic) + "\n", 0), 0u);

  r = run({"bioheat", "--config", scfg, "--set", "phantom_file=" + ph, "--set", "phasor_file=" + phasor, "--set",
           "power_w=0.1"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto bio = data_lines(r.out);
  ASSERT_EQ(bio.size(), 2u);
  EXPECT_EQ(bio[0], "time_s,power_w,peak_delta_t_k,mean_delta_t_k,peak_i,peak_j,peak_k,dt_s,steps");
  const double sweep_dt = *text::parse_double(fields(sweep_rows[4])[11]);
  EXPECT_NEAR(*text::parse_double(fields(bio[1])[2]), sweep_dt, 1e-12 * sweep_dt);
}

TEST_F(MiniSweep, PhasorFileRoundTrip) {
  const auto cfg = (dir / "mini.cfg").string();
  const auto phasor = (dir / "rt.phasor").string();
  auto r = run({"simulate", "--config", cfg, "--out", phasor, "--set", "distance_mm=4"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto a = read_phasors(phasor);
  write_phasors((dir / "rt2.phasor").string(), a);
  EXPECT_EQ(slurp(phasor), slurp(dir / "rt2.phasor"));
  EXPECT_EQ(a.meta.at("distance_mm"), "4");
  EXPECT_TRUE(a.field.converged);
  EXPECT_GT(a.field.radiated_power, 0.0);
  std::string bytes = slurp(phasor);
  bytes.pop_back();
  write_file(dir / "cut.phasor", bytes);
  EXPECT_THROW(read_phasors((dir / "cut.phasor").string()), Error);
}
