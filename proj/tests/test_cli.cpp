#include "support.hpp"

#include <kerrcomb/cli.hpp>

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kerrcomb;
using namespace kerrcomb::testing;

namespace {

struct RunResult {
  int code;
  std::string out;
  std::string err;
};

RunResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "kerrcomb");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kerrcomb_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> split(const std::string& line, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  return out;
}

double column_min(const std::string& csv, const std::string& column) {
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  const auto header = split(line);
  const auto idx = std::find(header.begin(), header.end(), column) - header.begin();
  double best = std::numeric_limits<double>::infinity();
  while (std::getline(ss, line)) {
    const auto cells = split(line);
    if (cells[idx] != "nan") best = std::min(best, std::stod(cells[idx]));
  }
  return best;
}

ConfigError config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no ConfigError for: " << text;
  return ConfigError("", 0, "");
}

}  // namespace

TEST(Config, EmptyTextGivesHeadlineDefaults) {
  const RunConfig cfg = parse_config("");
  const RateParams r = cfg.resolved_rates();
  EXPECT_EQ(r.gamma, 4.02e5);
  EXPECT_EQ(r.g, 2.21e-4);
  EXPECT_EQ(r.coupling_ratio(), 1.0);
  EXPECT_NEAR(r.epsilon / pump_threshold(r), 1.15, 1e-15);
  EXPECT_EQ(cfg.omega_max, 5.0);
  EXPECT_EQ(cfg.omega_points, 1001);
  EXPECT_EQ(cfg.omega_ratios().size(), 1001u);
  EXPECT_FALSE(cfg.physical.has_value());
  EXPECT_EQ(cfg.gain_mode, GainMode::per_omega);
}

TEST(Config, CommentsBlanksAndWhitespace) {
  const RunConfig cfg = parse_config("# header\n\n  gamma =  2e5   # trailing\n\tgamma_c_ratio=0.5\n");
  EXPECT_EQ(cfg.gamma, 2e5);
  EXPECT_EQ(cfg.gamma_c_ratio, 0.5);
}

TEST(Config, CouplingRatioOutsideUnitIntervalIsRejected) {
  const auto e = config_error("gamma_c_ratio = 1.2");
  EXPECT_EQ(e.key(), "gamma_c_ratio");
  EXPECT_EQ(e.line(), 1);
  EXPECT_NE(std::string(e.what()).find("gamma_c_ratio"), std::string::npos);
}

TEST(Config, ReportsFirstOffendingLineAndKey) {
  const auto e = config_error("gamma = 1e5\nbogus = 3\nalso_bad = 4\n");
  EXPECT_EQ(e.key(), "bogus");
  EXPECT_EQ(e.line(), 2);
  EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
}

TEST(Config, MalformedLines) {
  EXPECT_EQ(config_error("gamma 5").line(), 1);
  EXPECT_EQ(config_error("gamma = fast").key(), "gamma");
  EXPECT_EQ(config_error("gamma = -1").key(), "gamma");
  EXPECT_EQ(config_error("omega_points = 2.5").key(), "omega_points");
  EXPECT_EQ(config_error("format = xml").key(), "format");
  EXPECT_EQ(config_error("gain_mode = best").key(), "gain_mode");
  EXPECT_EQ(config_error("sweep_ratios = 0.2, 1.4").key(), "sweep_ratios");
  EXPECT_EQ(config_error("pump_start = 0.9").key(), "pump_start");
  EXPECT_EQ(config_error("lambda0 = 1").key(), "lambda0");
  EXPECT_EQ(config_error("= 3").line(), 1);
}

TEST(Config, ExactlyOnePumpForm) {
  const auto e = config_error("eps_ratio = 1.1\nepsilon = 2e10\n");
  EXPECT_EQ(e.key(), "epsilon");
  EXPECT_EQ(e.line(), 2);
  const RunConfig cfg = parse_config("epsilon = 1.97e10");
  EXPECT_EQ(cfg.resolved_rates().epsilon, 1.97e10);
}

TEST(Config, PumpRangeOrder) {
  EXPECT_EQ(config_error("pump_start = 1.4\npump_stop = 1.2").key(), "pump_stop");
}

TEST(Config, DeviceParametersDeriveCoupling) {
  const RunConfig cfg = parse_config("n0 = 1.43\nmode_volume = 6.6e-12\n");
  ASSERT_TRUE(cfg.physical.has_value());
  EXPECT_NEAR(cfg.resolved_g(), 1.0923e-4, 1e-3 * 1.0923e-4);
  const RunConfig explicit_g = parse_config("n0 = 1.43\ng = 3e-4\n");
  EXPECT_EQ(explicit_g.resolved_g(), 3e-4);
}

TEST(Config, SerializationIsIdempotent) {
  for (const std::string text :
       {std::string(""),
        std::string("gamma = 1.234567890123e5\ng = 3.3e-4\ngamma_c_ratio = 0.57\nepsilon = 1.1e10\n"
                    "sweep_ratios = 0.1, 0.2, 0.3\ndump_eps = 1.1, 1.15\nformat = csv\n"
                    "gain_mode = global\noutput_dir = out/run 1\nomega_points = 77\n"),
        std::string("n2 = 2.5e-20\nradius = 1e-3\neps_ratio = 0.3\npump_step = 0.01\nscale = 3\n")}) {
    const std::string once = serialize_config(parse_config(text));
    const std::string twice = serialize_config(parse_config(once));
    EXPECT_EQ(once, twice);
    const RunConfig a = parse_config(text), b = parse_config(once);
    EXPECT_EQ(a.resolved_rates().epsilon, b.resolved_rates().epsilon);
    EXPECT_EQ(a.resolved_g(), b.resolved_g());
    EXPECT_EQ(a.sweep_ratios, b.sweep_ratios);
    EXPECT_EQ(a.output_dir, b.output_dir);
  }
}

TEST(Config, HelpDocumentsUnits) {
  const auto r = run_cli({"--help"});
  EXPECT_EQ(r.code, kExitOk);
  for (const char* needle : {"s^-1", "[m]", "[m^3]", "[m^2/W]", "gamma_c_ratio", "KERRCOMB_THREADS"})
    EXPECT_NE(r.out.find(needle), std::string::npos) << needle;
}

TEST(Io, SeventeenSignificantDigits) {
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_EQ(format_number(std::nan("")), "nan");
  EXPECT_EQ(format_number(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(std::stod(format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Io, AtomicWriteLeavesNoTemporary) {
  const auto dir = scratch_dir("atomic");
  write_file_atomic(dir / "sub" / "a.txt", "first");
  write_file_atomic(dir / "sub" / "a.txt", "second");
  EXPECT_EQ(slurp(dir / "sub" / "a.txt"), "second");
  EXPECT_FALSE(std::filesystem::exists(dir / "sub" / "a.txt.tmp"));
}

TEST(Io, SpectrumCsvMarksSingularRows) {
  const auto lm = linearize(headline());
  std::ostringstream os;
  const std::vector<double> grid{0.0, 1.0};
  write_spectrum_csv(os, lm, grid);
  const std::string text = os.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), spectrum_csv_header());
  EXPECT_NE(text.find("\n0,nan,nan"), std::string::npos);
}

TEST(Cli, VlfDefaultShowsViolationOfSecondPair) {
  const auto r = run_cli({"vlf"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), vlf_csv_header());
  EXPECT_LT(column_min(r.out, "S3"), 4.0);
  EXPECT_LT(column_min(r.out, "S1"), 4.0);
}

TEST(Cli, SteadyStateBelowThresholdJson) {
  const auto r = run_cli({"steady-state", "--eps-ratio", "0.5", "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["steady_state"]["A_a"].get<double>(), 0.0);
  EXPECT_FALSE(j["steady_state"]["above_threshold"].get<bool>());
  for (const char* key : {"rates", "epsilon_threshold", "steady_state", "stability", "version"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, ValidateDefaultPasses) {
  const auto r = run_cli({"validate"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.find(",false,"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("lyapunov_vs_spectrum_integral"), std::string::npos);
}

TEST(Cli, ConfigErrorsExitTwoNamingTheKey) {
  auto r = run_cli({"vlf", "--set", "warp_factor=9"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("warp_factor"), std::string::npos);
  r = run_cli({"vlf", "--gamma-c-ratio", "1.2"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("gamma_c_ratio"), std::string::npos);
  r = run_cli({"vlf", "--eps-ratio", "1.1", "--epsilon", "1e10"});
  EXPECT_EQ(r.code, kExitConfig);
  r = run_cli({"teleport"});
  EXPECT_EQ(r.code, kExitConfig);
  r = run_cli({});
  EXPECT_EQ(r.code, kExitConfig);
  r = run_cli({"vlf", "--config", "/nonexistent/file.cfg"});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("config"), std::string::npos);
}

TEST(Cli, ConfigFileLineReported) {
  const auto dir = scratch_dir("cfgline");
  std::ofstream(dir / "run.cfg") << "gamma = 4e5\n\nfrobnicate = 1\n";
  const auto r = run_cli({"steady-state", "--config", (dir / "run.cfg").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("line 3"), std::string::npos);
  EXPECT_NE(r.err.find("frobnicate"), std::string::npos);
}

TEST(Cli, FlagsOverrideConfigFile) {
  const auto dir = scratch_dir("override");
  std::ofstream(dir / "run.cfg") << "epsilon = 1e10\ngamma_c_ratio = 0.3\n";
  const auto r = run_cli({"steady-state", "--config", (dir / "run.cfg").string(), "--eps-ratio", "0.5",
                          "--format", "json"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["rates"]["eps_over_threshold"].get<double>(), 0.5, 1e-15);
  EXPECT_NEAR(j["rates"]["gamma_c_ratio"].get<double>(), 0.3, 1e-15);
}

TEST(Cli, UnstableOperatingPointExitsThreeWithEcho) {
  const auto r = run_cli({"vlf", "--eps-ratio", "1.6", "--omega-points", "5"});
  EXPECT_EQ(r.code, kExitModel);
  EXPECT_NE(r.err.find("operating point"), std::string::npos);
  EXPECT_NE(r.err.find("eps/eps_th=1.6"), std::string::npos);
}

TEST(Cli, WritesFilesIntoOutputDirectory) {
  const auto dir = scratch_dir("outdir");
  const auto r = run_cli({"sweep-coupling", "--omega-points", "21", "-o", dir.string()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(r.out.empty());
  for (const char* f : {"sweep-coupling.csv", "sweep-coupling_summary.csv", "sweep-coupling.json"})
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    EXPECT_NE(entry.path().extension(), ".tmp");
  const auto j = nlohmann::json::parse(slurp(dir / "sweep-coupling.json"));
  EXPECT_EQ(j["sweep"]["points"].size(), 4u);
  EXPECT_EQ(j["tool"], "kerrcomb");
  const std::string csv = slurp(dir / "sweep-coupling.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), sweep_csv_header("gamma_c_ratio"));
}

TEST(Cli, SweepPumpWithDumps) {
  const auto dir = scratch_dir("pump");
  const auto r = run_cli({"sweep-pump", "--omega-points", "11", "--set", "pump_start=1.1",
                          "--set", "pump_stop=1.45", "--set", "pump_step=0.05", "--set", "dump_eps=1.15",
                          "-o", dir.string(), "--format", "both"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep-pump_eps_1.15_spectrum.csv"));
  EXPECT_TRUE(std::filesystem::exists(dir / "sweep-pump_eps_1.15_vlf.csv"));
  const auto j = nlohmann::json::parse(slurp(dir / "sweep-pump.json"));
  EXPECT_EQ(j["trace_S3"]["gaps"].get<int>(), 1);
  EXPECT_EQ(j["trace_S3"]["points_analyzed"].get<int>(), 7);
  EXPECT_TRUE(j["trace_S3"].contains("argmin_parameter"));
  EXPECT_FALSE(j["sweep"]["points"].back()["computed"].get<bool>());
}

TEST(Cli, ScalingCheckReportsBothRows) {
  const auto r = run_cli({"scaling-check", "--omega-points", "41"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("scaling_law,"), std::string::npos);
  EXPECT_NE(r.out.find("scaling_law_fixed_epsilon,"), std::string::npos);
}

TEST(Cli, SpectrumCommandCsv) {
  const auto r = run_cli({"spectrum", "--omega-points", "6", "--gamma-c-ratio", "0.8"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(r.out.substr(0, r.out.find('\n')), spectrum_csv_header());
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
}

TEST(Cli, GlobalGainModeFlag) {
  const auto per = run_cli({"vlf", "--omega-points", "51"});
  const auto glob = run_cli({"vlf", "--omega-points", "51", "--gain-mode", "global"});
  ASSERT_EQ(glob.code, kExitOk);
  EXPECT_GE(column_min(glob.out, "S3"), column_min(per.out, "S3"));
}
