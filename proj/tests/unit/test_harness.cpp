#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "lorentzfk/error.hpp"
#include "lorentzfk/harness/config.hpp"
#include "lorentzfk/harness/run.hpp"
#include "lorentzfk/io.hpp"

using namespace lfk;
using namespace lfk::harness;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lorentzfk-test-" + name);
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& text, Subcommand sub) {
  try {
    parse_config(text, sub);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigInvalid);
    return e.what();
  }
  ADD_FAILURE() << "config accepted";
  return {};
}

const char* kChainSample = R"({"seed": 7, "offspring": {"kind": "pmf", "pmf": {"1": 1.0}},
  "geometry": {"kind": "sb", "height": 10, "samples": 2}, "output": {"formats": ["csv", "json"]}})";

const char* kMcRun = R"({"seed": 3, "geometry": {"kind": "chain", "height": 4},
  "spec": {"u": {"kind": "zero"}, "v": {"kind": "cosine_difference", "amplitude": 0.5, "mode": [1]},
           "j": {"kind": "nearest_neighbour"}},
  "quantum": {"beta": 1.0, "d": 1, "d_prime": 1, "theta": [0.1], "L": 4, "G": 8},
  "mc": {"sweeps": 64, "chains": 3, "batches": 8, "inner_samples": 4, "burn_in": 10, "volume_level": 1, "eval_points": 2}})";

}  // namespace

TEST(Config, EmptyNamesSeed) { EXPECT_NE(config_error("{}", Subcommand::SampleCdlt).find("seed"), std::string::npos); }

TEST(Config, FirstFailingFieldIsNamed) {
  EXPECT_NE(config_error(R"({"seed": 1})", Subcommand::SampleCdlt).find("geometry"), std::string::npos);
  EXPECT_NE(config_error(R"({"seed": 1, "offspring": {"kind": "pmf", "pmf": {"0": 0.3, "1": 0.7}},
                              "geometry": {"kind": "sb", "height": 3}})",
                         Subcommand::SampleCdlt)
                .find("offspring"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"seed": 1, "offspring": {"kind": "binary"}, "geometry": {"kind": "sb", "height": 0}})",
                         Subcommand::SampleCdlt)
                .find("geometry.height"),
            std::string::npos);
  EXPECT_NE(config_error(R"({"seed": 1, "offspring": {"kind": "binary"}, "geometry": {"kind": "sb", "height": 3},
                              "colour": 2})",
                         Subcommand::SampleCdlt)
                .find("colour"),
            std::string::npos);
}

TEST(Config, ScheduleOrdering) {
  const std::string base = R"({"seed": 1, "geometry": {"kind": "chain", "height": 20},
    "spec": {"u": {"kind": "zero"}, "v": {"kind": "zero"}, "j": {"kind": "log_cubed"}},
    "quantum": {"beta": 1.0, "d": 1, "d_prime": 1, "theta": [0.1], "L": 3, "G": 8}, "mc": {"sweeps": 100, "batches": 10},
    "schedule": )";
  EXPECT_NE(config_error(base + R"({"n": 2, "r_bar": 2, "n_prime": [8], "a": 1.1}})", Subcommand::MwVerify).find("schedule"),
            std::string::npos);
  EXPECT_NE(config_error(base + R"({"n": 1, "r_bar": 4, "n_prime": [30], "a": 1.1}})", Subcommand::MwVerify).find("n_prime"),
            std::string::npos);
  EXPECT_NO_THROW(parse_config(base + R"({"n": 1, "r_bar": 4, "n_prime": [8, 16], "a": 1.1}})", Subcommand::MwVerify));
}

TEST(Config, ParseErrorIsConfigInvalid) { config_error("{not json", Subcommand::McRun); }

TEST(Hash, GitBlob) { EXPECT_EQ(content_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a"); }

TEST(ExitStatus, Mapping) {
  EXPECT_EQ(exit_status_for(ErrorCode::ConfigInvalid), ExitStatus::ConfigInvalid);
  EXPECT_EQ(exit_status_for(ErrorCode::GuardExceeded), ExitStatus::GuardExceeded);
  EXPECT_EQ(exit_status_for(ErrorCode::TooLarge), ExitStatus::GuardExceeded);
  EXPECT_EQ(exit_status_for(ErrorCode::NumericalFailure), ExitStatus::NumericalFailure);
  EXPECT_EQ(exit_status_for(ErrorCode::IoFailure), ExitStatus::IoFailure);
}

TEST(OutputDir, PartialUntilCommit) {
  const auto root = scratch("partial");
  OutputDir out(root);
  out.write("a.txt", "x");
  EXPECT_TRUE(fs::exists(root / "a.txt.partial"));
  EXPECT_FALSE(fs::exists(root / "a.txt"));
  out.commit();
  EXPECT_TRUE(fs::exists(root / "a.txt"));
  EXPECT_FALSE(fs::exists(root / "a.txt.partial"));
  ASSERT_EQ(out.committed().size(), 1u);
  EXPECT_EQ(out.committed()[0].hash, content_hash("x"));
}

TEST(Run, SampleCdltIsDeterministic) {
  std::vector<json> manifests;
  for (int rep = 0; rep < 2; ++rep) {
    RunOptions opt;
    opt.output_dir = scratch("det" + std::to_string(rep));
    const auto r = run(Subcommand::SampleCdlt, kChainSample, opt);
    ASSERT_EQ(r.status, ExitStatus::Ok) << r.message;
    manifests.push_back(json::parse(slurp(opt.output_dir / "manifest.json")));
    EXPECT_EQ(slurp(opt.output_dir / "tree_0000.txt"), slurp(opt.output_dir / "tree_0001.txt"));
  }
  EXPECT_EQ(manifests[0]["outputs"], manifests[1]["outputs"]);
  EXPECT_EQ(manifests[0]["status"], "ok");
  const auto tree = slurp(scratch("det0").parent_path() / "lorentzfk-test-det1" / "tree_0000.txt");
  std::istringstream in(tree);
  EXPECT_EQ(layer_sizes(read_tree(in)), std::vector<std::uint64_t>(11, 1));
}

TEST(Run, ManifestOnFailure) {
  RunOptions opt;
  opt.output_dir = scratch("fail");
  const auto r = run(Subcommand::McRun, "{}", opt);
  EXPECT_EQ(r.status, ExitStatus::ConfigInvalid);
  const auto m = json::parse(slurp(opt.output_dir / "manifest.json"));
  EXPECT_EQ(m["status"], "failed");
  EXPECT_EQ(m["failure_stage"], "validate");
  EXPECT_EQ(m["exit_status"], 2);
}

TEST(Run, McRunMergesChainsInOrderAndIgnoresWorkerCount) {
  std::vector<std::string> rdmk, batches;
  for (std::size_t workers : {1u, 3u}) {
    RunOptions opt;
    opt.output_dir = scratch("mc" + std::to_string(workers));
    opt.workers = workers;
    const auto r = run(Subcommand::McRun, kMcRun, opt);
    ASSERT_EQ(r.status, ExitStatus::Ok) << r.message;
    rdmk.push_back(slurp(opt.output_dir / "rdmk.csv"));
    batches.push_back(slurp(opt.output_dir / "batches.csv"));
  }
  EXPECT_EQ(rdmk[0], rdmk[1]);
  EXPECT_EQ(batches[0], batches[1]);
  std::istringstream in(batches[0]);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "chain,batch,x_index,y_index,value");
  std::vector<std::pair<int, int>> keys;
  while (std::getline(in, line)) {
    int chain = 0, batch = 0;
    std::sscanf(line.c_str(), "%d,%d", &chain, &batch);
    keys.emplace_back(chain, batch);
  }
  EXPECT_TRUE(std::is_sorted(keys.begin(), keys.end()));
  EXPECT_EQ(keys.size(), 3u * 8u * 4u);
  EXPECT_EQ(keys.back(), std::make_pair(2, 7));
}

TEST(Run, GuardExceededExit) {
  const std::string cfg = R"({"seed": 1, "geometry": {"kind": "chain", "height": 4},
    "spec": {"u": {"kind": "zero"}, "v": {"kind": "cosine_difference", "amplitude": 0.5, "mode": [1]},
             "j": {"kind": "nearest_neighbour"}},
    "quantum": {"beta": 1.0, "d": 1, "d_prime": 1, "theta": [0.1], "L": 12, "G": 64}})";
  RunOptions opt;
  opt.output_dir = scratch("guard");
  EXPECT_EQ(run(Subcommand::OracleCheck, cfg, opt).status, ExitStatus::GuardExceeded);
}

TEST(Run, VerifierReportRoundtrip) {
  const std::string cfg = R"({"seed": 5, "geometry": {"kind": "chain", "height": 40},
    "spec": {"u": {"kind": "zero"}, "v": {"kind": "cosine_difference", "amplitude": 0.5, "mode": [1]},
             "j": {"kind": "log_cubed"}},
    "quantum": {"beta": 1.0, "d": 1, "d_prime": 1, "theta": [0.1], "L": 3, "G": 8},
    "schedule": {"n": 1, "r_bar": 4, "n_prime": [8, 12, 16, 24, 32], "a": 1.1},
    "mc": {"sweeps": 50, "batches": 5, "convexity_samples": 40, "max_volume": 16, "burn_in": 20}})";
  RunOptions opt;
  opt.output_dir = scratch("mw");
  const auto r = run(Subcommand::MwVerify, cfg, opt);
  ASSERT_EQ(r.status, ExitStatus::Ok) << r.message;
  const auto report = json::parse(slurp(opt.output_dir / "mw_report.json"));
  ASSERT_EQ(report["records"].size(), 5u);
  std::istringstream csv(slurp(opt.output_dir / "mw_report.csv"));
  std::string line;
  std::getline(csv, line);
  for (const auto& rec : report["records"]) {
    ASSERT_TRUE(std::getline(csv, line));
    std::istringstream fields(line);
    std::string np, phi;
    std::getline(fields, np, ',');
    std::getline(fields, phi, ',');
    EXPECT_EQ(std::stoul(np), rec["n_prime"].get<unsigned>());
    EXPECT_EQ(std::stod(phi), rec["phi"].get<double>());
  }
  EXPECT_TRUE(report.contains("phi_decay_fit"));
}

TEST(Cli, ExitCodes) {
  const std::string cli = LORENTZFK_CLI;
  const auto dir = scratch("cli");
  fs::create_directories(dir);
  {
    std::ofstream(dir / "empty.json") << "{}";
  }
  const auto out = (dir / "out").string();
  auto sh = [&](const std::string& args) {
    const int rc = std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(rc);
  };
  EXPECT_EQ(sh("sample-cdlt --config " + (dir / "empty.json").string() + " --output-dir " + out), 2);
  EXPECT_EQ(sh("sample-cdlt --config " + std::string(LORENTZFK_CONFIG_DIR) + "/sample_chain.json --seed 9 --output-dir " + out), 0);
  EXPECT_EQ(json::parse(slurp(dir / "out" / "manifest.json"))["seed"], 9);
  EXPECT_EQ(sh("sample-cdlt --config " + (dir / "missing.json").string()), 5);
  EXPECT_EQ(sh("no-such-command --config x"), 2);
}
