#include "cas4dl/results_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cas4dl/checkpoint.hpp"
#include "cas4dl/random.hpp"
#include "cas4dl/tabulated.hpp"

namespace fs = std::filesystem;
using cas4dl::ExperimentConfig;
using cas4dl::Method;
using Eigen::MatrixXd;

namespace {

class TempDir {
 public:
  explicit TempDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

int line_count(const std::string& text) {
  return static_cast<int>(std::count(text.begin(), text.end(), '\n'));
}

ExperimentConfig toy_config() {
  ExperimentConfig c;
  c.dimension = 1;
  c.grid_size = 100;
  c.depth = 1;
  c.width = 4;
  c.epochs_per_stage = 3;
  c.schedule = {8, 16};
  c.trials = 2;
  c.test_size = 50;
  c.seed = 3;
  return c;
}

}  // namespace

TEST(StagesCsv, RoundTripsAtFullPrecision) {
  cas4dl::RandomStream s(1);
  std::vector<cas4dl::StageRecord> records;
  for (int i = 0; i < 50; ++i) {
    cas4dl::StageRecord r;
    r.method = i % 2 ? Method::MC : Method::CAS;
    r.trial = i;
    r.stage = i % 5 + 1;
    r.m = 100 + static_cast<std::size_t>(i);
    r.n = i % 7;
    r.rel_error = std::exp(s.normal() * 10);
    r.alpha_inv = i == 3 ? std::numeric_limits<double>::infinity() : s.uniform01() * 1e5;
    r.final_loss = s.normal() * 1e-200;
    r.wall_time_s = s.uniform01();
    records.push_back(r);
  }
  const auto parsed = cas4dl::parse_stages_csv(cas4dl::stages_csv(records, true));
  ASSERT_EQ(parsed.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(parsed[i].method, records[i].method);
    EXPECT_EQ(parsed[i].trial, records[i].trial);
    EXPECT_EQ(parsed[i].stage, records[i].stage);
    EXPECT_EQ(parsed[i].m, records[i].m);
    EXPECT_EQ(parsed[i].n, records[i].n);
    EXPECT_EQ(parsed[i].rel_error, records[i].rel_error);
    EXPECT_EQ(parsed[i].alpha_inv, records[i].alpha_inv);
    EXPECT_EQ(parsed[i].final_loss, records[i].final_loss);
    EXPECT_EQ(parsed[i].wall_time_s, records[i].wall_time_s);
  }
  const auto no_time = cas4dl::parse_stages_csv(cas4dl::stages_csv(records, false));
  EXPECT_EQ(no_time[0].wall_time_s, 0.0);
}

TEST(StagesCsv, RejectsMalformedInput) {
  EXPECT_THROW(cas4dl::parse_stages_csv("method,trial\n"), std::runtime_error);
  EXPECT_THROW(cas4dl::parse_stages_csv(std::string(cas4dl::kStagesHeader) + "\ncas,0,1\n"),
               std::runtime_error);
}

TEST(EmitResults, EmptySuiteWritesHeadersAndManifest) {
  TempDir dir("cas4dl_emit_empty");
  const auto c = toy_config();
  const auto problem = cas4dl::make_problem(c);
  cas4dl::emit_results(cas4dl::SuiteResult{}, c, problem, dir.path());
  EXPECT_EQ(slurp(dir.path() / "stages.csv"), std::string(cas4dl::kStagesHeader) + "\n");
  EXPECT_EQ(line_count(slurp(dir.path() / "aggregate.csv")), 1);
  const auto manifest = nlohmann::json::parse(slurp(dir.path() / "manifest.json"));
  EXPECT_EQ(manifest["code_version"], cas4dl::code_version());
  EXPECT_EQ(manifest["precision"], "double");
  EXPECT_TRUE(manifest["failures"].empty());
}

TEST(EmitResults, ToySuiteFilesAndRowCounts) {
  TempDir dir("cas4dl_emit_toy");
  auto c = toy_config();
  c.checkpoints = true;
  const auto problem = cas4dl::make_problem(c);
  const auto suite = cas4dl::run_suite(c, problem);
  cas4dl::emit_results(suite, c, problem, dir.path());
  EXPECT_EQ(line_count(slurp(dir.path() / "stages.csv")), 1 + 8);
  EXPECT_EQ(line_count(slurp(dir.path() / "aggregate.csv")), 1 + 4);
  for (const char* name :
       {"samples_cas_0.csv", "samples_cas_1.csv", "samples_mc_0.csv", "samples_mc_1.csv",
        "christoffel_0.csv", "christoffel_1.csv", "dictionary_0.csv", "dictionary_1.csv",
        "checkpoint_cas_0.bin", "checkpoint_mc_1.bin"})
    EXPECT_TRUE(fs::exists(dir.path() / name)) << name;
  EXPECT_EQ(line_count(slurp(dir.path() / "samples_cas_0.csv")), 1 + 16);
  EXPECT_EQ(line_count(slurp(dir.path() / "christoffel_0.csv")), 1 + 100);
  EXPECT_EQ(line_count(slurp(dir.path() / "dictionary_0.csv")), 1 + 201);

  const auto summary = cas4dl::inspect_checkpoint(dir.path() / "checkpoint_cas_0.bin");
  EXPECT_EQ(summary.arch, c.architecture());
  EXPECT_EQ(summary.step, c.total_epochs());
  EXPECT_EQ(summary.stage, 2);
  EXPECT_EQ(summary.precision, cas4dl::Precision::Double);
}

TEST(EmitResults, ReEmissionIsByteIdenticalApartFromManifest) {
  TempDir a("cas4dl_emit_a"), b("cas4dl_emit_b");
  const auto c = toy_config();
  const auto problem = cas4dl::make_problem(c);
  const auto suite = cas4dl::run_suite(c, problem);
  cas4dl::emit_results(suite, c, problem, a.path());
  cas4dl::emit_results(suite, c, problem, b.path());
  for (const auto& entry : fs::directory_iterator(a.path())) {
    const auto name = entry.path().filename();
    if (name == "manifest.json") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(b.path() / name)) << name;
  }
  auto ma = nlohmann::json::parse(slurp(a.path() / "manifest.json"));
  auto mb = nlohmann::json::parse(slurp(b.path() / "manifest.json"));
  ma.erase("timestamp");
  mb.erase("timestamp");
  EXPECT_EQ(ma, mb);
}

TEST(EmitResults, ManifestReproducesStages) {
  TempDir first("cas4dl_manifest_first");
  auto c = toy_config();
  c.noise_std = 0.05;
  c.precision = cas4dl::Precision::Single;
  const auto problem = cas4dl::make_problem(c);
  cas4dl::emit_results(cas4dl::run_suite(c, problem), c, problem, first.path());

  const auto again = cas4dl::config_from_manifest(first.path() / "manifest.json");
  EXPECT_EQ(cas4dl::dump_config(again), cas4dl::dump_config(c));
  const auto replay = cas4dl::run_suite(again);
  EXPECT_EQ(cas4dl::stages_csv(replay.records(), false), slurp(first.path() / "stages.csv"));
}

TEST(EmitResults, UnwritableDirectoryRejected) {
  TempDir dir("cas4dl_emit_blocked");
  write(dir.path() / "file", "x");
  const auto c = toy_config();
  EXPECT_THROW(cas4dl::emit_results(cas4dl::SuiteResult{}, c, cas4dl::make_problem(c),
                                    dir.path() / "file" / "sub"),
               std::runtime_error);
}

TEST(Tabulated, ScalarToyTable) {
  TempDir dir("cas4dl_tab_scalar");
  write(dir.path() / "grid.csv", "index,y1\n2,0.5\n0,-1\n3,1\n1,-0.5\n");
  write(dir.path() / "values.csv", "index,value\n0,10\n1,11\n2,12\n3,13\n");
  const auto oracle = cas4dl::load_tabulated(dir.path() / "grid.csv", dir.path() / "values.csv");
  ASSERT_EQ(oracle.grid.size(), 4);
  EXPECT_EQ(oracle.grid.points()(2, 0), 0.5);
  EXPECT_EQ(oracle.grid.points()(0, 0), -1.0);
  for (int l = 0; l < 4; ++l) EXPECT_EQ(oracle.value(l)(0), 10.0 + l);
  EXPECT_FALSE(oracle.test.has_value());
}

TEST(Tabulated, VectorValuedLossSumsComponents) {
  TempDir dir("cas4dl_tab_vector");
  write(dir.path() / "grid.csv", "0,0.1,0.2\n1,0.3,0.4\n2,-0.1,0\n3,1,-1\n");
  write(dir.path() / "values.csv", "0,1,2,3\n1,0,0,1\n2,4,4,4\n3,1,1,1\n");
  const auto oracle = cas4dl::load_tabulated(dir.path() / "grid.csv", dir.path() / "values.csv", {}, {}, 2);
  ASSERT_EQ(oracle.output_dim(), 3);
  // One sample at index 0 with weight 2 against the zero network:
  // (1/1) * 2 * (1 + 4 + 9) = 28.
  const cas4dl::Architecture arch{2, 0, 4, 3, cas4dl::Activation::Tanh};
  const auto zero = cas4dl::NetworkParams<double>::zeros(arch);
  cas4dl::TrainingData data{oracle.grid.points().topRows(1), oracle.values.topRows(1),
                            Eigen::VectorXd::Constant(1, 2.0)};
  EXPECT_DOUBLE_EQ(cas4dl::weighted_loss(zero, data), 28.0);
}

TEST(Tabulated, Rejections) {
  TempDir dir("cas4dl_tab_bad");
  const auto g = dir.path() / "grid.csv";
  const auto v = dir.path() / "values.csv";
  write(g, "0,0.1\n1,0.2\n2,0.3\n3,0.4\n");
  write(v, "0,1\n1,1\n2,1\n");
  EXPECT_THROW(cas4dl::load_tabulated(g, v), std::runtime_error);
  write(v, "0,1\n1,nan\n2,1\n3,1\n");
  EXPECT_THROW(cas4dl::load_tabulated(g, v), std::runtime_error);
  write(v, "0,1\n1,1\n2,1\n3,1\n");
  EXPECT_NO_THROW(cas4dl::load_tabulated(g, v));
  EXPECT_THROW(cas4dl::load_tabulated(g, v, {}, {}, 2), std::runtime_error);
  write(v, "0,1\n1,1\n1,1\n3,1\n");
  EXPECT_THROW(cas4dl::load_tabulated(g, v), std::runtime_error);
  write(v, "0,1\n1,1,2\n2,1\n3,1\n");
  EXPECT_THROW(cas4dl::load_tabulated(g, v), std::runtime_error);
  write(g, "0,0.1\n1,2.5\n2,0.3\n3,0.4\n");
  write(v, "0,1\n1,1\n2,1\n3,1\n");
  EXPECT_THROW(cas4dl::load_tabulated(g, v), std::exception);
  EXPECT_THROW(cas4dl::load_tabulated(dir.path() / "missing.csv", v), std::runtime_error);
}

TEST(Tabulated, WriteReadRoundTrip) {
  TempDir dir("cas4dl_tab_roundtrip");
  cas4dl::RandomStream s(2);
  MatrixXd pts(20, 3), vals(20, 2);
  for (int i = 0; i < 20; ++i) {
    for (int k = 0; k < 3; ++k) pts(i, k) = s.uniform(-1, 1);
    for (int k = 0; k < 2; ++k) vals(i, k) = s.normal() * 1e-3;
  }
  cas4dl::write_point_table(dir.path() / "g.csv", pts);
  cas4dl::write_value_table(dir.path() / "v.csv", vals);
  EXPECT_EQ(cas4dl::read_point_table(dir.path() / "g.csv"), pts);
  EXPECT_EQ(cas4dl::read_value_table(dir.path() / "v.csv"), vals);
}

TEST(Tabulated, ExperimentRunsFromTables) {
  TempDir dir("cas4dl_tab_run");
  const auto grid = cas4dl::build_grid(2, 150, 4);
  const auto test = cas4dl::build_grid(2, 60, 5);
  auto fn = [](const MatrixXd& p) {
    MatrixXd v(p.rows(), 3);
    v.col(0) = (p.col(0).array() + p.col(1).array()).cos();
    v.col(1) = 1.0 + 0.5 * p.col(0).array().square();
    v.col(2) = (p.col(1).array() * 0.7).exp();
    return v;
  };
  cas4dl::write_point_table(dir.path() / "grid.csv", grid.points());
  cas4dl::write_value_table(dir.path() / "values.csv", fn(grid.points()));
  cas4dl::write_point_table(dir.path() / "test_grid.csv", test.points());
  cas4dl::write_value_table(dir.path() / "test_values.csv", fn(test.points()));
  write(dir.path() / "run.ini",
        "[target]\nfunction = tabulated\ndimension = 2\ngrid_file = grid.csv\n"
        "values_file = values.csv\ntest_grid_file = test_grid.csv\ntest_values_file = test_values.csv\n"
        "[network]\ndepth = 1\nwidth = 6\noutput_dim = 3\n"
        "[training]\nepochs_per_stage = 10\n[sampling]\nschedule = 10,20\n[experiment]\ntrials = 1\n");
  const auto c = cas4dl::parse_config(dir.path() / "run.ini");
  const auto problem = cas4dl::make_problem(c);
  EXPECT_EQ(problem.grid.size(), 150);
  EXPECT_EQ(problem.test.points.rows(), 60);
  const auto suite = cas4dl::run_suite(c, problem);
  EXPECT_EQ(suite.records().size(), 4u);
  for (const auto& r : suite.records()) EXPECT_TRUE(std::isfinite(r.rel_error));

  auto mismatch = c;
  mismatch.output_dim = 2;
  EXPECT_THROW(cas4dl::make_problem(mismatch), cas4dl::ConfigError);
}
