#include "cas4dl/results_io.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cas4dl/random.hpp"

namespace cas4dl {

std::string code_version() { return "cas4dl 1.0.0"; }

std::string format_real(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (std::isnan(value)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string stages_csv(const std::vector<StageRecord>& records, bool include_wall_time) {
  std::ostringstream out;
  out << kStagesHeader << '\n';
  for (const StageRecord& r : records) {
    out << to_string(r.method) << ',' << r.trial << ',' << r.stage << ',' << r.m << ',' << r.n << ','
        << format_real(r.rel_error) << ',' << format_real(r.alpha_inv) << ','
        << format_real(r.final_loss) << ',' << format_real(include_wall_time ? r.wall_time_s : 0.0)
        << '\n';
  }
  return out.str();
}

std::vector<StageRecord> parse_stages_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kStagesHeader)
    throw std::runtime_error("stages.csv: unexpected header");
  std::vector<StageRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::vector<std::string> f;
    std::string field;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 9) throw std::runtime_error("stages.csv: expected 9 fields in '" + line + "'");
    StageRecord r;
    r.method = parse_method(f[0]);
    r.trial = std::stoi(f[1]);
    r.stage = std::stoi(f[2]);
    r.m = std::stoull(f[3]);
    r.n = std::stol(f[4]);
    r.rel_error = std::strtod(f[5].c_str(), nullptr);
    r.alpha_inv = std::strtod(f[6].c_str(), nullptr);
    r.final_loss = std::strtod(f[7].c_str(), nullptr);
    r.wall_time_s = std::strtod(f[8].c_str(), nullptr);
    records.push_back(r);
  }
  return records;
}

std::string aggregate_csv(const std::vector<StageAggregate>& aggregates) {
  std::ostringstream out;
  out << "method,stage,m,trials,"
         "rel_error_mean,rel_error_median,rel_error_std,"
         "n_mean,n_median,n_std,"
         "alpha_inv_mean,alpha_inv_median,alpha_inv_std\n";
  auto put = [&](const Summary& s) {
    out << ',' << format_real(s.mean) << ',' << format_real(s.median) << ',' << format_real(s.stddev);
  };
  for (const StageAggregate& a : aggregates) {
    out << to_string(a.method) << ',' << a.stage << ',' << a.m << ',' << a.trials;
    put(a.rel_error);
    put(a.n);
    put(a.alpha_inv);
    out << '\n';
  }
  return out.str();
}

std::string manifest_json(const ExperimentConfig& config, const SuiteResult& suite,
                          const std::string& timestamp) {
  nlohmann::ordered_json j;
  j["code_version"] = code_version();
  j["timestamp"] = timestamp;
  j["precision"] = to_string(config.precision);
  j["config"] = dump_config(config);
  j["test_set"] = "uniform random points on [-1,1]^d (equal-weight Monte Carlo quadrature)";
  nlohmann::ordered_json seeds;
  seeds["base"] = config.seed;
  seeds["grid"] = config.grid_seed;
  seeds["test"] = config.test_seed;
  nlohmann::ordered_json per_trial = nlohmann::ordered_json::array();
  for (Method method : config.methods) {
    for (int t = 0; t < config.trials; ++t) {
      const TrialSeeds s = trial_seeds(config, method, t);
      per_trial.push_back({{"method", to_string(method)},
                           {"trial", t},
                           {"init", s.init},
                           {"sampling", s.sampling},
                           {"noise", s.noise}});
    }
  }
  seeds["trials"] = per_trial;
  j["seeds"] = seeds;
  nlohmann::ordered_json failures = nlohmann::ordered_json::array();
  for (const TrialResult& t : suite.trials)
    if (t.failed)
      failures.push_back({{"method", to_string(t.method)}, {"trial", t.trial}, {"reason", t.failure}});
  j["failures"] = failures;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_manifest(const std::filesystem::path& manifest) {
  std::ifstream in(manifest);
  if (!in) throw std::runtime_error("cannot open manifest " + manifest.string());
  const nlohmann::json j = nlohmann::json::parse(in);
  if (!j.contains("config") || !j["config"].is_string())
    throw std::runtime_error("manifest has no config entry");
  return parse_config_string(j["config"].get<std::string>());
}

namespace {

void write_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out << text;
  if (!out) throw std::runtime_error("failed writing " + file.string());
}

std::string coordinate_header(int dimension) {
  std::string s;
  for (int j = 1; j <= dimension; ++j) s += ",coord_" + std::to_string(j);
  return s;
}

std::string samples_csv(const TrialResult& t, const Grid& grid) {
  std::ostringstream out;
  out << "index,stage,measure,weight" << coordinate_header(grid.dimension()) << '\n';
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    const Eigen::Index idx = t.samples.indices[i];
    out << idx << ',' << t.samples.stages[i] << ',' << t.samples.measures[i] << ','
        << format_real(t.samples.weights[i]);
    for (int j = 0; j < grid.dimension(); ++j) out << ',' << format_real(grid.points()(idx, j));
    out << '\n';
  }
  return out.str();
}

std::string christoffel_csv(const TrialResult& t, const Grid& grid) {
  std::ostringstream out;
  out << "index" << coordinate_header(grid.dimension()) << ",christoffel\n";
  for (Eigen::Index l = 0; l < t.final_christoffel.size(); ++l) {
    out << l;
    for (int j = 0; j < grid.dimension(); ++j) out << ',' << format_real(grid.points()(l, j));
    out << ',' << format_real(t.final_christoffel(l)) << '\n';
  }
  return out.str();
}

std::string dictionary_csv(const DictionaryTrace& trace) {
  std::ostringstream out;
  out << 't';
  for (Eigen::Index neuron : trace.neurons) out << ",neuron_" << neuron;
  out << '\n';
  for (Eigen::Index i = 0; i < trace.line.size(); ++i) {
    out << format_real(trace.line(i));
    for (Eigen::Index k = 0; k < trace.values.cols(); ++k) out << ',' << format_real(trace.values(i, k));
    out << '\n';
  }
  return out.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

void emit_results(const SuiteResult& suite, const ExperimentConfig& config, const Problem& problem,
                  const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir))
    throw std::runtime_error("cannot create output directory " + out_dir.string());

  write_text(out_dir / "stages.csv", stages_csv(suite.records(), config.record_wall_time));
  write_text(out_dir / "aggregate.csv", aggregate_csv(suite.aggregates));
  for (const TrialResult& t : suite.trials) {
    const std::string tag = to_string(t.method) + "_" + std::to_string(t.trial);
    if (!t.samples.indices.empty())
      write_text(out_dir / ("samples_" + tag + ".csv"), samples_csv(t, problem.grid));
    if (t.method == Method::CAS && t.final_christoffel.size() > 0)
      write_text(out_dir / ("christoffel_" + std::to_string(t.trial) + ".csv"),
                 christoffel_csv(t, problem.grid));
    if (t.method == Method::CAS && !t.final_params.weights.empty())
      write_text(out_dir / ("dictionary_" + std::to_string(t.trial) + ".csv"),
                 dictionary_csv(dictionary_trace(t.final_params, problem.grid)));
    if (!t.checkpoint.empty()) write_text(out_dir / ("checkpoint_" + tag + ".bin"), t.checkpoint);
  }
  write_text(out_dir / "manifest.json", manifest_json(config, suite, utc_timestamp()));
}

}  // namespace cas4dl
