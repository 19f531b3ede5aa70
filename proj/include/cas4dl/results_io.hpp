#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cas4dl/config.hpp"
#include "cas4dl/experiment.hpp"

namespace cas4dl {

inline constexpr const char* kStagesHeader =
    "method,trial,stage,m,n,rel_error,alpha_inv,final_loss,wall_time_s";

/// Decimal form with 17 significant digits; inf and nan spelled out.
std::string format_real(double value);

std::string stages_csv(const std::vector<StageRecord>& records, bool include_wall_time);
std::vector<StageRecord> parse_stages_csv(const std::string& text);

std::string aggregate_csv(const std::vector<StageAggregate>& aggregates);

/// Manifest JSON: normalized config text, seeds, precision, code version,
/// failed trials and a timestamp. The config text alone reproduces the run.
std::string manifest_json(const ExperimentConfig& config, const SuiteResult& suite,
                          const std::string& timestamp);

/// Reads the config stored in a manifest written by emit_results.
ExperimentConfig config_from_manifest(const std::filesystem::path& manifest);

/// Writes stages.csv, aggregate.csv, samples_<method>_<trial>.csv,
/// christoffel_<trial>.csv and dictionary_<trial>.csv (CAS trials),
/// checkpoint_<method>_<trial>.bin (when enabled) and manifest.json.
void emit_results(const SuiteResult& suite, const ExperimentConfig& config, const Problem& problem,
                  const std::filesystem::path& out_dir);

/// Code version recorded in manifests.
std::string code_version();

}  // namespace cas4dl
