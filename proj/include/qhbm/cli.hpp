// Copyright 2026 The QHBM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QHBM_CLI_HPP
#define QHBM_CLI_HPP

#include <filesystem>
#include <iosfwd>
#include <string>

#include "json.hpp"
#include "qhbm/anomaly.hpp"
#include "qhbm/embed.hpp"
#include "qhbm/train.hpp"

namespace qhbm {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitConfig = 2,
  kExitData = 3,
  kExitNumeric = 4,
};

struct DataPaths {
  std::filesystem::path train;
  std::filesystem::path valid;
  std::filesystem::path test;
  std::filesystem::path signal;
  std::filesystem::path background;
};

struct AnomalyOptions {
  SeriesOptions series;
  double f_min = 0.05;
  int n_thresholds = 200;
};

/// Everything a subcommand can be configured with. Loaded from a JSON file
/// and overridden by command-line flags.
struct RunConfig {
  std::string preset = "none";  // none, six_qubit, eight_qubit
  TrainConfig train;
  DataPaths data;
  std::filesystem::path output_dir = "qhbm-out";
  PreprocessOptions preprocess;
  EvaluationOptions evaluate;
  AnomalyOptions anomaly;
  SiteEntropyMode site_entropy = SiteEntropyMode::dressed;
  int snapshot_every = 0;  // epochs between metric snapshots, 0 = final only
};

/// Training defaults of a named scenario. Throws ConfigError for unknown names.
TrainConfig apply_preset(const std::string& preset, TrainConfig base);

/// Strict parse: unknown keys at any level raise ConfigError. The preset is
/// applied before the explicit "train" section.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& config);

RunConfig load_run_config(const std::filesystem::path& path);

/// Configuration fingerprint without the output location, so identical runs
/// into different directories share it.
std::string config_provenance(const RunConfig& config);

/// Reads a preprocessed dataset: every image holds exactly n_qubits pixels,
/// already standardised, mapped through the logistic function.
std::vector<PixelProbabilities> load_probabilities(const std::filesystem::path& path,
                                                   int n_qubits);

/// Entry point shared by the executable and the tests. Errors are reported
/// on `err`; the return value is one of ExitCode.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv);

}  // namespace qhbm

#endif
