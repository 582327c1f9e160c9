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

#include <fstream>

#include "qhbm/checkpoint.hpp"
#include "qhbm/cli.hpp"
#include "qhbm/errors.hpp"
#include "qhbm/io.hpp"

namespace qhbm {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
}

[[noreturn]] void unknown_key(const std::string& where, const std::string& key) {
  throw ConfigError("unknown key '" + key + "' in " + where);
}

std::string overlap_name(OverlapMode m) { return m == OverlapMode::squared ? "squared" : "modulus"; }

OverlapMode parse_overlap(const std::string& s) {
  if (s == "squared") return OverlapMode::squared;
  if (s == "modulus") return OverlapMode::modulus;
  throw ConfigError("unknown overlap mode '" + s + "'");
}

std::string site_mode_name(SiteEntropyMode m) {
  return m == SiteEntropyMode::dressed ? "dressed" : "diagonal";
}

SiteEntropyMode parse_site_mode(const std::string& s) {
  if (s == "dressed") return SiteEntropyMode::dressed;
  if (s == "diagonal") return SiteEntropyMode::diagonal;
  throw ConfigError("unknown site entropy mode '" + s + "'");
}

void read_data(const json& j, DataPaths& d) {
  require_object(j, "data");
  for (const auto& [key, value] : j.items()) {
    const auto path = value.get<std::string>();
    if (key == "train") d.train = path;
    else if (key == "valid") d.valid = path;
    else if (key == "test") d.test = path;
    else if (key == "signal") d.signal = path;
    else if (key == "background") d.background = path;
    else unknown_key("data", key);
  }
}

void read_preprocess(const json& j, PreprocessOptions& p) {
  require_object(j, "preprocess");
  for (const auto& [key, value] : j.items()) {
    if (key == "crop") p.crop = value.get<int>();
    else if (key == "pool") p.pool = value.get<int>();
    else if (key == "trim_remainder") p.trim_remainder = value.get<bool>();
    else unknown_key("preprocess", key);
  }
}

void read_evaluate(const json& j, EvaluationOptions& e) {
  require_object(j, "evaluate");
  for (const auto& [key, value] : j.items()) {
    if (key == "batch_size") e.batch_size = value.get<int>();
    else if (key == "exact_truth") e.exact_truth = value.get<bool>();
    else if (key == "truth_samples") e.truth_samples = value.get<int>();
    else if (key == "latent") e.latent = parse_latent_mode(value.get<std::string>());
    else unknown_key("evaluate", key);
  }
}

void read_anomaly(const json& j, AnomalyOptions& a) {
  require_object(j, "anomaly");
  for (const auto& [key, value] : j.items()) {
    if (key == "total_time") a.series.total_time = value.get<double>();
    else if (key == "dt") a.series.dt = value.get<double>();
    else if (key == "n_draws") a.series.n_draws = value.get<int>();
    else if (key == "average_draws") a.series.average_draws = value.get<bool>();
    else if (key == "overlap") a.series.overlap = parse_overlap(value.get<std::string>());
    else if (key == "f_min") a.f_min = value.get<double>();
    else if (key == "thresholds") a.n_thresholds = value.get<int>();
    else unknown_key("anomaly", key);
  }
}

}  // namespace

TrainConfig apply_preset(const std::string& preset, TrainConfig c) {
  if (preset == "none") return c;
  if (preset == "six_qubit") {
    c.n_qubits = 6;
    c.n_mc_samples = 500;
    c.n_embed_samples = 5000;
    return c;
  }
  if (preset == "eight_qubit") {
    c.n_qubits = 8;
    c.n_mc_samples = 1000;
    c.n_embed_samples = 5000;
    return c;
  }
  throw ConfigError("unknown preset '" + preset + "' (expected none, six_qubit, eight_qubit)");
}

RunConfig run_config_from_json(const json& j) {
  require_object(j, "configuration");
  RunConfig c;
  try {
    if (j.contains("preset")) c.preset = j.at("preset").get<std::string>();
    c.train = apply_preset(c.preset, c.train);
    for (const auto& [key, value] : j.items()) {
      if (key == "preset") continue;
      if (key == "train") c.train = train_config_from_json(value, c.train);
      else if (key == "data") read_data(value, c.data);
      else if (key == "output_dir") c.output_dir = value.get<std::string>();
      else if (key == "preprocess") read_preprocess(value, c.preprocess);
      else if (key == "evaluate") read_evaluate(value, c.evaluate);
      else if (key == "anomaly") read_anomaly(value, c.anomaly);
      else if (key == "site_entropy") c.site_entropy = parse_site_mode(value.get<std::string>());
      else if (key == "snapshot_every") c.snapshot_every = value.get<int>();
      else unknown_key("configuration", key);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad configuration value: ") + e.what());
  }
  return c;
}

json to_json(const RunConfig& c) {
  const auto& s = c.anomaly.series;
  return {
      {"preset", c.preset},
      {"train", to_json(c.train)},
      {"data",
       {{"train", c.data.train.string()},
        {"valid", c.data.valid.string()},
        {"test", c.data.test.string()},
        {"signal", c.data.signal.string()},
        {"background", c.data.background.string()}}},
      {"output_dir", c.output_dir.string()},
      {"preprocess",
       {{"crop", c.preprocess.crop},
        {"pool", c.preprocess.pool},
        {"trim_remainder", c.preprocess.trim_remainder}}},
      {"evaluate",
       {{"batch_size", c.evaluate.batch_size},
        {"exact_truth", c.evaluate.exact_truth},
        {"truth_samples", c.evaluate.truth_samples},
        {"latent", to_string(c.evaluate.latent)}}},
      {"anomaly",
       {{"total_time", s.total_time},
        {"dt", s.dt},
        {"n_draws", s.n_draws},
        {"average_draws", s.average_draws},
        {"overlap", overlap_name(s.overlap)},
        {"f_min", c.anomaly.f_min},
        {"thresholds", c.anomaly.n_thresholds}}},
      {"site_entropy", site_mode_name(c.site_entropy)},
      {"snapshot_every", c.snapshot_every},
  };
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return run_config_from_json(j);
}

std::string config_provenance(const RunConfig& config) {
  json j = to_json(config);
  j.erase("output_dir");
  return provenance_line(j);
}

std::vector<PixelProbabilities> load_probabilities(const std::filesystem::path& path,
                                                   int n_qubits) {
  const ImageDataset ds = read_dataset(path);
  std::vector<PixelProbabilities> out;
  out.reserve(ds.images.size());
  for (const auto& img : ds.images) {
    const int n_pixels = img.width() * img.height();
    if (n_pixels != n_qubits)
      throw DataError(path.string() + ": images have " + std::to_string(n_pixels) +
                      " pixels but the model has " + std::to_string(n_qubits) +
                      " qubits (run preprocess with --qubits " + std::to_string(n_qubits) + ")");
    PixelLayout all(static_cast<std::size_t>(n_pixels));
    for (int i = 0; i < n_pixels; ++i) all[static_cast<std::size_t>(i)] = i;
    out.push_back(select_pixels(img, all));
  }
  return out;
}

}  // namespace qhbm
