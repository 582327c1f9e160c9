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

#include "qhbm/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <set>

#include "qhbm/errors.hpp"

namespace qhbm {

namespace {

using nlohmann::json;

template <typename T>
void write_raw(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::istream& in, const std::string& what) {
  T value;
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw DataError("truncated checkpoint: " + what);
  return value;
}

template <typename Enum>
Enum parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, Enum>> table,
                const char* what) {
  for (const auto& [name, value] : table)
    if (s == name) return value;
  throw ConfigError(std::string("unknown ") + what + " '" + s + "'");
}

struct PayloadWriter {
  json manifest = json::array();
  std::vector<double> data;

  void add(const std::string& name, const Eigen::Ref<const Eigen::VectorXd>& v) {
    manifest.push_back({{"name", name}, {"length", v.size()}});
    data.insert(data.end(), v.data(), v.data() + v.size());
  }
};

struct PayloadReader {
  std::map<std::string, Eigen::VectorXd> arrays;

  const Eigen::VectorXd& get(const std::string& name, Eigen::Index expected) const {
    auto it = arrays.find(name);
    if (it == arrays.end()) throw DataError("checkpoint missing payload '" + name + "'");
    if (expected >= 0 && it->second.size() != expected)
      throw DataError("checkpoint payload '" + name + "' has the wrong length");
    return it->second;
  }
};

}  // namespace

std::string to_string(EmbedMode m) { return m == EmbedMode::presampled ? "presampled" : "per_epoch"; }
std::string to_string(Proposal p) { return p == Proposal::uniform ? "uniform" : "single_flip"; }
std::string to_string(DuplicateMode m) {
  return m == DuplicateMode::deduplicate ? "deduplicate" : "multiplicity";
}
std::string to_string(PartitionMode m) { return m == PartitionMode::support ? "support" : "full_trace"; }
std::string to_string(Convention c) { return c == Convention::forward ? "forward" : "adjoint"; }
std::string to_string(LatentMode m) { return m == LatentMode::thermal ? "thermal" : "maximally_mixed"; }

EmbedMode parse_embed_mode(const std::string& s) {
  return parse_enum<EmbedMode>(s, {{"presampled", EmbedMode::presampled},
                                   {"per_epoch", EmbedMode::per_epoch}}, "embed_mode");
}
Proposal parse_proposal(const std::string& s) {
  return parse_enum<Proposal>(s, {{"uniform", Proposal::uniform},
                                  {"single_flip", Proposal::single_flip}}, "proposal");
}
DuplicateMode parse_duplicate_mode(const std::string& s) {
  return parse_enum<DuplicateMode>(s, {{"deduplicate", DuplicateMode::deduplicate},
                                       {"multiplicity", DuplicateMode::multiplicity}},
                                   "duplicates mode");
}
PartitionMode parse_partition_mode(const std::string& s) {
  return parse_enum<PartitionMode>(s, {{"support", PartitionMode::support},
                                       {"full_trace", PartitionMode::full_trace}},
                                   "partition mode");
}
Convention parse_convention(const std::string& s) {
  return parse_enum<Convention>(s, {{"forward", Convention::forward},
                                    {"adjoint", Convention::adjoint}}, "convention");
}
LatentMode parse_latent_mode(const std::string& s) {
  return parse_enum<LatentMode>(s, {{"thermal", LatentMode::thermal},
                                    {"maximally_mixed", LatentMode::maximally_mixed}},
                                "latent mode");
}

json to_json(const TrainConfig& c) {
  return {
      {"n_qubits", c.n_qubits},
      {"n_layers", c.n_layers},
      {"n_hidden", c.n_hidden},
      {"n_mc_samples", c.n_mc_samples},
      {"n_embed_samples", c.n_embed_samples},
      {"batch_size", c.batch_size},
      {"beta", c.beta},
      {"k_beta", c.k_beta},
      {"learning_rate", c.learning_rate},
      {"lr_halve_patience", c.lr_halve_patience},
      {"early_stop_patience", c.early_stop_patience},
      {"max_epochs", c.max_epochs},
      {"mc_burn_in", c.mc_burn_in},
      {"seed", c.seed},
      {"embed_mode", to_string(c.embed_mode)},
      {"proposal", to_string(c.proposal)},
      {"duplicates", to_string(c.hamiltonian.duplicates)},
      {"partition", to_string(c.hamiltonian.partition)},
      {"convention", to_string(c.convention)},
      {"init_stddev", c.init_stddev},
      {"adam_beta1", c.adam_beta1},
      {"adam_beta2", c.adam_beta2},
      {"adam_epsilon", c.adam_epsilon},
  };
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("training configuration must be an object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "n_qubits") c.n_qubits = value.get<int>();
      else if (key == "n_layers") c.n_layers = value.get<int>();
      else if (key == "n_hidden") c.n_hidden = value.get<int>();
      else if (key == "n_mc_samples") c.n_mc_samples = value.get<int>();
      else if (key == "n_embed_samples") c.n_embed_samples = value.get<int>();
      else if (key == "batch_size") c.batch_size = value.get<int>();
      else if (key == "beta") c.beta = value.get<double>();
      else if (key == "k_beta") c.k_beta = value.get<double>();
      else if (key == "learning_rate") c.learning_rate = value.get<double>();
      else if (key == "lr_halve_patience") c.lr_halve_patience = value.get<int>();
      else if (key == "early_stop_patience") c.early_stop_patience = value.get<int>();
      else if (key == "max_epochs") c.max_epochs = value.get<int>();
      else if (key == "mc_burn_in") c.mc_burn_in = value.get<int>();
      else if (key == "seed") c.seed = value.get<std::uint64_t>();
      else if (key == "embed_mode") c.embed_mode = parse_embed_mode(value.get<std::string>());
      else if (key == "proposal") c.proposal = parse_proposal(value.get<std::string>());
      else if (key == "duplicates")
        c.hamiltonian.duplicates = parse_duplicate_mode(value.get<std::string>());
      else if (key == "partition")
        c.hamiltonian.partition = parse_partition_mode(value.get<std::string>());
      else if (key == "convention") c.convention = parse_convention(value.get<std::string>());
      else if (key == "init_stddev") c.init_stddev = value.get<double>();
      else if (key == "adam_beta1") c.adam_beta1 = value.get<double>();
      else if (key == "adam_beta2") c.adam_beta2 = value.get<double>();
      else if (key == "adam_epsilon") c.adam_epsilon = value.get<double>();
      else throw ConfigError("unknown training key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad training configuration value: ") + e.what());
  }
  return c;
}

json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"train_loss", r.train_loss},
          {"valid_loss", r.valid_loss},
          {"learning_rate", r.learning_rate},
          {"mean_expectation", r.mean_expectation},
          {"log_partition", r.log_partition},
          {"support_size", r.support_size},
          {"acceptance", r.acceptance}};
}

EpochRecord epoch_record_from_json(const json& j) {
  EpochRecord r;
  r.epoch = j.at("epoch").get<int>();
  r.train_loss = j.at("train_loss").get<double>();
  r.valid_loss = j.at("valid_loss").get<double>();
  r.learning_rate = j.at("learning_rate").get<double>();
  r.mean_expectation = j.at("mean_expectation").get<double>();
  r.log_partition = j.at("log_partition").get<double>();
  r.support_size = j.at("support_size").get<double>();
  r.acceptance = j.at("acceptance").get<double>();
  return r;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  const TrainState& st = ck.state;
  PayloadWriter payload;
  payload.add("weights", Eigen::Map<const Eigen::VectorXd>(st.model.weights.data(),
                                                          st.model.weights.size()));
  payload.add("visible_bias", st.model.visible_bias);
  payload.add("hidden_bias", st.model.hidden_bias);
  payload.add("angles", st.ansatz.angles);
  payload.add("energies", st.hamiltonian.energies());
  payload.add("adam_theta_first", st.adam_theta.first);
  payload.add("adam_theta_second", st.adam_theta.second);
  payload.add("adam_phi_first", st.adam_phi.first);
  payload.add("adam_phi_second", st.adam_phi.second);
  Eigen::Vector4d scalars(st.best_validation_loss, st.lr_current,
                          st.chain.current_energy, st.hamiltonian.log_partition());
  payload.add("scalars", scalars);

  json history = json::array();
  for (const auto& r : ck.history) history.push_back(to_json(r));

  json meta = {
      {"format", "QHBMCKPT"},
      {"version", kCheckpointVersion},
      {"config", to_json(ck.config)},
      {"shapes",
       {{"n_visible", st.model.n_visible()},
        {"n_hidden", st.model.n_hidden()},
        {"n_qubits", st.ansatz.n_qubits},
        {"n_layers", st.ansatz.n_layers}}},
      {"hamiltonian",
       {{"support", st.hamiltonian.support()},
        {"multiplicity", st.hamiltonian.multiplicity()},
        {"partition", to_string(st.hamiltonian.partition_mode())}}},
      {"chain", {{"current", st.chain.current.to_string()}, {"rng", rng_state(st.chain.rng)}}},
      {"rng", {{"shuffle", rng_state(st.shuffle_rng)}}},
      {"counters",
       {{"epoch", st.epoch},
        {"steps", st.steps},
        {"adam_theta_step", st.adam_theta.step},
        {"adam_phi_step", st.adam_phi.step},
        {"epochs_since_improvement", st.epochs_since_improvement},
        {"epochs_since_lr_change", st.epochs_since_lr_change}}},
      {"history", history},
      {"payloads", payload.manifest},
  };
  const std::string text = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(kCheckpointMagic, 8);
  write_raw(out, kCheckpointVersion);
  write_raw(out, static_cast<std::uint64_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (double v : payload.data) write_raw(out, v);
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  char magic[8];
  if (!in.read(magic, 8) || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    throw DataError("not a QHBMCKPT checkpoint: " + path.string());
  const auto version = read_raw<std::uint32_t>(in, "version");
  if (version != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version) +
                    " (expected " + std::to_string(kCheckpointVersion) + ")");
  const auto length = read_raw<std::uint64_t>(in, "metadata length");
  std::string text(length, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(length)))
    throw DataError("truncated checkpoint metadata");

  Checkpoint ck;
  try {
    const json meta = json::parse(text);
    PayloadReader payload;
    for (const auto& entry : meta.at("payloads")) {
      const auto n = entry.at("length").get<Eigen::Index>();
      Eigen::VectorXd v(n);
      for (Eigen::Index i = 0; i < n; ++i) v[i] = read_raw<double>(in, "payload");
      payload.arrays[entry.at("name").get<std::string>()] = std::move(v);
    }
    if (in.peek() != std::char_traits<char>::eof())
      throw DataError("trailing bytes in checkpoint " + path.string());

    ck.config = train_config_from_json(meta.at("config"));
    const auto& shapes = meta.at("shapes");
    const int nv = shapes.at("n_visible").get<int>();
    const int nh = shapes.at("n_hidden").get<int>();
    TrainState& st = ck.state;
    st.model = EnergyModel(nv, nh);
    st.model.weights = Eigen::Map<const Eigen::MatrixXd>(
        payload.get("weights", Eigen::Index{nv} * nh).data(), nv, nh);
    st.model.visible_bias = payload.get("visible_bias", nv);
    st.model.hidden_bias = payload.get("hidden_bias", nh);
    st.model.validate();
    const int nq = shapes.at("n_qubits").get<int>();
    const int nl = shapes.at("n_layers").get<int>();
    st.ansatz = CircuitAnsatz(nq, nl, payload.get("angles", CircuitAnsatz::angle_count(nq, nl)));

    const auto& ham = meta.at("hamiltonian");
    auto support = ham.at("support").get<std::vector<BasisIndex>>();
    auto multiplicity = ham.at("multiplicity").get<std::vector<int>>();
    const auto mode = parse_partition_mode(ham.at("partition").get<std::string>());
    st.hamiltonian = ModularHamiltonian(
        nq, std::move(support),
        payload.get("energies", static_cast<Eigen::Index>(ham.at("support").size())), mode,
        std::move(multiplicity));

    const auto& scalars = payload.get("scalars", 4);
    st.best_validation_loss = scalars[0];
    st.lr_current = scalars[1];
    st.chain.current = SpinConfig::parse(meta.at("chain").at("current").get<std::string>());
    st.chain.current_energy = scalars[2];
    st.chain.rng = rng_from_state(meta.at("chain").at("rng").get<std::string>());
    st.shuffle_rng = rng_from_state(meta.at("rng").at("shuffle").get<std::string>());

    const auto& counters = meta.at("counters");
    st.epoch = counters.at("epoch").get<int>();
    st.steps = counters.at("steps").get<long>();
    st.epochs_since_improvement = counters.at("epochs_since_improvement").get<int>();
    st.epochs_since_lr_change = counters.at("epochs_since_lr_change").get<int>();
    const Eigen::Index n_theta = st.model.parameter_count();
    st.adam_theta = {payload.get("adam_theta_first", n_theta),
                     payload.get("adam_theta_second", n_theta),
                     counters.at("adam_theta_step").get<long>()};
    const Eigen::Index n_phi = st.ansatz.angles.size();
    st.adam_phi = {payload.get("adam_phi_first", n_phi), payload.get("adam_phi_second", n_phi),
                   counters.at("adam_phi_step").get<long>()};

    for (const auto& r : meta.at("history")) ck.history.push_back(epoch_record_from_json(r));
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint metadata: " + std::string(e.what()));
  }
  return ck;
}

}  // namespace qhbm
