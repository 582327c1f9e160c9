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

#include "qhbm/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qhbm/errors.hpp"

namespace qhbm {

void TrainConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(what);
  };
  require(n_qubits >= 2 && n_qubits <= kMaxQubits, "n_qubits must be in [2, 10]");
  require(n_layers >= 1, "n_layers must be >= 1");
  require(n_hidden >= 0, "n_hidden must be >= 0");
  require(n_mc_samples >= 1, "n_mc_samples must be >= 1");
  require(n_embed_samples >= 1, "n_embed_samples must be >= 1");
  require(batch_size >= 1, "batch_size must be >= 1");
  require(beta > 0.0 && k_beta > 0.0, "beta and k_beta must be positive");
  require(learning_rate > 0.0, "learning_rate must be positive");
  require(lr_halve_patience >= 1 && early_stop_patience >= 1,
          "patience values must be >= 1");
  require(max_epochs >= 1, "max_epochs must be >= 1");
  require(mc_burn_in >= 0, "mc_burn_in must be >= 0");
  require(init_stddev >= 0.0, "init_stddev must be >= 0");
}

void adam_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamMoments& m,
                 double learning_rate, double beta1, double beta2, double epsilon) {
  check_shape(params.size() == grad.size() && m.first.size() == grad.size(),
              "adam_update: size mismatch");
  ++m.step;
  m.first = beta1 * m.first + (1.0 - beta1) * grad;
  m.second = beta2 * m.second + (1.0 - beta2) * grad.cwiseAbs2();
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(m.step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(m.step));
  params.array() -= learning_rate * (m.first.array() / c1) /
                    ((m.second.array() / c2).sqrt() + epsilon);
}

TrainState initial_state(const TrainConfig& config) {
  config.validate();
  TrainState st;
  Rng init = make_rng(config.seed, "init");
  st.model = EnergyModel::random(config.n_qubits, config.hidden_units(), init, config.init_stddev);
  st.ansatz = CircuitAnsatz(config.n_qubits, config.n_layers);
  st.hamiltonian = ModularHamiltonian::empty(config.n_qubits, config.hamiltonian.partition);
  st.chain = MarkovChainState::start(st.model, SpinConfig::all_up(config.n_qubits),
                                     make_rng(config.seed, "chain"));
  st.adam_theta = AdamMoments::zeros(st.model.parameter_count());
  st.adam_phi = AdamMoments::zeros(st.ansatz.angles.size());
  st.lr_current = config.learning_rate;
  st.shuffle_rng = make_rng(config.seed, "shuffle");
  return st;
}

std::vector<EmbeddedImage> embed_dataset(std::span<const PixelProbabilities> images,
                                         int n_samples, std::uint64_t seed,
                                         std::string_view stream, std::uint64_t round) {
  std::vector<EmbeddedImage> out;
  out.reserve(images.size());
  for (std::size_t d = 0; d < images.size(); ++d) {
    Rng rng = make_rng(seed, stream, (round << 32) | d);
    out.push_back({bernoulli_embed_indices(images[d], n_samples, rng), images[d].weight,
                   images[d].label});
  }
  return out;
}

Eigen::VectorXd batch_input_weights(std::span<const EmbeddedImage> batch, int n_qubits) {
  if (batch.empty()) throw DataError("batch is empty");
  double total = 0.0;
  for (const auto& img : batch) total += img.weight;
  if (!(total > 0.0)) throw DataError("batch weights sum to zero");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dim(n_qubits)));
  for (const auto& img : batch) {
    if (img.draws.empty()) throw DataError("embedded image without draws");
    const double each = img.weight / total / static_cast<double>(img.draws.size());
    for (BasisIndex z : img.draws) {
      check_shape(z < basis_dim(n_qubits), "batch_input_weights: configuration out of range");
      w[z] += each;
    }
  }
  return w;
}

Eigen::VectorXd config_expectations(const CircuitAnsatz& ansatz, const ModularHamiltonian& ham,
                                    Convention convention) {
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(ansatz.n_qubits));
  if (ham.is_empty()) return Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Identity(dim, dim);
  apply_circuit(block, ansatz, convention == Convention::adjoint);
  return block.cwiseAbs2().transpose() * ham.diagonal();
}

BatchObjective batch_objective(const CircuitAnsatz& ansatz, const ModularHamiltonian& ham,
                               std::span<const EmbeddedImage> batch, const TrainConfig& config) {
  check_shape(ham.n_qubits() == ansatz.n_qubits, "batch_objective: size mismatch");
  BatchObjective out;
  out.input_weights = batch_input_weights(batch, ansatz.n_qubits);
  out.support_weights = frame_probabilities(out.input_weights, ansatz, config.convention);
  out.mean_expectation = out.support_weights.dot(ham.diagonal());
  out.log_partition = ham.log_partition();
  out.loss = config.beta * out.mean_expectation + config.k_beta * out.log_partition;
  return out;
}

BatchObjective batch_objective(const TrainState& state, std::span<const EmbeddedImage> batch,
                               const TrainConfig& config) {
  return batch_objective(state.ansatz, state.hamiltonian, batch, config);
}

TrainState train_step(TrainState state, std::span<const EmbeddedImage> batch,
                      const TrainConfig& config, StepInfo* info) {
  auto mc = metropolis_sample(state.model, std::move(state.chain), config.mc_burn_in,
                              config.n_mc_samples, config.proposal);
  state.chain = std::move(mc.chain);
  state.hamiltonian = build_hamiltonian(state.model, mc.samples, config.hamiltonian);

  const BatchObjective obj = batch_objective(state, batch, config);
  const Eigen::VectorXd theta_grad =
      theta_gradient(state.model, state.hamiltonian, obj.support_weights, config.beta,
                     config.k_beta)
          .flatten();
  const Eigen::VectorXd phi_grad =
      config.beta * parameter_shift_gradient(obj.input_weights, state.ansatz,
                                             state.hamiltonian, config.convention);

  Eigen::VectorXd theta = state.model.flatten();
  adam_update(theta, theta_grad, state.adam_theta, state.lr_current, config.adam_beta1,
              config.adam_beta2, config.adam_epsilon);
  state.model.assign(theta);
  adam_update(state.ansatz.angles, phi_grad, state.adam_phi, state.lr_current,
              config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  state.model.validate();

  // Keep K consistent with the updated parameters on the sampled support.
  state.hamiltonian = reevaluate_energies(state.model, state.hamiltonian);
  state.chain.current_energy = free_energy(state.model, state.chain.current);
  ++state.steps;

  if (info) {
    info->loss = obj.loss;
    info->mean_expectation = obj.mean_expectation;
    info->log_partition = obj.log_partition;
    info->support_size = state.hamiltonian.size();
    info->acceptance = static_cast<double>(mc.accepted) / static_cast<double>(mc.proposed);
    info->theta_grad = theta_grad;
    info->phi_grad = phi_grad;
  }
  return state;
}

double validation_loss(const TrainState& state, std::span<const EmbeddedImage> data,
                       const TrainConfig& config, std::uint64_t round) {
  auto chain = MarkovChainState::start(state.model, state.chain.current,
                                       make_rng(config.seed, "validation", round));
  auto mc = metropolis_sample(state.model, std::move(chain), config.mc_burn_in,
                              config.n_mc_samples, config.proposal);
  const auto ham = build_hamiltonian(state.model, mc.samples, config.hamiltonian);
  return batch_objective(state.ansatz, ham, data, config).loss;
}

namespace {

void shuffle_indices(std::vector<std::size_t>& idx, Rng& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_index(rng, i));
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

FitResult fit(const TrainConfig& config, std::span<const PixelProbabilities> train_data,
              std::span<const PixelProbabilities> valid_data, std::optional<TrainState> resume,
              const EpochCallback& on_epoch) {
  config.validate();
  if (train_data.empty()) throw DataError("fit: training set is empty");
  if (valid_data.empty()) throw DataError("fit: validation set is empty");
  for (const auto& p : train_data)
    check_shape(p.size() == config.n_qubits, "fit: training image qubit count mismatch");
  for (const auto& p : valid_data)
    check_shape(p.size() == config.n_qubits, "fit: validation image qubit count mismatch");

  FitResult result;
  TrainState st = resume ? std::move(*resume) : initial_state(config);
  result.best = st;

  const auto valid = embed_dataset(valid_data, config.n_embed_samples, config.seed,
                                   "validation-embedding");
  std::vector<EmbeddedImage> train;
  if (config.embed_mode == EmbedMode::presampled)
    train = embed_dataset(train_data, config.n_embed_samples, config.seed, "embedding");

  std::vector<std::size_t> order(train_data.size());
  std::vector<EmbeddedImage> batch;
  for (int epoch = st.epoch + 1; epoch <= config.max_epochs; ++epoch) {
    if (config.embed_mode == EmbedMode::per_epoch)
      train = embed_dataset(train_data, config.n_embed_samples, config.seed, "embedding",
                            static_cast<std::uint64_t>(epoch));
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle_indices(order, st.shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.learning_rate = st.lr_current;
    int n_batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(train[order[i]]);
      StepInfo info;
      st = train_step(std::move(st), batch, config, &info);
      rec.train_loss += info.loss;
      rec.mean_expectation += info.mean_expectation;
      rec.log_partition += info.log_partition;
      rec.support_size += static_cast<double>(info.support_size);
      rec.acceptance += info.acceptance;
      ++n_batches;
    }
    rec.train_loss /= n_batches;
    rec.mean_expectation /= n_batches;
    rec.log_partition /= n_batches;
    rec.support_size /= n_batches;
    rec.acceptance /= n_batches;
    rec.valid_loss = validation_loss(st, valid, config, static_cast<std::uint64_t>(epoch));
    st.epoch = epoch;

    if (rec.valid_loss < st.best_validation_loss) {
      st.best_validation_loss = rec.valid_loss;
      st.epochs_since_improvement = 0;
      st.epochs_since_lr_change = 0;
      result.best = st;
    } else {
      ++st.epochs_since_improvement;
      if (++st.epochs_since_lr_change >= config.lr_halve_patience) {
        st.lr_current /= 2.0;
        st.epochs_since_lr_change = 0;
      }
    }
    result.history.push_back(rec);
    if (on_epoch) on_epoch(rec, st);
    if (st.epochs_since_improvement >= config.early_stop_patience) {
      result.early_stopped = true;
      break;
    }
  }
  result.last = std::move(st);
  return result;
}

Eigen::MatrixXcd data_frame_unitary(const CircuitAnsatz& ansatz, Convention convention) {
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(ansatz.n_qubits));
  Eigen::MatrixXcd w = Eigen::MatrixXcd::Identity(dim, dim);
  apply_circuit(w, ansatz, convention == Convention::forward);
  return w;
}

DensityMatrix model_density(const TrainState& state, Convention convention, LatentMode latent) {
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(state.ansatz.n_qubits));
  if (latent == LatentMode::maximally_mixed)
    return DensityMatrix::Identity(dim, dim) / static_cast<double>(dim);
  if (state.hamiltonian.is_empty() &&
      state.hamiltonian.partition_mode() == PartitionMode::support)
    throw DataError("model_density: Hamiltonian support is empty");
  const Eigen::MatrixXcd w = data_frame_unitary(state.ansatz, convention);
  const Eigen::VectorXcd p = thermal_probabilities(state.hamiltonian).cast<std::complex<double>>();
  return w * p.asDiagonal() * w.adjoint();
}

namespace {

Eigen::Index sample_index(const Eigen::VectorXd& cumulative, Rng& rng) {
  const double u = uniform01(rng) * cumulative[cumulative.size() - 1];
  const auto* begin = cumulative.data();
  const auto* it = std::upper_bound(begin, begin + cumulative.size(), u);
  return std::min<Eigen::Index>(it - begin, cumulative.size() - 1);
}

Eigen::VectorXd cumsum(const Eigen::VectorXd& p) {
  Eigen::VectorXd c(p.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) c[i] = acc += std::max(p[i], 0.0);
  return c;
}

}  // namespace

GenerateResult generate(const TrainState& state, int n_events, Rng& rng, Convention convention,
                        LatentMode latent) {
  if (state.hamiltonian.is_empty()) throw DataError("generate: Hamiltonian support is empty");
  check_shape(n_events >= 0, "generate: negative event count");
  const int n = state.ansatz.n_qubits;
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(n));
  const Eigen::MatrixXcd w = data_frame_unitary(state.ansatz, convention);

  const Eigen::VectorXd latent_p = latent == LatentMode::thermal
                                       ? thermal_probabilities(state.hamiltonian)
                                       : Eigen::VectorXd::Constant(dim, 1.0 / double(dim));
  const Eigen::VectorXd latent_cdf = cumsum(latent_p);
  std::vector<Eigen::VectorXd> column_cdf(static_cast<std::size_t>(dim));

  GenerateResult out;
  out.samples.reserve(static_cast<std::size_t>(n_events));
  for (int e = 0; e < n_events; ++e) {
    const Eigen::Index v = sample_index(latent_cdf, rng);
    auto& cdf = column_cdf[static_cast<std::size_t>(v)];
    if (cdf.size() == 0) cdf = cumsum(w.col(v).cwiseAbs2());
    out.samples.push_back(SpinConfig::from_index(static_cast<BasisIndex>(sample_index(cdf, rng)), n));
  }
  const Eigen::VectorXcd pc = latent_p.cast<std::complex<double>>();
  out.density = w * pc.asDiagonal() * w.adjoint();
  return out;
}

std::vector<BatchMetrics> evaluate_batches(const TrainState& state, const TrainConfig& config,
                                           std::span<const PixelProbabilities> data,
                                           const EvaluationOptions& options) {
  if (data.empty()) throw DataError("evaluate: empty dataset");
  check_shape(options.batch_size >= 1, "evaluate: batch size must be >= 1");
  const int n = state.ansatz.n_qubits;
  const DensityMatrix rho = model_density(state, config.convention, options.latent);
  Eigen::VectorXd model_diag = rho.diagonal().real().cwiseMax(0.0);
  model_diag /= model_diag.sum();
  const Eigen::VectorXd model_marginals = marginal_probabilities(model_diag, n);
  const double model_entropy = von_neumann_entropy(rho);
  const Eigen::VectorXd expectations =
      config_expectations(state.ansatz, state.hamiltonian, config.convention);

  std::vector<BatchMetrics> out;
  std::size_t b = 0;
  for (std::size_t start = 0; start < data.size();
       start += static_cast<std::size_t>(options.batch_size), ++b) {
    const std::size_t stop =
        std::min(data.size(), start + static_cast<std::size_t>(options.batch_size));
    const auto batch = data.subspan(start, stop - start);
    std::vector<double> weights;
    Eigen::VectorXd input_marginals = Eigen::VectorXd::Zero(n);
    double total = 0.0;
    for (const auto& p : batch) {
      check_shape(p.size() == n, "evaluate: image qubit count mismatch");
      weights.push_back(p.weight);
      input_marginals += p.weight * p.probs;
      total += p.weight;
    }
    input_marginals /= total;

    Eigen::VectorXd truth;
    if (options.exact_truth) {
      truth = exact_mixed_state_diagonal(batch, weights);
    } else {
      truth = dataset_mixed_state(batch, weights, options.truth_samples,
                                  derive_seed(options.seed, "truth", b))
                  .diagonal()
                  .real();
    }
    const DensityMatrix sigma = truth.cast<std::complex<double>>().asDiagonal();

    BatchMetrics m;
    m.fidelity = fidelity(sigma, rho);
    m.trace_distance = trace_distance(sigma, rho);
    m.quantum_kl = quantum_relative_entropy(sigma, rho);
    m.joint_kl = kl_divergence(truth, model_diag);
    m.marginal_kl = marginal_bernoulli_kl(input_marginals, model_marginals);
    m.data_entropy = von_neumann_entropy(sigma);
    m.model_entropy = model_entropy;
    m.objective = config.beta * truth.dot(expectations) +
                  config.k_beta * state.hamiltonian.log_partition();
    out.push_back(m);
  }
  return out;
}

}  // namespace qhbm
