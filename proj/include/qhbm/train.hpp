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

#ifndef QHBM_TRAIN_HPP
#define QHBM_TRAIN_HPP

#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/ebm.hpp"
#include "qhbm/embed.hpp"
#include "qhbm/metrics.hpp"
#include "qhbm/qsim.hpp"
#include "qhbm/rng.hpp"

namespace qhbm {

enum class EmbedMode {
  presampled,  // draw each image's N configurations once before training
  per_epoch,   // redraw them at the start of every epoch
};

/// Latent state assumed when reading the model as a density matrix.
enum class LatentMode {
  thermal,          // exp(-K)/Z
  maximally_mixed,  // identity / 2^n
};

struct TrainConfig {
  int n_qubits = 4;
  int n_layers = 3;
  int n_hidden = 0;  // 0 selects 2 * n_qubits
  int n_mc_samples = 200;
  int n_embed_samples = 100;
  int batch_size = 25;
  double beta = 1.0;
  double k_beta = 1.0;
  double learning_rate = 1e-2;
  int lr_halve_patience = 25;
  int early_stop_patience = 50;
  int max_epochs = 100;
  int mc_burn_in = 100;
  std::uint64_t seed = 0;
  EmbedMode embed_mode = EmbedMode::presampled;
  Proposal proposal = Proposal::uniform;
  HamiltonianOptions hamiltonian;
  Convention convention = Convention::forward;
  double init_stddev = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  int hidden_units() const { return n_hidden > 0 ? n_hidden : 2 * n_qubits; }
  void validate() const;  // throws ConfigError
};

struct AdamMoments {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
  long step = 0;

  static AdamMoments zeros(Eigen::Index n) {
    return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0};
  }
};

/// One bias-corrected Adam step on `params`.
void adam_update(Eigen::VectorXd& params, const Eigen::VectorXd& grad, AdamMoments& moments,
                 double learning_rate, double beta1, double beta2, double epsilon);

struct TrainState {
  EnergyModel model;
  CircuitAnsatz ansatz;
  ModularHamiltonian hamiltonian;
  MarkovChainState chain;
  AdamMoments adam_theta;
  AdamMoments adam_phi;
  int epoch = 0;  // completed epochs
  long steps = 0;
  double best_validation_loss = std::numeric_limits<double>::infinity();
  double lr_current = 0.0;
  int epochs_since_improvement = 0;
  int epochs_since_lr_change = 0;
  Rng shuffle_rng;
};

/// Fresh state: RBM weights ~ N(0, init_stddev^2), zero angles, chain at
/// the all-up configuration. Every generator derives from config.seed.
TrainState initial_state(const TrainConfig& config);

/// One data point after Bernoulli embedding.
struct EmbeddedImage {
  std::vector<BasisIndex> draws;
  double weight = 1.0;
  Label label = Label::unlabelled;
};

/// Embeds every image with its own substream (seed, stream, round * count + d).
std::vector<EmbeddedImage> embed_dataset(std::span<const PixelProbabilities> images,
                                         int n_samples, std::uint64_t seed,
                                         std::string_view stream = "embedding",
                                         std::uint64_t round = 0);

/// Weighted empirical distribution of a batch over basis states: the
/// diagonal of sum_d (a_d / sum a) (1/N_d) sum_i |p_i><p_i|.
Eigen::VectorXd batch_input_weights(std::span<const EmbeddedImage> batch, int n_qubits);

/// <c| V^dag K V |c> for every basis input c (length 2^n).
Eigen::VectorXd config_expectations(const CircuitAnsatz& ansatz, const ModularHamiltonian& ham,
                                    Convention convention);

struct BatchObjective {
  double loss = 0.0;              // beta * mean <K> + k_beta * log Z
  double mean_expectation = 0.0;  // weighted batch mean of per-image <K>
  double log_partition = 0.0;
  Eigen::VectorXd support_weights;  // batch-mean circuit-basis probabilities
  Eigen::VectorXd input_weights;    // batch_input_weights of the batch
};

BatchObjective batch_objective(const TrainState& state, std::span<const EmbeddedImage> batch,
                               const TrainConfig& config);

/// Same objective against an explicit Hamiltonian.
BatchObjective batch_objective(const CircuitAnsatz& ansatz, const ModularHamiltonian& ham,
                               std::span<const EmbeddedImage> batch, const TrainConfig& config);

struct StepInfo {
  double loss = 0.0;
  double mean_expectation = 0.0;
  double log_partition = 0.0;
  std::size_t support_size = 0;
  double acceptance = 0.0;
  Eigen::VectorXd theta_grad;
  Eigen::VectorXd phi_grad;
};

/// Metropolis re-estimation of K, batch objective, gradients for theta
/// (analytic) and phi (parameter shift, scaled by beta), then a joint Adam
/// update at the current learning rate.
TrainState train_step(TrainState state, std::span<const EmbeddedImage> batch,
                      const TrainConfig& config, StepInfo* info = nullptr);

/// Loss on `data` against a freshly sampled Hamiltonian. The sampling
/// chain starts from the training chain's configuration but uses its own
/// generator, so the training chain is left untouched.
double validation_loss(const TrainState& state, std::span<const EmbeddedImage> data,
                       const TrainConfig& config, std::uint64_t round);

struct EpochRecord {
  int epoch = 0;  // 1-based
  double train_loss = 0.0;
  double valid_loss = 0.0;
  double learning_rate = 0.0;
  double mean_expectation = 0.0;
  double log_partition = 0.0;
  double support_size = 0.0;
  double acceptance = 0.0;
};

struct FitResult {
  TrainState best;
  TrainState last;
  std::vector<EpochRecord> history;
  bool early_stopped = false;
};

using EpochCallback = std::function<void(const EpochRecord&, const TrainState&)>;

/// Epoch loop with shuffled batches, validation after every epoch, learning
/// rate halving after lr_halve_patience epochs without improvement and early
/// stopping after early_stop_patience. Passing `resume` continues from that
/// state's epoch counter up to config.max_epochs.
FitResult fit(const TrainConfig& config, std::span<const PixelProbabilities> train_data,
              std::span<const PixelProbabilities> valid_data,
              std::optional<TrainState> resume = std::nullopt,
              const EpochCallback& on_epoch = {});

/// Dense matrix of the map from the circuit frame back to the data frame
/// (U^dag under the forward convention, U under the adjoint one).
Eigen::MatrixXcd data_frame_unitary(const CircuitAnsatz& ansatz, Convention convention);

/// The model's estimate of the data mixed state, W rho_latent W^dag.
DensityMatrix model_density(const TrainState& state, Convention convention,
                            LatentMode latent = LatentMode::thermal);

struct GenerateResult {
  std::vector<SpinConfig> samples;
  DensityMatrix density;
};

/// Latent v ~ exp(-E(v))/Z, mapped to the data frame, then measured exactly
/// in the computational basis.
GenerateResult generate(const TrainState& state, int n_events, Rng& rng,
                        Convention convention = Convention::forward,
                        LatentMode latent = LatentMode::thermal);

struct BatchMetrics {
  double fidelity = 0.0;
  double trace_distance = 0.0;
  double quantum_kl = 0.0;   // D(truth || model)
  double joint_kl = 0.0;     // classical KL of the diagonals
  double marginal_kl = 0.0;  // per-pixel Bernoulli KL(input || model)
  double data_entropy = 0.0;
  double model_entropy = 0.0;
  double objective = 0.0;    // beta <K> + k log Z on this batch
};

struct EvaluationOptions {
  int batch_size = 25;
  bool exact_truth = true;   // product-Bernoulli limit instead of sampled draws
  int truth_samples = 5000;  // draws per image when exact_truth is false
  LatentMode latent = LatentMode::thermal;
  std::uint64_t seed = 0;
};

/// Metrics of the frozen model against consecutive batches of `data`.
std::vector<BatchMetrics> evaluate_batches(const TrainState& state, const TrainConfig& config,
                                           std::span<const PixelProbabilities> data,
                                           const EvaluationOptions& options);

}  // namespace qhbm

#endif
