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

#ifndef QHBM_EBM_HPP
#define QHBM_EBM_HPP

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/hamiltonian.hpp"
#include "qhbm/rng.hpp"
#include "qhbm/spin.hpp"

namespace qhbm {

/// Restricted Boltzmann machine with joint energy
///   E(v, h) = -b_vis.v - b_hid.h - v^T W h.
/// Everything downstream works with the hidden-marginalised free energy.
struct EnergyModel {
  Eigen::MatrixXd weights;       // n_visible x n_hidden
  Eigen::VectorXd visible_bias;  // n_visible
  Eigen::VectorXd hidden_bias;   // n_hidden

  EnergyModel() = default;
  EnergyModel(int n_visible, int n_hidden)
      : weights(Eigen::MatrixXd::Zero(n_visible, n_hidden)),
        visible_bias(Eigen::VectorXd::Zero(n_visible)),
        hidden_bias(Eigen::VectorXd::Zero(n_hidden)) {}

  /// Weights ~ N(0, stddev^2), biases zero.
  static EnergyModel random(int n_visible, int n_hidden, Rng& rng, double stddev = 0.01);

  int n_visible() const { return static_cast<int>(visible_bias.size()); }
  int n_hidden() const { return static_cast<int>(hidden_bias.size()); }
  Eigen::Index parameter_count() const {
    return weights.size() + visible_bias.size() + hidden_bias.size();
  }

  /// Throws ShapeError on inconsistent shapes, NumericError on NaN/Inf.
  void validate() const;

  /// Flat parameter view in the order (W column-major, b_vis, b_hid).
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& flat);
};

/// Gradients share the parameter layout of the model.
using EnergyGradient = EnergyModel;

/// F(v) = -b_vis.v - sum_j softplus((v W + b_hid)_j).
double free_energy(const EnergyModel& model, const SpinConfig& v);
double free_energy(const EnergyModel& model, BasisIndex v);

/// p(h_j = 1 | v) = logistic((v W + b_hid)_j).
Eigen::VectorXd conditional_hidden_prob(const EnergyModel& model, const SpinConfig& v);

/// p(v_i = 1 | h) = logistic((h W^T + b_vis)_i).
Eigen::VectorXd conditional_visible_prob(const EnergyModel& model,
                                         const std::vector<std::uint8_t>& h);

enum class Proposal {
  uniform,      // fresh uniformly random configuration each step
  single_flip,  // flip one uniformly chosen spin
};

struct MarkovChainState {
  SpinConfig current;
  double current_energy = 0.0;
  Rng rng;

  /// Chain parked at `start` with its energy evaluated under `model`.
  static MarkovChainState start(const EnergyModel& model, SpinConfig start, Rng rng) {
    const double e = free_energy(model, start);
    return {std::move(start), e, std::move(rng)};
  }
};

struct MetropolisResult {
  std::vector<SpinConfig> samples;
  MarkovChainState chain;
  long accepted = 0;
  long proposed = 0;
};

/// Metropolis chain targeting p(v) ~ exp(-F(v)), accepting with
/// min(exp(F(current) - F(proposal)), 1). Runs `burn_in` unrecorded steps,
/// then records the state after each of `n_collect` further steps.
///
/// The chain's cached energy is refreshed against `model` first, so a
/// chain carried across parameter updates stays consistent.
MetropolisResult metropolis_sample(const EnergyModel& model, MarkovChainState chain,
                                   int burn_in, int n_collect,
                                   Proposal proposal = Proposal::uniform);

enum class DuplicateMode {
  deduplicate,   // each distinct sample contributes E(v) once
  multiplicity,  // a sample seen m times contributes m * E(v)
};

struct HamiltonianOptions {
  DuplicateMode duplicates = DuplicateMode::deduplicate;
  PartitionMode partition = PartitionMode::support;
};

ModularHamiltonian build_hamiltonian(const EnergyModel& model,
                                     std::span<const SpinConfig> samples,
                                     const HamiltonianOptions& options = {});

/// Same support, energies re-evaluated under `model`.
ModularHamiltonian reevaluate_energies(const EnergyModel& model, const ModularHamiltonian& ham);

/// d/dtheta [ beta * sum_z w_z E_z + k_beta * log Z ] with the support held
/// fixed. `frame_weights` has length 2^n; entries outside the support are
/// ignored and support states without an entry count as weight 0.
EnergyGradient theta_gradient(const EnergyModel& model, const ModularHamiltonian& ham,
                              const Eigen::VectorXd& frame_weights, double beta = 1.0,
                              double k_beta = 1.0);

/// The scalar theta_gradient differentiates, evaluated at `model` over the
/// support of `ham` (energies recomputed from the model).
double theta_objective(const EnergyModel& model, const ModularHamiltonian& ham,
                       const Eigen::VectorXd& frame_weights, double beta = 1.0,
                       double k_beta = 1.0);

/// exp(-K) / Z as a dense 2^n x 2^n (diagonal) matrix.
Eigen::MatrixXcd thermal_state(const ModularHamiltonian& ham);

/// Diagonal of thermal_state.
Eigen::VectorXd thermal_probabilities(const ModularHamiltonian& ham);

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace qhbm

#endif
