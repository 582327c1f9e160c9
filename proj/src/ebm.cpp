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

#include "qhbm/ebm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "qhbm/errors.hpp"

namespace qhbm {

namespace {

Eigen::VectorXd visible_vector(const SpinConfig& v) {
  Eigen::VectorXd x(v.size());
  for (int i = 0; i < v.size(); ++i) x[i] = v[i];
  return x;
}

Eigen::VectorXd visible_vector(BasisIndex v, int n) {
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = qubit_value(v, n, i);
  return x;
}

double free_energy_of(const EnergyModel& model, const Eigen::VectorXd& x) {
  const Eigen::VectorXd act = model.weights.transpose() * x + model.hidden_bias;
  double f = -model.visible_bias.dot(x);
  for (Eigen::Index j = 0; j < act.size(); ++j) f -= softplus(act[j]);
  return f;
}

}  // namespace

EnergyModel EnergyModel::random(int n_visible, int n_hidden, Rng& rng, double stddev) {
  EnergyModel m(n_visible, n_hidden);
  std::normal_distribution<double> normal(0.0, stddev);
  for (Eigen::Index j = 0; j < m.weights.cols(); ++j)
    for (Eigen::Index i = 0; i < m.weights.rows(); ++i) m.weights(i, j) = normal(rng);
  return m;
}

void EnergyModel::validate() const {
  check_shape(weights.rows() == visible_bias.size() && weights.cols() == hidden_bias.size(),
              "EnergyModel: inconsistent parameter shapes");
  check_shape(visible_bias.size() >= 1 && hidden_bias.size() >= 1,
              "EnergyModel: empty layer");
  if (!weights.allFinite() || !visible_bias.allFinite() || !hidden_bias.allFinite())
    throw NumericError("EnergyModel: non-finite parameter");
}

Eigen::VectorXd EnergyModel::flatten() const {
  Eigen::VectorXd flat(parameter_count());
  flat << Eigen::Map<const Eigen::VectorXd>(weights.data(), weights.size()), visible_bias,
      hidden_bias;
  return flat;
}

void EnergyModel::assign(const Eigen::VectorXd& flat) {
  check_shape(flat.size() == parameter_count(), "EnergyModel::assign: size mismatch");
  Eigen::Index off = 0;
  weights = Eigen::Map<const Eigen::MatrixXd>(flat.data(), weights.rows(), weights.cols());
  off += weights.size();
  visible_bias = flat.segment(off, visible_bias.size());
  off += visible_bias.size();
  hidden_bias = flat.segment(off, hidden_bias.size());
}

double free_energy(const EnergyModel& model, const SpinConfig& v) {
  check_shape(v.size() == model.n_visible(), "free_energy: configuration length mismatch");
  return free_energy_of(model, visible_vector(v));
}

double free_energy(const EnergyModel& model, BasisIndex v) {
  check_shape(v < basis_dim(model.n_visible()), "free_energy: index out of range");
  return free_energy_of(model, visible_vector(v, model.n_visible()));
}

Eigen::VectorXd conditional_hidden_prob(const EnergyModel& model, const SpinConfig& v) {
  check_shape(v.size() == model.n_visible(),
              "conditional_hidden_prob: configuration length mismatch");
  const Eigen::VectorXd act = model.weights.transpose() * visible_vector(v) + model.hidden_bias;
  return act.unaryExpr([](double a) { return logistic(a); });
}

Eigen::VectorXd conditional_visible_prob(const EnergyModel& model,
                                         const std::vector<std::uint8_t>& h) {
  check_shape(static_cast<int>(h.size()) == model.n_hidden(),
              "conditional_visible_prob: hidden length mismatch");
  Eigen::VectorXd hv(model.n_hidden());
  for (int j = 0; j < model.n_hidden(); ++j) hv[j] = h[static_cast<std::size_t>(j)];
  const Eigen::VectorXd act = model.weights * hv + model.visible_bias;
  return act.unaryExpr([](double a) { return logistic(a); });
}

MetropolisResult metropolis_sample(const EnergyModel& model, MarkovChainState chain,
                                   int burn_in, int n_collect, Proposal proposal) {
  check_shape(burn_in >= 0, "metropolis_sample: burn_in must be >= 0");
  check_shape(n_collect >= 1, "metropolis_sample: n_collect must be >= 1");
  const int n = model.n_visible();
  check_shape(chain.current.size() == n, "metropolis_sample: chain state length mismatch");

  const auto dim = static_cast<std::uint64_t>(basis_dim(n));
  BasisIndex current = chain.current.index();
  double energy = free_energy(model, current);

  MetropolisResult out;
  out.samples.reserve(static_cast<std::size_t>(n_collect));
  const int total = burn_in + n_collect;
  for (int step = 0; step < total; ++step) {
    BasisIndex candidate;
    if (proposal == Proposal::uniform) {
      candidate = static_cast<BasisIndex>(uniform_index(chain.rng, dim));
    } else {
      const auto q = static_cast<int>(uniform_index(chain.rng, static_cast<std::uint64_t>(n)));
      candidate = current ^ (BasisIndex{1} << bit_position(n, q));
    }
    const double candidate_energy = free_energy(model, candidate);
    const double log_ratio = energy - candidate_energy;
    // Always draw so the stream position does not depend on the branch.
    const double u = uniform01(chain.rng);
    ++out.proposed;
    if (log_ratio >= 0.0 || u < std::exp(log_ratio)) {
      current = candidate;
      energy = candidate_energy;
      ++out.accepted;
    }
    if (step >= burn_in) out.samples.push_back(SpinConfig::from_index(current, n));
  }
  chain.current = SpinConfig::from_index(current, n);
  chain.current_energy = energy;
  out.chain = std::move(chain);
  return out;
}

ModularHamiltonian build_hamiltonian(const EnergyModel& model,
                                     std::span<const SpinConfig> samples,
                                     const HamiltonianOptions& options) {
  if (samples.empty()) throw DataError("build_hamiltonian: no samples");
  const int n = model.n_visible();
  std::map<BasisIndex, int> counts;
  for (const auto& s : samples) {
    check_shape(s.size() == n, "build_hamiltonian: sample length mismatch");
    ++counts[s.index()];
  }
  std::vector<BasisIndex> support;
  std::vector<int> multiplicity;
  Eigen::VectorXd energies(static_cast<Eigen::Index>(counts.size()));
  Eigen::Index k = 0;
  for (const auto& [index, count] : counts) {
    const int m = options.duplicates == DuplicateMode::multiplicity ? count : 1;
    support.push_back(index);
    multiplicity.push_back(m);
    energies[k++] = m * free_energy(model, index);
  }
  return ModularHamiltonian(n, std::move(support), std::move(energies), options.partition,
                            std::move(multiplicity));
}

ModularHamiltonian reevaluate_energies(const EnergyModel& model, const ModularHamiltonian& ham) {
  check_shape(ham.n_qubits() == model.n_visible(), "reevaluate_energies: size mismatch");
  Eigen::VectorXd energies(static_cast<Eigen::Index>(ham.size()));
  for (std::size_t k = 0; k < ham.size(); ++k)
    energies[Eigen::Index(k)] = ham.multiplicity()[k] * free_energy(model, ham.support()[k]);
  return ModularHamiltonian(ham.n_qubits(), ham.support(), std::move(energies),
                            ham.partition_mode(), ham.multiplicity());
}

EnergyGradient theta_gradient(const EnergyModel& model, const ModularHamiltonian& ham,
                              const Eigen::VectorXd& frame_weights, double beta,
                              double k_beta) {
  const int n = model.n_visible();
  check_shape(ham.n_qubits() == n, "theta_gradient: Hamiltonian size mismatch");
  check_shape(frame_weights.size() == static_cast<Eigen::Index>(basis_dim(n)),
              "theta_gradient: weight vector must have length 2^n");

  // Partition weights come from the model's current energies so the
  // gradient stays exact even if `ham` was built from a nearby snapshot.
  Eigen::VectorXd energies(static_cast<Eigen::Index>(ham.size()));
  for (std::size_t k = 0; k < ham.size(); ++k)
    energies[Eigen::Index(k)] = ham.multiplicity()[k] * free_energy(model, ham.support()[k]);
  const double missing = ham.partition_mode() == PartitionMode::full_trace
                             ? static_cast<double>(basis_dim(n) - ham.size())
                             : 0.0;
  const double log_z = log_sum_exp(-energies, missing);

  EnergyGradient grad(n, model.n_hidden());
  for (std::size_t k = 0; k < ham.size(); ++k) {
    const BasisIndex z = ham.support()[k];
    const double p = std::exp(-energies[Eigen::Index(k)] - log_z);
    const double coeff = (beta * frame_weights[z] - k_beta * p) * ham.multiplicity()[k];
    if (coeff == 0.0) continue;
    const Eigen::VectorXd v = visible_vector(z, n);
    const Eigen::VectorXd s = (model.weights.transpose() * v + model.hidden_bias)
                                  .unaryExpr([](double a) { return logistic(a); });
    // dF/db_vis = -v, dF/db_hid = -s, dF/dW = -v s^T.
    grad.visible_bias -= coeff * v;
    grad.hidden_bias -= coeff * s;
    grad.weights.noalias() -= coeff * v * s.transpose();
  }
  return grad;
}

double theta_objective(const EnergyModel& model, const ModularHamiltonian& ham,
                       const Eigen::VectorXd& frame_weights, double beta, double k_beta) {
  const int n = model.n_visible();
  Eigen::VectorXd energies(static_cast<Eigen::Index>(ham.size()));
  double expectation = 0.0;
  for (std::size_t k = 0; k < ham.size(); ++k) {
    const BasisIndex z = ham.support()[k];
    energies[Eigen::Index(k)] = ham.multiplicity()[k] * free_energy(model, z);
    expectation += frame_weights[z] * energies[Eigen::Index(k)];
  }
  const double missing = ham.partition_mode() == PartitionMode::full_trace
                             ? static_cast<double>(basis_dim(n) - ham.size())
                             : 0.0;
  return beta * expectation + k_beta * log_sum_exp(-energies, missing);
}

Eigen::VectorXd thermal_probabilities(const ModularHamiltonian& ham) {
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(ham.n_qubits()));
  Eigen::VectorXd p = Eigen::VectorXd::Zero(dim);
  if (ham.partition_mode() == PartitionMode::full_trace)
    p.setConstant(std::exp(-ham.log_partition()));
  const Eigen::VectorXd sp = ham.support_probabilities();
  for (std::size_t k = 0; k < ham.size(); ++k) p[ham.support()[k]] = sp[Eigen::Index(k)];
  return p;
}

Eigen::MatrixXcd thermal_state(const ModularHamiltonian& ham) {
  return thermal_probabilities(ham).cast<std::complex<double>>().asDiagonal();
}

}  // namespace qhbm
