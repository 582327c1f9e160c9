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

#ifndef QHBM_HAMILTONIAN_HPP
#define QHBM_HAMILTONIAN_HPP

#include <vector>

#include <Eigen/Dense>

#include "qhbm/spin.hpp"

namespace qhbm {

/// Which states the partition function sums over.
enum class PartitionMode {
  support,     // only the sampled configurations
  full_trace,  // all 2^n states; unsampled ones sit at energy 0
};

/// Diagonal operator K = sum_z E(z) |z><z| over a sparse support, together
/// with log Z. Support is kept sorted by basis index.
class ModularHamiltonian {
 public:
  ModularHamiltonian() = default;

  /// Builds from parallel (config, energy) lists. Multiplicities default
  /// to one. Throws ShapeError on duplicates or out-of-range indices.
  ModularHamiltonian(int n_qubits, std::vector<BasisIndex> support,
                     Eigen::VectorXd energies,
                     PartitionMode mode = PartitionMode::support,
                     std::vector<int> multiplicity = {});

  static ModularHamiltonian empty(int n_qubits,
                                  PartitionMode mode = PartitionMode::support) {
    return ModularHamiltonian(n_qubits, {}, Eigen::VectorXd(), mode);
  }

  int n_qubits() const { return n_qubits_; }
  std::size_t size() const { return support_.size(); }
  bool is_empty() const { return support_.empty(); }
  const std::vector<BasisIndex>& support() const { return support_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const std::vector<int>& multiplicity() const { return multiplicity_; }
  PartitionMode partition_mode() const { return mode_; }
  double log_partition() const { return log_partition_; }

  /// Position of a basis index in the support, or -1.
  Eigen::Index find(BasisIndex index) const;

  /// Dense diagonal of length 2^n; zero outside the support.
  const Eigen::VectorXd& diagonal() const { return diagonal_; }

  /// Thermal probabilities e^{-E(z) - log Z} for the support states, in
  /// support order. Under full_trace they sum to less than one.
  Eigen::VectorXd support_probabilities() const;

 private:
  int n_qubits_ = 0;
  std::vector<BasisIndex> support_;
  Eigen::VectorXd energies_;
  std::vector<int> multiplicity_;
  PartitionMode mode_ = PartitionMode::support;
  double log_partition_ = 0.0;
  Eigen::VectorXd diagonal_;
};

/// Max-shifted log(sum_i exp(x_i)) plus `extra_zero_terms` copies of e^0.
/// Returns -infinity for an empty sum.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x,
                   double extra_zero_terms = 0.0);

}  // namespace qhbm

#endif
