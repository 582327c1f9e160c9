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

#include "qhbm/hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qhbm {

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& x,
                   double extra_zero_terms) {
  if (x.size() == 0 && extra_zero_terms <= 0.0)
    return -std::numeric_limits<double>::infinity();
  double shift = x.size() > 0 ? x.maxCoeff() : 0.0;
  if (extra_zero_terms > 0.0) shift = std::max(shift, 0.0);
  double acc = extra_zero_terms * std::exp(-shift);
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::exp(x[i] - shift);
  return shift + std::log(acc);
}

ModularHamiltonian::ModularHamiltonian(int n_qubits, std::vector<BasisIndex> support,
                                       Eigen::VectorXd energies, PartitionMode mode,
                                       std::vector<int> multiplicity)
    : n_qubits_(n_qubits), mode_(mode) {
  check_shape(n_qubits >= 1 && n_qubits <= kMaxQubits,
              "ModularHamiltonian: qubit count out of range");
  check_shape(static_cast<Eigen::Index>(support.size()) == energies.size(),
              "ModularHamiltonian: support and energies differ in length");
  if (multiplicity.empty()) multiplicity.assign(support.size(), 1);
  check_shape(multiplicity.size() == support.size(),
              "ModularHamiltonian: multiplicity length mismatch");

  const std::size_t dim = basis_dim(n_qubits);
  std::vector<std::size_t> order(support.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return support[a] < support[b]; });

  support_.reserve(support.size());
  energies_.resize(energies.size());
  multiplicity_.reserve(support.size());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const BasisIndex z = support[order[k]];
    check_shape(z < dim, "ModularHamiltonian: support index out of range");
    check_shape(support_.empty() || support_.back() != z,
                "ModularHamiltonian: duplicate support entry");
    const double e = energies[static_cast<Eigen::Index>(order[k])];
    if (!std::isfinite(e)) throw NumericError("ModularHamiltonian: non-finite energy");
    support_.push_back(z);
    energies_[static_cast<Eigen::Index>(k)] = e;
    multiplicity_.push_back(multiplicity[order[k]]);
  }

  const double missing =
      mode_ == PartitionMode::full_trace ? static_cast<double>(dim - support_.size()) : 0.0;
  log_partition_ = log_sum_exp(-energies_, missing);

  diagonal_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  for (std::size_t k = 0; k < support_.size(); ++k)
    diagonal_[support_[k]] = energies_[static_cast<Eigen::Index>(k)];
}

Eigen::Index ModularHamiltonian::find(BasisIndex index) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), index);
  if (it == support_.end() || *it != index) return -1;
  return static_cast<Eigen::Index>(it - support_.begin());
}

Eigen::VectorXd ModularHamiltonian::support_probabilities() const {
  return (-energies_.array() - log_partition_).exp().matrix();
}

}  // namespace qhbm
