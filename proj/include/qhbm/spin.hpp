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

#ifndef QHBM_SPIN_HPP
#define QHBM_SPIN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "qhbm/errors.hpp"

namespace qhbm {

/// Index of a computational basis state in [0, 2^n).
using BasisIndex = std::uint32_t;

inline constexpr int kMaxQubits = 10;

inline std::size_t basis_dim(int n_qubits) {
  return std::size_t{1} << n_qubits;
}

/// Bit position of qubit q inside a basis index. Qubit 0 is the most
/// significant bit, so |q0 q1 ... q_{n-1}> reads as a big-endian integer.
inline int bit_position(int n_qubits, int qubit) { return n_qubits - 1 - qubit; }

inline int qubit_value(BasisIndex index, int n_qubits, int qubit) {
  return static_cast<int>((index >> bit_position(n_qubits, qubit)) & 1U);
}

/// A computational basis configuration; bit 1 is spin up / pixel on.
class SpinConfig {
 public:
  SpinConfig() = default;
  explicit SpinConfig(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) check_shape(b <= 1, "SpinConfig: bits must be 0 or 1");
  }

  static SpinConfig from_index(BasisIndex index, int n_qubits) {
    check_shape(n_qubits >= 0 && n_qubits <= 31, "SpinConfig: bad qubit count");
    check_shape(n_qubits == 31 || index < (BasisIndex{1} << n_qubits),
                "SpinConfig: index out of range");
    std::vector<std::uint8_t> bits(static_cast<std::size_t>(n_qubits));
    for (int q = 0; q < n_qubits; ++q)
      bits[static_cast<std::size_t>(q)] =
          static_cast<std::uint8_t>(qubit_value(index, n_qubits, q));
    return SpinConfig(std::move(bits));
  }

  static SpinConfig all_up(int n_qubits) {
    return SpinConfig(std::vector<std::uint8_t>(static_cast<std::size_t>(n_qubits), 1));
  }

  /// Parses a string of '0'/'1' characters, qubit 0 first.
  static SpinConfig parse(const std::string& text) {
    std::vector<std::uint8_t> bits;
    for (char c : text) {
      check_shape(c == '0' || c == '1', "SpinConfig: expected a bit string");
      bits.push_back(static_cast<std::uint8_t>(c - '0'));
    }
    return SpinConfig(std::move(bits));
  }

  BasisIndex index() const {
    BasisIndex idx = 0;
    for (auto b : bits_) idx = (idx << 1) | b;
    return idx;
  }

  int size() const { return static_cast<int>(bits_.size()); }
  int operator[](int qubit) const { return bits_[static_cast<std::size_t>(qubit)]; }
  const std::vector<std::uint8_t>& bits() const { return bits_; }

  std::string to_string() const {
    std::string s;
    for (auto b : bits_) s.push_back(static_cast<char>('0' + b));
    return s;
  }

  friend bool operator==(const SpinConfig&, const SpinConfig&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

}  // namespace qhbm

#endif
