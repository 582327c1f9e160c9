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

#ifndef QHBM_QSIM_HPP
#define QHBM_QSIM_HPP

// Dense statevector simulation for small registers (n <= 10).
//
// Basis ordering is big-endian: qubit 0 is the most significant bit of the
// amplitude index, so |q0 q1 ... q_{n-1}> sits at sum_q q_k 2^{n-1-k}.

#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "qhbm/errors.hpp"
#include "qhbm/hamiltonian.hpp"
#include "qhbm/spin.hpp"

namespace qhbm {

/// Which way the circuit conjugates the measured operator.
///   forward: <p| U^dag K U |p>, i.e. embed, run U, measure K.
///   adjoint: <p| U K U^dag |p>, i.e. embed, run U^dag, measure K.
enum class Convention { forward, adjoint };

template <typename Scalar = double>
class BasicStateVector {
 public:
  using Complex = std::complex<Scalar>;
  using Amplitudes = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

  /// |0...0>.
  explicit BasicStateVector(int n_qubits)
      : n_qubits_(checked_qubits(n_qubits)),
        amplitudes_(Amplitudes::Zero(static_cast<Eigen::Index>(basis_dim(n_qubits)))) {
    amplitudes_[0] = Complex(1);
  }

  /// Takes ownership of an amplitude vector of length 2^n with unit norm.
  BasicStateVector(int n_qubits, Amplitudes amplitudes)
      : n_qubits_(checked_qubits(n_qubits)), amplitudes_(std::move(amplitudes)) {
    check_shape(amplitudes_.size() == static_cast<Eigen::Index>(basis_dim(n_qubits)),
                "StateVector: amplitude count must be 2^n");
    using std::abs;
    if (abs(amplitudes_.squaredNorm() - Scalar(1)) > Scalar(1e-8))
      throw NumericError("StateVector: amplitudes are not normalised");
  }

  int n_qubits() const { return n_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }
  const Amplitudes& amplitudes() const { return amplitudes_; }
  Complex operator[](Eigen::Index i) const { return amplitudes_[i]; }

  /// |<z|psi>|^2 for every basis state.
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probabilities() const {
    return amplitudes_.cwiseAbs2();
  }

 private:
  static int checked_qubits(int n) {
    check_shape(n >= 1 && n <= kMaxQubits, "StateVector: qubit count out of range");
    return n;
  }

  int n_qubits_;
  Amplitudes amplitudes_;
};

using StateVector = BasicStateVector<double>;

/// Staircase circuit: each layer applies, for pairs (0,1), (1,2), ...,
/// RY(a) on the lower qubit, RY(b) on the upper one, then CNOT with the
/// lower qubit as control. Angles are stored layer by layer, block by block,
/// as (a, b) pairs.
struct CircuitAnsatz {
  int n_qubits = 0;
  int n_layers = 0;
  Eigen::VectorXd angles;

  CircuitAnsatz() = default;
  CircuitAnsatz(int n_qubits_, int n_layers_)
      : CircuitAnsatz(n_qubits_, n_layers_,
                      Eigen::VectorXd::Zero(angle_count(n_qubits_, n_layers_))) {}
  CircuitAnsatz(int n_qubits_, int n_layers_, Eigen::VectorXd angles_)
      : n_qubits(n_qubits_), n_layers(n_layers_), angles(std::move(angles_)) {
    check_shape(n_qubits >= 2 && n_qubits <= kMaxQubits,
                "CircuitAnsatz: need between 2 and 10 qubits");
    check_shape(n_layers >= 1, "CircuitAnsatz: need at least one layer");
    check_shape(angles.size() == angle_count(n_qubits, n_layers),
                "CircuitAnsatz: angle count must be 2*(n-1)*layers");
  }

  static Eigen::Index angle_count(int n_qubits, int n_layers) {
    return Eigen::Index{2} * (n_qubits - 1) * n_layers;
  }

  Eigen::Index angle_index(int layer, int block, int which) const {
    return Eigen::Index{2} * (Eigen::Index{layer} * (n_qubits - 1) + block) + which;
  }
};

// Gate kernels act on every column of a (2^n x m) amplitude block so one
// sweep can push a whole ensemble of basis inputs through the circuit.

template <typename Derived>
void apply_ry(Eigen::MatrixBase<Derived>& amps, int n_qubits, int qubit, double angle) {
  using Complex = typename Derived::Scalar;
  using Real = typename Eigen::NumTraits<Complex>::Real;
  const Real c = std::cos(Real(angle) / 2);
  const Real s = std::sin(Real(angle) / 2);
  const Eigen::Index stride = Eigen::Index{1} << bit_position(n_qubits, qubit);
  const Eigen::Index dim = amps.rows();
  for (Eigen::Index base = 0; base < dim; base += 2 * stride) {
    for (Eigen::Index i = base; i < base + stride; ++i) {
      for (Eigen::Index col = 0; col < amps.cols(); ++col) {
        const Complex a0 = amps(i, col);
        const Complex a1 = amps(i + stride, col);
        amps(i, col) = c * a0 - s * a1;
        amps(i + stride, col) = s * a0 + c * a1;
      }
    }
  }
}

template <typename Derived>
void apply_cnot(Eigen::MatrixBase<Derived>& amps, int n_qubits, int control, int target) {
  const Eigen::Index cmask = Eigen::Index{1} << bit_position(n_qubits, control);
  const Eigen::Index tmask = Eigen::Index{1} << bit_position(n_qubits, target);
  for (Eigen::Index i = 0; i < amps.rows(); ++i) {
    if ((i & cmask) && !(i & tmask)) amps.row(i).swap(amps.row(i | tmask));
  }
}

/// Runs U (forward) or U^dag (adjoint) over all columns in place.
template <typename Derived>
void apply_circuit(Eigen::MatrixBase<Derived>& amps, const CircuitAnsatz& ansatz,
                   bool adjoint = false) {
  check_shape(amps.rows() == static_cast<Eigen::Index>(basis_dim(ansatz.n_qubits)),
              "apply_circuit: dimension mismatch");
  const int n = ansatz.n_qubits;
  if (!adjoint) {
    for (int layer = 0; layer < ansatz.n_layers; ++layer) {
      for (int b = 0; b + 1 < n; ++b) {
        apply_ry(amps, n, b, ansatz.angles[ansatz.angle_index(layer, b, 0)]);
        apply_ry(amps, n, b + 1, ansatz.angles[ansatz.angle_index(layer, b, 1)]);
        apply_cnot(amps, n, b, b + 1);
      }
    }
  } else {
    for (int layer = ansatz.n_layers - 1; layer >= 0; --layer) {
      for (int b = n - 2; b >= 0; --b) {
        apply_cnot(amps, n, b, b + 1);
        apply_ry(amps, n, b + 1, -ansatz.angles[ansatz.angle_index(layer, b, 1)]);
        apply_ry(amps, n, b, -ansatz.angles[ansatz.angle_index(layer, b, 0)]);
      }
    }
  }
}

template <typename Scalar = double>
BasicStateVector<Scalar> prepare_basis_state(const SpinConfig& config, int n_qubits) {
  check_shape(config.size() == n_qubits,
              "prepare_basis_state: configuration length differs from qubit count");
  typename BasicStateVector<Scalar>::Amplitudes amps =
      BasicStateVector<Scalar>::Amplitudes::Zero(
          static_cast<Eigen::Index>(basis_dim(n_qubits)));
  amps[config.index()] = 1;
  return BasicStateVector<Scalar>(n_qubits, std::move(amps));
}

template <typename Scalar>
BasicStateVector<Scalar> apply_ansatz(const BasicStateVector<Scalar>& state,
                                      const CircuitAnsatz& ansatz) {
  check_shape(state.n_qubits() == ansatz.n_qubits, "apply_ansatz: dimension mismatch");
  auto amps = state.amplitudes();
  apply_circuit(amps, ansatz, false);
  return BasicStateVector<Scalar>(state.n_qubits(), std::move(amps));
}

template <typename Scalar>
BasicStateVector<Scalar> apply_adjoint_ansatz(const BasicStateVector<Scalar>& state,
                                              const CircuitAnsatz& ansatz) {
  check_shape(state.n_qubits() == ansatz.n_qubits,
              "apply_adjoint_ansatz: dimension mismatch");
  auto amps = state.amplitudes();
  apply_circuit(amps, ansatz, true);
  return BasicStateVector<Scalar>(state.n_qubits(), std::move(amps));
}

/// The frame map applied between embedding and measurement.
template <typename Scalar>
BasicStateVector<Scalar> apply_frame(const BasicStateVector<Scalar>& state,
                                     const CircuitAnsatz& ansatz, Convention convention) {
  return convention == Convention::forward ? apply_ansatz(state, ansatz)
                                           : apply_adjoint_ansatz(state, ansatz);
}

/// sum_z E(z) |<z|psi>|^2; states outside the support contribute nothing.
template <typename Scalar>
Scalar diagonal_expectation(const BasicStateVector<Scalar>& state,
                            const ModularHamiltonian& ham) {
  check_shape(state.n_qubits() == ham.n_qubits(),
              "diagonal_expectation: dimension mismatch");
  const auto& diag = ham.diagonal();
  Scalar acc(0);
  for (std::size_t k = 0; k < ham.support().size(); ++k) {
    const BasisIndex z = ham.support()[k];
    acc += Scalar(diag[z]) * std::norm(state[z]);
  }
  return acc;
}

/// Circuit-basis probabilities of a diagonal input ensemble:
/// out(z) = sum_c w(c) |<z| V |c>|^2 where V is the frame map.
inline Eigen::VectorXd frame_probabilities(const Eigen::VectorXd& input_weights,
                                           const CircuitAnsatz& ansatz,
                                           Convention convention) {
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(ansatz.n_qubits));
  check_shape(input_weights.size() == dim, "frame_probabilities: dimension mismatch");
  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < dim; ++c)
    if (input_weights[c] != 0.0) active.push_back(c);
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(dim, static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j)
    block(active[j], static_cast<Eigen::Index>(j)) = 1.0;
  apply_circuit(block, ansatz, convention == Convention::adjoint);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(dim);
  for (std::size_t j = 0; j < active.size(); ++j)
    out += input_weights[active[j]] * block.col(static_cast<Eigen::Index>(j)).cwiseAbs2();
  return out;
}

/// sum_c w(c) <c| V^dag K V |c> for a diagonal input ensemble w.
inline double ensemble_expectation(const Eigen::VectorXd& input_weights,
                                   const CircuitAnsatz& ansatz,
                                   const ModularHamiltonian& ham, Convention convention) {
  check_shape(ham.n_qubits() == ansatz.n_qubits, "ensemble_expectation: dimension mismatch");
  if (ham.is_empty()) return 0.0;
  return frame_probabilities(input_weights, ansatz, convention).dot(ham.diagonal());
}

/// Exact gradient of ensemble_expectation with respect to every angle,
/// [f(phi_k + pi/2) - f(phi_k - pi/2)] / 2.
inline Eigen::VectorXd parameter_shift_gradient(const Eigen::VectorXd& input_weights,
                                                const CircuitAnsatz& ansatz,
                                                const ModularHamiltonian& ham,
                                                Convention convention = Convention::forward) {
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(ansatz.angles.size());
  if (ham.is_empty()) return grad;
  CircuitAnsatz shifted = ansatz;
  constexpr double kShift = std::numbers::pi / 2;
  for (Eigen::Index k = 0; k < ansatz.angles.size(); ++k) {
    shifted.angles[k] = ansatz.angles[k] + kShift;
    const double plus = ensemble_expectation(input_weights, shifted, ham, convention);
    shifted.angles[k] = ansatz.angles[k] - kShift;
    const double minus = ensemble_expectation(input_weights, shifted, ham, convention);
    shifted.angles[k] = ansatz.angles[k];
    grad[k] = 0.5 * (plus - minus);
  }
  return grad;
}

/// Single-configuration form: gradient of <p| V^dag K V |p>.
inline Eigen::VectorXd parameter_shift_gradient(const SpinConfig& config,
                                                const CircuitAnsatz& ansatz,
                                                const ModularHamiltonian& ham,
                                                Convention convention = Convention::forward) {
  check_shape(config.size() == ansatz.n_qubits,
              "parameter_shift_gradient: configuration length mismatch");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_dim(ansatz.n_qubits)));
  w[config.index()] = 1.0;
  return parameter_shift_gradient(w, ansatz, ham, convention);
}

template <typename Scalar>
struct Evolution {
  BasicStateVector<Scalar> state;
  long steps;
  double time;  // steps * dt, the time actually evolved
};

inline long trotter_steps(double total_time, double dt) {
  if (!(dt > 0.0)) throw ShapeError("evolve_diagonal: dt must be positive");
  if (!(total_time >= 0.0)) throw ShapeError("evolve_diagonal: total time must be >= 0");
  return std::lround(total_time / dt);
}

/// Product of N = round(T/dt) short-time steps exp(-i dt K).
template <typename Scalar>
Evolution<Scalar> evolve_diagonal(const BasicStateVector<Scalar>& state,
                                  const ModularHamiltonian& ham, double total_time,
                                  double dt) {
  check_shape(state.n_qubits() == ham.n_qubits(), "evolve_diagonal: dimension mismatch");
  const long steps = trotter_steps(total_time, dt);
  using Complex = std::complex<Scalar>;
  auto amps = state.amplitudes();
  std::vector<Complex> step_phase(ham.size());
  for (std::size_t k = 0; k < ham.size(); ++k)
    step_phase[k] = std::polar(Scalar(1), -Scalar(dt) * Scalar(ham.energies()[Eigen::Index(k)]));
  for (long s = 0; s < steps; ++s)
    for (std::size_t k = 0; k < ham.size(); ++k) amps[ham.support()[k]] *= step_phase[k];
  return {BasicStateVector<Scalar>(state.n_qubits(), std::move(amps)), steps,
          static_cast<double>(steps) * dt};
}

/// One-shot exp(-i N dt K), the reference the step product must reproduce.
template <typename Scalar>
Evolution<Scalar> evolve_diagonal_exact(const BasicStateVector<Scalar>& state,
                                        const ModularHamiltonian& ham, double total_time,
                                        double dt) {
  check_shape(state.n_qubits() == ham.n_qubits(), "evolve_diagonal: dimension mismatch");
  const long steps = trotter_steps(total_time, dt);
  const Scalar t = Scalar(steps) * Scalar(dt);
  auto amps = state.amplitudes();
  for (std::size_t k = 0; k < ham.size(); ++k)
    amps[ham.support()[k]] *= std::polar(Scalar(1), -t * Scalar(ham.energies()[Eigen::Index(k)]));
  return {BasicStateVector<Scalar>(state.n_qubits(), std::move(amps)), steps,
          static_cast<double>(steps) * dt};
}

}  // namespace qhbm

#endif
