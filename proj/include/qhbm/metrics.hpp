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

#ifndef QHBM_METRICS_HPP
#define QHBM_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/errors.hpp"

namespace qhbm {

/// Density matrices are plain dense complex matrices; validate_density
/// checks the Hermitian / unit-trace / PSD invariants.
using DensityMatrix = Eigen::MatrixXcd;

inline constexpr double kEigenFloor = 1e-12;

namespace detail {

template <typename Derived>
using ComplexMatrixOf =
    Eigen::Matrix<std::complex<typename Eigen::NumTraits<typename Derived::Scalar>::Real>,
                  Eigen::Dynamic, Eigen::Dynamic>;

template <typename Derived>
auto hermitian_eigen(const Eigen::MatrixBase<Derived>& m) {
  using Matrix = ComplexMatrixOf<Derived>;
  const Matrix h = (m + m.adjoint()) / 2;
  return Eigen::SelfAdjointEigenSolver<Matrix>(h);
}

template <typename Derived>
void check_square(const Eigen::MatrixBase<Derived>& m, const char* what) {
  check_shape(m.rows() == m.cols() && m.rows() > 0, std::string(what) + ": matrix must be square");
}

}  // namespace detail

/// Throws NumericError unless m is Hermitian, has unit trace and no
/// eigenvalue below -tol.
template <typename Derived>
void validate_density(const Eigen::MatrixBase<Derived>& m, double tol = 1e-10) {
  detail::check_square(m, "validate_density");
  using std::abs;
  if (static_cast<double>((m - m.adjoint()).cwiseAbs().maxCoeff()) > tol)
    throw NumericError("density matrix is not Hermitian");
  if (abs(static_cast<double>(m.trace().real()) - 1.0) > tol ||
      abs(static_cast<double>(m.trace().imag())) > tol)
    throw NumericError("density matrix trace differs from one");
  const auto es = detail::hermitian_eigen(m);
  if (static_cast<double>(es.eigenvalues().minCoeff()) < -tol)
    throw NumericError("density matrix has a negative eigenvalue");
}

namespace detail {

// Square roots of a spectrum with eigenvalues at rounding level (below
// dim * eps * max) set to zero, so numerically null directions do not
// contribute O(sqrt(eps)) to the root.
template <typename Vector>
Vector truncated_sqrt(const Vector& vals) {
  using Real = typename Vector::Scalar;
  using std::sqrt;
  const Real cutoff = Real(vals.size()) * std::numeric_limits<Real>::epsilon() *
                      vals.cwiseAbs().maxCoeff();
  return vals.unaryExpr([cutoff](Real x) { return x > cutoff ? sqrt(x) : Real(0); });
}

}  // namespace detail

/// F(a, b) = (tr sqrt( sqrt(a) b sqrt(a) ))^2, via Hermitian eigendecompositions.
template <typename DA, typename DB>
double fidelity(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                double psd_tol = 1e-8) {
  detail::check_square(a, "fidelity");
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "fidelity: dimension mismatch");
  using Matrix = detail::ComplexMatrixOf<DA>;
  const auto ea = detail::hermitian_eigen(a);
  const auto eb = detail::hermitian_eigen(b);
  if (static_cast<double>(ea.eigenvalues().minCoeff()) < -psd_tol ||
      static_cast<double>(eb.eigenvalues().minCoeff()) < -psd_tol)
    throw NumericError("fidelity: input is not positive semi-definite");
  const auto root_vals = detail::truncated_sqrt(ea.eigenvalues().eval());
  const Matrix root = ea.eigenvectors() * root_vals.asDiagonal() * ea.eigenvectors().adjoint();
  const Matrix inner = root * b.template cast<typename Matrix::Scalar>() * root;
  const auto ei = detail::hermitian_eigen(inner);
  const auto acc = detail::truncated_sqrt(ei.eigenvalues().eval()).sum();
  return static_cast<double>(acc * acc);
}

/// T(a, b) = 1/2 sum |eig(a - b)|.
template <typename DA, typename DB>
double trace_distance(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  detail::check_square(a, "trace_distance");
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "trace_distance: dimension mismatch");
  const auto es = detail::hermitian_eigen((a - b).eval());
  return static_cast<double>(es.eigenvalues().cwiseAbs().sum()) / 2.0;
}

/// S = -sum lambda log lambda (natural log); eigenvalues below 1e-12 count as 0.
template <typename Derived>
double von_neumann_entropy(const Eigen::MatrixBase<Derived>& m) {
  detail::check_square(m, "von_neumann_entropy");
  const auto es = detail::hermitian_eigen(m);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double l = static_cast<double>(es.eigenvalues()[i]);
    if (l > kEigenFloor) s -= l * std::log(l);
  }
  return s;
}

/// D(rho || sigma) = tr rho (log rho - log sigma); sigma's spectrum is
/// clamped at 1e-12 before the logarithm.
template <typename DA, typename DB>
double quantum_relative_entropy(const Eigen::MatrixBase<DA>& rho,
                                const Eigen::MatrixBase<DB>& sigma) {
  detail::check_square(rho, "quantum_relative_entropy");
  check_shape(rho.rows() == sigma.rows() && rho.cols() == sigma.cols(),
              "quantum_relative_entropy: dimension mismatch");
  using Matrix = detail::ComplexMatrixOf<DA>;
  using Real = typename Eigen::NumTraits<typename DA::Scalar>::Real;
  const auto es = detail::hermitian_eigen(sigma);
  const auto log_vals = es.eigenvalues().unaryExpr(
      [](Real x) { using std::log; return log(std::max(x, Real(kEigenFloor))); });
  const Matrix log_sigma = es.eigenvectors() * log_vals.asDiagonal() * es.eigenvectors().adjoint();
  const double cross =
      static_cast<double>((rho.template cast<typename Matrix::Scalar>() * log_sigma).trace().real());
  return -von_neumann_entropy(rho) - cross;
}

/// Classical D(p || q) = sum p (log p - log q), q floored at 1e-12.
/// Throws NumericError when either input is not a distribution within 1e-8.
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Sum over positions of D(Bernoulli(p_k) || Bernoulli(q_k)).
double marginal_bernoulli_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

/// Per-qubit probability of reading 1 under a distribution over basis states.
Eigen::VectorXd marginal_probabilities(const Eigen::VectorXd& distribution, int n_qubits);

struct PowerSpectrum {
  Eigen::VectorXd frequencies;  // k / (N dt), k = 0 .. N/2
  Eigen::VectorXd power;        // 2 dt^2 / T |FFT(x - mean)|^2
  double dt = 0.0;
  Eigen::Index n_samples = 0;

  double resolution() const { return 1.0 / (static_cast<double>(n_samples) * dt); }
};

/// One-sided power spectrum of the mean-subtracted signal.
PowerSpectrum power_spectrum(const Eigen::VectorXd& signal, double dt);

struct RocCurve {
  Eigen::VectorXd thresholds;
  Eigen::VectorXd tpr;  // signal efficiency at each threshold
  Eigen::VectorXd fpr;  // background efficiency at each threshold
  double auc = 0.5;
  bool higher_is_signal = true;
};

/// Linearly spaced thresholds over the pooled score range. A score counts
/// as signal-like when it is on the signal side of the threshold (>= for
/// higher_is_signal, <= otherwise); the side is picked so auc >= 0.5. AUC is
/// the trapezoid over (fpr, tpr) including the (0,0) and (1,1) corners.
RocCurve roc_from_scores(std::span<const double> signal_scores,
                         std::span<const double> background_scores, int n_thresholds = 200);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
};

MeanStd mean_std(std::span<const double> values);

}  // namespace qhbm

#endif
