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

#include "qhbm/metrics.hpp"

#include <numeric>

#include <unsupported/Eigen/FFT>

#include "qhbm/spin.hpp"

namespace qhbm {

namespace {

void check_distribution(const Eigen::VectorXd& p, const char* what) {
  if (p.size() == 0) throw ShapeError(std::string(what) + ": empty distribution");
  if (p.minCoeff() < -1e-12 || std::abs(p.sum() - 1.0) > 1e-8)
    throw NumericError(std::string(what) + ": input is not a normalised distribution");
}

double bernoulli_kl(double p, double q) {
  const double qf = std::clamp(q, kEigenFloor, 1.0 - kEigenFloor);
  double d = 0.0;
  if (p > 0.0) d += p * (std::log(p) - std::log(qf));
  if (p < 1.0) d += (1.0 - p) * (std::log(1.0 - p) - std::log(1.0 - qf));
  return d;
}

}  // namespace

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  check_shape(p.size() == q.size(), "kl_divergence: length mismatch");
  check_distribution(p, "kl_divergence");
  check_distribution(q, "kl_divergence");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p[i] > 0.0) d += p[i] * (std::log(p[i]) - std::log(std::max(q[i], kEigenFloor)));
  return d;
}

double marginal_bernoulli_kl(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  check_shape(p.size() == q.size(), "marginal_bernoulli_kl: length mismatch");
  double d = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || p[i] > 1.0 || q[i] < 0.0 || q[i] > 1.0)
      throw NumericError("marginal_bernoulli_kl: probabilities must lie in [0, 1]");
    d += bernoulli_kl(p[i], q[i]);
  }
  return d;
}

Eigen::VectorXd marginal_probabilities(const Eigen::VectorXd& distribution, int n_qubits) {
  check_shape(distribution.size() == static_cast<Eigen::Index>(basis_dim(n_qubits)),
              "marginal_probabilities: length must be 2^n");
  Eigen::VectorXd m = Eigen::VectorXd::Zero(n_qubits);
  for (Eigen::Index z = 0; z < distribution.size(); ++z)
    for (int q = 0; q < n_qubits; ++q)
      if (qubit_value(static_cast<BasisIndex>(z), n_qubits, q)) m[q] += distribution[z];
  return m;
}

PowerSpectrum power_spectrum(const Eigen::VectorXd& signal, double dt) {
  if (signal.size() < 2) throw ShapeError("power_spectrum: need at least two points");
  if (!(dt > 0.0)) throw ShapeError("power_spectrum: dt must be positive");
  const Eigen::Index n = signal.size();
  const Eigen::VectorXd centred = signal.array() - signal.mean();

  Eigen::FFT<double> fft;
  Eigen::VectorXcd spectrum;
  fft.fwd(spectrum, centred);

  const Eigen::Index half = n / 2 + 1;
  const double total_time = static_cast<double>(n) * dt;
  PowerSpectrum out;
  out.dt = dt;
  out.n_samples = n;
  out.frequencies.resize(half);
  out.power.resize(half);
  for (Eigen::Index k = 0; k < half; ++k) {
    out.frequencies[k] = static_cast<double>(k) / total_time;
    out.power[k] = 2.0 * dt * dt / total_time * std::norm(spectrum[k]);
  }
  return out;
}

namespace {

double trapezoid_auc(const Eigen::VectorXd& fpr, const Eigen::VectorXd& tpr) {
  // Points ordered by threshold give monotone (fpr, tpr); sort to be safe
  // and anchor the curve at both corners.
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(fpr.size()) + 2);
  pts.emplace_back(0.0, 0.0);
  for (Eigen::Index i = 0; i < fpr.size(); ++i) pts.emplace_back(fpr[i], tpr[i]);
  pts.emplace_back(1.0, 1.0);
  std::sort(pts.begin(), pts.end());
  double auc = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    auc += (pts[i].first - pts[i - 1].first) * (pts[i].second + pts[i - 1].second) / 2.0;
  return auc;
}

}  // namespace

RocCurve roc_from_scores(std::span<const double> signal_scores,
                         std::span<const double> background_scores, int n_thresholds) {
  if (signal_scores.empty() || background_scores.empty())
    throw DataError("roc_from_scores: empty score set");
  if (n_thresholds < 2) throw ConfigError("roc_from_scores: need at least two thresholds");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double s : signal_scores) lo = std::min(lo, s), hi = std::max(hi, s);
  for (double s : background_scores) lo = std::min(lo, s), hi = std::max(hi, s);

  RocCurve roc;
  roc.thresholds = Eigen::VectorXd::LinSpaced(n_thresholds, lo, hi);

  auto sweep = [&](bool higher) {
    Eigen::VectorXd tpr(n_thresholds), fpr(n_thresholds);
    for (int t = 0; t < n_thresholds; ++t) {
      const double th = roc.thresholds[t];
      auto pass = [&](double s) { return higher ? s >= th : s <= th; };
      const auto ns = std::count_if(signal_scores.begin(), signal_scores.end(), pass);
      const auto nb = std::count_if(background_scores.begin(), background_scores.end(), pass);
      tpr[t] = static_cast<double>(ns) / static_cast<double>(signal_scores.size());
      fpr[t] = static_cast<double>(nb) / static_cast<double>(background_scores.size());
    }
    return std::make_pair(tpr, fpr);
  };

  auto [tpr, fpr] = sweep(true);
  double auc = trapezoid_auc(fpr, tpr);
  if (auc < 0.5) {
    auto [tpr2, fpr2] = sweep(false);
    const double auc2 = trapezoid_auc(fpr2, tpr2);
    if (auc2 > auc) {
      tpr = tpr2;
      fpr = fpr2;
      auc = auc2;
      roc.higher_is_signal = false;
    }
  }
  roc.tpr = std::move(tpr);
  roc.fpr = std::move(fpr);
  roc.auc = auc;
  return roc;
}

MeanStd mean_std(std::span<const double> values) {
  if (values.empty()) return {};
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

}  // namespace qhbm
