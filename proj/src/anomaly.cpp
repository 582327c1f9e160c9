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

#include "qhbm/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/FFT>

#include "qhbm/errors.hpp"

namespace qhbm {

namespace {

double overlap_value(std::complex<double> overlap, OverlapMode mode) {
  return mode == OverlapMode::squared ? std::norm(overlap) : std::abs(overlap);
}

void check_f_min(double f_min, double dt) {
  if (!(f_min >= 0.0)) throw ConfigError("spectral_score: f_min must be non-negative");
  if (f_min > 0.5 / dt * (1.0 + 1e-12))
    throw ConfigError("spectral_score: f_min exceeds the Nyquist frequency " +
                      std::to_string(0.5 / dt));
}

Eigen::VectorXcd one_sided_dft(const Eigen::VectorXd& series) {
  const Eigen::VectorXd centred = series.array() - series.mean();
  Eigen::FFT<double> fft;
  Eigen::VectorXcd full;
  fft.fwd(full, centred);
  return full.head(series.size() / 2 + 1);
}

}  // namespace

FidelitySeries fidelity_series(const StateVector& initial, const ModularHamiltonian& ham,
                               double total_time, double dt, OverlapMode overlap) {
  const long steps = trotter_steps(total_time, dt);
  FidelitySeries out;
  out.dt = dt;
  out.values.resize(steps + 1);
  const auto& psi0 = initial.amplitudes();
  StateVector psi = initial;
  out.values[0] = overlap_value(psi0.dot(psi.amplitudes()), overlap);
  for (long k = 1; k <= steps; ++k) {
    psi = evolve_diagonal(psi, ham, dt, dt).state;
    out.values[k] = std::clamp(overlap_value(psi.amplitudes().dot(psi0), overlap), 0.0, 1.0);
  }
  out.values[0] = std::clamp(out.values[0], 0.0, 1.0);
  return out;
}

FidelitySeries time_evolution_series(const TrainState& state, const PixelProbabilities& event,
                                     const SeriesOptions& options, Rng& rng) {
  ScoreCache cache(state, options);
  const auto draws =
      bernoulli_embed_indices(event, options.average_draws ? options.n_draws : 1, rng);
  return cache.series(draws);
}

double spectral_score(const FidelitySeries& series, double f_min) {
  check_f_min(f_min, series.dt);
  const PowerSpectrum ps = power_spectrum(series.values, series.dt);
  const double df = ps.resolution();
  double score = 0.0;
  for (Eigen::Index k = 0; k < ps.power.size(); ++k)
    if (ps.frequencies[k] >= f_min) score += ps.power[k] * df;
  return score;
}

double expectation_score(const TrainState& state, const PixelProbabilities& event, int n_draws,
                         Rng& rng, Convention convention) {
  SeriesOptions options;
  options.convention = convention;
  ScoreCache cache(state, options);
  return cache.expectation(bernoulli_embed_indices(event, n_draws, rng));
}

ScoreCache::ScoreCache(const TrainState& state, const SeriesOptions& options)
    : state_(&state), options_(options) {
  check_shape(state.hamiltonian.n_qubits() == state.ansatz.n_qubits,
              "ScoreCache: Hamiltonian and circuit sizes differ");
  if (options.n_draws < 1) throw ConfigError("anomaly: n_draws must be at least 1");
  trotter_steps(options.total_time, options.dt);
  expectations_ = config_expectations(state.ansatz, state.hamiltonian, options.convention);
}

std::map<BasisIndex, double> ScoreCache::histogram(std::span<const BasisIndex> draws) const {
  if (draws.empty()) throw DataError("anomaly: event without draws");
  std::map<BasisIndex, double> h;
  const double each = 1.0 / static_cast<double>(draws.size());
  for (BasisIndex z : draws) h[z] += each;
  return h;
}

const ScoreCache::Entry& ScoreCache::entry(BasisIndex config) {
  auto it = entries_.find(config);
  if (it != entries_.end()) return it->second;
  const int n = state_->ansatz.n_qubits;
  const StateVector psi0 =
      apply_frame(prepare_basis_state(SpinConfig::from_index(config, n), n), state_->ansatz,
                  options_.convention);
  Entry e;
  e.series = fidelity_series(psi0, state_->hamiltonian, options_.total_time, options_.dt,
                             options_.overlap)
                 .values;
  e.spectrum = one_sided_dft(e.series);
  return entries_.emplace(config, std::move(e)).first->second;
}

FidelitySeries ScoreCache::series(std::span<const BasisIndex> draws) {
  FidelitySeries out;
  out.dt = options_.dt;
  const auto h = histogram(draws);
  Eigen::VectorXd second;
  for (const auto& [config, w] : h) {
    const Eigen::VectorXd& s = entry(config).series;
    if (out.values.size() == 0) {
      out.values = Eigen::VectorXd::Zero(s.size());
      second = Eigen::VectorXd::Zero(s.size());
    }
    out.values += w * s;
    second += w * s.cwiseAbs2();
  }
  if (draws.size() > 1)
    out.std = (second - out.values.cwiseAbs2()).cwiseMax(0.0).cwiseSqrt();
  return out;
}

PowerSpectrum ScoreCache::spectrum(std::span<const BasisIndex> draws) {
  const auto h = histogram(draws);
  Eigen::VectorXcd x;
  PowerSpectrum out;
  for (const auto& [config, w] : h) {
    const Entry& e = entry(config);
    if (x.size() == 0) x = Eigen::VectorXcd::Zero(e.spectrum.size());
    x += w * e.spectrum;
    out.n_samples = e.series.size();
  }
  // Same normalisation as power_spectrum.
  out.dt = options_.dt;
  const double total_time = static_cast<double>(out.n_samples) * out.dt;
  out.frequencies.resize(x.size());
  out.power.resize(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    out.frequencies[k] = static_cast<double>(k) / total_time;
    out.power[k] = 2.0 * out.dt * out.dt / total_time * std::norm(x[k]);
  }
  return out;
}

double ScoreCache::spectral(std::span<const BasisIndex> draws, double f_min) {
  check_f_min(f_min, options_.dt);
  const PowerSpectrum ps = spectrum(draws);
  const double df = ps.resolution();
  double score = 0.0;
  for (Eigen::Index k = 0; k < ps.power.size(); ++k)
    if (ps.frequencies[k] >= f_min) score += ps.power[k] * df;
  return score;
}

double ScoreCache::expectation(std::span<const BasisIndex> draws) const {
  double acc = 0.0;
  for (const auto& [config, w] : histogram(draws)) {
    check_shape(config < static_cast<BasisIndex>(expectations_.size()),
                "anomaly: configuration out of range");
    acc += w * expectations_[config];
  }
  return acc;
}

DiscriminationReport discrimination_report(ScoreCache& cache,
                                           std::span<const PixelProbabilities> signal,
                                           std::span<const PixelProbabilities> background,
                                           ScoreMode mode, std::uint64_t seed,
                                           int n_thresholds) {
  if (signal.empty() || background.empty())
    throw DataError("discrimination_report: signal and background sets must be non-empty");
  const SeriesOptions& opt = cache.options();
  const int n_draws = opt.average_draws ? opt.n_draws : 1;
  auto score_all = [&](std::span<const PixelProbabilities> events, std::string_view stream) {
    std::vector<double> scores;
    scores.reserve(events.size());
    for (std::size_t d = 0; d < events.size(); ++d) {
      Rng rng = make_rng(seed, stream, d);
      const auto draws = bernoulli_embed_indices(events[d], n_draws, rng);
      scores.push_back(mode.kind == ScoreMode::Kind::t_zero ? cache.expectation(draws)
                                                            : cache.spectral(draws, mode.f_min));
    }
    return scores;
  };
  DiscriminationReport out;
  out.signal_scores = score_all(signal, "anomaly-embedding");
  out.background_scores = score_all(background, "anomaly-embedding");
  out.roc = roc_from_scores(out.signal_scores, out.background_scores, n_thresholds);
  return out;
}

DiscriminationReport discrimination_report(const TrainState& state,
                                           std::span<const PixelProbabilities> signal,
                                           std::span<const PixelProbabilities> background,
                                           ScoreMode mode, const SeriesOptions& options,
                                           std::uint64_t seed, int n_thresholds) {
  ScoreCache cache(state, options);
  return discrimination_report(cache, signal, background, mode, seed, n_thresholds);
}

Eigen::Matrix4cd pair_reduced_density(std::span<const Eigen::VectorXcd> states,
                                      std::span<const double> weights, int n_qubits, int site) {
  check_shape(states.size() == weights.size(), "pair_reduced_density: weight count mismatch");
  check_shape(site >= 0 && site + 1 < n_qubits, "pair_reduced_density: site out of range");
  const Eigen::Index dim = static_cast<Eigen::Index>(basis_dim(n_qubits));
  // Index split: high bits above the pair, the pair itself, low bits below.
  const int low_bits = n_qubits - site - 2;
  const Eigen::Index low = Eigen::Index{1} << low_bits;
  const Eigen::Index high = dim / (4 * low);
  Eigen::Matrix4cd rho = Eigen::Matrix4cd::Zero();
  for (std::size_t k = 0; k < states.size(); ++k) {
    check_shape(states[k].size() == dim, "pair_reduced_density: state dimension mismatch");
    const auto& psi = states[k];
    for (Eigen::Index h = 0; h < high; ++h)
      for (Eigen::Index l = 0; l < low; ++l)
        for (int a = 0; a < 4; ++a) {
          const std::complex<double> pa = psi[(h * 4 + a) * low + l];
          if (pa == 0.0) continue;
          for (int b = 0; b < 4; ++b)
            rho(a, b) += weights[k] * pa * std::conj(psi[(h * 4 + b) * low + l]);
        }
  }
  return rho;
}

std::vector<BasisIndex> ground_configurations(const ModularHamiltonian& ham) {
  if (ham.is_empty()) throw DataError("site entropy: Hamiltonian support is empty");
  const double e_min = ham.energies().minCoeff();
  std::vector<BasisIndex> out;
  for (std::size_t k = 0; k < ham.size(); ++k)
    if (ham.energies()[Eigen::Index(k)] - e_min <= kGroundTieTolerance)
      out.push_back(ham.support()[k]);
  return out;
}

namespace {

Eigen::VectorXd pair_entropies(const std::vector<Eigen::VectorXcd>& states, int n_qubits) {
  const std::vector<double> weights(states.size(), 1.0 / static_cast<double>(states.size()));
  Eigen::VectorXd out(n_qubits - 1);
  for (int i = 0; i + 1 < n_qubits; ++i)
    out[i] = von_neumann_entropy(pair_reduced_density(states, weights, n_qubits, i));
  return out;
}

}  // namespace

Eigen::VectorXd site_entropy_profile(const ModularHamiltonian& ham, int n_qubits) {
  check_shape(ham.n_qubits() == n_qubits && n_qubits >= 2,
              "site_entropy_profile: need a Hamiltonian on at least two qubits");
  std::vector<Eigen::VectorXcd> states;
  for (BasisIndex z : ground_configurations(ham))
    states.push_back(prepare_basis_state(SpinConfig::from_index(z, n_qubits), n_qubits)
                         .amplitudes());
  return pair_entropies(states, n_qubits);
}

Eigen::VectorXd site_entropy_profile(const ModularHamiltonian& ham, const CircuitAnsatz& ansatz,
                                     Convention convention) {
  const int n = ansatz.n_qubits;
  check_shape(ham.n_qubits() == n, "site_entropy_profile: size mismatch");
  std::vector<Eigen::VectorXcd> states;
  for (BasisIndex z : ground_configurations(ham)) {
    Eigen::VectorXcd psi = prepare_basis_state(SpinConfig::from_index(z, n), n).amplitudes();
    apply_circuit(psi, ansatz, convention == Convention::forward);
    states.push_back(std::move(psi));
  }
  return pair_entropies(states, n);
}

}  // namespace qhbm
