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

#ifndef QHBM_ANOMALY_HPP
#define QHBM_ANOMALY_HPP

#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qhbm/train.hpp"

namespace qhbm {

/// How the overlap <psi(t)|psi(0)> becomes a real series.
enum class OverlapMode {
  squared,  // |<psi(t)|psi(0)>|^2
  modulus,  // |<psi(t)|psi(0)>|
};

struct SeriesOptions {
  double total_time = 500.0;
  double dt = 0.1;
  int n_draws = 100;         // Bernoulli draws per event
  bool average_draws = true; // false: a single draw per event
  OverlapMode overlap = OverlapMode::squared;
  Convention convention = Convention::forward;
};

/// values[k] is the overlap at t = k dt, k = 0..N. `std` holds the
/// spread across draws when the series is a mean, and is empty otherwise.
struct FidelitySeries {
  double dt = 0.0;
  Eigen::VectorXd values;
  Eigen::VectorXd std;
};

/// Series for one pure state under exp(-i t K), stepped with evolve_diagonal.
FidelitySeries fidelity_series(const StateVector& initial, const ModularHamiltonian& ham,
                               double total_time, double dt,
                               OverlapMode overlap = OverlapMode::squared);

/// Series for one event: |psi(0)> = V|p> for Bernoulli draws p of the event.
FidelitySeries time_evolution_series(const TrainState& state, const PixelProbabilities& event,
                                     const SeriesOptions& options, Rng& rng);

/// Power of the centred series integrated over frequencies >= f_min.
/// Throws ConfigError when f_min is negative or beyond the Nyquist frequency.
double spectral_score(const FidelitySeries& series, double f_min);

/// Mean of <p| V^dag K V |p> over n_draws Bernoulli draws of the event.
double expectation_score(const TrainState& state, const PixelProbabilities& event, int n_draws,
                         Rng& rng, Convention convention = Convention::forward);

struct ScoreMode {
  enum class Kind { spectral, t_zero };
  Kind kind = Kind::t_zero;
  double f_min = 0.0;  // spectral only

  static ScoreMode t_zero() { return {Kind::t_zero, 0.0}; }
  static ScoreMode spectral(double f) { return {Kind::spectral, f}; }
};

/// Per-basis-configuration series, spectra and expectations of one trained
/// state, filled lazily. Event scores are linear mixtures of these, so every
/// distinct configuration is evolved and transformed at most once.
class ScoreCache {
 public:
  ScoreCache(const TrainState& state, const SeriesOptions& options);

  /// Mean series (and spread) over the given draws.
  FidelitySeries series(std::span<const BasisIndex> draws);
  /// Power spectrum of the mean series, built from cached transforms.
  PowerSpectrum spectrum(std::span<const BasisIndex> draws);
  double spectral(std::span<const BasisIndex> draws, double f_min);
  double expectation(std::span<const BasisIndex> draws) const;

  const SeriesOptions& options() const { return options_; }

 private:
  struct Entry {
    Eigen::VectorXd series;
    Eigen::VectorXcd spectrum;  // one-sided DFT of the centred series
  };
  const Entry& entry(BasisIndex config);
  std::map<BasisIndex, double> histogram(std::span<const BasisIndex> draws) const;

  const TrainState* state_;
  SeriesOptions options_;
  Eigen::VectorXd expectations_;
  std::map<BasisIndex, Entry> entries_;
};

struct DiscriminationReport {
  RocCurve roc;
  std::vector<double> signal_scores;
  std::vector<double> background_scores;
};

/// Scores every event and sweeps 200 thresholds. Event d of either set
/// draws from substream ("anomaly-embedding", d) of `seed`, so identical
/// sets score identically.
DiscriminationReport discrimination_report(const TrainState& state,
                                           std::span<const PixelProbabilities> signal,
                                           std::span<const PixelProbabilities> background,
                                           ScoreMode mode, const SeriesOptions& options,
                                           std::uint64_t seed, int n_thresholds = 200);

/// Same, reusing an existing cache for the state.
DiscriminationReport discrimination_report(ScoreCache& cache,
                                           std::span<const PixelProbabilities> signal,
                                           std::span<const PixelProbabilities> background,
                                           ScoreMode mode, std::uint64_t seed,
                                           int n_thresholds = 200);

/// Two-site reduced density matrix of qubits (site, site + 1) for the
/// mixture sum_k w_k |psi_k><psi_k|.
Eigen::Matrix4cd pair_reduced_density(std::span<const Eigen::VectorXcd> states,
                                      std::span<const double> weights, int n_qubits, int site);

enum class SiteEntropyMode {
  diagonal,  // ground space of K itself
  dressed,   // ground space of the data-frame Hamiltonian W K W^dag
};

inline constexpr double kGroundTieTolerance = 1e-9;

/// Support states whose energy is within kGroundTieTolerance of the minimum.
std::vector<BasisIndex> ground_configurations(const ModularHamiltonian& ham);

/// Von Neumann entropy of every adjacent pair for the uniform mixture over
/// the lowest-energy eigenspace. Length n - 1. Throws DataError on an empty
/// support.
Eigen::VectorXd site_entropy_profile(const ModularHamiltonian& ham, int n_qubits);

/// Dressed variant: eigenvectors W|z> of W K W^dag for the ground set z.
Eigen::VectorXd site_entropy_profile(const ModularHamiltonian& ham, const CircuitAnsatz& ansatz,
                                     Convention convention = Convention::forward);

}  // namespace qhbm

#endif
