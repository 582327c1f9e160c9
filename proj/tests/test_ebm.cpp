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

#include <random>

#include <boost/math/distributions/chi_squared.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "qhbm/ebm.hpp"
#include "qhbm/errors.hpp"

namespace qhbm {
namespace {

EnergyModel random_model(int nv, int nh, std::uint64_t seed, double scale = 0.8) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> n(0.0, scale);
  EnergyModel m(nv, nh);
  for (auto& x : m.weights.reshaped()) x = n(gen);
  for (auto& x : m.visible_bias) x = n(gen);
  for (auto& x : m.hidden_bias) x = n(gen);
  return m;
}

std::vector<SpinConfig> configs(std::initializer_list<const char*> text) {
  std::vector<SpinConfig> out;
  for (const char* t : text) out.push_back(SpinConfig::parse(t));
  return out;
}

TEST(FreeEnergy, MatchesHiddenEnumeration) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = random_model(4, 3 + int(seed % 3), seed);
    for (BasisIndex v = 0; v < 16; ++v)
      EXPECT_NEAR(free_energy(m, v),
                  oracle::free_energy(m.weights, m.visible_bias, m.hidden_bias, int(v)), 1e-12);
  }
}

TEST(FreeEnergy, ZeroModelValue) {
  // Zero parameters: F = -n_hidden log 2 for every configuration.
  const EnergyModel m(3, 5);
  for (BasisIndex v = 0; v < 8; ++v) EXPECT_NEAR(free_energy(m, v), -5 * std::log(2.0), 1e-14);
}

TEST(FreeEnergy, SpinConfigOverloadAgrees) {
  const auto m = random_model(5, 4, 99);
  for (BasisIndex v = 0; v < 32; ++v)
    EXPECT_EQ(free_energy(m, SpinConfig::from_index(v, 5)), free_energy(m, v));
}

TEST(Conditionals, MatchBruteForceMarginals) {
  const auto m = random_model(3, 2, 5);
  const auto v = SpinConfig::parse("101");
  // p(h_j = 1 | v) from the joint weights exp(-E(v, h)).
  Eigen::Vector2d num = Eigen::Vector2d::Zero();
  double den = 0.0;
  for (int h = 0; h < 4; ++h) {
    const Eigen::Vector2d hv((h >> 1) & 1, h & 1);
    const Eigen::Vector3d vv(1, 0, 1);
    const double w = std::exp(m.visible_bias.dot(vv) + m.hidden_bias.dot(hv) +
                              vv.dot(m.weights * hv));
    den += w;
    num += w * hv;
  }
  EXPECT_LT((conditional_hidden_prob(m, v) - num / den).norm(), 1e-12);
  const std::vector<std::uint8_t> h = {1, 0};
  const Eigen::Vector3d act = m.visible_bias + m.weights.col(0);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(conditional_visible_prob(m, h)[i], 1.0 / (1.0 + std::exp(-act[i])), 1e-14);
}

TEST(EnergyModel, FlattenRoundTrip) {
  const auto m = random_model(4, 6, 7);
  EnergyModel other(4, 6);
  other.assign(m.flatten());
  EXPECT_EQ(other.weights, m.weights);
  EXPECT_EQ(other.visible_bias, m.visible_bias);
  EXPECT_EQ(other.hidden_bias, m.hidden_bias);
  EXPECT_EQ(m.flatten().size(), m.parameter_count());
  EXPECT_EQ(m.flatten()[1], m.weights(1, 0));  // column-major weights first
  EXPECT_THROW(other.assign(Eigen::VectorXd::Zero(3)), ShapeError);
}

TEST(EnergyModel, RandomInitialisation) {
  Rng rng(3);
  const auto m = EnergyModel::random(6, 12, rng, 0.01);
  EXPECT_TRUE(m.visible_bias.isZero());
  EXPECT_TRUE(m.hidden_bias.isZero());
  EXPECT_GT(m.weights.cwiseAbs().maxCoeff(), 0.0);
  EXPECT_LT(m.weights.cwiseAbs().maxCoeff(), 0.06);
}

TEST(EnergyModel, ValidateCatchesNonFinite) {
  auto m = random_model(2, 2, 1);
  m.weights(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(m.validate(), NumericError);
  EnergyModel bad(2, 2);
  bad.hidden_bias.resize(3);
  EXPECT_THROW(bad.validate(), ShapeError);
}

TEST(Softplus, StableAtExtremes) {
  EXPECT_NEAR(softplus(800.0), 800.0, 1e-12);
  EXPECT_NEAR(softplus(-800.0), 0.0, 1e-300);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
}

double chi_square_p_value(const std::vector<SpinConfig>& samples, const Eigen::VectorXd& p) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p.size());
  for (const auto& s : samples) counts[s.index()] += 1.0;
  const double n = static_cast<double>(samples.size());
  double stat = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double e = n * p[i];
    stat += (counts[i] - e) * (counts[i] - e) / e;
  }
  boost::math::chi_squared dist(static_cast<double>(p.size() - 1));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

TEST(Metropolis, MatchesBoltzmannWeights) {
  const auto m = random_model(3, 3, 21, 0.7);
  const Eigen::VectorXd p = oracle::boltzmann(m.weights, m.visible_bias, m.hidden_bias);
  for (Proposal prop : {Proposal::uniform, Proposal::single_flip}) {
    auto chain = MarkovChainState::start(m, SpinConfig::all_up(3), Rng(77));
    // Thin by 5 so the samples are close to independent for the test.
    auto res = metropolis_sample(m, chain, 500, 100000, prop);
    std::vector<SpinConfig> thinned;
    for (std::size_t i = 0; i < res.samples.size(); i += 5) thinned.push_back(res.samples[i]);
    EXPECT_GT(chi_square_p_value(thinned, p), 1e-3) << "proposal " << int(prop);
  }
}

TEST(Metropolis, DeterministicAndResumable) {
  const auto m = random_model(4, 2, 8);
  const auto chain = MarkovChainState::start(m, SpinConfig::all_up(4), Rng(5));
  const auto a = metropolis_sample(m, chain, 10, 300);
  const auto b = metropolis_sample(m, chain, 10, 300);
  EXPECT_EQ(a.samples, b.samples);
  EXPECT_EQ(a.accepted, b.accepted);
  // Two consecutive segments equal one long run.
  const auto first = metropolis_sample(m, chain, 10, 100);
  const auto second = metropolis_sample(m, first.chain, 0, 200);
  std::vector<SpinConfig> joined = first.samples;
  joined.insert(joined.end(), second.samples.begin(), second.samples.end());
  EXPECT_EQ(joined, a.samples);
  EXPECT_EQ(a.proposed, 310);
}

TEST(Metropolis, RejectsBadArguments) {
  const auto m = random_model(3, 2, 8);
  const auto chain = MarkovChainState::start(m, SpinConfig::all_up(3), Rng(5));
  EXPECT_THROW(metropolis_sample(m, chain, -1, 10), ShapeError);
  EXPECT_THROW(metropolis_sample(m, chain, 0, 0), ShapeError);
  auto wrong = chain;
  wrong.current = SpinConfig::all_up(4);
  EXPECT_THROW(metropolis_sample(m, wrong, 0, 10), ShapeError);
}

TEST(ModularHamiltonian, SortsAndValidates) {
  const ModularHamiltonian h(3, {5, 1, 6}, Eigen::Vector3d(0.5, 1.5, 2.5));
  EXPECT_EQ(h.support(), (std::vector<BasisIndex>{1, 5, 6}));
  EXPECT_EQ(h.energies(), Eigen::Vector3d(1.5, 0.5, 2.5));
  EXPECT_EQ(h.find(5), 1);
  EXPECT_EQ(h.find(2), -1);
  EXPECT_EQ(h.diagonal()[6], 2.5);
  EXPECT_EQ(h.diagonal()[0], 0.0);
  EXPECT_THROW(ModularHamiltonian(3, {1, 1}, Eigen::Vector2d(0, 1)), ShapeError);
  EXPECT_THROW(ModularHamiltonian(3, {8}, Eigen::VectorXd::Zero(1)), ShapeError);
  EXPECT_THROW(ModularHamiltonian(3, {1}, Eigen::VectorXd::Constant(1, INFINITY)), NumericError);
}

TEST(ModularHamiltonian, LogPartitionModes) {
  const Eigen::Vector3d e(0.3, -1.2, 2.0);
  const ModularHamiltonian s(3, {0, 3, 7}, e, PartitionMode::support);
  const ModularHamiltonian f(3, {0, 3, 7}, e, PartitionMode::full_trace);
  const double z = std::exp(-0.3) + std::exp(1.2) + std::exp(-2.0);
  EXPECT_NEAR(s.log_partition(), std::log(z), 1e-14);
  EXPECT_NEAR(f.log_partition(), std::log(z + 5.0), 1e-14);
  EXPECT_NEAR(thermal_probabilities(s).sum(), 1.0, 1e-14);
  EXPECT_NEAR(thermal_probabilities(f).sum(), 1.0, 1e-14);
  EXPECT_NEAR(thermal_probabilities(f)[1], 1.0 / (z + 5.0), 1e-14);
  EXPECT_NEAR(s.support_probabilities().sum(), 1.0, 1e-14);
}

TEST(LogSumExp, StableForLargeMagnitudes) {
  const Eigen::Vector3d x(1000.0, 1000.0, -1000.0);
  EXPECT_NEAR(log_sum_exp(x), 1000.0 + std::log(2.0), 1e-12);
  EXPECT_NEAR(log_sum_exp(-x), 1000.0, 1e-12);
  EXPECT_EQ(log_sum_exp(Eigen::VectorXd()), -std::numeric_limits<double>::infinity());
}

TEST(BuildHamiltonian, DeduplicatesOrCountsMultiplicity) {
  const auto m = random_model(3, 4, 2);
  const auto samples = configs({"101", "000", "101", "101", "011"});
  const auto dedup = build_hamiltonian(m, samples);
  EXPECT_EQ(dedup.support(), (std::vector<BasisIndex>{0, 3, 5}));
  EXPECT_NEAR(dedup.energies()[2], free_energy(m, 5), 1e-15);
  const auto multi = build_hamiltonian(m, samples, {DuplicateMode::multiplicity});
  EXPECT_EQ(multi.multiplicity(), (std::vector<int>{1, 1, 3}));
  EXPECT_NEAR(multi.energies()[2], 3 * free_energy(m, 5), 1e-14);
  EXPECT_THROW(build_hamiltonian(m, std::vector<SpinConfig>{}), DataError);
}

TEST(BuildHamiltonian, ReevaluateKeepsSupport) {
  const auto m = random_model(3, 4, 2);
  const auto m2 = random_model(3, 4, 3);
  const auto h = build_hamiltonian(m, configs({"110", "001"}), {DuplicateMode::multiplicity});
  const auto r = reevaluate_energies(m2, h);
  EXPECT_EQ(r.support(), h.support());
  EXPECT_NEAR(r.energies()[1], free_energy(m2, 6), 1e-15);
}

// Independent objective: beta sum_z w_z m_z F_z + k log sum_z exp(-m_z F_z) (+ missing).
double objective_oracle(const EnergyModel& m, const ModularHamiltonian& h,
                        const Eigen::VectorXd& w, double beta, double k) {
  double expect = 0.0, z = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    const int v = int(h.support()[i]);
    const double e = h.multiplicity()[i] *
                     oracle::free_energy(m.weights, m.visible_bias, m.hidden_bias, v);
    expect += w[v] * e;
    z += std::exp(-e);
  }
  if (h.partition_mode() == PartitionMode::full_trace)
    z += double((1u << h.n_qubits()) - h.size());
  return beta * expect + k * std::log(z);
}

TEST(ThetaGradient, MatchesFiniteDifferences) {
  std::mt19937_64 gen(101);
  for (int trial = 0; trial < 40; ++trial) {
    const int nv = 2 + trial % 3;
    const int nh = 1 + trial % 4;
    const auto m = random_model(nv, nh, 1000 + trial, 0.5);
    std::vector<SpinConfig> samples;
    std::uniform_int_distribution<BasisIndex> pick(0, (1u << nv) - 1);
    for (int s = 0; s < 6; ++s) samples.push_back(SpinConfig::from_index(pick(gen), nv));
    const HamiltonianOptions opts{trial % 2 ? DuplicateMode::multiplicity : DuplicateMode::deduplicate,
                                  trial % 3 ? PartitionMode::support : PartitionMode::full_trace};
    const auto h = build_hamiltonian(m, samples, opts);
    Eigen::VectorXd w = Eigen::VectorXd::Random(1 << nv).cwiseAbs();
    w /= w.sum();
    const double beta = 0.5 + trial % 3, k = 1.0 + 0.25 * (trial % 2);

    EXPECT_NEAR(theta_objective(m, h, w, beta, k), objective_oracle(m, h, w, beta, k), 1e-11);
    const Eigen::VectorXd g = theta_gradient(m, h, w, beta, k).flatten();
    const auto f = [&](const Eigen::VectorXd& x) {
      EnergyModel p(nv, nh);
      p.assign(x);
      return objective_oracle(p, h, w, beta, k);
    };
    const Eigen::VectorXd fd = oracle::central_difference(f, m.flatten());
    for (Eigen::Index i = 0; i < fd.size(); ++i)
      EXPECT_NEAR(g[i], fd[i], 1e-6 * std::max(1.0, std::abs(fd[i])));
  }
}

TEST(ThermalState, TraceOneAndDiagonal) {
  const ModularHamiltonian h(2, {0, 2}, Eigen::Vector2d(0.1, 0.9));
  const auto rho = thermal_state(h);
  EXPECT_NEAR(rho.trace().real(), 1.0, 1e-14);
  EXPECT_NEAR(rho(1, 1).real(), 0.0, 0.0);
  EXPECT_NEAR(rho(0, 0).real() / rho(2, 2).real(), std::exp(0.8), 1e-12);
}

}  // namespace
}  // namespace qhbm
