// Copyright 2026 The oscnet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oscnet/spectral.hpp"

using namespace oscnet;

namespace {

BathConfig bath_of(BathKind kind, std::size_t d = 0) {
  BathConfig b;
  b.kind = kind;
  b.local_node = d;
  b.gamma = 0.01;
  b.temperature = 10.0;
  b.cutoff = 50.0;
  return b;
}

// Oracle eigenvectors with the library's column sign convention.
MatrixXd oracle_modes(const MatrixXd& H, VectorXd& Omega) {
  auto [ev, V] = oracle::jacobi_eigen(H);
  Omega = ev.cwiseSqrt();
  for (Eigen::Index k = 0; k < V.cols(); ++k) {
    Eigen::Index arg = 0;
    V.col(k).cwiseAbs().maxCoeff(&arg);
    if (V(arg, k) < 0.0) V.col(k) *= -1.0;
  }
  return V;
}

}  // namespace

TEST(Diagonalize, UncoupledNetworkIsAlreadyDiagonal) {
  const auto net = fixture::uncoupled({1.3, 0.9, 1.1});
  const auto d = diagonalize(net);
  EXPECT_NEAR(d.Omega(0), 0.9, 1e-14);
  EXPECT_NEAR(d.Omega(1), 1.1, 1e-14);
  EXPECT_NEAR(d.Omega(2), 1.3, 1e-14);
  MatrixXd P = MatrixXd::Zero(3, 3);
  P(1, 0) = P(2, 1) = P(0, 2) = 1.0;
  EXPECT_TRUE(d.F.isApprox(P, 1e-14));
}

TEST(Diagonalize, IdenticalPairSplitsIntoSumAndDifference) {
  const double w = 1.1, l = -0.2;
  const auto d = diagonalize(fixture::pair(w, w, l));
  // Omega^2 = w^2 + l for (q_a + q_b)/sqrt(2), w^2 - l for (q_a - q_b)/sqrt(2)
  EXPECT_NEAR(d.Omega(0) * d.Omega(0), w * w + l, 1e-14);
  EXPECT_NEAR(d.Omega(1) * d.Omega(1), w * w - l, 1e-14);
  const double s = std::sqrt(0.5);
  EXPECT_NEAR(d.F(0, 0), s, 1e-14);
  EXPECT_NEAR(d.F(1, 0), s, 1e-14);
  EXPECT_NEAR(std::abs(d.F(0, 1)), s, 1e-14);
  EXPECT_NEAR(d.F(0, 1) + d.F(1, 1), 0.0, 1e-14);
}

TEST(Diagonalize, ChainFrequenciesMatchCharacteristicPolynomial) {
  const auto net = fixture::chain3();
  const auto d = diagonalize(net);
  const auto roots = oracle::eigenvalues3(net.hamiltonian());
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(d.Omega(k), std::sqrt(roots[static_cast<std::size_t>(k)]), 1e-12);
}

TEST(Diagonalize, ModesAreOrthonormalWithPositiveLeadingEntries) {
  RandomNetworkParams p;
  p.seed = RngSeed{17};
  const auto d = diagonalize(random_network(p));
  EXPECT_LT((d.F.transpose() * d.F - MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index k = 0; k < 10; ++k) {
    Eigen::Index arg = 0;
    d.F.col(k).cwiseAbs().maxCoeff(&arg);
    EXPECT_GT(d.F(arg, k), 0.0);
    if (k > 0) EXPECT_GE(d.Omega(k), d.Omega(k - 1));
  }
}

TEST(EffectiveCouplings, SeparateBathsCoupleEveryModeEqually) {
  const auto d = effective_couplings(diagonalize(fixture::chain3()), bath_of(BathKind::Separate));
  EXPECT_EQ(d.kappa, VectorXd::Ones(3));
}

TEST(EffectiveCouplings, CommonBathLeavesAntisymmetricModeUncoupled) {
  const auto d = effective_couplings(diagonalize(fixture::pair(1.0, 1.0, -0.1)), bath_of(BathKind::Common));
  EXPECT_LT(std::abs(d.kappa(1)), 1e-12);
  EXPECT_NEAR(std::abs(d.kappa(0)), std::sqrt(2.0), 1e-12);
  EXPECT_EQ(d.sigma, 1u);
  EXPECT_EQ(d.eta, 0u);
}

TEST(EffectiveCouplings, CommonBathChainMatchesOracleColumnSums) {
  const auto net = fixture::chain3();
  const auto d = effective_couplings(diagonalize(net), bath_of(BathKind::Common));
  VectorXd Om;
  const MatrixXd V = oracle_modes(net.hamiltonian(), Om);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(d.kappa(k), V.col(k).sum(), 1e-12);
  EXPECT_NEAR(d.kappa.squaredNorm(), 3.0, 1e-10);
}

TEST(EffectiveCouplings, LocalBathPicksOneRow) {
  const auto net = fixture::chain3();
  const auto d = effective_couplings(diagonalize(net), bath_of(BathKind::Local, 2));
  VectorXd Om;
  const MatrixXd V = oracle_modes(net.hamiltonian(), Om);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(d.kappa(k), V(2, k), 1e-12);
  EXPECT_NEAR(d.kappa.squaredNorm(), 1.0, 1e-12);
}

TEST(EffectiveCouplings, LocalBathNodeOutOfRange) {
  try {
    effective_couplings(diagonalize(fixture::chain3()), bath_of(BathKind::Local, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LocalBathNodeOutOfRange);
  }
}

TEST(EffectiveCouplings, CommonBathParsevalOnRandomNetworks) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RandomNetworkParams p;
    p.seed = RngSeed{seed};
    const auto d = effective_couplings(diagonalize(random_network(p)), bath_of(BathKind::Common));
    EXPECT_NEAR(d.kappa.squaredNorm(), 10.0, 1e-10);
  }
}

TEST(EffectiveCouplings, DegenerateClusterConcentratesTheCoupling) {
  const auto d = effective_couplings(diagonalize(fixture::uncoupled({1.0, 1.0, 1.0})), bath_of(BathKind::Common));
  int nonzero = 0;
  for (Eigen::Index k = 0; k < 3; ++k)
    if (std::abs(d.kappa(k)) > 1e-12) {
      ++nonzero;
      EXPECT_NEAR(std::abs(d.kappa(k)), std::sqrt(3.0), 1e-12);
    }
  EXPECT_EQ(nonzero, 1);
  EXPECT_LT((d.F.transpose() * d.F - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ModeRates, UncoupledModeHasNoDampingOrDiffusion) {
  const auto d = mode_rates(effective_couplings(diagonalize(fixture::pair(1.0, 1.0, -0.1)), bath_of(BathKind::Common)),
                            bath_of(BathKind::Common));
  EXPECT_LT(d.Gamma(1), 1e-25);
  EXPECT_LT(d.D(1), 1e-24);
}

TEST(ModeRates, SeparateBathSingleModeMatchesCothSeries) {
  const auto d = analyze(fixture::uncoupled({1.0}), bath_of(BathKind::Separate));
  EXPECT_DOUBLE_EQ(d.Gamma(0), 0.01);
  EXPECT_NEAR(d.D(0), 0.01 * oracle::coth(0.05), 1e-14);
  EXPECT_NEAR(oracle::coth(0.05), 20.01666389, 1e-8);
}

TEST(ModeRates, CommonBathIdenticalPairRates) {
  const auto d = analyze(fixture::pair(1.0, 1.0, -0.1), bath_of(BathKind::Common));
  EXPECT_NEAR(d.Gamma(0), 0.02, 1e-15);
  EXPECT_LT(d.Gamma(1), 1e-25);
}

TEST(ModeRates, CutoffMustExceedModeFrequencies) {
  auto b = bath_of(BathKind::Separate);
  b.cutoff = 1.5;
  try {
    analyze(fixture::chain3(), b);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CutoffTooLow);
  }
}

TEST(ModeRates, RejectsNonPositiveTemperature) {
  auto b = bath_of(BathKind::Separate);
  b.temperature = 0.0;
  EXPECT_THROW(analyze(fixture::chain3(), b), Error);
}

TEST(FrozenModes, CommonBathIdenticalPairIsGloballySynchronized) {
  const auto b = bath_of(BathKind::Common);
  const auto r = frozen_mode_report(analyze(fixture::pair(1.0, 1.0, -0.1), b), b);
  ASSERT_EQ(r.frozen.size(), 1u);
  EXPECT_EQ(r.frozen[0], 1u);
  EXPECT_EQ(r.participants[1].size(), 2u);
  EXPECT_TRUE(r.global_sync_cb);
}

TEST(FrozenModes, SeparateBathsFreezeNothing) {
  const auto b = bath_of(BathKind::Separate);
  const auto r = frozen_mode_report(analyze(fixture::pair(1.0, 1.0, -0.1), b), b);
  EXPECT_TRUE(r.frozen.empty());
  EXPECT_FALSE(r.global_sync_cb);
}

TEST(FrozenModes, LocalBathClusterSync) {
  // identical pair 0, 1 coupled equally to node 2; the bath sits on node 2
  const auto net = build_network({1.0, 1.0, 1.4}, {{{0, 2}, -0.1}, {{1, 2}, -0.1}});
  const auto b = bath_of(BathKind::Local, 2);
  const auto r = frozen_mode_report(analyze(net, b), b);
  ASSERT_EQ(r.frozen.size(), 1u);
  EXPECT_EQ(r.participants[r.frozen[0]], (std::vector<std::size_t>{0, 1}));
  EXPECT_TRUE(r.cluster_sync_lb);
  EXPECT_FALSE(r.global_sync_cb);
}
