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
#include "oscnet/network.hpp"

using namespace oscnet;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::InvalidArgument;
}

RandomNetworkParams fig3_params(std::uint64_t seed) {
  RandomNetworkParams p;
  p.n = 10;
  p.p = 0.6;
  p.freq_low = 0.9;
  p.freq_high = 1.2;
  p.coupling_mean = -0.1;
  p.coupling_sd = 0.05;
  p.seed = RngSeed{seed};
  return p;
}

}  // namespace

TEST(BuildNetwork, ThreeNodeChainIsValid) {
  const auto net = fixture::chain3();
  EXPECT_EQ(net.size(), 3u);
  EXPECT_EQ(net.edge_count(), 2u);
  EXPECT_EQ(net.lambda(0, 2), 0.0);
  const MatrixXd H = net.hamiltonian();
  EXPECT_DOUBLE_EQ(H(0, 0), 1.44);
  EXPECT_DOUBLE_EQ(H(2, 2), 1.8 * 1.8);
  EXPECT_DOUBLE_EQ(H(0, 1), 0.4);
}

TEST(BuildNetwork, UncoupledIdenticalPairHasIdentityHamiltonian) {
  const auto net = fixture::uncoupled({1.0, 1.0});
  EXPECT_EQ(net.hamiltonian(), MatrixXd::Identity(2, 2));
}

TEST(BuildNetwork, StrongNegativeCouplingIsUnstable) {
  // eigenvalues of [[1, -1.5], [-1.5, 1]] are 1 -+ 1.5
  const double lo = 1.0 - 1.5, hi = 1.0 + 1.5;
  EXPECT_LT(lo, 0.0);
  EXPECT_GT(hi, 0.0);
  EXPECT_EQ(code_of([] { fixture::pair(1.0, 1.0, -1.5); }), ErrorCode::NonPositiveDefinite);
}

TEST(BuildNetwork, RejectsAsymmetricCoupling) {
  MatrixXd l = MatrixXd::Zero(2, 2);
  l(0, 1) = 0.1;
  EXPECT_EQ(code_of([&] { build_network(VectorXd::Ones(2), l); }), ErrorCode::NonSymmetricCoupling);
}

TEST(BuildNetwork, RejectsNonZeroDiagonal) {
  MatrixXd l = MatrixXd::Zero(2, 2);
  l(1, 1) = 0.1;
  EXPECT_EQ(code_of([&] { build_network(VectorXd::Ones(2), l); }), ErrorCode::NonSymmetricCoupling);
}

TEST(BuildNetwork, RejectsNonPositiveFrequency) {
  EXPECT_EQ(code_of([] { fixture::uncoupled({1.0, 0.0}); }), ErrorCode::NonPositiveFrequency);
  EXPECT_EQ(code_of([] { fixture::uncoupled({-1.0, 1.0}); }), ErrorCode::NonPositiveFrequency);
  EXPECT_EQ(code_of([] { fixture::uncoupled({1.0, std::nan("")}); }), ErrorCode::NonPositiveFrequency);
}

TEST(BuildNetwork, RejectsShapeMismatch) {
  EXPECT_EQ(code_of([] { build_network(VectorXd::Ones(3), MatrixXd::Zero(2, 2)); }), ErrorCode::InvalidArgument);
}

TEST(RandomNetwork, EnsembleMemberIsStableAndInRange) {
  for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
    const auto net = random_network(fig3_params(seed));
    ASSERT_EQ(net.size(), 10u);
    for (std::size_t m = 0; m < 10; ++m) {
      EXPECT_GE(net.omega(m), 0.9);
      EXPECT_LT(net.omega(m), 1.2);
    }
    const auto [ev, vec] = oracle::jacobi_eigen(net.hamiltonian());
    EXPECT_GT(ev(0), 0.0);
  }
}

TEST(RandomNetwork, EmptyGraphIsDiagonal) {
  auto p = fig3_params(7);
  p.p = 0.0;
  const auto net = random_network(p);
  EXPECT_EQ(net.edge_count(), 0u);
  EXPECT_TRUE(net.lambda().isZero(0.0));
}

TEST(RandomNetwork, FifteenNodeEdgeCountWithinBinomialBounds) {
  auto p = fig3_params(2024);
  p.n = 15;
  const auto net = random_network(p);
  std::size_t edges = 0;
  for (Eigen::Index i = 0; i < 15; ++i)
    for (Eigen::Index j = 0; j < i; ++j) {
      EXPECT_EQ(net.lambda()(i, j), net.lambda()(j, i));
      if (net.lambda()(i, j) != 0.0) ++edges;
    }
  EXPECT_EQ(edges, net.edge_count());
  const double trials = 105.0, mean = trials * 0.6, sd = std::sqrt(trials * 0.6 * 0.4);
  EXPECT_LT(std::abs(static_cast<double>(edges) - mean), 5.0 * sd);
  const auto [ev, vec] = oracle::jacobi_eigen(net.hamiltonian());
  EXPECT_GT(ev(0), 0.0);
}

TEST(RandomNetwork, SameSeedIsBitIdentical) {
  const auto a = random_network(fig3_params(99));
  const auto b = random_network(fig3_params(99));
  EXPECT_TRUE(a == b);
  const auto c = random_network(fig3_params(100));
  EXPECT_FALSE(a == c);
}

TEST(RandomNetwork, ExhaustsRetriesOnUnstableDistribution) {
  auto p = fig3_params(1);
  p.p = 1.0;
  p.coupling_mean = -5.0;
  p.coupling_sd = 0.0;
  p.max_retries = 3;
  EXPECT_EQ(code_of([&] { random_network(p); }), ErrorCode::ExhaustedRetries);
}

TEST(RandomNetwork, RejectsBadParameters) {
  auto p = fig3_params(1);
  p.p = 1.5;
  EXPECT_EQ(code_of([&] { random_network(p); }), ErrorCode::InvalidArgument);
  p = fig3_params(1);
  p.freq_low = 0.0;
  EXPECT_EQ(code_of([&] { random_network(p); }), ErrorCode::NonPositiveFrequency);
}

TEST(AttachPair, BalancedPairConfiguration) {
  auto p = fig3_params(5);
  p.n = 15;
  p.freq_low = 1.0;
  p.freq_high = 1.8;
  const auto base = random_network(p);
  const auto net = attach_pair(base, 1.0, 1.0, {{0, -0.15}, {1, -0.12}}, {{0, -0.15}, {1, -0.12}});
  ASSERT_EQ(net.size(), 17u);
  EXPECT_EQ(net.lambda(15, 0), -0.15);
  EXPECT_EQ(net.lambda(16, 1), -0.12);
  EXPECT_EQ(net.lambda(15, 16), 0.0);
  EXPECT_EQ(net.edge_count(), base.edge_count() + 4);
  const auto perturbed = attach_pair(base, 1.0, 1.0, {{0, -0.11}, {1, -0.08}}, {{0, -0.15}, {1, -0.12}});
  EXPECT_NEAR(perturbed.lambda(15, 0), -0.15 + 0.04, 1e-15);
}

TEST(AttachPair, IsolatedPairAddsItsFrequenciesToTheSpectrum) {
  const auto base = fixture::chain3();
  const auto net = attach_pair(base, 0.7, 1.3, {}, {});
  const auto [ev_base, v0] = oracle::jacobi_eigen(base.hamiltonian());
  const auto [ev, v1] = oracle::jacobi_eigen(net.hamiltonian());
  std::vector<double> expected(ev_base.data(), ev_base.data() + 3);
  expected.push_back(0.49);
  expected.push_back(1.69);
  std::sort(expected.begin(), expected.end());
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(ev(k), expected[static_cast<std::size_t>(k)], 1e-12);
}

TEST(AttachPair, DirectLinkIsForbidden) {
  const auto base = fixture::chain3();
  EXPECT_EQ(code_of([&] { attach_pair(base, 1.0, 1.0, {{4, -0.1}}, {}); }), ErrorCode::DirectLinkForbidden);
  EXPECT_EQ(code_of([&] { attach_pair(base, 1.0, 1.0, {{7, -0.1}}, {}); }), ErrorCode::InvalidArgument);
}

TEST(NetworkFile, RoundTripIsLossless) {
  auto p = fig3_params(11);
  const auto net = random_network(p);
  const auto text = save_network(net);
  const auto back = load_network(text);
  EXPECT_TRUE(net == back);
  EXPECT_EQ(save_network(back), text);
}

TEST(NetworkFile, AcceptsHexFloatsAndComments) {
  const auto net = load_network("# chain\n[nodes]\n0 = 0x1.3333333333333p+0\n1 = 1\n2 = 1.8\n[edges]\n0 1 = 0.4\n1 2 = 0.4\n");
  EXPECT_TRUE(net == fixture::chain3());
}

TEST(NetworkFile, ReportsMalformedInput) {
  EXPECT_EQ(code_of([] { load_network("[nodes]\n0 = 1\n2 = 1\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { load_network("[nodes]\n0 = 1\n1 = 1\n[edges]\n0 1 = 0.1\n1 0 = 0.1\n"); }),
            ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { load_network("[edges]\n0 1 = 0.1\n"); }), ErrorCode::ConfigError);
  EXPECT_EQ(code_of([] { load_network("[nodes]\n0 = abc\n"); }), ErrorCode::ConfigError);
}

TEST(NetworkEdits, WithFrequencyAndCouplingCopy) {
  const auto net = fixture::chain3();
  const auto a = with_frequency(net, 1, 1.1);
  EXPECT_EQ(a.omega(1), 1.1);
  EXPECT_EQ(net.omega(1), 1.0);
  const auto b = with_coupling(net, 0, 2, 0.05);
  EXPECT_EQ(b.lambda(2, 0), 0.05);
  EXPECT_EQ(b.edge_count(), 3u);
}
