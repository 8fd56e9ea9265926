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

#pragma once

// Oscillator networks H = (p^T p + q^T Hm q) / 2 with Hm_mn = w_m^2 d_mn + l_mn (1 - d_mn).
//
// All quantities are dimensionless: frequencies in units of a reference
// frequency w0, couplings in units of w0^2, times in units of 1/w0.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "oscnet/error.hpp"
#include "oscnet/ini.hpp"
#include "oscnet/rng.hpp"

namespace oscnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Validated, immutable network description.
class NetworkSpec {
 public:
  std::size_t size() const { return static_cast<std::size_t>(omega_.size()); }
  const VectorXd& omega() const { return omega_; }
  const MatrixXd& lambda() const { return lambda_; }
  double omega(std::size_t m) const { return omega_(static_cast<Eigen::Index>(m)); }
  double lambda(std::size_t m, std::size_t n) const {
    return lambda_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  }

  /// The matrix Hm of the quadratic potential.
  MatrixXd hamiltonian() const {
    MatrixXd h = lambda_;
    for (Eigen::Index m = 0; m < h.rows(); ++m) h(m, m) = omega_(m) * omega_(m);
    return h;
  }

  std::size_t edge_count() const {
    std::size_t count = 0;
    for (Eigen::Index i = 0; i < lambda_.rows(); ++i)
      for (Eigen::Index j = i + 1; j < lambda_.cols(); ++j)
        if (lambda_(i, j) != 0.0) ++count;
    return count;
  }

  friend bool operator==(const NetworkSpec& a, const NetworkSpec& b) {
    return a.omega_.size() == b.omega_.size() && a.omega_ == b.omega_ && a.lambda_ == b.lambda_;
  }

 private:
  NetworkSpec(VectorXd omega, MatrixXd lambda) : omega_(std::move(omega)), lambda_(std::move(lambda)) {}
  friend NetworkSpec build_network(const VectorXd& omega, const MatrixXd& lambda);

  VectorXd omega_;
  MatrixXd lambda_;
};

/// Smallest eigenvalue of a symmetric matrix.
inline double min_eigenvalue(const MatrixXd& symmetric) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetric, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "eigenvalue computation failed");
  return es.eigenvalues()(0);
}

inline NetworkSpec build_network(const VectorXd& omega, const MatrixXd& lambda) {
  const auto n = omega.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "network needs at least one node");
  if (lambda.rows() != n || lambda.cols() != n)
    throw Error(ErrorCode::InvalidArgument, "coupling matrix must be " + std::to_string(n) + "x" + std::to_string(n));
  for (Eigen::Index m = 0; m < n; ++m) {
    if (!(omega(m) > 0.0) || !std::isfinite(omega(m)))
      throw Error(ErrorCode::NonPositiveFrequency, "omega[" + std::to_string(m) + "] must be > 0");
    if (lambda(m, m) != 0.0)
      throw Error(ErrorCode::NonSymmetricCoupling, "coupling diagonal must be zero (node " + std::to_string(m) + ")");
    for (Eigen::Index k = m + 1; k < n; ++k) {
      if (lambda(m, k) != lambda(k, m))
        throw Error(ErrorCode::NonSymmetricCoupling,
                    "lambda[" + std::to_string(m) + "][" + std::to_string(k) + "] != lambda[" + std::to_string(k) +
                        "][" + std::to_string(m) + "]");
      if (!std::isfinite(lambda(m, k))) throw Error(ErrorCode::InvalidArgument, "non-finite coupling");
    }
  }
  NetworkSpec spec(omega, lambda);
  const double lowest = min_eigenvalue(spec.hamiltonian());
  if (!(lowest > 0.0))
    throw Error(ErrorCode::NonPositiveDefinite,
                "Hamiltonian matrix has eigenvalue " + ini::format_double(lowest) + " <= 0 (unstable mode)");
  return spec;
}

/// Convenience overload for small hand-written networks.
inline NetworkSpec build_network(const std::vector<double>& omega,
                                 const std::vector<std::pair<std::pair<std::size_t, std::size_t>, double>>& edges) {
  const auto n = static_cast<Eigen::Index>(omega.size());
  VectorXd w = Eigen::Map<const VectorXd>(omega.data(), n);
  MatrixXd l = MatrixXd::Zero(n, n);
  for (const auto& [ij, value] : edges) {
    const auto [i, j] = ij;
    if (i >= omega.size() || j >= omega.size() || i == j)
      throw Error(ErrorCode::InvalidArgument, "edge (" + std::to_string(i) + "," + std::to_string(j) + ") is invalid");
    l(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
    l(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
  }
  return build_network(w, l);
}

struct RandomNetworkParams {
  std::size_t n = 10;
  double p = 0.6;
  double freq_low = 0.9;
  double freq_high = 1.2;
  double coupling_mean = -0.1;
  double coupling_sd = 0.05;
  RngSeed seed{};
  std::size_t max_retries = 100;
};

/// Erdos-Renyi graph with uniform node frequencies and normally distributed
/// edge weights. Unstable draws are rejected and redrawn from the same stream.
///
/// Draw order per attempt: n frequencies, then for every i < j (row-major) one
/// Bernoulli(p) and, if the edge is present, one normal weight.
inline NetworkSpec random_network(const RandomNetworkParams& params) {
  if (params.n == 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!(params.p >= 0.0 && params.p <= 1.0)) throw Error(ErrorCode::InvalidArgument, "p must lie in [0, 1]");
  if (!(params.freq_low <= params.freq_high)) throw Error(ErrorCode::InvalidArgument, "freq_low > freq_high");
  if (!(params.freq_low > 0.0)) throw Error(ErrorCode::NonPositiveFrequency, "freq_low must be > 0");
  if (!(params.coupling_sd >= 0.0)) throw Error(ErrorCode::InvalidArgument, "coupling_sd must be >= 0");

  Rng rng(params.seed);
  const auto n = static_cast<Eigen::Index>(params.n);
  for (std::size_t attempt = 0; attempt <= params.max_retries; ++attempt) {
    VectorXd omega(n);
    for (Eigen::Index m = 0; m < n; ++m) omega(m) = rng.uniform(params.freq_low, params.freq_high);
    MatrixXd lambda = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        if (rng.bernoulli(params.p)) {
          const double w = rng.normal(params.coupling_mean, params.coupling_sd);
          lambda(i, j) = w;
          lambda(j, i) = w;
        }
    try {
      return build_network(omega, lambda);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveDefinite) throw;
    }
  }
  throw Error(ErrorCode::ExhaustedRetries,
              "no positive definite network after " + std::to_string(params.max_retries + 1) + " draws");
}

using Links = std::vector<std::pair<std::size_t, double>>;

/// Appends two nodes a = n and b = n + 1 linked to the existing network only.
inline NetworkSpec attach_pair(const NetworkSpec& net, double omega_a, double omega_b, const Links& links_a,
                               const Links& links_b) {
  const auto n = net.size();
  const auto a = n, b = n + 1;
  VectorXd omega(static_cast<Eigen::Index>(n + 2));
  omega.head(static_cast<Eigen::Index>(n)) = net.omega();
  omega(static_cast<Eigen::Index>(a)) = omega_a;
  omega(static_cast<Eigen::Index>(b)) = omega_b;
  MatrixXd lambda = MatrixXd::Zero(static_cast<Eigen::Index>(n + 2), static_cast<Eigen::Index>(n + 2));
  lambda.topLeftCorner(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = net.lambda();
  auto link = [&](std::size_t self, std::size_t other_new, const Links& links) {
    for (const auto& [node, weight] : links) {
      if (node == other_new) throw Error(ErrorCode::DirectLinkForbidden, "attached nodes must not be linked directly");
      if (node >= n) throw Error(ErrorCode::InvalidArgument, "link target " + std::to_string(node) + " out of range");
      lambda(static_cast<Eigen::Index>(self), static_cast<Eigen::Index>(node)) = weight;
      lambda(static_cast<Eigen::Index>(node), static_cast<Eigen::Index>(self)) = weight;
    }
  };
  link(a, b, links_a);
  link(b, a, links_b);
  return build_network(omega, lambda);
}

/// Copy of `net` with node `v` at frequency `omega_v`.
inline NetworkSpec with_frequency(const NetworkSpec& net, std::size_t v, double omega_v) {
  if (v >= net.size()) throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(v) + " out of range");
  VectorXd omega = net.omega();
  omega(static_cast<Eigen::Index>(v)) = omega_v;
  return build_network(omega, net.lambda());
}

/// Copy of `net` with lambda_ij = lambda_ji = value.
inline NetworkSpec with_coupling(const NetworkSpec& net, std::size_t i, std::size_t j, double value) {
  if (i >= net.size() || j >= net.size() || i == j)
    throw Error(ErrorCode::InvalidArgument, "invalid coupling index (" + std::to_string(i) + "," + std::to_string(j) + ")");
  MatrixXd lambda = net.lambda();
  lambda(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
  lambda(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
  return build_network(net.omega(), lambda);
}

// --- network files -------------------------------------------------------
//
//   # oscnet network
//   [nodes]
//   0 = 1.2          (index = omega)
//   [edges]
//   0 1 = 0.4        (i j = lambda, i < j, each pair at most once)
//
// Numbers are written in shortest round-trip decimal form; hex floats are
// accepted on input.

inline std::string save_network(const NetworkSpec& net) {
  ini::Document doc;
  auto& nodes = doc.get_or_add("nodes");
  for (std::size_t m = 0; m < net.size(); ++m) nodes.entries.push_back({std::to_string(m), ini::format_double(net.omega(m)), 0});
  auto& edges = doc.get_or_add("edges");
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j)
      if (net.lambda(i, j) != 0.0)
        edges.entries.push_back({std::to_string(i) + " " + std::to_string(j), ini::format_double(net.lambda(i, j)), 0});
  return ini::write(doc, "oscnet network");
}

inline NetworkSpec network_from_ini(const ini::Document& doc, std::string_view origin = "<network>") {
  auto fail = [&](int line, const std::string& msg) -> Error {
    return Error(ErrorCode::ConfigError, std::string(origin) + ":" + std::to_string(line) + ": " + msg);
  };
  const auto* nodes = doc.find("nodes");
  if (!nodes) throw fail(0, "missing [nodes] section");
  std::map<std::size_t, double> omega_by_index;
  for (const auto& e : nodes->entries) {
    auto idx = ini::to_uint(e.key);
    auto w = ini::to_double(e.value);
    if (!idx || !w) throw fail(e.line, "expected '<index> = <omega>'");
    omega_by_index[*idx] = *w;
  }
  const std::size_t n = omega_by_index.size();
  if (n == 0 || omega_by_index.rbegin()->first != n - 1) throw fail(nodes->line, "node indices must be exactly 0..n-1");
  VectorXd omega(static_cast<Eigen::Index>(n));
  for (const auto& [m, w] : omega_by_index) omega(static_cast<Eigen::Index>(m)) = w;
  MatrixXd lambda = MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  if (const auto* edges = doc.find("edges")) {
    for (const auto& e : edges->entries) {
      auto parts = ini::split(e.key, ' ');
      if (parts.size() != 2) throw fail(e.line, "edge key must be '<i> <j>'");
      auto i = ini::to_uint(parts[0]);
      auto j = ini::to_uint(parts[1]);
      auto w = ini::to_double(e.value);
      if (!i || !j || !w) throw fail(e.line, "expected '<i> <j> = <lambda>'");
      if (*i >= n || *j >= n || *i == *j) throw fail(e.line, "edge endpoints out of range or equal");
      auto& slot = lambda(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j));
      if (slot != 0.0) throw fail(e.line, "edge listed twice");
      slot = *w;
      lambda(static_cast<Eigen::Index>(*j), static_cast<Eigen::Index>(*i)) = *w;
    }
  }
  return build_network(omega, lambda);
}

inline NetworkSpec load_network(std::string_view text, std::string_view origin = "<network>") {
  return network_from_ini(ini::parse(text, origin), origin);
}

inline NetworkSpec load_network_file(const std::string& path) {
  return network_from_ini(ini::parse_file(path), path);
}

}  // namespace oscnet
