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

// Normal modes of a network and their coupling to the environment.
//
// Hm = F diag(Omega^2) F^T, normal coordinates Q = F^T q. A bath that couples
// to u^T q couples to mode m with weight kappa_m = (F^T u)_m:
//   separate baths   kappa_m = 1
//   common bath      u = (1, ..., 1)  ->  kappa_m = sum_n F_nm
//   local bath at d  u = e_d          ->  kappa_m = F_dm
// For an Ohmic bath with cutoff above every Omega_n the mode rates are
// Gamma_n = gamma kappa_n^2 and D_n = Gamma_n Omega_n coth(Omega_n / 2T).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "oscnet/error.hpp"
#include "oscnet/network.hpp"

namespace oscnet {

enum class BathKind { Separate, Common, Local };

constexpr std::string_view to_string(BathKind kind) {
  switch (kind) {
    case BathKind::Separate: return "SB";
    case BathKind::Common: return "CB";
    case BathKind::Local: return "LB";
  }
  return "?";
}

struct BathConfig {
  BathKind kind = BathKind::Common;
  std::size_t local_node = 0;  ///< node d, only used by BathKind::Local
  double gamma = 0.01;
  double temperature = 10.0;
  double cutoff = 50.0;

  void validate() const {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(ErrorCode::InvalidArgument, "gamma must be >= 0");
    if (!(temperature > 0.0) || !std::isfinite(temperature))
      throw Error(ErrorCode::InvalidArgument, "temperature must be > 0");
    if (!(cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be > 0");
  }
};

struct ModeDecomposition {
  MatrixXd F;      ///< columns are normal modes, node index runs down a column
  VectorXd Omega;  ///< ascending
  VectorXd kappa;  ///< empty until effective_couplings
  VectorXd Gamma;  ///< empty until mode_rates
  VectorXd D;
  std::optional<std::size_t> sigma;  ///< least coupled mode
  std::optional<std::size_t> eta;    ///< runner-up
  double R = std::numeric_limits<double>::quiet_NaN();  ///< |kappa_sigma| / |kappa_eta|

  std::size_t size() const { return static_cast<std::size_t>(Omega.size()); }
  bool has_couplings() const { return kappa.size() == Omega.size() && Omega.size() > 0; }
  bool has_rates() const { return Gamma.size() == Omega.size() && Omega.size() > 0; }
};

namespace detail {

// Largest-magnitude entry of every column made positive (first index wins ties).
inline void fix_column_signs(MatrixXd& F) {
  for (Eigen::Index k = 0; k < F.cols(); ++k) {
    Eigen::Index arg = 0;
    F.col(k).cwiseAbs().maxCoeff(&arg);
    if (F(arg, k) < 0.0) F.col(k) *= -1.0;
  }
}

// Index ranges [begin, end) of numerically degenerate eigenvalues.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate_clusters(const VectorXd& omega2, double rel_tol) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;
  const double scale = omega2.size() ? omega2.cwiseAbs().maxCoeff() : 1.0;
  Eigen::Index begin = 0;
  for (Eigen::Index k = 1; k <= omega2.size(); ++k) {
    if (k == omega2.size() || omega2(k) - omega2(k - 1) > rel_tol * scale) {
      if (k - begin > 1) clusters.emplace_back(begin, k);
      begin = k;
    }
  }
  return clusters;
}

inline VectorXd bath_vector(const BathConfig& bath, std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  if (bath.kind == BathKind::Common) return VectorXd::Ones(size);
  VectorXd u = VectorXd::Zero(size);
  u(static_cast<Eigen::Index>(bath.local_node)) = 1.0;
  return u;
}

}  // namespace detail

inline constexpr double kDegeneracyTolerance = 1e-10;

/// Symmetric eigendecomposition of the network, modes sorted by ascending
/// frequency, each column's largest-magnitude entry positive.
inline ModeDecomposition diagonalize(const NetworkSpec& net) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(net.hamiltonian());
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "symmetric eigensolver did not converge");
  const VectorXd& w2 = es.eigenvalues();
  if (!(w2(0) > 0.0))
    throw Error(ErrorCode::NonPositiveEigenvalue, "eigenvalue " + ini::format_double(w2(0)) + " <= 0");
  ModeDecomposition d;
  d.F = es.eigenvectors();
  d.Omega = w2.cwiseSqrt();
  detail::fix_column_signs(d.F);
  return d;
}

/// Fills kappa, sigma, eta and R.
///
/// Inside a degenerate eigenspace kappa depends on the chosen basis; for the
/// common and local baths the basis is rotated so that one vector carries the
/// whole projection of the bath vector and the others have kappa = 0.
inline ModeDecomposition effective_couplings(ModeDecomposition decomp, const BathConfig& bath) {
  const std::size_t n = decomp.size();
  if (bath.kind == BathKind::Local && bath.local_node >= n)
    throw Error(ErrorCode::LocalBathNodeOutOfRange,
                "local bath node " + std::to_string(bath.local_node) + " but network has " + std::to_string(n) + " nodes");

  if (bath.kind == BathKind::Separate) {
    decomp.kappa = VectorXd::Ones(static_cast<Eigen::Index>(n));
  } else {
    const VectorXd u = detail::bath_vector(bath, n);
    const VectorXd omega2 = decomp.Omega.cwiseProduct(decomp.Omega);
    for (auto [begin, end] : detail::degenerate_clusters(omega2, kDegeneracyTolerance)) {
      const Eigen::Index k = end - begin;
      MatrixXd V = decomp.F.middleCols(begin, k);
      const VectorXd c = V.transpose() * u;
      if (c.norm() == 0.0) continue;
      const MatrixXd cm = c;
      Eigen::HouseholderQR<MatrixXd> qr(cm);
      const MatrixXd Q = qr.householderQ();
      V = V * Q;
      V.col(0) *= (V.col(0).dot(u) < 0.0 ? -1.0 : 1.0);
      // The other columns are orthogonal to the projection by construction.
      decomp.F.middleCols(begin, k) = V;
    }
    detail::fix_column_signs(decomp.F);
    decomp.kappa = decomp.F.transpose() * u;
    for (auto [begin, end] : detail::degenerate_clusters(omega2, kDegeneracyTolerance))
      for (Eigen::Index m = begin + 1; m < end; ++m) decomp.kappa(m) = 0.0;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(decomp.kappa(static_cast<Eigen::Index>(a))) < std::abs(decomp.kappa(static_cast<Eigen::Index>(b)));
  });
  decomp.sigma = order[0];
  decomp.eta.reset();
  decomp.R = std::numeric_limits<double>::quiet_NaN();
  if (n > 1) {
    decomp.eta = order[1];
    const double ke = std::abs(decomp.kappa(static_cast<Eigen::Index>(order[1])));
    if (ke > 0.0) decomp.R = std::abs(decomp.kappa(static_cast<Eigen::Index>(order[0]))) / ke;
  }
  decomp.Gamma.resize(0);
  decomp.D.resize(0);
  return decomp;
}

/// coth(x) without overflow for large arguments.
inline double coth(double x) { return 1.0 / std::tanh(x); }

/// Damping and diffusion rates of an Ohmic bath.
inline ModeDecomposition mode_rates(ModeDecomposition decomp, const BathConfig& bath) {
  bath.validate();
  if (!decomp.has_couplings()) decomp = effective_couplings(std::move(decomp), bath);
  const double max_omega = decomp.Omega.maxCoeff();
  if (!(bath.cutoff > max_omega))
    throw Error(ErrorCode::CutoffTooLow, "cutoff " + ini::format_double(bath.cutoff) +
                                             " must exceed the largest mode frequency " + ini::format_double(max_omega));
  const auto n = decomp.Omega.size();
  decomp.Gamma.resize(n);
  decomp.D.resize(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const double weight = bath.kind == BathKind::Separate ? 1.0 : decomp.kappa(m) * decomp.kappa(m);
    const double om = decomp.Omega(m);
    decomp.Gamma(m) = bath.gamma * weight;
    decomp.D(m) = decomp.Gamma(m) * om * coth(om / (2.0 * bath.temperature));
  }
  return decomp;
}

/// diagonalize + effective_couplings + mode_rates.
inline ModeDecomposition analyze(const NetworkSpec& net, const BathConfig& bath) {
  return mode_rates(effective_couplings(diagonalize(net), bath), bath);
}

struct FrozenModeReport {
  std::vector<std::size_t> frozen;                     ///< modes with |kappa| below threshold
  std::vector<std::vector<std::size_t>> participants;  ///< per mode, nodes with |F_kn| above threshold
  bool global_sync_cb = false;
  bool cluster_sync_lb = false;

  bool is_frozen(std::size_t mode) const { return std::find(frozen.begin(), frozen.end(), mode) != frozen.end(); }
};

inline constexpr double kDefaultTolKappa = 1e-8;
inline constexpr double kDefaultTolOverlap = 1e-6;

/// Frozen (decoherence-free) modes and the node sets they involve.
///
/// Thresholds are relative to the largest |F| entry of the mode's column.
/// global_sync_cb: common bath, some frozen mode involves every node.
/// cluster_sync_lb: local bath at d, some frozen mode avoids d and involves all
/// other nodes, while d overlaps every remaining mode.
inline FrozenModeReport frozen_mode_report(const ModeDecomposition& decomp, const BathConfig& bath,
                                           double tol_kappa = kDefaultTolKappa,
                                           double tol_overlap = kDefaultTolOverlap) {
  if (!decomp.has_couplings()) throw Error(ErrorCode::InvalidArgument, "frozen_mode_report needs effective couplings");
  const auto n = static_cast<Eigen::Index>(decomp.size());
  FrozenModeReport report;
  report.participants.resize(static_cast<std::size_t>(n));
  VectorXd colmax(n);
  for (Eigen::Index m = 0; m < n; ++m) {
    colmax(m) = decomp.F.col(m).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < n; ++k)
      if (std::abs(decomp.F(k, m)) > tol_overlap * colmax(m))
        report.participants[static_cast<std::size_t>(m)].push_back(static_cast<std::size_t>(k));
    if (std::abs(decomp.kappa(m)) < tol_kappa * colmax(m)) report.frozen.push_back(static_cast<std::size_t>(m));
  }
  if (bath.kind == BathKind::Common) {
    for (auto m : report.frozen)
      if (report.participants[m].size() == static_cast<std::size_t>(n)) report.global_sync_cb = true;
  }
  if (bath.kind == BathKind::Local && bath.local_node < decomp.size()) {
    const auto d = static_cast<Eigen::Index>(bath.local_node);
    for (auto s : report.frozen) {
      const auto& part = report.participants[s];
      const bool avoids_d = std::find(part.begin(), part.end(), bath.local_node) == part.end();
      const bool others_all = part.size() == static_cast<std::size_t>(n - 1);
      bool d_everywhere_else = true;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != static_cast<Eigen::Index>(s) && !(std::abs(decomp.F(d, j)) > tol_overlap * colmax(j)))
          d_everywhere_else = false;
      if (avoids_d && others_all && d_everywhere_else) report.cluster_sync_lb = true;
    }
  }
  return report;
}

}  // namespace oscnet
