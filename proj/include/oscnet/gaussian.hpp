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

// Gaussian states in the xxpp ordering (q_1 .. q_N, p_1 .. p_N), hbar = 1.
// Covariance sigma_ij = <{xi_i, xi_j}>/2 - <xi_i><xi_j>; the vacuum of a unit
// frequency oscillator has sigma = I/2 and every symplectic eigenvalue of a
// physical state is >= 1/2.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "oscnet/error.hpp"

namespace oscnet {

using Eigen::MatrixXd;
using Eigen::VectorXd;

enum class Basis { Node, NormalMode };

struct GaussianState {
  VectorXd mean;
  MatrixXd cov;
  Basis basis = Basis::Node;

  std::size_t modes() const { return static_cast<std::size_t>(mean.size() / 2); }
};

/// J = [[0, I], [-I, 0]] for n modes.
inline MatrixXd symplectic_form(std::size_t n) {
  const auto k = static_cast<Eigen::Index>(n);
  MatrixXd J = MatrixXd::Zero(2 * k, 2 * k);
  J.topRightCorner(k, k).setIdentity();
  J.bottomLeftCorner(k, k) = -MatrixXd::Identity(k, k);
  return J;
}

/// Symplectic eigenvalues (ascending) of a positive definite covariance.
///
/// With sigma = L L^T, M = L^T J L is antisymmetric with eigenvalues +-i nu_k,
/// so M^T M has every nu_k^2 twice.
inline std::vector<double> symplectic_spectrum(const MatrixXd& cov) {
  if (cov.rows() != cov.cols() || cov.rows() % 2 != 0)
    throw Error(ErrorCode::DimensionMismatch, "covariance must be 2n x 2n");
  Eigen::LLT<MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::UnphysicalCovariance, "covariance is not positive definite");
  const MatrixXd L = llt.matrixL();
  const std::size_t n = static_cast<std::size_t>(cov.rows() / 2);
  const MatrixXd M = L.transpose() * symplectic_form(n) * L;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M.transpose() * M, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::EigensolverFailure, "symplectic spectrum failed");
  const VectorXd& ev = es.eigenvalues();
  std::vector<double> nu(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double mean_sq = 0.5 * (ev(static_cast<Eigen::Index>(2 * k)) + ev(static_cast<Eigen::Index>(2 * k + 1)));
    nu[k] = std::sqrt(std::max(mean_sq, 0.0));
  }
  return nu;
}

inline double min_symplectic_eigenvalue(const MatrixXd& cov) { return symplectic_spectrum(cov).front(); }

/// Covariance restricted to the listed modes, keeping the xxpp ordering.
inline MatrixXd reduced_covariance(const MatrixXd& cov, const std::vector<std::size_t>& modes) {
  const auto n = cov.rows() / 2;
  const auto k = static_cast<Eigen::Index>(modes.size());
  std::vector<Eigen::Index> idx;
  idx.reserve(modes.size() * 2);
  for (auto m : modes) idx.push_back(static_cast<Eigen::Index>(m));
  for (auto m : modes) idx.push_back(static_cast<Eigen::Index>(m) + n);
  MatrixXd out(2 * k, 2 * k);
  for (Eigen::Index i = 0; i < 2 * k; ++i)
    for (Eigen::Index j = 0; j < 2 * k; ++j) out(i, j) = cov(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  return out;
}

/// Two-mode covariance of nodes (i, j) in xxpp order: (q_i, q_j, p_i, p_j).
inline MatrixXd pair_covariance(const MatrixXd& cov, std::size_t i, std::size_t j) {
  return reduced_covariance(cov, {i, j});
}

}  // namespace oscnet
