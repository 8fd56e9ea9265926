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

// Gaussian dynamics under the normal-mode master equation.
//
// Each mode n evolves on its own. With x = (<Q_n>, <P_n>):
//
//   dx/dt     = A_n x,                      A_n = [[-G/2, 1], [-W^2, -G/2]]
//   dS_nm/dt  = A_n S_nm + S_nm A_m^T + d_nm 2 Dbar_n,  Dbar_n = diag(D/(4W^2), D/4)
//
// (G = Gamma_n, W = Omega_n, D = D_n). Means decay at G/2 while rotating at W;
// the fixed point of a damped mode is <Q^2> = coth(W/2T)/(2W), <P^2> = W coth(W/2T)/2.
// Frozen modes (G = D = 0) evolve unitarily.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "oscnet/error.hpp"
#include "oscnet/gaussian.hpp"
#include "oscnet/ini.hpp"
#include "oscnet/network.hpp"
#include "oscnet/spectral.hpp"

namespace oscnet {

struct NodePreparation {
  double mean_q = 0.0;
  double mean_p = 0.0;
  double squeeze_r = 0.0;
  double squeeze_angle = 0.0;
  double thermal_n = 0.0;
};

namespace detail {

inline Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  return R;
}

// Block-diagonal (F (+) F).
inline MatrixXd doubled(const MatrixXd& F) {
  const auto n = F.rows();
  MatrixXd out = MatrixXd::Zero(2 * n, 2 * n);
  out.topLeftCorner(n, n) = F;
  out.bottomRightCorner(n, n) = F;
  return out;
}

}  // namespace detail

/// Product state: node j has covariance (n_j + 1/2) R(theta) diag(e^{-2r}, e^{2r}) R(theta)^T.
inline GaussianState initial_state(std::size_t nodes, const std::vector<NodePreparation>& prep) {
  if (prep.size() != nodes)
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(nodes) + " node preparations, got " + std::to_string(prep.size()));
  const auto n = static_cast<Eigen::Index>(nodes);
  GaussianState s;
  s.mean = VectorXd::Zero(2 * n);
  s.cov = MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& p = prep[static_cast<std::size_t>(j)];
    if (!(p.thermal_n >= 0.0)) throw Error(ErrorCode::UnphysicalSpec, "thermal_n must be >= 0 (node " + std::to_string(j) + ")");
    const Eigen::Matrix2d R = detail::rotation(p.squeeze_angle);
    const Eigen::Matrix2d block =
        (p.thermal_n + 0.5) * R * Eigen::Vector2d(std::exp(-2.0 * p.squeeze_r), std::exp(2.0 * p.squeeze_r)).asDiagonal() *
        R.transpose();
    s.mean(j) = p.mean_q;
    s.mean(n + j) = p.mean_p;
    s.cov(j, j) = block(0, 0);
    s.cov(j, n + j) = block(0, 1);
    s.cov(n + j, j) = block(1, 0);
    s.cov(n + j, n + j) = block(1, 1);
  }
  return s;
}

inline GaussianState initial_state(const NetworkSpec& net, const std::vector<NodePreparation>& prep) {
  return initial_state(net.size(), prep);
}

/// Applies local squeezers S_j = R diag(e^{-r}, e^{r}) R^T and displacements to
/// an arbitrary node-basis state (thermal_n is ignored).
inline GaussianState prepare_on(GaussianState base, const std::vector<NodePreparation>& prep) {
  if (base.basis != Basis::Node) throw Error(ErrorCode::InvalidArgument, "prepare_on expects a node-basis state");
  const auto n = static_cast<Eigen::Index>(base.modes());
  if (prep.size() != static_cast<std::size_t>(n)) throw Error(ErrorCode::DimensionMismatch, "preparation count mismatch");
  MatrixXd S = MatrixXd::Identity(2 * n, 2 * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& p = prep[static_cast<std::size_t>(j)];
    const Eigen::Matrix2d R = detail::rotation(p.squeeze_angle);
    const Eigen::Matrix2d sj =
        R * Eigen::Vector2d(std::exp(-p.squeeze_r), std::exp(p.squeeze_r)).asDiagonal() * R.transpose();
    S(j, j) = sj(0, 0);
    S(j, n + j) = sj(0, 1);
    S(n + j, j) = sj(1, 0);
    S(n + j, n + j) = sj(1, 1);
  }
  base.cov = S * base.cov * S.transpose();
  base.mean = S * base.mean;
  for (Eigen::Index j = 0; j < n; ++j) {
    base.mean(j) += prep[static_cast<std::size_t>(j)].mean_q;
    base.mean(n + j) += prep[static_cast<std::size_t>(j)].mean_p;
  }
  return base;
}

/// Mode-basis thermal covariance of a single mode, (<Q^2>, <P^2>).
inline std::pair<double, double> thermal_variances(double omega, double temperature) {
  const double c = coth(omega / (2.0 * temperature));
  return {c / (2.0 * omega), omega * c / 2.0};
}

/// Gibbs state of the network Hamiltonian at `temperature`, node basis, zero mean.
inline GaussianState thermal_state(const ModeDecomposition& decomp, double temperature) {
  const auto n = static_cast<Eigen::Index>(decomp.size());
  MatrixXd cm = MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index m = 0; m < n; ++m) {
    auto [vq, vp] = thermal_variances(decomp.Omega(m), temperature);
    cm(m, m) = vq;
    cm(n + m, n + m) = vp;
  }
  const MatrixXd FF = detail::doubled(decomp.F);
  return {VectorXd::Zero(2 * n), FF * cm * FF.transpose(), Basis::Node};
}

/// node -> mode: x -> (F (+) F)^T x; mode -> node: x -> (F (+) F) x.
inline GaussianState change_basis(const GaussianState& state, const ModeDecomposition& decomp, Basis target) {
  const auto n = static_cast<Eigen::Index>(decomp.size());
  if (state.mean.size() != 2 * n || state.cov.rows() != 2 * n || state.cov.cols() != 2 * n)
    throw Error(ErrorCode::DimensionMismatch, "state dimension does not match the decomposition");
  if (state.basis == target) return state;
  const MatrixXd FF = detail::doubled(decomp.F);
  GaussianState out;
  out.basis = target;
  if (target == Basis::NormalMode) {
    out.mean = FF.transpose() * state.mean;
    out.cov = FF.transpose() * state.cov * FF;
  } else {
    out.mean = FF * state.mean;
    out.cov = FF * state.cov * FF.transpose();
  }
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

enum class Integrator { Rk4, Exact };

struct EvolveOptions {
  Integrator integrator = Integrator::Rk4;
  /// RK4 step bound; 0 selects 0.02 * 2 pi / max Omega.
  double max_step = 0.0;
  /// Keep the full state at every k-th grid point (0 = only moments).
  std::size_t state_stride = 1;
  bool check_physicality = true;
  double physicality_tol = 1e-8;
};

/// Evolution output in the node basis.
struct Trajectory {
  std::vector<double> times;
  // rows = time points, columns = nodes
  MatrixXd mean_q, mean_p, var_q, var_p, cov_qp;
  VectorXd energy;
  std::vector<GaussianState> states;
  std::vector<std::size_t> state_rows;  ///< time index of each stored state
  double min_symplectic = std::numeric_limits<double>::infinity();

  std::size_t size() const { return times.size(); }
  std::size_t nodes() const { return static_cast<std::size_t>(mean_q.cols()); }
  /// <q_j^2> = Var(q_j) + <q_j>^2
  MatrixXd second_moment_q() const { return var_q + mean_q.cwiseProduct(mean_q); }
  std::vector<double> stored_times() const {
    std::vector<double> t;
    for (auto r : state_rows) t.push_back(times[r]);
    return t;
  }
};

namespace detail {

inline Eigen::Matrix2d mode_drift(double omega, double gamma) {
  Eigen::Matrix2d A;
  A << -0.5 * gamma, 1.0, -omega * omega, -0.5 * gamma;
  return A;
}

inline Eigen::Matrix2d mode_diffusion(double omega, double diffusion) {
  Eigen::Matrix2d Dbar = Eigen::Matrix2d::Zero();
  Dbar(0, 0) = diffusion / (4.0 * omega * omega);
  Dbar(1, 1) = diffusion / 4.0;
  return 2.0 * Dbar;
}

// exp(A t) for the damped-oscillator drift.
inline Eigen::Matrix2d mode_propagator(double omega, double gamma, double t) {
  const double e = std::exp(-0.5 * gamma * t);
  const double c = std::cos(omega * t), s = std::sin(omega * t);
  Eigen::Matrix2d P;
  P << e * c, e * s / omega, -e * omega * s, e * c;
  return P;
}

// Fixed point of the mode covariance (zero for frozen modes, which have none).
inline Eigen::Matrix2d mode_fixed_point(double omega, double gamma, double diffusion) {
  Eigen::Matrix2d S = Eigen::Matrix2d::Zero();
  if (gamma > 0.0) {
    S(0, 0) = diffusion / (2.0 * gamma * omega * omega);
    S(1, 1) = diffusion / (2.0 * gamma);
  }
  return S;
}

inline Eigen::Matrix2d get_block(const MatrixXd& S, Eigen::Index n, Eigen::Index a, Eigen::Index b) {
  Eigen::Matrix2d B;
  B << S(a, b), S(a, n + b), S(n + a, b), S(n + a, n + b);
  return B;
}

inline void set_block(MatrixXd& S, Eigen::Index n, Eigen::Index a, Eigen::Index b, const Eigen::Matrix2d& B) {
  S(a, b) = B(0, 0);
  S(a, n + b) = B(0, 1);
  S(n + a, b) = B(1, 0);
  S(n + a, n + b) = B(1, 1);
  if (a != b) {
    S(b, a) = B(0, 0);
    S(n + b, a) = B(0, 1);
    S(b, n + a) = B(1, 0);
    S(n + b, n + a) = B(1, 1);
  }
}

inline void require_rates(const ModeDecomposition& decomp) {
  if (!decomp.has_rates()) throw Error(ErrorCode::InvalidArgument, "mode rates are not computed");
}

// Mode-basis state after time dt, exact.
inline void propagate_modes_exact(const ModeDecomposition& d, const VectorXd& mean0, const MatrixXd& cov0, double dt,
                                  VectorXd& mean, MatrixXd& cov) {
  const auto n = static_cast<Eigen::Index>(d.size());
  std::vector<Eigen::Matrix2d> P(static_cast<std::size_t>(n)), Sss(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < n; ++m) {
    P[static_cast<std::size_t>(m)] = mode_propagator(d.Omega(m), d.Gamma(m), dt);
    Sss[static_cast<std::size_t>(m)] = mode_fixed_point(d.Omega(m), d.Gamma(m), d.D(m));
  }
  mean.resize(2 * n);
  cov.resize(2 * n, 2 * n);
  for (Eigen::Index m = 0; m < n; ++m) {
    const Eigen::Vector2d x = P[static_cast<std::size_t>(m)] * Eigen::Vector2d(mean0(m), mean0(n + m));
    mean(m) = x(0);
    mean(n + m) = x(1);
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      Eigen::Matrix2d B = get_block(cov0, n, a, b);
      if (a == b) B -= Sss[static_cast<std::size_t>(a)];
      B = P[static_cast<std::size_t>(a)] * B * P[static_cast<std::size_t>(b)].transpose();
      if (a == b) B += Sss[static_cast<std::size_t>(a)];
      set_block(cov, n, a, b, B);
    }
}

// One classical RK4 step of every mode block.
inline void rk4_modes(const std::vector<Eigen::Matrix2d>& A, const std::vector<Eigen::Matrix2d>& Q, double h,
                      VectorXd& mean, MatrixXd& cov) {
  const auto n = static_cast<Eigen::Index>(A.size());
  for (Eigen::Index m = 0; m < n; ++m) {
    const auto& Am = A[static_cast<std::size_t>(m)];
    const Eigen::Vector2d x(mean(m), mean(n + m));
    const Eigen::Vector2d k1 = Am * x;
    const Eigen::Vector2d k2 = Am * (x + 0.5 * h * k1);
    const Eigen::Vector2d k3 = Am * (x + 0.5 * h * k2);
    const Eigen::Vector2d k4 = Am * (x + h * k3);
    const Eigen::Vector2d y = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    mean(m) = y(0);
    mean(n + m) = y(1);
  }
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = a; b < n; ++b) {
      const auto& Aa = A[static_cast<std::size_t>(a)];
      const auto& Ab = A[static_cast<std::size_t>(b)];
      const Eigen::Matrix2d Qab = a == b ? Q[static_cast<std::size_t>(a)] : Eigen::Matrix2d::Zero();
      auto f = [&](const Eigen::Matrix2d& S) -> Eigen::Matrix2d { return Aa * S + S * Ab.transpose() + Qab; };
      const Eigen::Matrix2d S = get_block(cov, n, a, b);
      const Eigen::Matrix2d k1 = f(S);
      const Eigen::Matrix2d k2 = f(S + 0.5 * h * k1);
      const Eigen::Matrix2d k3 = f(S + 0.5 * h * k2);
      const Eigen::Matrix2d k4 = f(S + h * k3);
      set_block(cov, n, a, b, S + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4));
    }
}

inline double mode_energy(const ModeDecomposition& d, const VectorXd& mean, const MatrixXd& cov) {
  const auto n = static_cast<Eigen::Index>(d.size());
  double e = 0.0;
  for (Eigen::Index m = 0; m < n; ++m) {
    const double w2 = d.Omega(m) * d.Omega(m);
    e += 0.5 * (cov(n + m, n + m) + mean(n + m) * mean(n + m) + w2 * (cov(m, m) + mean(m) * mean(m)));
  }
  return e;
}

}  // namespace detail

/// Default RK4 step: 0.02 * 2 pi / max Omega.
inline double default_max_step(const ModeDecomposition& decomp) {
  return 0.02 * 2.0 * std::numbers::pi / decomp.Omega.maxCoeff();
}

/// Exact propagation of `state` (any basis) by `dt`; result in the same basis.
inline GaussianState propagate_exact(const GaussianState& state, const ModeDecomposition& decomp, double dt) {
  detail::require_rates(decomp);
  const GaussianState m0 = change_basis(state, decomp, Basis::NormalMode);
  GaussianState out;
  out.basis = Basis::NormalMode;
  detail::propagate_modes_exact(decomp, m0.mean, m0.cov, dt, out.mean, out.cov);
  return change_basis(out, decomp, state.basis);
}

/// Integrates the state over `t_grid` (the state is taken to be at t_grid[0]).
inline Trajectory evolve(const GaussianState& state, const ModeDecomposition& decomp, std::span<const double> t_grid,
                         const EvolveOptions& options = {}) {
  detail::require_rates(decomp);
  const auto n = static_cast<Eigen::Index>(decomp.size());
  if (state.mean.size() != 2 * n) throw Error(ErrorCode::DimensionMismatch, "state/decomposition size mismatch");
  if (t_grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty time grid");
  for (std::size_t i = 1; i < t_grid.size(); ++i)
    if (!(t_grid[i] > t_grid[i - 1])) throw Error(ErrorCode::InvalidArgument, "time grid must be strictly increasing");

  const GaussianState start = change_basis(state, decomp, Basis::NormalMode);
  const MatrixXd FF = detail::doubled(decomp.F);
  const std::size_t count = t_grid.size();

  Trajectory traj;
  traj.times.assign(t_grid.begin(), t_grid.end());
  traj.mean_q.resize(static_cast<Eigen::Index>(count), n);
  traj.mean_p.resizeLike(traj.mean_q);
  traj.var_q.resizeLike(traj.mean_q);
  traj.var_p.resizeLike(traj.mean_q);
  traj.cov_qp.resizeLike(traj.mean_q);
  traj.energy.resize(static_cast<Eigen::Index>(count));

  auto record = [&](std::size_t row, const VectorXd& mmean, const MatrixXd& mcov) {
    if (!mmean.allFinite() || !mcov.allFinite())
      throw Error(ErrorCode::IntegratorStepFailure, "non-finite moments at t = " + ini::format_double(t_grid[row]));
    const VectorXd mean = FF * mmean;
    const MatrixXd cov = FF * mcov * FF.transpose();
    const auto r = static_cast<Eigen::Index>(row);
    for (Eigen::Index j = 0; j < n; ++j) {
      traj.mean_q(r, j) = mean(j);
      traj.mean_p(r, j) = mean(n + j);
      traj.var_q(r, j) = cov(j, j);
      traj.var_p(r, j) = cov(n + j, n + j);
      traj.cov_qp(r, j) = 0.5 * (cov(j, n + j) + cov(n + j, j));
    }
    traj.energy(r) = detail::mode_energy(decomp, mmean, mcov);
    if (options.state_stride > 0 && row % options.state_stride == 0) {
      if (options.check_physicality) {
        const double nu = min_symplectic_eigenvalue(mcov);
        traj.min_symplectic = std::min(traj.min_symplectic, nu);
        if (nu < 0.5 - options.physicality_tol)
          throw Error(ErrorCode::PhysicalityViolation, "symplectic eigenvalue " + ini::format_double(nu) +
                                                           " < 1/2 at t = " + ini::format_double(t_grid[row]));
      }
      traj.states.push_back({mean, 0.5 * (cov + cov.transpose()), Basis::Node});
      traj.state_rows.push_back(row);
    }
  };

  if (options.integrator == Integrator::Exact) {
    VectorXd mean;
    MatrixXd cov;
    for (std::size_t i = 0; i < count; ++i) {
      detail::propagate_modes_exact(decomp, start.mean, start.cov, t_grid[i] - t_grid[0], mean, cov);
      record(i, mean, cov);
    }
    return traj;
  }

  const double hmax = options.max_step > 0.0 ? options.max_step : default_max_step(decomp);
  std::vector<Eigen::Matrix2d> A(static_cast<std::size_t>(n)), Q(static_cast<std::size_t>(n));
  for (Eigen::Index m = 0; m < n; ++m) {
    A[static_cast<std::size_t>(m)] = detail::mode_drift(decomp.Omega(m), decomp.Gamma(m));
    Q[static_cast<std::size_t>(m)] = detail::mode_diffusion(decomp.Omega(m), decomp.D(m));
  }
  VectorXd mean = start.mean;
  MatrixXd cov = start.cov;
  record(0, mean, cov);
  for (std::size_t i = 1; i < count; ++i) {
    const double span = t_grid[i] - t_grid[i - 1];
    const auto steps = static_cast<std::size_t>(std::ceil(span / hmax - 1e-9));
    const double h = span / static_cast<double>(std::max<std::size_t>(steps, 1));
    for (std::size_t s = 0; s < std::max<std::size_t>(steps, 1); ++s) detail::rk4_modes(A, Q, h, mean, cov);
    record(i, mean, cov);
  }
  return traj;
}

/// Uniform grid t0, t0 + dt, ..., up to t_end inclusive (within rounding).
inline std::vector<double> uniform_grid(double t_end, double dt, double t0 = 0.0) {
  if (!(dt > 0.0) || !(t_end >= t0)) throw Error(ErrorCode::InvalidArgument, "invalid time grid");
  const auto count = static_cast<std::size_t>(std::floor((t_end - t0) / dt + 1e-9)) + 1;
  std::vector<double> t(count);
  for (std::size_t i = 0; i < count; ++i) t[i] = t0 + dt * static_cast<double>(i);
  return t;
}

struct SteadyState {
  /// Node basis. Blocks belonging to frozen modes hold that mode's ground-state
  /// values as placeholders only; frozen modes do not relax.
  GaussianState state;
  std::vector<std::size_t> frozen;
};

inline SteadyState steady_state(const ModeDecomposition& decomp) {
  detail::require_rates(decomp);
  const auto n = static_cast<Eigen::Index>(decomp.size());
  MatrixXd cm = MatrixXd::Zero(2 * n, 2 * n);
  SteadyState out;
  for (Eigen::Index m = 0; m < n; ++m) {
    Eigen::Matrix2d S;
    const double colmax = decomp.F.col(m).cwiseAbs().maxCoeff();
    const bool frozen = !(decomp.Gamma(m) > 0.0) || std::abs(decomp.kappa(m)) < kDefaultTolKappa * colmax;
    if (!frozen) {
      S = detail::mode_fixed_point(decomp.Omega(m), decomp.Gamma(m), decomp.D(m));
    } else {
      out.frozen.push_back(static_cast<std::size_t>(m));
      S.setZero();
      S(0, 0) = 0.5 / decomp.Omega(m);
      S(1, 1) = 0.5 * decomp.Omega(m);
    }
    detail::set_block(cm, n, m, m, S);
  }
  GaussianState ms{VectorXd::Zero(2 * n), cm, Basis::NormalMode};
  out.state = change_basis(ms, decomp, Basis::Node);
  return out;
}

}  // namespace oscnet
