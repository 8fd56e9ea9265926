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

// Synchronization engineering: drive one mode's effective coupling to zero by
// tuning a node frequency or a coupling, estimate when nodes lock onto the
// slowest mode, and build motifs / node pairs that host a frozen mode.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oscnet/error.hpp"
#include "oscnet/network.hpp"
#include "oscnet/spectral.hpp"

namespace oscnet {

struct TuneParameter {
  enum class Kind { NodeFrequency, Coupling };
  Kind kind = Kind::NodeFrequency;
  std::size_t v = 0;
  std::size_t w = 0;  ///< second node for couplings

  static TuneParameter frequency(std::size_t v) { return {Kind::NodeFrequency, v, 0}; }
  static TuneParameter coupling(std::size_t v, std::size_t w) { return {Kind::Coupling, v, w}; }

  std::string name() const {
    return kind == Kind::NodeFrequency ? "omega_" + std::to_string(v)
                                       : "lambda_" + std::to_string(v) + "_" + std::to_string(w);
  }
  double current(const NetworkSpec& net) const { return kind == Kind::NodeFrequency ? net.omega(v) : net.lambda(v, w); }
  NetworkSpec apply(const NetworkSpec& net, double value) const {
    return kind == Kind::NodeFrequency ? with_frequency(net, v, value) : with_coupling(net, v, w, value);
  }
};

namespace detail {

inline void require_tunable_bath(const BathConfig& bath) {
  if (bath.kind == BathKind::Separate)
    throw Error(ErrorCode::InvalidArgument, "tuning has no effect under separate baths (kappa == 1)");
}

// kappa of every column of F for the bath, without degenerate-cluster rotation.
inline VectorXd raw_kappa(const MatrixXd& F, const BathConfig& bath) {
  return F.transpose() * bath_vector(bath, static_cast<std::size_t>(F.rows()));
}

}  // namespace detail

struct ScanPoint {
  double value = 0.0;
  bool stable = true;
  double kappa_sigma = std::numeric_limits<double>::quiet_NaN();  ///< smallest |kappa|
  std::size_t sigma = 0;
  bool sigma_swapped = false;  ///< sigma is a different mode than at the previous stable point
};

/// |kappa_sigma| over a parameter grid. Unstable points are flagged and skipped.
inline std::vector<ScanPoint> kappa_sigma_scan(const NetworkSpec& net, const TuneParameter& param,
                                               const std::vector<double>& grid, const BathConfig& bath) {
  detail::require_tunable_bath(bath);
  std::vector<ScanPoint> out;
  std::optional<VectorXd> prev_vec;
  for (double x : grid) {
    ScanPoint p;
    p.value = x;
    try {
      const ModeDecomposition d = effective_couplings(diagonalize(param.apply(net, x)), bath);
      p.sigma = *d.sigma;
      p.kappa_sigma = std::abs(d.kappa(static_cast<Eigen::Index>(p.sigma)));
      const VectorXd vec = d.F.col(static_cast<Eigen::Index>(p.sigma));
      if (prev_vec) p.sigma_swapped = std::abs(prev_vec->dot(vec)) < 0.5;
      prev_vec = vec;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NonPositiveDefinite && e.code() != ErrorCode::NonPositiveEigenvalue) throw;
      p.stable = false;
    }
    out.push_back(p);
  }
  return out;
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

struct TuneResult {
  std::string parameter;
  double value = 0.0;
  double residual = 0.0;  ///< |kappa_sigma| at value
  FrozenModeReport report;
  std::pair<double, double> bracket;
  std::size_t iterations = 0;
  NetworkSpec network;
  ModeDecomposition decomposition;
};

namespace detail {

struct Tracked {
  double x;
  VectorXd vec;  ///< tracked mode, sign-aligned with its predecessor
  double kappa;  ///< signed
};

// Follows `ref` from one parameter value to x; throws ModeTrackingLost when the
// overlap is ambiguous.
inline Tracked track_to(const NetworkSpec& net, const TuneParameter& param, const BathConfig& bath,
                        const VectorXd& ref, double x) {
  const ModeDecomposition d = diagonalize(param.apply(net, x));
  const VectorXd ov = d.F.transpose() * ref;
  Eigen::Index arg = 0;
  const double best = ov.cwiseAbs().maxCoeff(&arg);
  double second = 0.0;
  for (Eigen::Index k = 0; k < ov.size(); ++k)
    if (k != arg) second = std::max(second, std::abs(ov(k)));
  if (best < 0.5 || second > 0.9 * best)
    throw Error(ErrorCode::ModeTrackingLost, "ambiguous mode continuation at " + param.name() + " = " + ini::format_double(x));
  VectorXd vec = d.F.col(arg);
  if (ov(arg) < 0.0) vec = -vec;
  return {x, vec, vec.dot(bath_vector(bath, static_cast<std::size_t>(vec.size())))};
}

// Continues the mode from a to b in steps small enough that overlaps stay near 1.
inline Tracked continue_mode(const NetworkSpec& net, const TuneParameter& param, const BathConfig& bath,
                             Tracked from, double to, int depth = 0) {
  try {
    Tracked t = track_to(net, param, bath, from.vec, to);
    if (std::abs(t.vec.dot(from.vec)) > 0.95) return t;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ModeTrackingLost) throw;
  }
  if (depth > 24)
    throw Error(ErrorCode::ModeTrackingLost,
                "mode continuation failed near " + param.name() + " = " + ini::format_double(to) + "; split the bracket");
  const double mid = 0.5 * (from.x + to);
  Tracked m = continue_mode(net, param, bath, from, mid, depth + 1);
  return continue_mode(net, param, bath, m, to, depth + 1);
}

}  // namespace detail

/// Zero of the signed kappa of a tracked mode inside `bracket`.
///
/// The bracket is sampled on `samples` points with every mode followed by
/// eigenvector-overlap continuation; the first sign change of some mode's kappa
/// is then bisected while following that mode.
inline TuneResult find_sync_frequency(const NetworkSpec& net, const TuneParameter& param,
                                      std::pair<double, double> bracket, const BathConfig& bath, double tol = 1e-10,
                                      std::size_t samples = 41) {
  detail::require_tunable_bath(bath);
  auto [lo, hi] = bracket;
  if (!(hi > lo)) throw Error(ErrorCode::InvalidArgument, "bracket must satisfy lo < hi");
  samples = std::max<std::size_t>(samples, 2);
  const std::vector<double> grid = linspace(lo, hi, samples);
  const auto n = static_cast<Eigen::Index>(net.size());

  std::vector<detail::Tracked> modes;
  {
    const ModeDecomposition d0 = diagonalize(param.apply(net, grid[0]));
    const VectorXd k0 = detail::raw_kappa(d0.F, bath);
    for (Eigen::Index m = 0; m < n; ++m) modes.push_back({grid[0], d0.F.col(m), k0(m)});
  }
  std::optional<std::pair<detail::Tracked, detail::Tracked>> crossing;
  std::optional<detail::Tracked> exact;
  auto consider_exact = [&](const detail::Tracked& t) {
    if (std::abs(t.kappa) < tol && (!exact || std::abs(t.kappa) < std::abs(exact->kappa))) exact = t;
  };
  for (const auto& t : modes) consider_exact(t);
  for (std::size_t i = 1; i < grid.size() && !crossing; ++i) {
    std::vector<detail::Tracked> next;
    for (const auto& t : modes) next.push_back(detail::continue_mode(net, param, bath, t, grid[i]));
    for (std::size_t m = 0; m < modes.size(); ++m) {
      consider_exact(next[m]);
      if ((modes[m].kappa < 0.0) != (next[m].kappa < 0.0) && !crossing) crossing = {{modes[m], next[m]}};
    }
    modes = std::move(next);
  }

  detail::Tracked sol{0.0, VectorXd(), 0.0};
  std::size_t iterations = 0;
  if (crossing) {
    auto [a, b] = *crossing;
    sol = std::abs(a.kappa) < std::abs(b.kappa) ? a : b;
    while (std::abs(sol.kappa) >= tol && iterations < 200) {
      const double mid = 0.5 * (a.x + b.x);
      if (mid <= a.x || mid >= b.x) break;
      const detail::Tracked m = detail::continue_mode(net, param, bath, a, mid);
      ++iterations;
      if ((m.kappa < 0.0) == (a.kappa < 0.0)) a = m;
      else b = m;
      sol = m;
    }
  } else if (exact) {
    sol = *exact;
  } else {
    throw Error(ErrorCode::NoZeroInBracket, "no sign change of a mode coupling for " + param.name() + " in [" +
                                                ini::format_double(lo) + ", " + ini::format_double(hi) + "]");
  }

  NetworkSpec tuned = param.apply(net, sol.x);
  TuneResult r{param.name(), sol.x, 0.0, {}, bracket, iterations, tuned, effective_couplings(diagonalize(tuned), bath)};
  r.residual = std::abs(r.decomposition.kappa(static_cast<Eigen::Index>(*r.decomposition.sigma)));
  r.report = frozen_mode_report(r.decomposition, bath);
  return r;
}

// ------------------------------------------------------- sync times ----

struct SyncTimeEstimate {
  std::vector<double> per_node;         ///< +inf for decoupled nodes
  std::vector<std::size_t> competitor;  ///< mode giving the max for each node
  std::vector<bool> clipped;            ///< raw max was negative, reported as 0
  std::vector<bool> decoupled;          ///< F_{j sigma} == 0
  double t_sync = 0.0;                  ///< max over finite entries
  std::size_t sigma = 0;
};

/// t_j = max_{k != sigma} 2 (ln|F_jk| - ln|F_j sigma|) / (Gamma_k - Gamma_sigma), clipped at 0.
inline SyncTimeEstimate estimate_sync_times(const ModeDecomposition& decomp, double tol_overlap = kDefaultTolOverlap) {
  if (!decomp.has_rates()) throw Error(ErrorCode::InvalidArgument, "sync time estimate needs mode rates");
  const auto n = static_cast<Eigen::Index>(decomp.size());
  Eigen::Index s = 0;
  decomp.Gamma.minCoeff(&s);
  const double gmax = decomp.Gamma.maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k)
    if (k != s && decomp.Gamma(k) - decomp.Gamma(s) <= 1e-14 * std::max(gmax, 1e-300))
      throw Error(ErrorCode::NoDominantMode, "least damped mode is not unique");
  SyncTimeEstimate est;
  est.sigma = static_cast<std::size_t>(s);
  const double colmax = decomp.F.col(s).cwiseAbs().maxCoeff();
  bool any_finite = false;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double fs = std::abs(decomp.F(j, s));
    if (!(fs > tol_overlap * colmax)) {
      est.per_node.push_back(std::numeric_limits<double>::infinity());
      est.competitor.push_back(static_cast<std::size_t>(s));
      est.clipped.push_back(false);
      est.decoupled.push_back(true);
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    std::size_t arg = static_cast<std::size_t>(s);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k == s) continue;
      const double fk = std::abs(decomp.F(j, k));
      if (fk == 0.0) continue;
      const double t = 2.0 * (std::log(fk) - std::log(fs)) / (decomp.Gamma(k) - decomp.Gamma(s));
      if (t > best) {
        best = t;
        arg = static_cast<std::size_t>(k);
      }
    }
    est.clipped.push_back(best < 0.0);
    est.per_node.push_back(std::max(best, 0.0));
    est.competitor.push_back(arg);
    est.decoupled.push_back(false);
    est.t_sync = std::max(est.t_sync, est.per_node.back());
    any_finite = true;
  }
  if (!any_finite) throw Error(ErrorCode::NodeDecoupled, "every node is decoupled from the least damped mode");
  return est;
}

// ----------------------------------------------------------- motifs ----

namespace detail {

inline double pole_guard(double Omega2, double omega2, const char* which) {
  const double den = Omega2 - omega2;
  if (std::abs(den) <= 1e-14 * std::max(std::abs(Omega2), 1.0))
    throw Error(ErrorCode::PoleAtOmega, std::string("Omega_sigma^2 coincides with ") + which);
  return den;
}

}  // namespace detail

/// lambda_ac / (Omega^2 - omega_a^2) + lambda_bc / (Omega^2 - omega_b^2) + 1.
inline double motif_frozen_residual(double omega_a, double omega_b, double lambda_ac, double lambda_bc,
                                    double Omega_sigma) {
  const double W2 = Omega_sigma * Omega_sigma;
  return lambda_ac / detail::pole_guard(W2, omega_a * omega_a, "omega_a^2") +
         lambda_bc / detail::pole_guard(W2, omega_b * omega_b, "omega_b^2") + 1.0;
}

struct EmbeddingResidual {
  std::size_t node;
  double value;
};

/// r_j = x_a lambda_aj + x_b lambda_bj + lambda_cj for every node j outside {a, b, c},
/// with x_a = lambda_ac / (Omega^2 - omega_a^2) and x_b likewise.
inline std::vector<EmbeddingResidual> embedding_residuals(const NetworkSpec& net, std::size_t a, std::size_t b,
                                                          std::size_t c, double Omega_sigma) {
  const std::size_t n = net.size();
  if (a >= n || b >= n || c >= n || a == b || b == c || a == c)
    throw Error(ErrorCode::InvalidArgument, "motif nodes must be distinct and in range");
  const double W2 = Omega_sigma * Omega_sigma;
  const double xa = net.lambda(a, c) / detail::pole_guard(W2, net.omega(a) * net.omega(a), "omega_a^2");
  const double xb = net.lambda(b, c) / detail::pole_guard(W2, net.omega(b) * net.omega(b), "omega_b^2");
  std::vector<EmbeddingResidual> out;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == a || j == b || j == c) continue;
    out.push_back({j, xa * net.lambda(a, j) + xb * net.lambda(b, j) + net.lambda(c, j)});
  }
  return out;
}

struct MotifSolution {
  double Omega = 0.0;    ///< frozen-mode frequency
  double omega_b = 0.0;
  double x_a = 0.0, x_b = 0.0;  ///< mode amplitudes with x_c = 1
};

/// Frozen a-c-b motifs for given omega_a, omega_c, lambda_ac, lambda_bc.
///
/// With x_c = 1 and u = Omega^2 - omega_a^2 the eigen-equations plus
/// x_a + x_b + x_c = 0 reduce to
///   u^2 + (lambda_bc - omega_c^2 + omega_a^2) u + lambda_ac (lambda_bc - lambda_ac) = 0,
/// then x_a = lambda_ac / u, x_b = -1 - x_a, omega_b^2 = Omega^2 - lambda_bc / x_b.
/// Returns the admissible roots, most balanced amplitudes first.
inline std::vector<MotifSolution> solve_motif(double omega_a, double omega_c, double lambda_ac, double lambda_bc) {
  const double wa2 = omega_a * omega_a;
  const double p = lambda_bc - omega_c * omega_c + wa2;
  const double q = lambda_ac * (lambda_bc - lambda_ac);
  const double disc = p * p - 4.0 * q;
  std::vector<MotifSolution> out;
  if (disc < 0.0) return out;
  const double sq = std::sqrt(disc);
  const double r1 = p >= 0.0 ? (-p - sq) / 2.0 : (-p + sq) / 2.0;
  const double r2 = r1 != 0.0 ? q / r1 : -p - r1;
  for (double u : {r1, r2}) {
    if (u == 0.0) continue;
    const double W2 = u + wa2;
    if (!(W2 > 0.0)) continue;
    MotifSolution s;
    s.Omega = std::sqrt(W2);
    s.x_a = lambda_ac / u;
    s.x_b = -1.0 - s.x_a;
    if (s.x_b == 0.0) continue;
    const double wb2 = W2 - lambda_bc / s.x_b;
    if (!(wb2 > 0.0)) continue;
    s.omega_b = std::sqrt(wb2);
    out.push_back(s);
  }
  auto balance = [](const MotifSolution& s) {
    const double lo = std::min({std::abs(s.x_a), std::abs(s.x_b), 1.0});
    const double hi = std::max({std::abs(s.x_a), std::abs(s.x_b), 1.0});
    return lo / hi;
  };
  std::stable_sort(out.begin(), out.end(), [&](const auto& l, const auto& r) { return balance(l) > balance(r); });
  return out;
}

struct MotifNetwork {
  NetworkSpec network;
  MotifSolution solution;
};

/// Turns nodes a-c-b of `net` into a frozen motif: omega_c, lambda_ac and
/// lambda_bc are set, lambda_ab = 0, omega_a is kept, omega_b is solved and
/// every link c-j is set so the embedding residual of j vanishes.
inline MotifNetwork tune_motif(const NetworkSpec& net, std::size_t a, std::size_t b, std::size_t c, double omega_c,
                               double lambda_ac, double lambda_bc) {
  const std::size_t n = net.size();
  if (a >= n || b >= n || c >= n || a == b || b == c || a == c)
    throw Error(ErrorCode::InvalidArgument, "motif nodes must be distinct and in range");
  const auto sols = solve_motif(net.omega(a), omega_c, lambda_ac, lambda_bc);
  if (sols.empty()) throw Error(ErrorCode::InvalidArgument, "motif parameters admit no frozen mode");
  const MotifSolution& s = sols.front();
  VectorXd omega = net.omega();
  MatrixXd lambda = net.lambda();
  const auto ia = static_cast<Eigen::Index>(a), ib = static_cast<Eigen::Index>(b), ic = static_cast<Eigen::Index>(c);
  omega(ib) = s.omega_b;
  omega(ic) = omega_c;
  lambda(ia, ib) = lambda(ib, ia) = 0.0;
  lambda(ia, ic) = lambda(ic, ia) = lambda_ac;
  lambda(ib, ic) = lambda(ic, ib) = lambda_bc;
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(n); ++j) {
    if (j == ia || j == ib || j == ic) continue;
    lambda(ic, j) = lambda(j, ic) = -(s.x_a * lambda(ia, j) + s.x_b * lambda(ib, j));
  }
  return {build_network(omega, lambda), s};
}

/// First chain (d, f, e) outside `exclude` with d-f and f-e linked and d, e not
/// linked; d < e.
inline std::optional<std::array<std::size_t, 3>> find_open_chain(const NetworkSpec& net,
                                                                 const std::vector<std::size_t>& exclude) {
  auto skip = [&](std::size_t j) { return std::find(exclude.begin(), exclude.end(), j) != exclude.end(); };
  const std::size_t n = net.size();
  for (std::size_t f = 0; f < n; ++f) {
    if (skip(f)) continue;
    for (std::size_t d = 0; d < n; ++d) {
      if (d == f || skip(d) || net.lambda(d, f) == 0.0) continue;
      for (std::size_t e = d + 1; e < n; ++e)
        if (e != f && !skip(e) && net.lambda(f, e) != 0.0 && net.lambda(d, e) == 0.0)
          return std::array<std::size_t, 3>{d, f, e};
    }
  }
  return std::nullopt;
}

// ------------------------------------------------------- pair balance ----

struct BalanceResult {
  NetworkSpec network;
  std::vector<EmbeddingResidual> before, after;  ///< F_a lambda_aj + F_b lambda_bj per external j
};

namespace detail {

inline std::vector<EmbeddingResidual> pair_residuals(const NetworkSpec& net, std::size_t a, std::size_t b,
                                                     double fa, double fb) {
  std::vector<EmbeddingResidual> out;
  for (std::size_t j = 0; j < net.size(); ++j)
    if (j != a && j != b) out.push_back({j, fa * net.lambda(a, j) + fb * net.lambda(b, j)});
  return out;
}

}  // namespace detail

/// Residuals of sum_{k=a,b} F_k lambda_kj = 0 for the antisymmetric pair mode
/// (F_a, F_b) = (1, -1)/sqrt(2).
inline std::vector<EmbeddingResidual> pair_balance_residuals(const NetworkSpec& net, std::size_t a, std::size_t b) {
  return detail::pair_residuals(net, a, b, std::sqrt(0.5), -std::sqrt(0.5));
}

/// Sets lambda_bj = lambda_aj for every j so that (q_a - q_b)/sqrt(2) is an exact frozen mode.
inline BalanceResult balance_pair_couplings(const NetworkSpec& net, std::size_t a, std::size_t b) {
  const std::size_t n = net.size();
  if (a >= n || b >= n || a == b) throw Error(ErrorCode::InvalidArgument, "pair nodes must be distinct and in range");
  if (net.omega(a) != net.omega(b))
    throw Error(ErrorCode::FrequencyMismatch, "pair frequencies differ: " + ini::format_double(net.omega(a)) + " vs " +
                                                  ini::format_double(net.omega(b)));
  if (net.lambda(a, b) != 0.0) throw Error(ErrorCode::DirectLinkForbidden, "pair nodes are directly linked");
  BalanceResult r{net, pair_balance_residuals(net, a, b), {}};
  MatrixXd lambda = net.lambda();
  for (std::size_t j = 0; j < n; ++j) {
    if (j == a || j == b) continue;
    const auto bj = static_cast<Eigen::Index>(j);
    lambda(static_cast<Eigen::Index>(b), bj) = lambda(bj, static_cast<Eigen::Index>(b)) = lambda(static_cast<Eigen::Index>(a), bj);
  }
  r.network = build_network(net.omega(), lambda);
  r.after = pair_balance_residuals(r.network, a, b);
  return r;
}

}  // namespace oscnet
