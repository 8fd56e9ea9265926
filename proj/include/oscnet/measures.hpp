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

// Synchronization indicators and Gaussian information measures. All logs are
// natural; two-mode covariances are 4x4 in the xxpp order (q_a, q_b, p_a, p_b).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oscnet/dynamics.hpp"
#include "oscnet/error.hpp"
#include "oscnet/gaussian.hpp"
#include "oscnet/network.hpp"

namespace oscnet {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- sync ----

struct SyncSeries {
  std::vector<double> times;   ///< window start t
  std::vector<double> values;  ///< NaN where the window is degenerate
  double window = 0.0;
  bool degenerate = false;     ///< some window had zero variance

  std::size_t size() const { return times.size(); }
};

namespace detail {

// Trapezoid weights of samples [b, e] on grid t.
inline void trapezoid_weights(std::span<const double> t, std::size_t b, std::size_t e, std::vector<double>& w) {
  w.assign(e - b + 1, 0.0);
  if (e == b) {
    w[0] = 1.0;
    return;
  }
  for (std::size_t k = b; k < e; ++k) {
    const double h = 0.5 * (t[k + 1] - t[k]);
    w[k - b] += h;
    w[k + 1 - b] += h;
  }
}

// Pearson correlation of f, g with weights w (two-pass).
inline double weighted_pearson(std::span<const double> f, std::span<const double> g, const std::vector<double>& w,
                               std::size_t b) {
  double W = 0.0, mf = 0.0, mg = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    W += w[k];
    mf += w[k] * f[b + k];
    mg += w[k] * g[b + k];
  }
  mf /= W;
  mg /= W;
  double vf = 0.0, vg = 0.0, c = 0.0, sf = 0.0, sg = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double df = f[b + k] - mf, dg = g[b + k] - mg;
    vf += w[k] * df * df;
    vg += w[k] * dg * dg;
    c += w[k] * df * dg;
    sf += w[k] * f[b + k] * f[b + k];
    sg += w[k] * g[b + k] * g[b + k];
  }
  constexpr double rel = 1e-24;
  if (!(vf > rel * sf) || !(vg > rel * sg)) return kNaN;
  return std::clamp(c / std::sqrt(vf * vg), -1.0, 1.0);
}

// Last index k >= b with t[k] <= t[b] + dt (small slack for rounding).
inline std::size_t window_end(std::span<const double> t, std::size_t b, double dt) {
  const double limit = t[b] + dt + 1e-9 * std::max(1.0, std::abs(dt));
  auto it = std::upper_bound(t.begin() + static_cast<std::ptrdiff_t>(b), t.end(), limit);
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

inline void check_window(std::span<const double> t, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "window must be positive");
  if (t.size() < 2) throw Error(ErrorCode::InvalidArgument, "series too short");
  if (t.back() - t.front() < dt * (1.0 - 1e-12)) throw Error(ErrorCode::InvalidArgument, "window longer than the series");
  if (window_end(t, 0, dt) < 9) throw Error(ErrorCode::InvalidArgument, "window must span at least 10 samples");
}

}  // namespace detail

/// C(t) = mean(df dg) / sqrt(mean(df^2) mean(dg^2)) over [t, t + dt], for every
/// `stride`-th grid point with t + dt <= t_end.
inline SyncSeries windowed_correlation(std::span<const double> t, std::span<const double> f, std::span<const double> g,
                                       double dt, std::size_t stride = 1) {
  if (f.size() != t.size() || g.size() != t.size())
    throw Error(ErrorCode::DimensionMismatch, "series and time grid differ in length");
  detail::check_window(t, dt);
  stride = std::max<std::size_t>(stride, 1);
  SyncSeries out;
  out.window = dt;
  std::vector<double> w;
  const double last_start = t.back() - dt + 1e-9 * std::max(1.0, std::abs(dt));
  for (std::size_t b = 0; b < t.size() && t[b] <= last_start; b += stride) {
    const std::size_t e = detail::window_end(t, b, dt);
    detail::trapezoid_weights(t, b, e, w);
    const double c = detail::weighted_pearson(f, g, w, b);
    if (std::isnan(c)) out.degenerate = true;
    out.times.push_back(t[b]);
    out.values.push_back(c);
  }
  return out;
}

inline std::vector<double> column(const MatrixXd& m, Eigen::Index j) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) out[static_cast<std::size_t>(r)] = m(r, j);
  return out;
}

/// S(t) = prod_{i<j in subset} |C_{<q_i^2>, <q_j^2>}(t)|.
inline SyncSeries collective_sync(const Trajectory& traj, double dt, const std::vector<std::size_t>& subset,
                                  std::size_t stride = 1) {
  if (subset.size() < 2) throw Error(ErrorCode::InvalidArgument, "collective sync needs at least two nodes");
  for (auto j : subset)
    if (j >= traj.nodes()) throw Error(ErrorCode::InvalidArgument, "node " + std::to_string(j) + " out of range");
  const MatrixXd q2 = traj.second_moment_q();
  std::vector<std::vector<double>> cols;
  for (auto j : subset) cols.push_back(column(q2, static_cast<Eigen::Index>(j)));
  SyncSeries S;
  for (std::size_t a = 0; a < subset.size(); ++a)
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      const SyncSeries c = windowed_correlation(traj.times, cols[a], cols[b], dt, stride);
      if (S.times.empty()) {
        S.times = c.times;
        S.values.assign(c.size(), 1.0);
        S.window = dt;
      }
      for (std::size_t k = 0; k < c.size(); ++k) S.values[k] *= std::abs(c.values[k]);
      S.degenerate = S.degenerate || c.degenerate;
    }
  return S;
}

inline std::vector<std::size_t> all_nodes(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

inline std::vector<std::pair<std::size_t, std::size_t>> all_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> p;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) p.emplace_back(i, j);
  return p;
}

/// First time at which the series exceeds `threshold` (NaN if never).
inline double first_crossing(const SyncSeries& s, double threshold) {
  for (std::size_t k = 0; k < s.size(); ++k)
    if (s.values[k] > threshold) return s.times[k];
  return kNaN;
}

// ------------------------------------------------------------ states ----

/// 1/2 (<p^T p> + <q^T Hm q>), means included.
inline double energy(const GaussianState& state, const NetworkSpec& net) {
  const auto n = static_cast<Eigen::Index>(net.size());
  if (state.mean.size() != 2 * n) throw Error(ErrorCode::DimensionMismatch, "state/network size mismatch");
  if (state.basis != Basis::Node) throw Error(ErrorCode::InvalidArgument, "energy expects a node-basis state");
  const MatrixXd H = net.hamiltonian();
  const VectorXd q = state.mean.head(n), p = state.mean.tail(n);
  return 0.5 * (state.cov.bottomRightCorner(n, n).trace() + p.squaredNorm() +
                (H * state.cov.topLeftCorner(n, n)).trace() + q.dot(H * q));
}

inline double purity(const MatrixXd& cov) {
  const double det = cov.determinant();
  if (!(det > 0.0)) throw Error(ErrorCode::UnphysicalCovariance, "covariance determinant is not positive");
  return 1.0 / (std::pow(2.0, static_cast<double>(cov.rows() / 2)) * std::sqrt(det));
}

/// h(nu) = (nu + 1/2) ln(nu + 1/2) - (nu - 1/2) ln(nu - 1/2); 0 at nu = 1/2.
inline double entropy_term(double nu) {
  const double a = nu + 0.5, b = nu - 0.5;
  const double tb = b > 0.0 ? b * std::log(b) : 0.0;
  return a * std::log(a) - tb;
}

inline double von_neumann_entropy(const MatrixXd& cov, double tol = 1e-8) {
  double s = 0.0;
  for (double nu : symplectic_spectrum(cov)) {
    if (nu < 0.5 - tol) throw Error(ErrorCode::UnphysicalCovariance, "symplectic eigenvalue below 1/2");
    s += entropy_term(std::max(nu, 0.5));
  }
  return s;
}

struct TwoModeBlocks {
  Eigen::Matrix2d A, B, C;  ///< sigma = [[A, C], [C^T, B]] in the (q_a, p_a, q_b, p_b) order
};

inline TwoModeBlocks two_mode_blocks(const MatrixXd& cov) {
  if (cov.rows() != 4 || cov.cols() != 4) throw Error(ErrorCode::DimensionMismatch, "two-mode covariance must be 4x4");
  TwoModeBlocks m;
  m.A << cov(0, 0), cov(0, 2), cov(2, 0), cov(2, 2);
  m.B << cov(1, 1), cov(1, 3), cov(3, 1), cov(3, 3);
  m.C << cov(0, 1), cov(0, 3), cov(2, 1), cov(2, 3);
  return m;
}

namespace detail {

inline double single_mode_entropy(const Eigen::Matrix2d& block, double tol = 1e-8) {
  const double det = block.determinant();
  if (!(det >= 0.25 - tol) || !(block(0, 0) > 0.0))
    throw Error(ErrorCode::UnphysicalCovariance, "single-mode block violates the uncertainty bound");
  return entropy_term(std::sqrt(std::max(det, 0.25)));
}

}  // namespace detail

/// I = S_A + S_B - S_AB.
inline double mutual_information(const MatrixXd& cov) {
  const TwoModeBlocks m = two_mode_blocks(cov);
  const double I = detail::single_mode_entropy(m.A) + detail::single_mode_entropy(m.B) - von_neumann_entropy(cov);
  return std::max(I, 0.0);
}

/// E_N = max(0, -ln 2 nu~_-), nu~_- from the partial transpose p_b -> -p_b.
inline double log_negativity(const MatrixXd& cov) {
  if (cov.rows() != 4 || cov.cols() != 4) throw Error(ErrorCode::DimensionMismatch, "two-mode covariance must be 4x4");
  (void)von_neumann_entropy(cov);  // physicality check
  MatrixXd pt = cov;
  pt.row(3) *= -1.0;
  pt.col(3) *= -1.0;
  const double nu = min_symplectic_eigenvalue(pt);
  return std::max(0.0, -std::log(2.0 * nu));
}

// ---------------------------------------------------------- discord ----

enum class MeasuredSide { A, B };

struct DiscordResult {
  double value = 0.0;
  bool converged = false;
  double theta = 0.0;  ///< optimal measurement angle
  double s = 1.0;      ///< optimal measurement squeezing, 0 = homodyne, 1 = heterodyne
};

namespace detail {

// det sigma_{A|M} for sigma_M = 1/2 R(theta) diag(s, 1/s) R(theta)^T on B, s in [0, 1].
// Numerator and denominator are multiplied by 2s so that s -> 0 (homodyne) is regular.
inline double conditional_det(const TwoModeBlocks& m, double theta, double s) {
  const Eigen::Matrix2d R = rotation(theta);
  const Eigen::Matrix2d Bp = R.transpose() * m.B * R;
  const Eigen::Matrix2d Cp = m.C * R;
  const double bxx = Bp(0, 0), bpp = Bp(1, 1), bxp = 0.5 * (Bp(0, 1) + Bp(1, 0));
  Eigen::Matrix2d num;
  num << 2.0 * s * bpp + 1.0, -2.0 * s * bxp, -2.0 * s * bxp, 2.0 * s * bxx + s * s;
  const double den = (bxx + 0.5 * s) * (2.0 * s * bpp + 1.0) - 2.0 * s * bxp * bxp;
  const Eigen::Matrix2d cond = m.A - Cp * num * Cp.transpose() / den;
  return cond.determinant();
}

// Minimal 2-D Nelder-Mead.
template <class Fn>
std::pair<std::array<double, 2>, double> nelder_mead(Fn f, std::array<double, 2> x0, std::array<double, 2> step,
                                                     double ftol, double xtol, int max_iter, bool& converged) {
  using P = std::array<double, 2>;
  std::array<P, 3> x{x0, P{x0[0] + step[0], x0[1]}, P{x0[0], x0[1] + step[1]}};
  std::array<double, 3> fx{f(x[0]), f(x[1]), f(x[2])};
  auto lin = [](const P& a, const P& b, double t) { return P{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])}; };
  converged = false;
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return fx[static_cast<std::size_t>(a)] < fx[static_cast<std::size_t>(b)]; });
    const P best = x[static_cast<std::size_t>(o[0])], mid = x[static_cast<std::size_t>(o[1])],
            worst = x[static_cast<std::size_t>(o[2])];
    const double fb = fx[static_cast<std::size_t>(o[0])], fm = fx[static_cast<std::size_t>(o[1])],
                 fw = fx[static_cast<std::size_t>(o[2])];
    double size = 0.0;
    for (const P& p : {mid, worst}) size = std::max(size, std::max(std::abs(p[0] - best[0]), std::abs(p[1] - best[1])));
    // Near the optimum the spread can stall at rounding level before the simplex shrinks to xtol.
    if (size <= xtol || (fw - fb <= ftol * (1.0 + std::abs(fb)) && size <= 1e3 * xtol)) {
      converged = true;
      return {best, fb};
    }
    const P c{0.5 * (best[0] + mid[0]), 0.5 * (best[1] + mid[1])};
    const P r = lin(worst, c, 2.0);
    const double fr = f(r);
    P repl;
    double frepl;
    if (fr < fb) {
      const P e = lin(worst, c, 3.0);
      const double fe = f(e);
      if (fe < fr) repl = e, frepl = fe;
      else repl = r, frepl = fr;
    } else if (fr < fm) {
      repl = r, frepl = fr;
    } else {
      const P k = fr < fw ? lin(worst, c, 1.5) : lin(worst, c, 0.5);
      const double fk = f(k);
      if (fk < std::min(fr, fw)) {
        repl = k, frepl = fk;
      } else {
        x = {best, lin(best, mid, 0.5), lin(best, worst, 0.5)};
        fx = {fb, f(x[1]), f(x[2])};
        continue;
      }
    }
    x[static_cast<std::size_t>(o[2])] = repl;
    fx[static_cast<std::size_t>(o[2])] = frepl;
  }
  std::size_t arg = static_cast<std::size_t>(std::min_element(fx.begin(), fx.end()) - fx.begin());
  return {x[arg], fx[arg]};
}

}  // namespace detail

inline constexpr double kDiscordClamp = 1e-9;

/// Gaussian discord with a Gaussian measurement on `side`:
/// delta = S_measured - S_AB + min_M h(sqrt(det sigma_{other|M})).
///
/// The measurement is parametrised by angle theta and squeezing s = (1-u)/(1+u),
/// u = sin^2 phi, so (theta, phi) is unconstrained. A 12 x 4 grid plus the
/// heterodyne point seeds three Nelder-Mead runs.
inline DiscordResult gaussian_discord_full(const MatrixXd& cov, MeasuredSide side = MeasuredSide::B) {
  TwoModeBlocks m = two_mode_blocks(cov);
  if (side == MeasuredSide::A) {
    std::swap(m.A, m.B);
    m.C.transposeInPlace();
  }
  const double s_meas = detail::single_mode_entropy(m.B);
  const double s_ab = von_neumann_entropy(cov);

  auto s_of = [](double phi) {
    const double u = std::sin(phi) * std::sin(phi);
    return (1.0 - u) / (1.0 + u);
  };
  auto objective = [&](const std::array<double, 2>& x) { return detail::conditional_det(m, x[0], s_of(x[1])); };

  struct Start {
    double f;
    std::array<double, 2> x;
  };
  std::vector<Start> starts;
  // phi = 0 is the heterodyne point where theta drops out, so it is seeded once.
  starts.push_back({objective({0.0, 0.0}), {0.0, 0.0}});
  for (int i = 0; i < 12; ++i)
    for (int k = 1; k < 5; ++k) {
      const std::array<double, 2> x{std::numbers::pi * i / 12.0, 0.5 * std::numbers::pi * k / 4.0};
      starts.push_back({objective(x), x});
    }
  std::stable_sort(starts.begin(), starts.end(), [](const Start& a, const Start& b) { return a.f < b.f; });

  DiscordResult res;
  double best = starts.front().f;
  std::array<double, 2> best_x = starts.front().x;
  for (std::size_t r = 0; r < 3; ++r) {
    bool conv = false;
    auto [x, fx] = detail::nelder_mead(objective, starts[r].x, {std::numbers::pi / 24.0, 0.2}, 1e-15, 1e-9, 2000, conv);
    if (fx <= best) {
      best = fx;
      best_x = x;
      res.converged = conv;
    } else if (r == 0) {
      res.converged = conv;
    }
  }
  res.theta = std::fmod(std::fmod(best_x[0], std::numbers::pi) + std::numbers::pi, std::numbers::pi);
  res.s = s_of(best_x[1]);
  const double h_cond = entropy_term(std::sqrt(std::max(best, 0.25)));
  double delta = s_meas - s_ab + h_cond;
  if (delta < 0.0 && delta >= -kDiscordClamp) delta = 0.0;
  res.value = delta;
  return res;
}

/// Discord value; throws OptimizationNotConverged when the optimizer did not settle.
inline double gaussian_discord(const MatrixXd& cov, MeasuredSide side = MeasuredSide::B) {
  const DiscordResult r = gaussian_discord_full(cov, side);
  if (!r.converged)
    throw Error(ErrorCode::OptimizationNotConverged, "discord optimizer did not converge; best bound " +
                                                        ini::format_double(r.value));
  return r.value;
}

// -------------------------------------------------- pair series ----

enum class Measure { MutualInformation, Discord, LogNegativity };

constexpr std::string_view to_string(Measure m) {
  switch (m) {
    case Measure::MutualInformation: return "I";
    case Measure::Discord: return "discord";
    case Measure::LogNegativity: return "logneg";
  }
  return "?";
}

struct PairMeasures {
  std::size_t i = 0, j = 0;
  std::vector<double> I, discord, logneg;  ///< one entry per stored state; NaN when skipped or failed
  std::vector<bool> discord_converged;
  bool failed = false;
  std::string failure;
};

struct MeasureSelection {
  bool mutual_information = true;
  bool discord = true;
  bool log_negativity = true;
  MeasuredSide side = MeasuredSide::B;
};

/// I, discord and E_N of the listed pairs at every stored state of `traj`.
inline std::vector<PairMeasures> pair_measures(const Trajectory& traj,
                                               const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
                                               const MeasureSelection& sel = {}) {
  std::vector<PairMeasures> out;
  const std::size_t count = traj.states.size();
  for (auto [i, j] : pairs) {
    if (i >= traj.nodes() || j >= traj.nodes() || i == j)
      throw Error(ErrorCode::InvalidArgument, "invalid pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
    PairMeasures pm;
    pm.i = i;
    pm.j = j;
    pm.I.assign(count, kNaN);
    pm.discord.assign(count, kNaN);
    pm.logneg.assign(count, kNaN);
    pm.discord_converged.assign(count, false);
    try {
      for (std::size_t k = 0; k < count; ++k) {
        const MatrixXd c = pair_covariance(traj.states[k].cov, i, j);
        if (sel.mutual_information) pm.I[k] = mutual_information(c);
        if (sel.log_negativity) pm.logneg[k] = log_negativity(c);
        if (sel.discord) {
          const DiscordResult d = gaussian_discord_full(c, sel.side);
          pm.discord[k] = d.value;
          pm.discord_converged[k] = d.converged;
        }
      }
    } catch (const Error& e) {
      pm.failed = true;
      pm.failure = e.what();
    }
    out.push_back(std::move(pm));
  }
  return out;
}

struct AveragedSeries {
  std::vector<double> times;
  std::vector<double> values;
  std::vector<std::pair<std::size_t, std::size_t>> excluded;  ///< pairs that failed
};

/// Trailing moving mean over [t - window, t] (trapezoid weights), shorter at the start.
inline std::vector<double> moving_mean(std::span<const double> t, std::span<const double> v, double window) {
  if (t.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "series and time grid differ in length");
  std::vector<double> out(t.size());
  std::vector<double> w;
  std::size_t b = 0;
  for (std::size_t e = 0; e < t.size(); ++e) {
    while (t[e] - t[b] > window * (1.0 + 1e-12)) ++b;
    detail::trapezoid_weights(t, b, e, w);
    double W = 0.0, s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
      W += w[k];
      s += w[k] * v[b + k];
    }
    out[e] = s / W;
  }
  return out;
}

/// Mean of `measure` over all non-failed pairs, then trailing moving mean with
/// `window` (0 disables the filter).
inline AveragedSeries pairwise_average(const Trajectory& traj, const std::vector<PairMeasures>& pm, Measure measure,
                                       double window) {
  AveragedSeries out;
  out.times = traj.stored_times();
  std::vector<double> mean(out.times.size(), 0.0);
  std::size_t used = 0;
  for (const auto& p : pm) {
    const auto& series = measure == Measure::MutualInformation ? p.I
                         : measure == Measure::Discord         ? p.discord
                                                               : p.logneg;
    if (p.failed || series.size() != mean.size()) {
      out.excluded.emplace_back(p.i, p.j);
      continue;
    }
    for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += series[k];
    ++used;
  }
  if (used == 0) {
    out.values.assign(out.times.size(), kNaN);
    return out;
  }
  for (auto& x : mean) x /= static_cast<double>(used);
  out.values = window > 0.0 && mean.size() > 1 ? moving_mean(out.times, mean, window) : mean;
  return out;
}

}  // namespace oscnet
