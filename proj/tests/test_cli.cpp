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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "oscnet/scenario.hpp"

namespace {

using namespace oscnet;
namespace fs = std::filesystem;
using scenario::ScenarioConfig;

const std::vector<std::string> kPresets = {"fig2_sb.ini",    "fig2_cb.ini",       "fig3_tuned.ini",    "fig3_sweep.ini",
                                           "fig4_motif.ini", "fig5_entangle.ini", "fig5_perturbed.ini"};

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "oscnet_test_cli" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

ScenarioConfig parse(const std::string& text) { return scenario::parse_config(ini::parse(text), "<test>"); }

void expect_config_error(const std::string& text) {
  try {
    auto cfg = parse(text);
    scenario::prepare(cfg);
    FAIL() << "accepted:\n" << text;
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError) << e.what();
  }
}

// Short Fig. 2 style chain used by several tests.
const char* kChain = R"(
[network]
source = inline
[nodes]
0 = 1.2
1 = 1.0
2 = 1.8
[edges]
0 1 = 0.4
1 2 = 0.4
[bath]
kind = CB
gamma = 0.07
temperature = 10
cutoff = 50
[initial]
mean_q.0 = -1
mean_q.2 = 1
squeeze_r = 0.3
[time]
t_end = 30
step = 0.05
)";

int run_cli(const std::string& args) {
  const std::string cmd = std::string(OSCNET_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ------------------------------------------------------------ config ----

TEST(Config, PresetsRoundTrip) {
  for (const auto& name : kPresets) {
    const auto cfg = scenario::load_config(fixture::preset(name));
    const std::string text = scenario::write_config(cfg);
    const auto again = parse(text);
    EXPECT_EQ(scenario::write_config(again), text) << name;
  }
}

TEST(Config, RoundTripKeepsValues) {
  const auto cfg = scenario::load_config(fixture::preset("fig4_motif.ini"));
  const auto again = parse(scenario::write_config(cfg));
  ASSERT_TRUE(again.motif.has_value());
  EXPECT_EQ(again.motif->omega_c, 1.51);
  EXPECT_EQ(again.motif->lambda_ac, -0.09);
  EXPECT_EQ(again.random.seed.value, cfg.random.seed.value);
  EXPECT_EQ(again.pairs, cfg.pairs);
  EXPECT_EQ(again.subset, cfg.subset);
  EXPECT_EQ(again.t_end, cfg.t_end);
}

TEST(Config, InlineNetworkRoundTripsBitwise) {
  auto cfg = parse(kChain);
  cfg.inline_network = build_network({0.1 + 0.2, 1.0 / 3.0}, {{{0, 1}, -1e-17}});
  const auto again = parse(scenario::write_config(cfg));
  EXPECT_EQ(again.inline_network->omega(0), 0.1 + 0.2);
  EXPECT_EQ(again.inline_network->omega(1), 1.0 / 3.0);
  EXPECT_EQ(again.inline_network->lambda(0, 1), -1e-17);
}

TEST(Config, RejectsInvalidScenarios) {
  const std::string chain = kChain;
  expect_config_error(chain + "[bogus]\nx = 1\n");
  expect_config_error(chain + "[output]\ncolour = red\n");
  expect_config_error("[bath]\nkind = CB\n");
  expect_config_error(std::string(kChain).replace(std::string(kChain).find("kind = CB"), 9, "kind = XB"));
  expect_config_error(chain + "[analysis]\npairs = 0-7\n");
  expect_config_error(chain + "[analysis]\npairs = 0:1\n");
  expect_config_error(chain + "[analysis]\npairs = 1-1\n");
  expect_config_error(chain + "[analysis]\nwindow = 100\n");
  expect_config_error(chain + "[analysis]\nwindow = 0.2\n");
  expect_config_error(chain + "[analysis]\nmeasures = entropy\n");
  expect_config_error(chain + "[tuning]\nparameter = omega:1\nbracket = 2, 1\n");
  expect_config_error(chain + "[tuning]\nparameter = theta:1\nbracket = 1, 2\n");
  expect_config_error(chain + "[sweep]\nparameter = omega:1\nvalues = 0.1\nrelative_to_tuned = true\n");
  expect_config_error(chain + "[sweep]\nparameter = omega:1\n");
  expect_config_error(chain + "[attach]\nomega_a = 1\n[motif]\na = 0\n");
  expect_config_error("[network]\nsource = random\n[nodes]\n0 = 1\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[initial]\nmean_q.3 = 1\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[initial]\nthermal_n = -1\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[initial]\nspin.0 = 1\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[time]\nt_end = 1\nstep = 2\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[time]\nintegrator = euler\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[time]\nintegrator = rk4\nmax_step = 1\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[bath]\nkind = LB\nlocal_node = 4\n");
  expect_config_error("[network]\nsource = inline\n[nodes]\n0 = 1\n[bath]\ntemperature = 0\n");
  expect_config_error("[network]\nsource = file\n");
  expect_config_error("[network]\nsource = random\nn = ten\n");
}

TEST(Config, ErrorsNameTheLine) {
  try {
    parse("[network]\nsource = inline\n[nodes]\n0 = 1\n[time]\nt_end = -4\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("<test>:6"), std::string::npos) << e.what();
  }
}

TEST(Config, NetworkFileIsResolvedRelativeToConfig) {
  const auto dir = temp_dir("netfile");
  {
    std::ofstream(dir / "net.ini") << save_network(fixture::chain3());
    std::ofstream(dir / "run.ini") << "[network]\nsource = file\npath = net.ini\n";
  }
  const auto cfg = scenario::load_config((dir / "run.ini").string());
  const auto pr = scenario::prepare(cfg);
  EXPECT_EQ(pr.network.omega(), fixture::chain3().omega());
}

TEST(Config, MissingNetworkFileIsIoError) {
  auto cfg = parse("[network]\nsource = file\npath = /nonexistent/net.ini\n");
  try {
    scenario::prepare(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

// ---------------------------------------------------------- simulate ----

TEST(Simulate, WithoutAnalysisWritesTrajectoryOnly) {
  auto cfg = parse(kChain);
  cfg.out_dir = temp_dir("traj_only").string();
  scenario::run_simulate(cfg);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "trajectory.csv"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "summary.txt"));
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "network.ini"));
  EXPECT_FALSE(fs::exists(fs::path(cfg.out_dir) / "measures.csv"));
  EXPECT_FALSE(fs::exists(fs::path(cfg.out_dir) / "aggregate.csv"));
  std::istringstream csv(slurp(fs::path(cfg.out_dir) / "trajectory.csv"));
  std::string header;
  std::getline(csv, header);
  EXPECT_EQ(header.rfind("t,mean_q_0,mean_p_0,var_q_0,var_p_0,cov_qp_0,", 0), 0u);
  std::size_t rows = 0;
  for (std::string line; std::getline(csv, line);) ++rows;
  EXPECT_EQ(rows, 601u);
}

TEST(Simulate, TrajectoryStrideThinsRows) {
  auto cfg = parse(std::string(kChain) + "[output]\ntrajectory_stride = 10\n");
  cfg.out_dir = temp_dir("stride").string();
  scenario::run_simulate(cfg);
  std::istringstream csv(slurp(fs::path(cfg.out_dir) / "trajectory.csv"));
  std::size_t lines = 0;
  for (std::string line; std::getline(csv, line);) ++lines;
  EXPECT_EQ(lines, 1u + 61u);
}

TEST(Simulate, AnalysisWritesMeasuresAndSummary) {
  auto cfg = parse(std::string(kChain) + "[analysis]\nwindow = 5\npairs = 0-1, 0-2\n");
  cfg.out_dir = temp_dir("analysis").string();
  scenario::run_simulate(cfg);
  const fs::path dir = cfg.out_dir;
  std::istringstream m(slurp(dir / "measures.csv"));
  std::string header;
  std::getline(m, header);
  EXPECT_EQ(header, "t,pair_i,pair_j,C,I,discord,logneg");
  std::size_t rows = 0;
  for (std::string line; std::getline(m, line);) ++rows;
  EXPECT_EQ(rows, 2u * 601u);
  std::istringstream a(slurp(dir / "aggregate.csv"));
  std::getline(a, header);
  EXPECT_EQ(header, "t,S,avg_discord,avg_I,avg_logneg");
  const std::string summary = slurp(dir / "summary.txt");
  for (const char* key : {"mode Omega kappa Gamma D", "frozen", "t_sync", "S_first_above_0.9", "min_symplectic"})
    EXPECT_NE(summary.find(key), std::string::npos) << key;
}

TEST(Simulate, RerunIsByteIdentical) {
  auto cfg = parse(std::string(kChain) + "[analysis]\nwindow = 5\n");
  std::vector<fs::path> dirs;
  for (int k = 0; k < 2; ++k) {
    cfg.out_dir = temp_dir("rerun" + std::to_string(k)).string();
    scenario::run_simulate(cfg);
    dirs.emplace_back(cfg.out_dir);
  }
  for (const char* f : {"trajectory.csv", "measures.csv", "aggregate.csv", "summary.txt", "network.ini"})
    EXPECT_EQ(slurp(dirs[0] / f), slurp(dirs[1] / f)) << f;
}

TEST(Simulate, RandomNetworkSeedOverride) {
  auto cfg = parse("[network]\nsource = random\nseed = 4\n[time]\nt_end = 1\nstep = 0.5\n");
  scenario::Overrides ov;
  ov.seed = 9;
  scenario::apply_overrides(cfg, ov);
  RandomNetworkParams p;
  p.seed = RngSeed{9};
  EXPECT_EQ(scenario::prepare(cfg).network.lambda(), random_network(p).lambda());
  auto inline_cfg = parse(kChain);
  EXPECT_THROW(scenario::apply_overrides(inline_cfg, ov), Error);
}

TEST(Simulate, Fig2PresetsShowPhaseLockingOnlyUnderCommonBath) {
  double late_c[2];
  int k = 0;
  for (const char* name : {"fig2_sb.ini", "fig2_cb.ini"}) {
    auto cfg = scenario::load_config(fixture::preset(name));
    cfg.t_end = 200.0;
    const auto pr = scenario::prepare(cfg);
    const auto res = scenario::run(cfg, pr);
    const auto& tr = res.trajectory;
    const auto c = windowed_correlation(tr.times, column(tr.mean_q, 0), column(tr.mean_q, 2), pr.window);
    double lo = 1.0;
    for (std::size_t i = 0; i < c.size(); ++i)
      if (c.times[i] >= 120.0) lo = std::min(lo, std::abs(c.values[i]));
    late_c[k++] = lo;
  }
  EXPECT_LT(late_c[0], 0.5);
  EXPECT_GT(late_c[1], 0.9);
}

TEST(Simulate, Fig5BalancedKeepsEntanglementPerturbedLosesIt) {
  double end[2];
  int k = 0;
  for (const char* name : {"fig5_entangle.ini", "fig5_perturbed.ini"}) {
    auto cfg = scenario::load_config(fixture::preset(name));
    cfg.t_end = 300.0;
    cfg.pairs = {{"a", "b"}};
    const auto res = scenario::run(cfg, scenario::prepare(cfg));
    EXPECT_LT(std::abs(res.pair_measures[0].logneg.front()), 1e-12);
    end[k++] = res.pair_measures[0].logneg.back();
  }
  EXPECT_GT(end[0], 0.1);
  EXPECT_LT(end[1], 1e-3);
}

// ------------------------------------------------------------- sweep ----

TEST(Sweep, SinglePointMatchesSimulate) {
  const std::string base = std::string(kChain) + "[analysis]\nwindow = 5\n";
  auto sweep_cfg = parse(base + "[sweep]\nparameter = omega:1\nvalues = 1.1\n");
  sweep_cfg.out_dir = temp_dir("sweep1").string();
  const auto points = scenario::run_sweep(sweep_cfg);
  ASSERT_EQ(points.size(), 1u);
  ASSERT_TRUE(points[0].ok) << points[0].error;

  auto sim_cfg = parse(base);
  sim_cfg.inline_network = with_frequency(*sim_cfg.inline_network, 1, 1.1);
  const auto pr = scenario::prepare(sim_cfg);
  const auto res = scenario::run(sim_cfg, pr);
  ASSERT_EQ(points[0].times, res.trajectory.stored_times());
  for (std::size_t k = 0; k < points[0].times.size(); ++k) {
    const double s = k < res.S->size() ? res.S->values[k] : kNaN;
    if (std::isnan(s)) EXPECT_TRUE(std::isnan(points[0].S[k]));
    else EXPECT_EQ(points[0].S[k], s);
    EXPECT_EQ(points[0].avg_discord[k], res.avg_discord->values[k]);
  }
}

TEST(Sweep, PointsMatchStandaloneRunsBitwise) {
  auto cfg = parse(std::string(kChain) + "[analysis]\nwindow = 5\nmeasures = discord\n" +
                   "[sweep]\nparameter = lambda:0:1\nvalues = 0.2, 0.3, 0.45\n");
  cfg.out_dir = temp_dir("sweep3").string();
  const auto points = scenario::run_sweep(cfg, 3);
  ASSERT_EQ(points.size(), 3u);
  for (const auto& p : points) {
    ASSERT_TRUE(p.ok) << p.error;
    const auto pr = scenario::prepare(cfg, p.value);
    EXPECT_EQ(pr.network.lambda(0, 1), p.value);
    const auto res = scenario::run(cfg, pr);
    for (std::size_t k = 0; k < p.times.size(); ++k) EXPECT_EQ(p.avg_discord[k], res.avg_discord->values[k]);
  }
  std::istringstream map(slurp(fs::path(cfg.out_dir) / "map.csv"));
  std::string header;
  std::getline(map, header);
  EXPECT_EQ(header, "value,t,S,avg_discord");
}

TEST(Sweep, WorkerCountDoesNotChangeOutput) {
  auto cfg = parse(std::string(kChain) + "[analysis]\nwindow = 5\nmeasures = I\n" +
                   "[sweep]\nparameter = omega:2\nrange = 1.6, 2.0, 4\n");
  std::vector<std::string> maps;
  for (std::size_t w : {1u, 4u}) {
    cfg.out_dir = temp_dir("workers" + std::to_string(w)).string();
    scenario::run_sweep(cfg, w);
    maps.push_back(slurp(fs::path(cfg.out_dir) / "map.csv"));
  }
  EXPECT_EQ(maps[0], maps[1]);
}

TEST(Sweep, FailedPointIsRecordedAndSweepContinues) {
  // omega_1 = 0.05 with lambda = 0.4 makes the network unstable.
  auto cfg = parse(std::string(kChain) + "[sweep]\nparameter = omega:1\nvalues = 0.05, 1.0\n");
  cfg.out_dir = temp_dir("sweepfail").string();
  const auto points = scenario::run_sweep(cfg);
  EXPECT_FALSE(points[0].ok);
  EXPECT_FALSE(points[0].error.empty());
  EXPECT_TRUE(points[1].ok);
  const std::string status = slurp(fs::path(cfg.out_dir) / "sweep_status.csv");
  EXPECT_NE(status.find("failed"), std::string::npos);
  EXPECT_NE(status.find("ok"), std::string::npos);
}

// -------------------------------------------------------- tune, spectrum ----

TEST(Tune, TwoNodeNetworkLandsOnTheOtherFrequency) {
  auto cfg = parse(R"(
[network]
source = inline
[nodes]
0 = 1.1
1 = 1.4
[edges]
0 1 = -0.2
[bath]
kind = CB
[tuning]
parameter = omega:1
bracket = 0.9, 1.3
)");
  cfg.out_dir = temp_dir("tune2").string();
  const auto r = scenario::run_tune(cfg);
  EXPECT_NEAR(r.value, 1.1, 1e-9);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "scan.csv"));
  EXPECT_NE(slurp(fs::path(cfg.out_dir) / "tune_summary.txt").find("value 1.1"), std::string::npos);
}

TEST(Tune, Fig3PresetHasOneFrozenModeOverAllNodes) {
  auto cfg = scenario::load_config(fixture::preset("fig3_tuned.ini"));
  cfg.out_dir = temp_dir("tune3").string();
  const auto r = scenario::run_tune(cfg);
  EXPECT_GE(r.value, cfg.tuning->lo);
  EXPECT_LE(r.value, cfg.tuning->hi);
  const auto d = analyze(r.network, cfg.bath);
  const auto rep = frozen_mode_report(d, cfg.bath);
  ASSERT_EQ(rep.frozen.size(), 1u);
  EXPECT_LT(std::abs(d.kappa(static_cast<Eigen::Index>(rep.frozen.front()))), 1e-8);
  EXPECT_EQ(rep.participants[rep.frozen.front()].size(), 10u);
  EXPECT_TRUE(rep.global_sync_cb);
  std::size_t thermal = 0;
  for (Eigen::Index m = 0; m < 10; ++m) thermal += d.Gamma(m) > 0.0 && std::abs(d.kappa(m)) > 1e-8;
  EXPECT_EQ(thermal, 9u);
}

TEST(Spectrum, Fig2CommonBathChainMatchesOracle) {
  auto cfg = scenario::load_config(fixture::preset("fig2_cb.ini"));
  cfg.out_dir = temp_dir("spectrum").string();
  const auto d = scenario::run_spectrum(cfg);
  const auto [w2, F] = oracle::jacobi_eigen(fixture::chain3().hamiltonian());
  std::vector<std::pair<double, double>> expect;
  for (Eigen::Index m = 0; m < 3; ++m) expect.emplace_back(std::sqrt(w2(m)), std::abs(F.col(m).sum()));
  std::sort(expect.begin(), expect.end());
  std::istringstream csv(slurp(fs::path(cfg.out_dir) / "modes.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "mode,Omega,kappa,Gamma,D");
  std::size_t rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 5u);
    EXPECT_NEAR(v[1], expect[rows].first, 1e-10);  // CSV carries 12 significant digits
    EXPECT_NEAR(std::abs(v[2]), expect[rows].second, 1e-10);
    EXPECT_NEAR(v[3], 0.07 * v[2] * v[2], 1e-10);
    ++rows;
  }
  EXPECT_EQ(rows, 3u);
  EXPECT_EQ(d.size(), 3u);
  EXPECT_TRUE(fs::exists(fs::path(cfg.out_dir) / "F.csv"));
}

// -------------------------------------------------------------- binary ----

TEST(Binary, ExitCodes) {
  const auto dir = temp_dir("binary");
  {
    std::ofstream(dir / "ok.ini") << kChain;
    std::ofstream(dir / "bad.ini") << "[network]\nsource = inline\n[nodes]\n0 = 1\n[time]\nstep = -1\n";
    std::ofstream(dir / "nozero.ini") << std::string(kChain) << "[tuning]\nparameter = omega:1\nbracket = 3, 4\n";
  }
  const std::string out = " --out " + (dir / "out").string();
  EXPECT_EQ(run_cli("simulate --config " + (dir / "ok.ini").string() + out), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "trajectory.csv"));
  EXPECT_EQ(run_cli("spectrum --config " + (dir / "ok.ini").string() + out), 0);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "bad.ini").string() + out), 2);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "missing.ini").string() + out), 2);
  EXPECT_EQ(run_cli("tune --config " + (dir / "nozero.ini").string() + out), 3);
  EXPECT_EQ(run_cli("sweep --config " + (dir / "ok.ini").string() + out), 2);
  EXPECT_EQ(run_cli("simulate"), 2);
  EXPECT_EQ(run_cli("launch --config " + (dir / "ok.ini").string()), 2);
  EXPECT_EQ(run_cli("simulate --config " + (dir / "ok.ini").string() + " --workers 0"), 2);
}

TEST(Binary, ErrorLineIsMachineReadable) {
  const auto dir = temp_dir("binary_err");
  const std::string cmd = std::string(OSCNET_CLI) + " simulate --config " + (dir / "missing.ini").string() + " 2> " +
                          (dir / "err.txt").string();
  std::system(cmd.c_str());
  const std::string err = slurp(dir / "err.txt");
  EXPECT_EQ(err.rfind("oscnet: error: code=IoError message=", 0), 0u) << err;
}

}  // namespace
