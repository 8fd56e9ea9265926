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

// oscnet simulate|sweep|tune|spectrum --config <path> [--out <dir>] [--workers <n>] [--seed <u64>]

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "oscnet/scenario.hpp"

namespace {

void report(std::string_view code, std::string_view message) {
  std::cerr << "oscnet: error: code=" << code << " message=" << message << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian dynamics of dissipative oscillator networks"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  std::size_t workers = 1;
  std::uint64_t seed = 0;

  for (const char* name : {"simulate", "sweep", "tune", "spectrum"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "scenario file")->required();
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--workers", workers, "sweep worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed, "network seed (overrides [network] seed)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const auto* sub = app.get_subcommands().front();
  try {
    auto cfg = oscnet::scenario::load_config(config);
    oscnet::scenario::Overrides ov;
    if (sub->count("--out")) ov.out_dir = out;
    if (sub->count("--seed")) ov.seed = seed;
    ov.workers = workers;
    oscnet::scenario::apply_overrides(cfg, ov);

    if (command == "simulate") {
      oscnet::scenario::run_simulate(cfg);
    } else if (command == "sweep") {
      const auto points = oscnet::scenario::run_sweep(cfg, ov.workers);
      for (const auto& p : points)
        if (!p.ok) std::cerr << "oscnet: sweep point " << p.value << " failed: " << p.error << "\n";
    } else if (command == "tune") {
      const auto r = oscnet::scenario::run_tune(cfg);
      std::cout << r.parameter << " = " << oscnet::ini::format_double(r.value) << " residual "
                << oscnet::csv::number(r.residual) << "\n";
    } else {
      oscnet::scenario::run_spectrum(cfg);
    }
    std::cout << "oscnet: " << command << " done, output in " << cfg.out_dir << "\n";
  } catch (const oscnet::Error& e) {
    report(oscnet::to_string(e.code()), e.what());
    return oscnet::scenario::exit_code(e);
  } catch (const std::exception& e) {
    report("Internal", e.what());
    return 3;
  }
  return 0;
}
