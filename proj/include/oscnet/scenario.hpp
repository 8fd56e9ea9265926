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

// Scenario configs and the simulate / sweep / tune / spectrum pipelines behind
// the command-line tool. The config grammar is documented in README.md.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "oscnet/csv.hpp"
#include "oscnet/dynamics.hpp"
#include "oscnet/error.hpp"
#include "oscnet/ini.hpp"
#include "oscnet/measures.hpp"
#include "oscnet/network.hpp"
#include "oscnet/spectral.hpp"
#include "oscnet/tuning.hpp"

namespace oscnet::scenario {

enum class NetworkSource { Inline, File, Random };

struct MotifConfig {
  std::size_t a = 0, b = 2, c = 1;
  double omega_c = 1.51;
  double lambda_ac = -0.09;
  double lambda_bc = -0.11;
};

struct AttachConfig {
  double omega_a = 1.0, omega_b = 1.0;
  Links links_a, links_b;
  bool balance = false;
};

struct NodeOverride {
  std::string node;   ///< index or alias a / b / c
  std::string field;  ///< mean_q | mean_p | squeeze_r | squeeze_angle | thermal_n
  double value = 0.0;
};

struct TuningConfig {
  std::string parameter;  ///< "omega:<v>" or "lambda:<v>:<w>"
  double lo = 0.0, hi = 0.0;
  double tol = 1e-10;
  std::size_t samples = 41;
  bool apply = true;    ///< simulate at the tuned value
  double detune = 0.0;  ///< simulate at value * (1 + detune)
};

struct SweepConfig {
  std::string parameter;
  std::vector<double> values;
  bool relative_to_tuned = false;  ///< values are offsets d, parameter = tuned * (1 + d)
};

struct ScenarioConfig {
  std::filesystem::path base_dir;  ///< for relative paths; not serialised

  NetworkSource source = NetworkSource::Random;
  std::optional<NetworkSpec> inline_network;
  std::string network_path;
  RandomNetworkParams random;

  std::optional<MotifConfig> motif;
  std::optional<AttachConfig> attach;

  BathConfig bath;

  bool gibbs_covariance = false;
  NodePreparation defaults;
  std::vector<NodeOverride> overrides;

  double t_end = 100.0;
  double step = 0.1;
  std::size_t decimation = 1;
  Integrator integrator = Integrator::Exact;
  double max_step = 0.0;

  bool analysis = false;
  std::optional<double> window;
  std::vector<std::pair<std::string, std::string>> pairs;  ///< empty = all pairs
  std::vector<std::string> subset;                         ///< empty = all nodes
  bool sync = true;
  MeasureSelection measures;
  std::optional<double> filter_window;

  std::optional<TuningConfig> tuning;
  std::optional<SweepConfig> sweep;

  std::string out_dir = "out";
  std::size_t trajectory_stride = 1;
};

// ------------------------------------------------------------ parsing ----

namespace detail {

class Reader {
 public:
  Reader(const ini::Section& s, std::string origin) : s_(s), origin_(std::move(origin)) {}

  [[noreturn]] void fail(const ini::Entry* e, const std::string& msg) const {
    throw Error(ErrorCode::ConfigError,
                origin_ + ":" + std::to_string(e ? e->line : s_.line) + ": [" + s_.name + "] " + msg);
  }
  const ini::Entry* find(std::string_view key) const { return s_.find(key); }
  bool has(std::string_view key) const { return s_.find(key) != nullptr; }

  std::string str(std::string_view key, std::string fallback) const {
    const auto* e = find(key);
    return e ? e->value : fallback;
  }
  double num(std::string_view key, double fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    auto v = ini::to_double(e->value);
    if (!v || !std::isfinite(*v)) fail(e, "'" + std::string(key) + "' must be a finite number");
    return *v;
  }
  double num_required(std::string_view key) const {
    if (!has(key)) fail(nullptr, "missing '" + std::string(key) + "'");
    return num(key, 0.0);
  }
  std::uint64_t uint(std::string_view key, std::uint64_t fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    auto v = ini::to_uint(e->value);
    if (!v) fail(e, "'" + std::string(key) + "' must be a non-negative integer");
    return *v;
  }
  bool flag(std::string_view key, bool fallback) const {
    const auto* e = find(key);
    if (!e) return fallback;
    if (e->value == "true" || e->value == "yes" || e->value == "1") return true;
    if (e->value == "false" || e->value == "no" || e->value == "0") return false;
    fail(e, "'" + std::string(key) + "' must be true or false");
  }
  std::vector<double> numbers(std::string_view key) const {
    std::vector<double> out;
    const auto* e = find(key);
    if (!e) return out;
    for (const auto& p : ini::split(e->value, ',')) {
      auto v = ini::to_double(p);
      if (!v) fail(e, "bad number '" + p + "' in '" + std::string(key) + "'");
      out.push_back(*v);
    }
    return out;
  }
  Links links(std::string_view key) const {
    Links out;
    const auto* e = find(key);
    if (!e) return out;
    for (const auto& p : ini::split(e->value, ',')) {
      auto parts = ini::split(p, ':');
      std::optional<std::uint64_t> j;
      std::optional<double> w;
      if (parts.size() == 2) {
        j = ini::to_uint(parts[0]);
        w = ini::to_double(parts[1]);
      }
      if (!j || !w) fail(e, "link '" + p + "' must be '<node>:<weight>'");
      out.emplace_back(static_cast<std::size_t>(*j), *w);
    }
    return out;
  }
  void only(std::initializer_list<std::string_view> keys, bool allow_dotted = false) const {
    for (const auto& e : s_.entries) {
      bool ok = std::find(keys.begin(), keys.end(), std::string_view(e.key)) != keys.end();
      if (!ok && allow_dotted && e.key.find('.') != std::string::npos) ok = true;
      if (!ok) fail(&e, "unknown key '" + e.key + "'");
    }
  }

 private:
  const ini::Section& s_;
  std::string origin_;
};

inline const ini::Section& section_or_empty(const ini::Document& doc, std::string_view name) {
  static const ini::Section empty{};
  const auto* s = doc.find(name);
  return s ? *s : empty;
}

}  // namespace detail

inline ScenarioConfig parse_config(const ini::Document& doc, const std::string& origin,
                                   const std::filesystem::path& base_dir = {}) {
  static const std::vector<std::string_view> known = {"network", "nodes", "edges",  "motif",  "attach", "bath",
                                                      "initial", "time",  "analysis", "tuning", "sweep", "output"};
  for (const auto& s : doc.sections)
    if (std::find(known.begin(), known.end(), std::string_view(s.name)) == known.end())
      throw Error(ErrorCode::ConfigError, origin + ":" + std::to_string(s.line) + ": unknown section [" + s.name + "]");

  ScenarioConfig cfg;
  cfg.base_dir = base_dir;
  {
    const auto* sec = doc.find("network");
    if (!sec) throw Error(ErrorCode::ConfigError, origin + ": missing [network] section");
    detail::Reader r(*sec, origin);
    r.only({"source", "path", "n", "p", "freq_low", "freq_high", "coupling_mean", "coupling_sd", "seed", "max_retries"});
    const std::string src = r.str("source", "random");
    if (src == "inline") {
      cfg.source = NetworkSource::Inline;
      cfg.inline_network = network_from_ini(doc, origin);
    } else if (src == "file") {
      cfg.source = NetworkSource::File;
      cfg.network_path = r.str("path", "");
      if (cfg.network_path.empty()) r.fail(r.find("source"), "source = file needs 'path'");
    } else if (src == "random") {
      cfg.source = NetworkSource::Random;
      auto& p = cfg.random;
      p.n = static_cast<std::size_t>(r.uint("n", p.n));
      p.p = r.num("p", p.p);
      p.freq_low = r.num("freq_low", p.freq_low);
      p.freq_high = r.num("freq_high", p.freq_high);
      p.coupling_mean = r.num("coupling_mean", p.coupling_mean);
      p.coupling_sd = r.num("coupling_sd", p.coupling_sd);
      p.seed = RngSeed{r.uint("seed", 0)};
      p.max_retries = static_cast<std::size_t>(r.uint("max_retries", p.max_retries));
    } else {
      r.fail(r.find("source"), "source must be inline, file or random");
    }
    if (src != "inline" && (doc.find("nodes") || doc.find("edges")))
      throw Error(ErrorCode::ConfigError, origin + ": [nodes]/[edges] only allowed with source = inline");
  }
  if (const auto* sec = doc.find("motif")) {
    detail::Reader r(*sec, origin);
    r.only({"a", "b", "c", "omega_c", "lambda_ac", "lambda_bc"});
    MotifConfig m;
    m.a = static_cast<std::size_t>(r.uint("a", m.a));
    m.b = static_cast<std::size_t>(r.uint("b", m.b));
    m.c = static_cast<std::size_t>(r.uint("c", m.c));
    m.omega_c = r.num("omega_c", m.omega_c);
    m.lambda_ac = r.num("lambda_ac", m.lambda_ac);
    m.lambda_bc = r.num("lambda_bc", m.lambda_bc);
    cfg.motif = m;
  }
  if (const auto* sec = doc.find("attach")) {
    detail::Reader r(*sec, origin);
    r.only({"omega_a", "omega_b", "links_a", "links_b", "balance"});
    AttachConfig a;
    a.omega_a = r.num("omega_a", a.omega_a);
    a.omega_b = r.num("omega_b", a.omega_b);
    a.links_a = r.links("links_a");
    a.links_b = r.links("links_b");
    a.balance = r.flag("balance", false);
    cfg.attach = a;
  }
  if (cfg.motif && cfg.attach) throw Error(ErrorCode::ConfigError, origin + ": [motif] and [attach] are exclusive");
  {
    detail::Reader r(detail::section_or_empty(doc, "bath"), origin);
    r.only({"kind", "local_node", "gamma", "temperature", "cutoff"});
    const std::string kind = r.str("kind", "CB");
    if (kind == "SB") cfg.bath.kind = BathKind::Separate;
    else if (kind == "CB") cfg.bath.kind = BathKind::Common;
    else if (kind == "LB") cfg.bath.kind = BathKind::Local;
    else r.fail(r.find("kind"), "kind must be SB, CB or LB");
    cfg.bath.local_node = static_cast<std::size_t>(r.uint("local_node", 0));
    cfg.bath.gamma = r.num("gamma", cfg.bath.gamma);
    cfg.bath.temperature = r.num("temperature", cfg.bath.temperature);
    cfg.bath.cutoff = r.num("cutoff", cfg.bath.cutoff);
    try {
      cfg.bath.validate();
    } catch (const Error& e) {
      r.fail(nullptr, e.what());
    }
  }
  {
    const auto& sec = detail::section_or_empty(doc, "initial");
    detail::Reader r(sec, origin);
    r.only({"covariance", "mean_q", "mean_p", "squeeze_r", "squeeze_angle", "thermal_n"}, true);
    const std::string cov = r.str("covariance", "product");
    if (cov == "gibbs") cfg.gibbs_covariance = true;
    else if (cov != "product") r.fail(r.find("covariance"), "covariance must be product or gibbs");
    cfg.defaults.mean_q = r.num("mean_q", 0.0);
    cfg.defaults.mean_p = r.num("mean_p", 0.0);
    cfg.defaults.squeeze_r = r.num("squeeze_r", 0.0);
    cfg.defaults.squeeze_angle = r.num("squeeze_angle", 0.0);
    cfg.defaults.thermal_n = r.num("thermal_n", 0.0);
    if (cfg.defaults.thermal_n < 0.0) r.fail(r.find("thermal_n"), "thermal_n must be >= 0");
    for (const auto& e : sec.entries) {
      const auto dot = e.key.find('.');
      if (dot == std::string::npos) continue;
      NodeOverride o{e.key.substr(dot + 1), e.key.substr(0, dot), 0.0};
      static const std::vector<std::string> fields = {"mean_q", "mean_p", "squeeze_r", "squeeze_angle", "thermal_n"};
      if (std::find(fields.begin(), fields.end(), o.field) == fields.end()) r.fail(&e, "unknown field '" + o.field + "'");
      auto v = ini::to_double(e.value);
      if (!v || !std::isfinite(*v)) r.fail(&e, "value must be a finite number");
      if (o.field == "thermal_n" && *v < 0.0) r.fail(&e, "thermal_n must be >= 0");
      o.value = *v;
      cfg.overrides.push_back(o);
    }
  }
  {
    detail::Reader r(detail::section_or_empty(doc, "time"), origin);
    r.only({"t_end", "step", "decimation", "integrator", "max_step"});
    cfg.t_end = r.num("t_end", cfg.t_end);
    cfg.step = r.num("step", cfg.step);
    cfg.decimation = static_cast<std::size_t>(r.uint("decimation", 1));
    cfg.max_step = r.num("max_step", 0.0);
    const std::string integ = r.str("integrator", "exact");
    if (integ == "exact") cfg.integrator = Integrator::Exact;
    else if (integ == "rk4") cfg.integrator = Integrator::Rk4;
    else r.fail(r.find("integrator"), "integrator must be exact or rk4");
    if (!(cfg.t_end > 0.0)) r.fail(r.find("t_end"), "t_end must be > 0");
    if (!(cfg.step > 0.0) || cfg.step > cfg.t_end) r.fail(r.find("step"), "step must lie in (0, t_end]");
    if (cfg.decimation == 0) r.fail(r.find("decimation"), "decimation must be >= 1");
    if (cfg.max_step < 0.0) r.fail(r.find("max_step"), "max_step must be >= 0");
  }
  if (const auto* sec = doc.find("analysis")) {
    detail::Reader r(*sec, origin);
    r.only({"window", "pairs", "subset", "sync", "measures", "side", "filter_window"});
    cfg.analysis = true;
    const std::string w = r.str("window", "auto");
    if (w != "auto") cfg.window = r.num("window", 0.0);
    if (cfg.window && !(*cfg.window > 0.0)) r.fail(r.find("window"), "window must be > 0");
    const std::string pairs = r.str("pairs", "all");
    if (pairs != "all")
      for (const auto& p : ini::split(pairs, ',')) {
        auto ends = ini::split(p, '-');
        if (ends.size() != 2) r.fail(r.find("pairs"), "pair '" + p + "' must be '<i>-<j>'");
        cfg.pairs.emplace_back(ends[0], ends[1]);
      }
    const std::string subset = r.str("subset", "all");
    if (subset != "all") cfg.subset = ini::split(subset, ',');
    cfg.sync = r.flag("sync", true);
    const std::string m = r.str("measures", "I, discord, logneg");
    cfg.measures.mutual_information = cfg.measures.discord = cfg.measures.log_negativity = false;
    if (m != "none")
      for (const auto& x : ini::split(m, ',')) {
        if (x == "I") cfg.measures.mutual_information = true;
        else if (x == "discord") cfg.measures.discord = true;
        else if (x == "logneg") cfg.measures.log_negativity = true;
        else r.fail(r.find("measures"), "unknown measure '" + x + "'");
      }
    const std::string side = r.str("side", "B");
    if (side == "A") cfg.measures.side = MeasuredSide::A;
    else if (side != "B") r.fail(r.find("side"), "side must be A or B");
    const std::string fw = r.str("filter_window", "window");
    if (fw != "window") cfg.filter_window = r.num("filter_window", 0.0);
    if (cfg.filter_window && *cfg.filter_window < 0.0) r.fail(r.find("filter_window"), "filter_window must be >= 0");
  }
  if (const auto* sec = doc.find("tuning")) {
    detail::Reader r(*sec, origin);
    r.only({"parameter", "bracket", "tol", "samples", "apply", "detune"});
    TuningConfig t;
    t.parameter = r.str("parameter", "");
    if (t.parameter.empty()) r.fail(nullptr, "missing 'parameter'");
    const auto br = r.numbers("bracket");
    if (br.size() != 2 || !(br[1] > br[0])) r.fail(r.find("bracket"), "bracket must be '<lo>, <hi>' with lo < hi");
    t.lo = br[0];
    t.hi = br[1];
    t.tol = r.num("tol", t.tol);
    t.samples = static_cast<std::size_t>(r.uint("samples", t.samples));
    t.apply = r.flag("apply", true);
    t.detune = r.num("detune", 0.0);
    if (!(t.tol > 0.0)) r.fail(r.find("tol"), "tol must be > 0");
    if (t.samples < 2) r.fail(r.find("samples"), "samples must be >= 2");
    cfg.tuning = t;
  }
  if (const auto* sec = doc.find("sweep")) {
    detail::Reader r(*sec, origin);
    r.only({"parameter", "values", "range", "relative_to_tuned"});
    SweepConfig s;
    s.parameter = r.str("parameter", "");
    if (s.parameter.empty()) r.fail(nullptr, "missing 'parameter'");
    s.values = r.numbers("values");
    if (r.has("range")) {
      const auto rg = r.numbers("range");
      if (rg.size() != 3 || rg[2] < 1 || rg[2] != std::floor(rg[2]))
        r.fail(r.find("range"), "range must be '<from>, <to>, <count>'");
      for (double v : linspace(rg[0], rg[1], static_cast<std::size_t>(rg[2]))) s.values.push_back(v);
    }
    if (s.values.empty()) r.fail(nullptr, "sweep needs 'values' or 'range'");
    s.relative_to_tuned = r.flag("relative_to_tuned", false);
    if (s.relative_to_tuned && !cfg.tuning) r.fail(nullptr, "relative_to_tuned needs a [tuning] section");
    cfg.sweep = s;
  }
  {
    detail::Reader r(detail::section_or_empty(doc, "output"), origin);
    r.only({"dir", "trajectory_stride"});
    cfg.out_dir = r.str("dir", cfg.out_dir);
    cfg.trajectory_stride = static_cast<std::size_t>(r.uint("trajectory_stride", 1));
    if (cfg.trajectory_stride == 0) r.fail(r.find("trajectory_stride"), "trajectory_stride must be >= 1");
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string& path) {
  const ini::Document doc = ini::parse_file(path);
  return parse_config(doc, path, std::filesystem::path(path).parent_path());
}

/// Canonical text form; parse_config(write_config(c)) reproduces c.
inline std::string write_config(const ScenarioConfig& cfg) {
  using ini::format_double;
  ini::Document doc;
  auto& net = doc.get_or_add("network");
  switch (cfg.source) {
    case NetworkSource::Inline: net.set("source", "inline"); break;
    case NetworkSource::File:
      net.set("source", "file");
      net.set("path", cfg.network_path);
      break;
    case NetworkSource::Random: {
      const auto& p = cfg.random;
      net.set("source", "random");
      net.set("n", std::to_string(p.n));
      net.set("p", format_double(p.p));
      net.set("freq_low", format_double(p.freq_low));
      net.set("freq_high", format_double(p.freq_high));
      net.set("coupling_mean", format_double(p.coupling_mean));
      net.set("coupling_sd", format_double(p.coupling_sd));
      net.set("seed", std::to_string(p.seed.value));
      net.set("max_retries", std::to_string(p.max_retries));
      break;
    }
  }
  if (cfg.source == NetworkSource::Inline && cfg.inline_network) {
    const ini::Document nd = ini::parse(save_network(*cfg.inline_network));
    for (const auto& s : nd.sections) doc.sections.push_back(s);
  }
  auto links_text = [](const Links& links) {
    std::string s;
    for (const auto& [j, w] : links) s += (s.empty() ? "" : ", ") + std::to_string(j) + ":" + format_double(w);
    return s;
  };
  if (cfg.motif) {
    auto& s = doc.get_or_add("motif");
    s.set("a", std::to_string(cfg.motif->a));
    s.set("b", std::to_string(cfg.motif->b));
    s.set("c", std::to_string(cfg.motif->c));
    s.set("omega_c", format_double(cfg.motif->omega_c));
    s.set("lambda_ac", format_double(cfg.motif->lambda_ac));
    s.set("lambda_bc", format_double(cfg.motif->lambda_bc));
  }
  if (cfg.attach) {
    auto& s = doc.get_or_add("attach");
    s.set("omega_a", format_double(cfg.attach->omega_a));
    s.set("omega_b", format_double(cfg.attach->omega_b));
    if (!cfg.attach->links_a.empty()) s.set("links_a", links_text(cfg.attach->links_a));
    if (!cfg.attach->links_b.empty()) s.set("links_b", links_text(cfg.attach->links_b));
    s.set("balance", cfg.attach->balance ? "true" : "false");
  }
  {
    auto& s = doc.get_or_add("bath");
    s.set("kind", std::string(to_string(cfg.bath.kind)));
    if (cfg.bath.kind == BathKind::Local) s.set("local_node", std::to_string(cfg.bath.local_node));
    s.set("gamma", format_double(cfg.bath.gamma));
    s.set("temperature", format_double(cfg.bath.temperature));
    s.set("cutoff", format_double(cfg.bath.cutoff));
  }
  {
    auto& s = doc.get_or_add("initial");
    s.set("covariance", cfg.gibbs_covariance ? "gibbs" : "product");
    s.set("mean_q", format_double(cfg.defaults.mean_q));
    s.set("mean_p", format_double(cfg.defaults.mean_p));
    s.set("squeeze_r", format_double(cfg.defaults.squeeze_r));
    s.set("squeeze_angle", format_double(cfg.defaults.squeeze_angle));
    s.set("thermal_n", format_double(cfg.defaults.thermal_n));
    for (const auto& o : cfg.overrides) s.entries.push_back({o.field + "." + o.node, format_double(o.value), 0});
  }
  {
    auto& s = doc.get_or_add("time");
    s.set("t_end", format_double(cfg.t_end));
    s.set("step", format_double(cfg.step));
    s.set("decimation", std::to_string(cfg.decimation));
    s.set("integrator", cfg.integrator == Integrator::Exact ? "exact" : "rk4");
    s.set("max_step", format_double(cfg.max_step));
  }
  if (cfg.analysis) {
    auto& s = doc.get_or_add("analysis");
    s.set("window", cfg.window ? format_double(*cfg.window) : "auto");
    std::string pairs;
    for (const auto& [i, j] : cfg.pairs) pairs += (pairs.empty() ? "" : ", ") + i + "-" + j;
    s.set("pairs", pairs.empty() ? "all" : pairs);
    std::string subset;
    for (const auto& x : cfg.subset) subset += (subset.empty() ? "" : ", ") + x;
    s.set("subset", subset.empty() ? "all" : subset);
    s.set("sync", cfg.sync ? "true" : "false");
    std::string m;
    if (cfg.measures.mutual_information) m += "I";
    if (cfg.measures.discord) m += std::string(m.empty() ? "" : ", ") + "discord";
    if (cfg.measures.log_negativity) m += std::string(m.empty() ? "" : ", ") + "logneg";
    s.set("measures", m.empty() ? "none" : m);
    s.set("side", cfg.measures.side == MeasuredSide::A ? "A" : "B");
    s.set("filter_window", cfg.filter_window ? format_double(*cfg.filter_window) : "window");
  }
  if (cfg.tuning) {
    auto& s = doc.get_or_add("tuning");
    s.set("parameter", cfg.tuning->parameter);
    s.set("bracket", format_double(cfg.tuning->lo) + ", " + format_double(cfg.tuning->hi));
    s.set("tol", format_double(cfg.tuning->tol));
    s.set("samples", std::to_string(cfg.tuning->samples));
    s.set("apply", cfg.tuning->apply ? "true" : "false");
    s.set("detune", format_double(cfg.tuning->detune));
  }
  if (cfg.sweep) {
    auto& s = doc.get_or_add("sweep");
    s.set("parameter", cfg.sweep->parameter);
    std::string v;
    for (double x : cfg.sweep->values) v += (v.empty() ? "" : ", ") + format_double(x);
    s.set("values", v);
    s.set("relative_to_tuned", cfg.sweep->relative_to_tuned ? "true" : "false");
  }
  {
    auto& s = doc.get_or_add("output");
    s.set("dir", cfg.out_dir);
    s.set("trajectory_stride", std::to_string(cfg.trajectory_stride));
  }
  return ini::write(doc, "oscnet scenario");
}

// ---------------------------------------------------------- preparing ----

struct Prepared {
  NetworkSpec network;
  BathConfig bath;
  std::map<std::string, std::size_t> aliases;
  std::optional<TuneResult> tune;
  std::optional<double> tuned_value;  ///< zero of kappa_sigma before detuning
  ModeDecomposition decomp;
  GaussianState initial;
  std::vector<double> grid;
  EvolveOptions options;
  std::vector<std::size_t> subset;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  double window = 0.0;
  double filter_window = 0.0;
};

namespace detail {

inline std::size_t resolve_node(const std::string& ref, const std::map<std::string, std::size_t>& aliases,
                                std::size_t n, const std::string& what) {
  std::size_t idx = 0;
  if (auto it = aliases.find(ref); it != aliases.end()) {
    idx = it->second;
  } else if (auto v = ini::to_uint(ref)) {
    idx = static_cast<std::size_t>(*v);
  } else {
    throw Error(ErrorCode::ConfigError, what + ": unknown node '" + ref + "'");
  }
  if (idx >= n)
    throw Error(ErrorCode::ConfigError, what + ": node " + ref + " out of range (network has " + std::to_string(n) + ")");
  return idx;
}

inline TuneParameter resolve_parameter(const std::string& text, const std::map<std::string, std::size_t>& aliases,
                                       std::size_t n) {
  const auto parts = ini::split(text, ':');
  if (parts.size() == 2 && parts[0] == "omega")
    return TuneParameter::frequency(resolve_node(parts[1], aliases, n, "parameter"));
  if (parts.size() == 3 && parts[0] == "lambda") {
    const auto v = resolve_node(parts[1], aliases, n, "parameter");
    const auto w = resolve_node(parts[2], aliases, n, "parameter");
    if (v == w) throw Error(ErrorCode::ConfigError, "parameter: coupling needs two distinct nodes");
    return TuneParameter::coupling(v, w);
  }
  throw Error(ErrorCode::ConfigError, "parameter must be 'omega:<v>' or 'lambda:<v>:<w>', got '" + text + "'");
}

}  // namespace detail

/// The network after motif / attach construction, plus node aliases.
inline std::pair<NetworkSpec, std::map<std::string, std::size_t>> build_base(const ScenarioConfig& cfg) {
  std::map<std::string, std::size_t> aliases;
  NetworkSpec net = [&] {
    switch (cfg.source) {
      case NetworkSource::Inline:
        if (!cfg.inline_network) throw Error(ErrorCode::ConfigError, "inline network missing");
        return *cfg.inline_network;
      case NetworkSource::File: {
        std::filesystem::path p(cfg.network_path);
        if (p.is_relative()) p = cfg.base_dir / p;
        return load_network_file(p.string());
      }
      case NetworkSource::Random: return random_network(cfg.random);
    }
    throw Error(ErrorCode::ConfigError, "bad network source");
  }();
  if (cfg.motif) {
    const auto& m = *cfg.motif;
    if (std::max({m.a, m.b, m.c}) >= net.size())
      throw Error(ErrorCode::ConfigError, "motif nodes out of range (network has " + std::to_string(net.size()) + ")");
    net = tune_motif(net, m.a, m.b, m.c, m.omega_c, m.lambda_ac, m.lambda_bc).network;
    aliases = {{"a", m.a}, {"b", m.b}, {"c", m.c}};
  }
  if (cfg.attach) {
    const auto& a = *cfg.attach;
    net = attach_pair(net, a.omega_a, a.omega_b, a.links_a, a.links_b);
    aliases = {{"a", net.size() - 2}, {"b", net.size() - 1}};
    if (a.balance) net = balance_pair_couplings(net, net.size() - 2, net.size() - 1).network;
  }
  return {net, aliases};
}

/// Builds everything needed for a run. `sweep_value` overrides the sweep parameter.
inline Prepared prepare(const ScenarioConfig& cfg, std::optional<double> sweep_value = std::nullopt) {
  auto [net, aliases] = build_base(cfg);
  const std::size_t n = net.size();
  if (cfg.bath.kind == BathKind::Local && cfg.bath.local_node >= n)
    throw Error(ErrorCode::ConfigError, "bath local_node out of range");

  std::optional<TuneResult> tune;
  std::optional<double> tuned_value;
  if (cfg.tuning) {
    const TuneParameter param = detail::resolve_parameter(cfg.tuning->parameter, aliases, n);
    tune = find_sync_frequency(net, param, {cfg.tuning->lo, cfg.tuning->hi}, cfg.bath, cfg.tuning->tol,
                               cfg.tuning->samples);
    tuned_value = tune->value;
    if (cfg.tuning->apply) net = param.apply(net, tune->value * (1.0 + cfg.tuning->detune));
  }
  if (cfg.sweep && sweep_value) {
    const TuneParameter param = detail::resolve_parameter(cfg.sweep->parameter, aliases, n);
    double v = *sweep_value;
    if (cfg.sweep->relative_to_tuned) {
      if (!tuned_value) throw Error(ErrorCode::ConfigError, "relative_to_tuned needs [tuning]");
      v = *tuned_value * (1.0 + v);
    }
    net = param.apply(net, v);
  }

  const ModeDecomposition decomp = analyze(net, cfg.bath);
  const double wmax = decomp.Omega.maxCoeff();

  std::vector<NodePreparation> prep(n, cfg.defaults);
  for (const auto& o : cfg.overrides) {
    auto& p = prep[detail::resolve_node(o.node, aliases, n, "[initial] " + o.field)];
    if (o.field == "mean_q") p.mean_q = o.value;
    else if (o.field == "mean_p") p.mean_p = o.value;
    else if (o.field == "squeeze_r") p.squeeze_r = o.value;
    else if (o.field == "squeeze_angle") p.squeeze_angle = o.value;
    else p.thermal_n = o.value;
  }
  GaussianState initial = cfg.gibbs_covariance ? prepare_on(thermal_state(decomp, cfg.bath.temperature), prep)
                                               : initial_state(net, prep);

  if (cfg.integrator == Integrator::Rk4 && cfg.max_step > 0.0 && cfg.max_step * wmax > 0.5)
    throw Error(ErrorCode::ConfigError, "max_step * max Omega = " + csv::number(cfg.max_step * wmax) +
                                            " exceeds the RK4 accuracy bound 0.5");

  Prepared pr{net, cfg.bath, aliases, tune, tuned_value, decomp, initial, uniform_grid(cfg.t_end, cfg.step), {}, {}, {},
              0.0, 0.0};
  pr.options.integrator = cfg.integrator;
  pr.options.max_step = cfg.max_step;
  pr.options.state_stride = cfg.decimation;

  if (cfg.analysis) {
    if (cfg.subset.empty()) pr.subset = all_nodes(n);
    for (const auto& s : cfg.subset) pr.subset.push_back(detail::resolve_node(s, aliases, n, "[analysis] subset"));
    if (cfg.pairs.empty()) pr.pairs = all_pairs(n);
    for (const auto& [i, j] : cfg.pairs) {
      const auto a = detail::resolve_node(i, aliases, n, "[analysis] pairs");
      const auto b = detail::resolve_node(j, aliases, n, "[analysis] pairs");
      if (a == b) throw Error(ErrorCode::ConfigError, "[analysis] pairs: pair with itself");
      pr.pairs.emplace_back(a, b);
    }
    pr.window = cfg.window ? *cfg.window
                           : 10.0 * 2.0 * std::numbers::pi / decomp.Omega(static_cast<Eigen::Index>(*decomp.sigma));
    pr.filter_window = cfg.filter_window ? *cfg.filter_window : pr.window;
    if (cfg.sync) {
      if (pr.window > cfg.t_end)
        throw Error(ErrorCode::ConfigError, "analysis window " + csv::number(pr.window) + " exceeds t_end");
      if (pr.window / cfg.step < 9.0)
        throw Error(ErrorCode::ConfigError, "analysis window must span at least 10 samples");
    }
  }
  return pr;
}

// ------------------------------------------------------------ running ----

struct RunResult {
  Trajectory trajectory;
  std::optional<SyncSeries> S;
  std::vector<SyncSeries> pair_c;  ///< C of <q^2> per pair, at stored-state times
  std::vector<PairMeasures> pair_measures;
  std::optional<AveragedSeries> avg_I, avg_discord, avg_logneg;
  FrozenModeReport report;
  std::optional<SyncTimeEstimate> sync_times;
  std::string sync_times_note;
};

inline RunResult run(const ScenarioConfig& cfg, const Prepared& pr) {
  RunResult res;
  res.trajectory = evolve(pr.initial, pr.decomp, pr.grid, pr.options);
  res.report = frozen_mode_report(pr.decomp, pr.bath);
  try {
    res.sync_times = estimate_sync_times(pr.decomp);
  } catch (const Error& e) {
    res.sync_times_note = e.what();
  }
  if (!cfg.analysis) return res;
  const Trajectory& tr = res.trajectory;
  if (cfg.sync) {
    if (pr.subset.size() >= 2) res.S = collective_sync(tr, pr.window, pr.subset, cfg.decimation);
    const MatrixXd q2 = tr.second_moment_q();
    for (auto [i, j] : pr.pairs)
      res.pair_c.push_back(windowed_correlation(tr.times, column(q2, static_cast<Eigen::Index>(i)),
                                                column(q2, static_cast<Eigen::Index>(j)), pr.window, cfg.decimation));
  }
  const auto& sel = cfg.measures;
  if (sel.mutual_information || sel.discord || sel.log_negativity) {
    res.pair_measures = pair_measures(tr, pr.pairs, sel);
    if (sel.mutual_information)
      res.avg_I = pairwise_average(tr, res.pair_measures, Measure::MutualInformation, pr.filter_window);
    if (sel.discord) res.avg_discord = pairwise_average(tr, res.pair_measures, Measure::Discord, pr.filter_window);
    if (sel.log_negativity)
      res.avg_logneg = pairwise_average(tr, res.pair_measures, Measure::LogNegativity, pr.filter_window);
  }
  return res;
}

// ------------------------------------------------------------ writing ----

namespace detail {

inline double at_or_nan(const std::vector<double>& v, std::size_t k) { return k < v.size() ? v[k] : kNaN; }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "failed writing '" + path.string() + "'");
}

inline void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());
}

}  // namespace detail

inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& tr, std::size_t stride = 1) {
  csv::Writer w(path.string());
  std::vector<std::string> cols{"t"};
  for (std::size_t j = 0; j < tr.nodes(); ++j)
    for (const char* f : {"mean_q_", "mean_p_", "var_q_", "var_p_", "cov_qp_"}) cols.push_back(f + std::to_string(j));
  cols.push_back("total_energy");
  w.header(cols);
  for (std::size_t r = 0; r < tr.size(); r += std::max<std::size_t>(stride, 1)) {
    const auto k = static_cast<Eigen::Index>(r);
    w.cell(tr.times[r]);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(tr.nodes()); ++j)
      w.cell(tr.mean_q(k, j)).cell(tr.mean_p(k, j)).cell(tr.var_q(k, j)).cell(tr.var_p(k, j)).cell(tr.cov_qp(k, j));
    w.cell(tr.energy(k));
    w.end_row();
  }
  w.close();
}

inline void write_measures_csv(const std::filesystem::path& path, const Prepared& pr, const RunResult& res) {
  csv::Writer w(path.string());
  w.header({"t", "pair_i", "pair_j", "C", "I", "discord", "logneg"});
  const auto times = res.trajectory.stored_times();
  for (std::size_t p = 0; p < pr.pairs.size(); ++p) {
    const auto [i, j] = pr.pairs[p];
    for (std::size_t k = 0; k < times.size(); ++k) {
      w.cell(times[k]).cell(i).cell(j);
      w.cell(p < res.pair_c.size() ? detail::at_or_nan(res.pair_c[p].values, k) : kNaN);
      if (p < res.pair_measures.size()) {
        const auto& m = res.pair_measures[p];
        w.cell(detail::at_or_nan(m.I, k)).cell(detail::at_or_nan(m.discord, k)).cell(detail::at_or_nan(m.logneg, k));
      } else {
        w.cell(kNaN).cell(kNaN).cell(kNaN);
      }
      w.end_row();
    }
  }
  w.close();
}

inline void write_aggregate_csv(const std::filesystem::path& path, const RunResult& res) {
  csv::Writer w(path.string());
  w.header({"t", "S", "avg_discord", "avg_I", "avg_logneg"});
  const auto times = res.trajectory.stored_times();
  for (std::size_t k = 0; k < times.size(); ++k) {
    w.cell(times[k]);
    w.cell(res.S ? detail::at_or_nan(res.S->values, k) : kNaN);
    w.cell(res.avg_discord ? detail::at_or_nan(res.avg_discord->values, k) : kNaN);
    w.cell(res.avg_I ? detail::at_or_nan(res.avg_I->values, k) : kNaN);
    w.cell(res.avg_logneg ? detail::at_or_nan(res.avg_logneg->values, k) : kNaN);
    w.end_row();
  }
  w.close();
}

inline void write_modes_csv(const std::filesystem::path& dir, const ModeDecomposition& d) {
  csv::Writer w((dir / "modes.csv").string());
  w.header({"mode", "Omega", "kappa", "Gamma", "D"});
  for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(d.size()); ++m) {
    w.cell(static_cast<std::size_t>(m)).cell(d.Omega(m)).cell(d.kappa(m)).cell(d.Gamma(m)).cell(d.D(m));
    w.end_row();
  }
  w.close();
  csv::Writer f((dir / "F.csv").string());
  std::vector<std::string> cols{"node"};
  for (std::size_t m = 0; m < d.size(); ++m) cols.push_back("mode_" + std::to_string(m));
  f.header(cols);
  for (Eigen::Index k = 0; k < d.F.rows(); ++k) {
    f.cell(static_cast<std::size_t>(k));
    for (Eigen::Index m = 0; m < d.F.cols(); ++m) f.cell(d.F(k, m));
    f.end_row();
  }
  f.close();
}

inline std::string format_list(const std::vector<std::size_t>& v) {
  std::string s;
  for (auto x : v) s += (s.empty() ? "" : " ") + std::to_string(x);
  return s.empty() ? "-" : s;
}

inline std::string summary_text(const Prepared& pr, const RunResult* res) {
  std::ostringstream o;
  const auto& d = pr.decomp;
  o << "nodes " << pr.network.size() << "\nedges " << pr.network.edge_count() << "\nbath " << to_string(pr.bath.kind)
    << " gamma " << csv::number(pr.bath.gamma) << " T " << csv::number(pr.bath.temperature) << " cutoff "
    << csv::number(pr.bath.cutoff) << "\n";
  for (const auto& [k, v] : pr.aliases) o << "alias " << k << " = " << v << "\n";
  if (pr.tune) {
    o << "tuned " << pr.tune->parameter << " = " << csv::number(pr.tune->value) << " residual "
      << csv::number(pr.tune->residual) << " iterations " << pr.tune->iterations << "\n";
  }
  o << "\nmode Omega kappa Gamma D\n";
  for (Eigen::Index m = 0; m < static_cast<Eigen::Index>(d.size()); ++m)
    o << m << " " << csv::number(d.Omega(m)) << " " << csv::number(d.kappa(m)) << " " << csv::number(d.Gamma(m)) << " "
      << csv::number(d.D(m)) << "\n";
  o << "sigma " << (d.sigma ? std::to_string(*d.sigma) : "-") << " eta " << (d.eta ? std::to_string(*d.eta) : "-")
    << " R " << csv::number(d.R) << "\n";
  const FrozenModeReport rep = frozen_mode_report(d, pr.bath);
  o << "\nfrozen " << format_list(rep.frozen) << "\n";
  for (auto m : rep.frozen) o << "participants " << m << ": " << format_list(rep.participants[m]) << "\n";
  o << "global_sync_cb " << (rep.global_sync_cb ? "true" : "false") << "\ncluster_sync_lb "
    << (rep.cluster_sync_lb ? "true" : "false") << "\n";
  if (res) {
    if (res->sync_times) {
      const auto& st = *res->sync_times;
      o << "\nt_sync " << csv::number(st.t_sync) << "\n";
      for (std::size_t j = 0; j < st.per_node.size(); ++j)
        o << "t_node " << j << " " << csv::number(st.per_node[j]) << " competitor " << st.competitor[j]
          << (st.clipped[j] ? " clipped" : "") << (st.decoupled[j] ? " decoupled" : "") << "\n";
    } else {
      o << "\nt_sync - (" << res->sync_times_note << ")\n";
    }
    if (res->S) {
      o << "window " << csv::number(pr.window) << "\nS_first_above_0.9 " << csv::number(first_crossing(*res->S, 0.9))
        << (res->S->degenerate ? "\nS_degenerate_windows true" : "") << "\n";
    }
    for (const auto& pm : res->pair_measures) {
      if (pm.failed) o << "pair_failed " << pm.i << " " << pm.j << " " << pm.failure << "\n";
      const auto bad = std::count(pm.discord_converged.begin(), pm.discord_converged.end(), false);
      if (!pm.discord.empty() && !std::isnan(pm.discord.front()) && bad > 0)
        o << "discord_not_converged " << pm.i << " " << pm.j << " " << bad << "\n";
    }
    o << "min_symplectic " << csv::number(res->trajectory.min_symplectic) << "\n";
  }
  return o.str();
}

/// Writes trajectory.csv, network.ini, summary.txt and, with [analysis],
/// measures.csv and aggregate.csv.
inline void write_run(const std::filesystem::path& dir, const ScenarioConfig& cfg, const Prepared& pr,
                      const RunResult& res) {
  detail::ensure_dir(dir);
  write_trajectory_csv(dir / "trajectory.csv", res.trajectory, cfg.trajectory_stride);
  if (cfg.analysis) {
    write_measures_csv(dir / "measures.csv", pr, res);
    write_aggregate_csv(dir / "aggregate.csv", res);
  }
  detail::write_text(dir / "network.ini", save_network(pr.network));
  detail::write_text(dir / "summary.txt", summary_text(pr, &res));
}

// ------------------------------------------------------- subcommands ----

struct Overrides {
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
};

inline void apply_overrides(ScenarioConfig& cfg, const Overrides& ov) {
  if (ov.out_dir) cfg.out_dir = *ov.out_dir;
  if (ov.seed) {
    if (cfg.source != NetworkSource::Random) throw Error(ErrorCode::ConfigError, "--seed needs source = random");
    cfg.random.seed = RngSeed{*ov.seed};
  }
}

inline void run_simulate(const ScenarioConfig& cfg) {
  const Prepared pr = prepare(cfg);
  const RunResult res = run(cfg, pr);
  write_run(cfg.out_dir, cfg, pr, res);
}

struct SweepPoint {
  double value = 0.0;
  bool ok = false;
  std::string error;
  std::vector<double> times, S, avg_discord;
};

/// One scenario run per sweep value on up to `workers` threads; results are
/// collected and written in grid order.
inline std::vector<SweepPoint> run_sweep(const ScenarioConfig& cfg, std::size_t workers = 1) {
  if (!cfg.sweep) throw Error(ErrorCode::ConfigError, "sweep needs a [sweep] section");
  const auto& values = cfg.sweep->values;
  std::vector<SweepPoint> points(values.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < values.size(); k = next++) {
      SweepPoint& p = points[k];
      p.value = values[k];
      try {
        const Prepared pr = prepare(cfg, values[k]);
        const RunResult res = run(cfg, pr);
        p.times = res.trajectory.stored_times();
        p.S.assign(p.times.size(), kNaN);
        p.avg_discord.assign(p.times.size(), kNaN);
        for (std::size_t i = 0; i < p.times.size(); ++i) {
          if (res.S) p.S[i] = detail::at_or_nan(res.S->values, i);
          if (res.avg_discord) p.avg_discord[i] = detail::at_or_nan(res.avg_discord->values, i);
        }
        p.ok = true;
      } catch (const std::exception& e) {
        p.error = e.what();
      }
    }
  };
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(values.size(), 1));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  const std::filesystem::path dir = cfg.out_dir;
  detail::ensure_dir(dir);
  csv::Writer map((dir / "map.csv").string());
  map.header({"value", "t", "S", "avg_discord"});
  for (const auto& p : points)
    for (std::size_t i = 0; i < p.times.size(); ++i) {
      map.cell(p.value).cell(p.times[i]).cell(p.S[i]).cell(p.avg_discord[i]);
      map.end_row();
    }
  map.close();
  csv::Writer status((dir / "sweep_status.csv").string());
  status.header({"value", "status", "message"});
  for (const auto& p : points) {
    std::string msg = p.error;
    std::replace(msg.begin(), msg.end(), ',', ';');
    status.cell(p.value).cell(p.ok ? "ok" : "failed").cell(msg);
    status.end_row();
  }
  status.close();
  return points;
}

inline TuneResult run_tune(const ScenarioConfig& cfg) {
  if (!cfg.tuning) throw Error(ErrorCode::ConfigError, "tune needs a [tuning] section");
  auto [net, aliases] = build_base(cfg);
  const TuneParameter param = detail::resolve_parameter(cfg.tuning->parameter, aliases, net.size());
  const std::vector<double> grid = linspace(cfg.tuning->lo, cfg.tuning->hi, cfg.tuning->samples);
  const auto scan = kappa_sigma_scan(net, param, grid, cfg.bath);
  const TuneResult tr = find_sync_frequency(net, param, {cfg.tuning->lo, cfg.tuning->hi}, cfg.bath, cfg.tuning->tol,
                                            cfg.tuning->samples);

  const std::filesystem::path dir = cfg.out_dir;
  detail::ensure_dir(dir);
  csv::Writer w((dir / "scan.csv").string());
  w.header({"value", "stable", "kappa_sigma", "sigma", "sigma_swapped"});
  for (const auto& p : scan) {
    w.cell(p.value).cell(p.stable ? "1" : "0").cell(p.kappa_sigma).cell(p.sigma).cell(p.sigma_swapped ? "1" : "0");
    w.end_row();
  }
  w.close();
  std::ostringstream o;
  o << "parameter " << tr.parameter << "\nvalue " << ini::format_double(tr.value) << "\nresidual "
    << csv::number(tr.residual) << "\nbracket " << csv::number(tr.bracket.first) << " " << csv::number(tr.bracket.second)
    << "\niterations " << tr.iterations << "\nfrozen " << format_list(tr.report.frozen) << "\n";
  for (auto m : tr.report.frozen) o << "participants " << m << ": " << format_list(tr.report.participants[m]) << "\n";
  o << "global_sync_cb " << (tr.report.global_sync_cb ? "true" : "false") << "\ncluster_sync_lb "
    << (tr.report.cluster_sync_lb ? "true" : "false") << "\n";
  detail::write_text(dir / "tune_summary.txt", o.str());
  detail::write_text(dir / "network.ini", save_network(tr.network));
  return tr;
}

inline ModeDecomposition run_spectrum(const ScenarioConfig& cfg) {
  const Prepared pr = prepare(cfg);
  const std::filesystem::path dir = cfg.out_dir;
  detail::ensure_dir(dir);
  write_modes_csv(dir, pr.decomp);
  detail::write_text(dir / "summary.txt", summary_text(pr, nullptr));
  return pr.decomp;
}

/// 0 success, 2 config / io error, 3 numeric failure.
inline int exit_code(const Error& e) {
  return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::IoError ? 2 : 3;
}

}  // namespace oscnet::scenario
