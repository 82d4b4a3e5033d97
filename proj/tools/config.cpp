// Copyright 2026 The wavelink Authors
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

#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>

namespace wavelink::cli {

namespace {

constexpr double kTwoPi = 2 * M_PI;

// Unit suffixes accepted on dimensional keys. Longest first so that
// "_f_per_m" is not mistaken for "_m".
const std::vector<std::string> kSuffixes = {"_f_per_m", "_h_per_m", "_per_s", "_phi0", "_ohm",
                                            "_rad",     "_hz",      "_s",     "_m",    "_f",
                                            "_h"};

std::string where(const YAML::Mark& mark, const std::string& source) {
  if (mark.is_null()) return "--set: ";
  return source + ":" + std::to_string(mark.line + 1) + ": ";
}

class Section {
 public:
  Section(YAML::Node node, std::string path, const std::string& source)
      : node_(std::move(node)), path_(std::move(path)), source_(source) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      fail(node_.Mark(), "expected a mapping");
    }
  }

  [[noreturn]] void fail(const YAML::Mark& mark, const std::string& message) const {
    throw ConfigError(where(mark, source_) + (path_.empty() ? "" : path_ + ": ") + message);
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  std::optional<YAML::Node> get(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    return node_[key];
  }

  double number(const std::string& key, double fallback, double scale = 1.0) {
    const auto found = get(key);
    if (!found) return fallback * scale;
    return to_number(*found, key) * scale;
  }

  double to_number(const YAML::Node& v, const std::string& key) const {
    if (!v.IsScalar()) fail(v.Mark(), key + ": expected a number");
    try {
      const double x = v.as<double>();
      if (std::isnan(x)) fail(v.Mark(), key + ": NaN is not allowed");
      return x;
    } catch (const YAML::BadConversion&) {
      fail(v.Mark(), key + ": expected a number, got '" + v.Scalar() + "'");
    }
  }

  double positive(const std::string& key, double fallback, double scale = 1.0) {
    const double x = number(key, fallback, scale);
    if (!(x > 0.0)) fail(mark(key), key + ": must be positive");
    return x;
  }

  double nonnegative(const std::string& key, double fallback, double scale = 1.0) {
    const double x = number(key, fallback, scale);
    if (!(x >= 0.0)) fail(mark(key), key + ": must be nonnegative");
    return x;
  }

  int integer(const std::string& key, int fallback, int lo, int hi) {
    const auto found = get(key);
    if (!found) return fallback;
    const YAML::Node& v = *found;
    const double x = to_number(v, key);
    if (x != std::floor(x) || x < lo || x > hi) {
      fail(v.Mark(), key + ": expected an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return static_cast<int>(x);
  }

  bool boolean(const std::string& key, bool fallback) {
    const auto found = get(key);
    if (!found) return fallback;
    const YAML::Node& v = *found;
    try {
      return v.as<bool>();
    } catch (const YAML::BadConversion&) {
      fail(v.Mark(), key + ": expected true or false");
    }
  }

  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed = {}) {
    const auto found = get(key);
    if (!found) return fallback;
    const YAML::Node& v = *found;
    if (!v.IsScalar()) fail(v.Mark(), key + ": expected a string");
    const std::string s = v.Scalar();
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), s) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(v.Mark(), key + ": '" + s + "' is not one of " + list);
    }
    return s;
  }

  std::vector<std::string> texts(const std::string& key, const std::vector<std::string>& fallback) {
    const auto found = get(key);
    if (!found) return fallback;
    const YAML::Node& v = *found;
    if (!v.IsSequence() || v.size() == 0) fail(v.Mark(), key + ": expected a nonempty list");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.IsScalar()) fail(e.Mark(), key + ": expected strings");
      out.push_back(e.Scalar());
    }
    return out;
  }

  Range range(const std::string& key, const Range& fallback, double scale = 1.0) {
    const auto found = get(key);
    if (!found) return fallback;
    const YAML::Node& v = *found;
    Section r(v, path_.empty() ? key : path_ + "." + key, source_);
    Range out;
    out.start = r.number("start", fallback.start / scale) * scale;
    out.stop = r.number("stop", fallback.stop / scale) * scale;
    out.count = r.integer("count", fallback.count, 1, 100000);
    r.finish();
    if (out.count > 1 && !(out.stop > out.start)) fail(v.Mark(), key + ": need stop > start");
    return out;
  }

  Section child(const std::string& key) {
    return Section(get(key).value_or(YAML::Node()), path_.empty() ? key : path_ + "." + key, source_);
  }

  /// Location of the key itself (not its value).
  YAML::Mark mark(const std::string& key) const {
    if (!has(key)) return YAML::Mark::null_mark();
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      if (it->first.Scalar() == key) return it->first.Mark();
    }
    return YAML::Mark::null_mark();
  }

  /// Rejects keys that were never read.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (auto it = node_.begin(); it != node_.end(); ++it) {
      const std::string key = it->first.as<std::string>();
      if (used_.count(key)) continue;
      for (const auto& s : kSuffixes) {
        if (used_.count(key + s)) {
          fail(it->first.Mark(), "'" + key + "' needs a unit suffix (did you mean '" + key + s + "'?)");
        }
      }
      fail(it->first.Mark(), "unknown key '" + key + "'");
    }
  }

 private:
  YAML::Node node_;
  std::string path_;
  const std::string& source_;
  std::set<std::string> used_;
};

NodeDevice parse_node(Section s, NodeDevice d) {
  d.g_qr = s.positive("g_qr_hz", d.g_qr / kTwoPi, kTwoPi);
  d.qubit_levels = s.integer("qubit_levels", d.qubit_levels, 2, 3);
  d.ef_ratio = s.positive("ef_ratio", d.ef_ratio);
  d.qubit_t1 = s.positive("qubit_t1_s", d.qubit_t1);
  d.qubit_t2 = s.positive("qubit_t2_s", d.qubit_t2);
  d.resonator_t1 = s.positive("resonator_t1_s", d.resonator_t1);
  d.resonator_t2 = s.positive("resonator_t2_s", d.resonator_t2);
  s.finish();
  return d;
}

void parse_device(Section s, DeviceConfig& d) {
  d.preset = s.text("preset", d.preset, {"ideal", "measured"});
  NodeDevice n1 = measured_node(1);
  NodeDevice n2 = measured_node(2);
  if (d.preset == "ideal") {
    for (NodeDevice* n : {&n1, &n2}) {
      n->qubit_t1 = n->qubit_t2 = n->resonator_t1 = n->resonator_t2 =
          std::numeric_limits<double>::infinity();
    }
  }
  d.node1 = parse_node(s.child("node1"), n1);
  d.node2 = parse_node(s.child("node2"), n2);
  s.finish();
}

void parse_pulses(Section s, PulseConfig& p) {
  p.kappa_c = s.positive("kappa_c_per_s", p.kappa_c);
  p.kappa_m = s.positive("kappa_m_per_s", p.kappa_m);
  p.kappa_max = s.positive("kappa_max_per_s", p.kappa_max);
  p.t0 = s.number("t0_s", p.t0);
  p.window_before = s.positive("window_before_s", p.window_before);
  p.window_after = s.positive("window_after_s", p.window_after);
  p.step = s.positive("step_s", p.step);
  p.filter_sigma = s.nonnegative("filter_sigma_s", p.filter_sigma);
  p.line_loss = s.nonnegative("line_loss", p.line_loss);
  if (p.line_loss > 1.0) s.fail(s.mark("line_loss"), "line_loss: must be in [0, 1]");
  p.phase_offset = s.number("phase_offset_rad", p.phase_offset);
  s.finish();
}

void parse_transfer(Section s, TransferConfig& c) {
  c.inputs = s.texts("inputs", c.inputs);
  for (const auto& in : c.inputs) {
    const auto colon = in.find(':');
    const std::string kind = in.substr(0, colon);
    bool ok = colon != std::string::npos && (kind == "fock" || kind == "superposition");
    if (ok) {
      const std::string num = in.substr(colon + 1);
      ok = !num.empty() && std::all_of(num.begin(), num.end(), ::isdigit) && std::stoi(num) >= 1 &&
           std::stoi(num) <= 4;
    }
    if (!ok) s.fail(s.mark("inputs"), "inputs: '" + in + "' is not fock:N or superposition:N with N in 1..4");
  }
  c.truncation = s.integer("truncation", c.truncation, 1, 8);
  c.calibrate_phase = s.boolean("calibrate_phase", c.calibrate_phase);
  s.finish();
}

void parse_modes(Section s, ModesConfig& c) {
  c.n_modes = s.integer("n_modes", c.n_modes, 1, 101);
  c.fsr = s.positive("fsr_hz", c.fsr / kTwoPi, kTwoPi);
  c.g_rw = s.positive("g_rw_hz", c.g_rw / kTwoPi, kTwoPi);
  c.mode_t1 = s.nonnegative("mode_t1_s", c.mode_t1);
  c.detuning = s.range("detuning_hz", c.detuning, kTwoPi);
  c.hold = s.range("hold_s", c.hold);
  s.finish();
}

void parse_emit_recapture(Section s, EmitRecaptureConfig& c) {
  c.pulse_width = s.positive("pulse_width_s", c.pulse_width);
  c.kappa = s.positive("kappa_per_s", c.kappa);
  c.delay = s.range("delay_s", c.delay);
  c.detuning = s.range("detuning_hz", c.detuning, kTwoPi);
  c.step = s.positive("step_s", c.step);
  s.finish();
}

void parse_noon(Section s, NoonConfig& c) {
  c.n = s.integer("n", c.n, 1, 2);
  c.truncation = s.integer("truncation", c.truncation, c.n, 6);
  c.grid = s.integer("grid", c.grid, 2, 15);
  c.extent = s.positive("extent", c.extent);
  c.noise = s.nonnegative("noise", c.noise);
  s.finish();
}

void parse_tomography(Section s, TomographyConfig& c) {
  c.n = s.integer("n", c.n, 1, 2);
  c.truncation = s.integer("truncation", c.truncation, c.n + 1, 10);
  c.grid = s.integer("grid", c.grid, 2, 41);
  c.extent = s.positive("extent", c.extent);
  c.noise = s.nonnegative("noise", c.noise);
  c.wigner_points = s.integer("wigner_points", c.wigner_points, 2, 401);
  c.wigner_extent = s.positive("wigner_extent", c.wigner_extent);
  c.dataset_file = s.text("dataset_file", c.dataset_file);
  s.finish();
}

void parse_circuit(Section s, CircuitConfig& c) {
  c.kind = s.text("kind", c.kind, {"boxmodes", "anharmonicity", "coupler", "fsr"});
  c.box = s.text("box", c.box, {"die", "package", "custom"});
  c.box_geometry = c.box == "package" ? circuit::BoxGeometry::package() : circuit::BoxGeometry::die();
  {
    Section g = s.child("box_geometry");
    auto& b = c.box_geometry;
    b.a = g.positive("a_m", b.a);
    b.b = g.positive("b_m", b.b);
    b.d = g.positive("d_m", b.d);
    b.epsilon_r = g.positive("epsilon_r", b.epsilon_r);
    b.mu_r = g.positive("mu_r", b.mu_r);
    g.finish();
  }
  c.max_index = s.integer("max_index", c.max_index, 1, 20);
  {
    Section g = s.child("resonator");
    auto& r = c.resonator;
    r.length = g.positive("length_m", r.length);
    r.capacitance_per_length = g.positive("capacitance_f_per_m", r.capacitance_per_length);
    r.inductance_per_length = g.positive("inductance_h_per_m", r.inductance_per_length);
    r.end_capacitance = g.positive("end_capacitance_f", r.end_capacitance);
    r.squid_inductance = g.positive("squid_inductance_h", r.squid_inductance);
    r.mode_index = g.integer("mode_index", r.mode_index, 0, 10);
    g.finish();
  }
  c.points = s.integer("points", c.points, 2, 100000);
  {
    Section g = s.child("coupler");
    auto& p = c.coupler;
    p.junction_inductance = g.positive("junction_inductance_h", p.junction_inductance);
    p.ground_inductance = g.positive("ground_inductance_h", p.ground_inductance);
    p.stray_inductance = g.nonnegative("stray_inductance_h", p.stray_inductance);
    p.beta = g.nonnegative("beta", p.beta);
    p.load = g.positive("load_ohm", p.load);
    const std::string topo = g.text("topology", "ground_stray", {"ground_stray", "series_stray"});
    p.topology = topo == "series_stray" ? circuit::CouplerTopology::kSeriesStray
                                        : circuit::CouplerTopology::kGroundStray;
    g.finish();
  }
  c.flux = s.range("flux_phi0", c.flux);
  c.epsilon_r = s.positive("epsilon_r", c.epsilon_r);
  c.line_length = s.positive("line_length_m", c.line_length);
  s.finish();
}

void parse_optimize(Section s, OptimizeConfig& c) {
  c.stage = s.text("stage", c.stage, {"emission", "capture", "joint"});
  c.knots = s.integer("knots", c.knots, 3, 24);
  c.budget = s.integer("budget", c.budget, 20, 100000);
  c.filter_sigma = s.nonnegative("filter_sigma_s", c.filter_sigma);
  s.finish();
}

struct SectionName {
  ScenarioKind kind;
  const char* name;
};

constexpr SectionName kScenarios[] = {
    {ScenarioKind::kTransfer, "transfer"},   {ScenarioKind::kModes, "modes"},
    {ScenarioKind::kEmitRecapture, "emit_recapture"}, {ScenarioKind::kNoon, "noon"},
    {ScenarioKind::kTomography, "tomography"}, {ScenarioKind::kCircuit, "circuit"},
    {ScenarioKind::kOptimize, "optimize"},
};

void apply_override(YAML::Node& root, const Override& o) {
  std::vector<std::string> parts;
  std::stringstream ss(o.first);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw ConfigError("--set " + o.first + ": empty path component");
    parts.push_back(p);
  }
  if (parts.empty()) throw ConfigError("--set: empty key");
  YAML::Node value;
  if (!o.second.empty() && (o.second.front() == '[' || o.second.front() == '{')) {
    try {
      value = YAML::Load(o.second);
    } catch (const YAML::Exception& e) {
      throw ConfigError("--set " + o.first + ": " + e.msg);
    }
  } else {
    value = YAML::Node(o.second);
  }
  // Walk with explicit copies; operator[] on a const path creates maps.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    if (cur[parts[i]] && !cur[parts[i]].IsMap()) {
      throw ConfigError("--set " + o.first + ": '" + parts[i] + "' is not a section");
    }
    if (!cur[parts[i]]) cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
    chain.push_back(cur[parts[i]]);
  }
  chain.back()[parts.back()] = value;
}

}  // namespace

const char* scenario_name(ScenarioKind kind) {
  for (const auto& s : kScenarios) {
    if (s.kind == kind) return s.name;
  }
  return "?";
}

std::vector<double> Range::values() const {
  if (count == 1) return {start};
  std::vector<double> v(count);
  for (int i = 0; i < count; ++i) v[i] = start + (stop - start) * i / (count - 1);
  return v;
}

Override parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("--set " + text + ": expected key=value");
  return {text.substr(0, eq), text.substr(eq + 1)};
}

ScenarioConfig parse_config(const std::string& text, const std::string& source,
                            const std::vector<Override>& overrides) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(source + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError(where(root.Mark(), source) + "top level must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  ScenarioConfig cfg;
  Section top(root, "", source);
  std::vector<std::string> names;
  for (const auto& s : kScenarios) names.push_back(s.name);
  if (!top.has("scenario")) throw ConfigError(source + ": missing required key 'scenario'");
  const std::string scenario = top.text("scenario", "", names);
  for (const auto& s : kScenarios) {
    if (scenario == s.name) cfg.scenario = s.kind;
  }
  const double seed = top.number("seed", 0.0);
  if (seed < 0 || seed != std::floor(seed) || seed > 9.007199254740992e15) {
    top.fail(top.mark("seed"), "seed: expected a nonnegative integer");
  }
  cfg.seed = static_cast<std::uint64_t>(seed);
  cfg.output_dir = top.text("output_dir", cfg.output_dir);
  parse_device(top.child("device"), cfg.device);
  parse_pulses(top.child("pulses"), cfg.pulses);
  switch (cfg.scenario) {
    case ScenarioKind::kTransfer: parse_transfer(top.child("transfer"), cfg.transfer); break;
    case ScenarioKind::kModes: parse_modes(top.child("modes"), cfg.modes); break;
    case ScenarioKind::kEmitRecapture: parse_emit_recapture(top.child("emit_recapture"), cfg.emit_recapture); break;
    case ScenarioKind::kNoon: parse_noon(top.child("noon"), cfg.noon); break;
    case ScenarioKind::kTomography: parse_tomography(top.child("tomography"), cfg.tomography); break;
    case ScenarioKind::kCircuit: parse_circuit(top.child("circuit"), cfg.circuit); break;
    case ScenarioKind::kOptimize: parse_optimize(top.child("optimize"), cfg.optimize); break;
  }
  for (const auto& s : kScenarios) {
    if (s.kind != cfg.scenario && top.has(s.name)) {
      top.fail(top.mark(s.name), std::string("section '") + s.name + "' does not apply to scenario " + scenario);
    }
  }
  top.finish();
  return cfg;
}

ScenarioConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot read file");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path, overrides);
}

}  // namespace wavelink::cli
