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

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "app.hpp"
#include "config.hpp"
#include "doctest.h"
#include "json.hpp"
#include "scenarios.hpp"

using namespace wavelink;
using namespace wavelink::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("wavelink_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string file(const std::string& name, const std::string& body) const {
    std::ofstream(path / name) << body;
    return (path / name).string();
  }
};

struct Invocation {
  int code;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "wavelink");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

// Expects a ConfigError whose message contains every fragment.
void check_config_error(const std::string& text, const std::vector<std::string>& fragments,
                        const std::vector<Override>& overrides = {}) {
  try {
    parse_config(text, "doc.yaml", overrides);
    FAIL("no ConfigError for:\n" << text);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    for (const auto& f : fragments) CHECK_MESSAGE(what.find(f) != std::string::npos, what);
  }
}

}  // namespace

TEST_CASE("recipe listing") {
  const auto& list = recipes();
  CHECK(list.size() >= 8);
  for (std::size_t i = 1; i < list.size(); ++i) CHECK(list[i - 1].name < list[i].name);
  CHECK(find_recipe("fig2a_standing_modes") != nullptr);
  CHECK(find_recipe("fig4b_noon1") != nullptr);
  CHECK(find_recipe("transfer") != nullptr);
  CHECK(find_recipe("nope") == nullptr);
  for (const auto& r : list) {
    CHECK_MESSAGE(!r.description.empty(), r.name);
    CHECK_NOTHROW(parse_config(r.config, r.name));
  }
  const auto a = invoke({"recipes"});
  const auto b = invoke({"recipes"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(a.out.find("fig4b_noon1") != std::string::npos);
  CHECK(invoke({"recipes", "--show", "transfer"}).out == find_recipe("transfer")->config);
  CHECK(invoke({"recipes", "--show", "nope"}).code == kExitUsage);
}

TEST_CASE("config parsing and units") {
  const auto cfg = parse_config(
      "scenario: modes\n"
      "seed: 7\n"
      "modes:\n"
      "  fsr_hz: 31e6\n"
      "  detuning_hz: {start: -10e6, stop: 10e6, count: 3}\n",
      "doc.yaml");
  CHECK(cfg.scenario == ScenarioKind::kModes);
  CHECK(cfg.seed == 7);
  CHECK(cfg.modes.fsr == doctest::Approx(2 * M_PI * 31e6));
  const auto det = cfg.modes.detuning.values();
  REQUIRE(det.size() == 3);
  CHECK(det[0] == doctest::Approx(-2 * M_PI * 10e6));
  CHECK(det[1] == doctest::Approx(0.0).epsilon(1e-12));

  const auto measured = parse_config("scenario: transfer\ndevice: {preset: measured}\n", "doc.yaml");
  CHECK(measured.device.node2.resonator_t1 == doctest::Approx(0.86e-6));
  CHECK(measured.device.node1.g_qr == doctest::Approx(2 * M_PI * 6.805e6));
  const auto ideal = parse_config("scenario: transfer\n", "doc.yaml");
  CHECK(std::isinf(ideal.device.node1.resonator_t1));
}

TEST_CASE("config diagnostics carry line numbers") {
  check_config_error("scenario: transfer\npulses:\n  kappa_c: 0.5e9\n",
                     {"doc.yaml:3:", "needs a unit suffix", "kappa_c_per_s"});
  check_config_error("scenario: transfer\nseed: 1\nbogus: 2\n", {"doc.yaml:3:", "unknown key 'bogus'"});
  check_config_error("scenario: teleport\n", {"doc.yaml:1:", "teleport"});
  check_config_error("seed: 1\n", {"missing required key 'scenario'"});
  check_config_error("scenario: transfer\npulses:\n  t0_s: soon\n", {"doc.yaml:3:", "expected a number"});
  check_config_error("scenario: transfer\npulses:\n  step_s: -1e-9\n", {"doc.yaml:3:", "must be positive"});
  check_config_error("scenario: transfer\nnoon:\n  n: 1\n", {"doc.yaml:2:", "does not apply"});
  check_config_error("scenario: noon\nnoon:\n  n: 3\n", {"doc.yaml:3:", "integer in [1, 2]"});
  check_config_error("scenario: transfer\ntransfer:\n  inputs: [fock:9]\n", {"doc.yaml:3:", "fock:9"});
  check_config_error("scenario: [transfer\n", {"doc.yaml:"});
  check_config_error("scenario: circuit\ncircuit:\n  resonator:\n    length: 1\n",
                     {"doc.yaml:4:", "circuit.resonator", "length_m"});
}

TEST_CASE("overrides") {
  const std::string base = "scenario: transfer\npulses:\n  t0_s: 1e-9\n";
  auto cfg = parse_config(base, "doc.yaml", {parse_override("pulses.t0_s=3e-9"), parse_override("seed=4")});
  CHECK(cfg.pulses.t0 == doctest::Approx(3e-9));
  CHECK(cfg.seed == 4);
  cfg = parse_config(base, "doc.yaml", {parse_override("transfer.inputs=[fock:2]"),
                                        parse_override("transfer.truncation=3")});
  CHECK(cfg.transfer.inputs == std::vector<std::string>{"fock:2"});
  check_config_error(base, {"--set", "unknown key 'typo'"}, {parse_override("pulses.typo=1")});
  check_config_error(base, {"not a section"}, {parse_override("pulses.t0_s.x=1")});
  CHECK_THROWS_AS(parse_override("novalue"), ConfigError);
  CHECK_THROWS_AS(parse_override("=3"), ConfigError);
}

TEST_CASE("exit codes") {
  TempDir tmp;
  const auto bad = tmp.file("bad.yaml", "scenario: transfer\npulses:\n  kappa_m: 0.6e9\n");
  const auto v = invoke({"validate", bad});
  CHECK(v.code == kExitConfig);
  CHECK(v.err.find("bad.yaml:3:") != std::string::npos);
  CHECK(invoke({"run", bad}).code == kExitConfig);
  CHECK(invoke({"run", (tmp.path / "missing.yaml").string()}).code == kExitConfig);
  CHECK(invoke({"validate", "transfer"}).code == kExitOk);
  CHECK(invoke({}).code == kExitUsage);
  CHECK(invoke({"run"}).code == kExitUsage);
  CHECK(invoke({"frobnicate"}).code == kExitUsage);
  CHECK(invoke({"run", "transfer", "--workers", "0"}).code == kExitUsage);

  // A resonator far above the search window has no resonance to find.
  const auto noroot = tmp.file("noroot.yaml",
                               "scenario: circuit\noutput_dir: " + (tmp.path / "o1").string() +
                                   "\ncircuit:\n  kind: coupler\n  resonator: {length_m: 2e-3}\n"
                                   "  flux_phi0: {start: 0, stop: 0.1, count: 2}\n");
  CHECK(invoke({"run", noroot}).code == kExitSimulation);

  // A dataset without signal cannot be reconstructed.
  const auto zeros = tmp.file("zeros.json",
                              R"({"displacements": [[0, 0], [0.5, 0], [0, 0.5]],)"
                              R"( "distributions": [[0, 0, 0], [0, 0, 0], [0, 0, 0]], "n_max": 2})");
  const auto rec = tmp.file("rec.yaml", "scenario: tomography\noutput_dir: " + (tmp.path / "o2").string() +
                                            "\ntomography:\n  dataset_file: " + zeros + "\n");
  const auto r = invoke({"run", rec});
  CHECK_MESSAGE(r.code == kExitReconstruction, r.err);
}

TEST_CASE("circuit boxmodes recipe") {
  TempDir tmp;
  const auto r = invoke({"run", "circuit_boxmodes", "--output-dir", tmp.path.string()});
  REQUIRE_MESSAGE(r.code == kExitOk, r.err);
  std::ifstream csv(tmp.path / "box_modes.csv");
  std::string header, first;
  std::getline(csv, header);
  std::getline(csv, first);
  CHECK(header == "n,m,l,f_Hz");
  const double f = std::stod(first.substr(first.rfind(',') + 1));
  CHECK(f == doctest::Approx(3.14e9).epsilon(0.005));

  const auto manifest = nlohmann::json::parse(read(tmp.path / "manifest.json"));
  for (const auto& entry : manifest["files"]) {
    CHECK(fs::file_size(tmp.path / entry["path"].get<std::string>()) == entry["bytes"].get<std::uintmax_t>());
  }
}

TEST_CASE("transfer recipe and reproducible summary") {
  TempDir a, b;
  REQUIRE(invoke({"run", "transfer", "--output-dir", a.path.string()}).code == kExitOk);
  REQUIRE(invoke({"run", "transfer", "--output-dir", b.path.string(), "--workers", "3"}).code == kExitOk);
  const std::string sa = read(a.path / "summary.json");
  CHECK(sa == read(b.path / "summary.json"));
  const auto j = nlohmann::json::parse(sa);
  CHECK(j["results"]["inputs"]["fock:1"]["efficiency"].get<double>() >= 0.98);
  CHECK(j["results"]["inputs"]["superposition:1"]["fidelity"].get<double>() >= 0.98);
  CHECK(j["versions"]["wavelink"] == kVersion);
  const std::string pops = read(a.path / "populations.csv");
  CHECK(pops.rfind("input,n,p_sent,p_received\n", 0) == 0);
}

TEST_CASE("seeded noise is reproducible") {
  TempDir a, b, c;
  const std::vector<std::string> common{"--set", "noon.noise=0.02", "--set", "seed=5"};
  auto run = [&](const TempDir& d, const std::string& seed) {
    std::vector<std::string> args{"run", "fig4b_noon1", "--output-dir", d.path.string()};
    args.insert(args.end(), common.begin(), common.end());
    args.push_back("--set");
    args.push_back("seed=" + seed);
    REQUIRE(invoke(args).code == kExitOk);
    return read(d.path / "summary.json");
  };
  const std::string s5 = run(a, "5");
  CHECK(s5 == run(b, "5"));
  CHECK(s5 != run(c, "6"));
}
