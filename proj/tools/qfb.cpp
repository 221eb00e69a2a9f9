// qfb: run feedback-stabilized entanglement scenarios and write CSV output.
//
// Settings are layered, later layers winning:
//   preset < --config file < QFB_* environment < --set < dedicated flags

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qfb/scenario.hpp"

extern char** environ;

namespace {

std::vector<std::pair<std::string, std::string>> environment() {
  std::vector<std::pair<std::string, std::string>> env;
  for (char** e = environ; e && *e; ++e) {
    std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env.emplace_back(std::string(kv.substr(0, eq)), std::string(kv.substr(eq + 1)));
  }
  return env;
}

std::optional<std::string> getenv_str(const char* name) {
  if (const char* v = std::getenv(name)) return std::string(v);
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-trajectory simulator for feedback-stabilized two-qubit entanglement"};
  app.set_version_flag("--version", std::string(qfb::version()));

  std::string preset_name;
  std::string config_path;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trajectories;
  bool emit = false;
  std::optional<std::string> out;
  std::optional<unsigned> workers;
  bool print_config = false;
  bool list_presets = false;

  app.add_option("--preset", preset_name, "Start from a named preset (fig2a, fig2bc, fig3, fig4, eta08)");
  app.add_option("--config", config_path, "Config file with key = value lines");
  app.add_option("--set", sets, "Override one setting, KEY=VALUE (repeatable, last wins)");
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--trajectories", trajectories, "Number of trajectories per ensemble");
  app.add_flag("--emit-trajectories", emit, "Write per-trajectory CSVs for the first run.emit_count ids");
  app.add_option("--out", out, "Output directory");
  app.add_option("--workers", workers, "Worker threads");
  app.add_flag("--print-config", print_config, "Print the effective config and exit");
  app.add_flag("--list-presets", list_presets, "List preset names and exit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? qfb::exit_ok : qfb::exit_config;
  }

  if (list_presets) {
    for (auto p : qfb::preset_names()) std::cout << p << '\n';
    return qfb::exit_ok;
  }

  if (preset_name.empty()) preset_name = getenv_str("QFB_PRESET").value_or("");
  if (config_path.empty()) config_path = getenv_str("QFB_CONFIG").value_or("");

  qfb::ScenarioConfig cfg;
  try {
    if (!preset_name.empty()) cfg = qfb::preset(preset_name);

    std::vector<qfb::Setting> settings;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) {
        std::cerr << "error: cannot read config file " << config_path << '\n';
        return qfb::exit_io;
      }
      std::stringstream buf;
      buf << in.rdbuf();
      settings = qfb::parse_settings(buf.str(), config_path);
    }
    const auto env = environment();
    for (auto& s : qfb::env_settings(env)) settings.push_back(std::move(s));

    std::vector<qfb::ConfigIssue> malformed;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) {
        malformed.push_back({s, "--set expects KEY=VALUE"});
        continue;
      }
      settings.push_back({s.substr(0, eq), s.substr(eq + 1), "--set"});
    }
    if (!malformed.empty()) throw qfb::ConfigError(std::move(malformed));

    if (seed) settings.push_back({"run.seed", std::to_string(*seed), "--seed"});
    if (trajectories) settings.push_back({"run.n_traj", std::to_string(*trajectories), "--trajectories"});
    if (emit) settings.push_back({"run.emit_trajectories", "true", "--emit-trajectories"});
    if (out) settings.push_back({"run.out", *out, "--out"});
    if (workers) settings.push_back({"run.workers", std::to_string(*workers), "--workers"});

    qfb::apply_settings(cfg, settings);
  } catch (const qfb::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return qfb::exit_config;
  }

  if (print_config) {
    std::cout << qfb::emit_config(cfg);
    return qfb::exit_ok;
  }
  return qfb::run(cfg, std::cerr);
}
