#pragma once

// Scenario configuration, presets and file output for the command-line runner.
//
// Configs are flat `key = value` lines with dotted keys; `#` starts a comment.
// Rates are in units of Gamma_d and times in 1/Gamma_d.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qfb/ensemble.hpp"
#include "qfb/feedback.hpp"
#include "qfb/model.hpp"
#include "qfb/sde.hpp"

namespace qfb {

std::string_view version();

/// Which parameter group defines the measurement rates.
enum class RateSource { direct, physical };

struct DirectRates {
  double chi_alpha2 = 0.0;
  double Gamma_d = 1.0;
  double eta = 1.0;
  double gamma_p = 0.0;

  friend bool operator==(const DirectRates&, const DirectRates&) = default;
};

struct NoiseRates {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma_phi1 = 0.0;
  double gamma_phi2 = 0.0;
  PurcellSign purcell_sign = PurcellSign::minus;

  friend bool operator==(const NoiseRates&, const NoiseRates&) = default;
};

struct ScenarioConfig {
  std::string name = "custom";
  RateSource source = RateSource::direct;
  DirectRates rates;
  PhysicalParams physical;
  NoiseRates noise;
  FeedbackConfig feedback;
  IntegratorConfig integrator;
  std::optional<BellState> initial;  // empty: separable product state

  std::size_t n_traj = 500;
  std::uint64_t seed = 1;
  std::string out = "out";
  bool emit_trajectories = false;
  std::size_t emit_count = 3;
  unsigned workers = 1;

  /// Extra ensembles with filter.power_P replaced by each entry.
  std::vector<int> sweep_power;
  /// Extra ensemble with feedback switched off.
  bool compare_feedback_off = false;

  /// Physical parameters are converted and rescaled so that Gamma_d = 1.
  ModelRates model_rates() const;
  DensityMatrix initial_state() const;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

struct ConfigIssue {
  std::string key;
  std::string reason;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues);
  const std::vector<ConfigIssue>& issues() const { return issues_; }

 private:
  std::vector<ConfigIssue> issues_;
};

struct Setting {
  std::string key;
  std::string value;
  std::string origin;  // "file:line", "--set", env var name, ...
};

/// Split config text into settings. Malformed lines raise ConfigError.
std::vector<Setting> parse_settings(std::string_view text, std::string_view origin = "config");

/// Apply settings in order (last wins) and validate. Every unknown key, bad
/// value and invariant violation is reported together in one ConfigError.
/// Setting any physical.* key selects the physical source and any rates.* key
/// the direct one; one batch may not do both.
void apply_settings(ScenarioConfig& cfg, std::span<const Setting> settings);

std::vector<ConfigIssue> validate(const ScenarioConfig& cfg);

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base = {});
std::string emit_config(const ScenarioConfig& cfg);

/// Known presets: fig2a, fig2bc, fig3, fig4, eta08. Unknown names raise ConfigError.
ScenarioConfig preset(std::string_view name);
std::span<const std::string_view> preset_names();
std::vector<std::string_view> config_keys();

/// QFB_* environment variables mapped to settings. QFB_SEED, QFB_TRAJECTORIES,
/// QFB_WORKERS and QFB_OUT are shorthands; otherwise QFB_<KEY> with dots as
/// underscores, case-insensitive (QFB_FEEDBACK_U -> feedback.u). QFB_PRESET and
/// QFB_CONFIG are left to the caller; other unmatched names are reported.
std::vector<Setting> env_settings(std::span<const std::pair<std::string, std::string>> env);

std::string format_double(double x);

std::string_view ensemble_csv_header();
std::string_view trajectory_csv_header();
void write_ensemble_csv(std::ostream& os, const EnsembleStats& st);
void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec);

struct RunVariant {
  std::string file;  // output file name
  FeedbackConfig feedback;
};

/// ensemble.csv first, then ensemble_P<k>.csv per sweep entry and
/// ensemble_feedback_off.csv when requested.
std::vector<RunVariant> run_variants(const ScenarioConfig& cfg);

enum ExitCode : int { exit_ok = 0, exit_config = 1, exit_integration = 2, exit_io = 3 };

/// Runs every variant and writes CSVs plus manifest.cfg into cfg.out.
/// Progress and summaries go to `log`.
int run(const ScenarioConfig& cfg, std::ostream& log);

}  // namespace qfb
