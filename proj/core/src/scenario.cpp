#include "qfb/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

namespace qfb {

std::string_view version() { return QFB_VERSION; }

ModelRates ScenarioConfig::model_rates() const {
  ModelRates r;
  if (source == RateSource::direct) {
    r = ModelRates::with_efficiency(rates.Gamma_d, rates.eta);
    r.chi_alpha2 = rates.chi_alpha2;
    r.gamma_p = rates.gamma_p;
  } else {
    r = ModelRates::from_physical(physical);
    const double s = r.Gamma_d;
    r.chi_alpha2 /= s;
    r.gamma_p /= s;
    r.Gamma_m /= s;
    r.Gamma_d = 1.0;
  }
  r.gamma_relax = {noise.gamma1, noise.gamma2};
  r.gamma_phi = {noise.gamma_phi1, noise.gamma_phi2};
  r.purcell_sign = noise.purcell_sign;
  return r;
}

DensityMatrix ScenarioConfig::initial_state() const {
  return initial ? DensityMatrix::from_ket(bell_state(*initial)) : default_initial_state();
}

namespace {

std::string join_issues(const std::vector<ConfigIssue>& issues) {
  std::string s = "invalid configuration:";
  for (const auto& i : issues) s += "\n  " + i.key + ": " + i.reason;
  return s;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view v) {
  double x = 0.0;
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end) throw std::invalid_argument("expected a number, got '" + std::string(v) + "'");
  return x;
}

template <class T>
T parse_integer(std::string_view v) {
  T x{};
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, x);
  if (ec != std::errc() || p != end)
    throw std::invalid_argument("expected an integer, got '" + std::string(v) + "'");
  return x;
}

bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("expected true/false, got '" + std::string(v) + "'");
}

std::string_view initial_name(const std::optional<BellState>& b) { return b ? to_string(*b) : "separable"; }

std::optional<BellState> parse_initial(std::string_view v) {
  if (v == "separable") return std::nullopt;
  return parse_bell_state(v);
}

enum class Group { common, direct, physical };

struct Field {
  std::string_view key;
  std::function<void(ScenarioConfig&, std::string_view)> set;
  std::function<std::string(const ScenarioConfig&)> get;
  Group group = Group::common;
};

template <class Acc>
Field real(std::string_view key, Acc acc, Group g = Group::common) {
  return {key, [acc](ScenarioConfig& c, std::string_view v) { acc(c) = parse_double(v); },
          [acc](const ScenarioConfig& c) { return format_double(acc(c)); }, g};
}

template <class Acc>
Field integer(std::string_view key, Acc acc) {
  return {key,
          [acc](ScenarioConfig& c, std::string_view v) {
            using T = std::remove_reference_t<decltype(acc(c))>;
            acc(c) = parse_integer<T>(v);
          },
          [acc](const ScenarioConfig& c) { return std::to_string(acc(c)); }};
}

template <class Acc>
Field boolean(std::string_view key, Acc acc) {
  return {key, [acc](ScenarioConfig& c, std::string_view v) { acc(c) = parse_bool(v); },
          [acc](const ScenarioConfig& c) { return std::string(acc(c) ? "true" : "false"); }};
}

template <class Acc, class Parse, class Show>
Field named(std::string_view key, Acc acc, Parse parse, Show show) {
  return {key, [acc, parse](ScenarioConfig& c, std::string_view v) { acc(c) = parse(v); },
          [acc, show](const ScenarioConfig& c) { return std::string(show(acc(c))); }};
}

#define QFB_REF(expr) [](auto& c) -> auto& { return expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    f.push_back({"name", [](ScenarioConfig& c, std::string_view v) { c.name = std::string(v); },
                 [](const ScenarioConfig& c) { return c.name; }});

    f.push_back(real("rates.chi_alpha2", QFB_REF(c.rates.chi_alpha2), Group::direct));
    f.push_back(real("rates.Gamma_d", QFB_REF(c.rates.Gamma_d), Group::direct));
    f.push_back(real("rates.eta", QFB_REF(c.rates.eta), Group::direct));
    f.push_back(real("rates.gamma_p", QFB_REF(c.rates.gamma_p), Group::direct));

    f.push_back(real("physical.g", QFB_REF(c.physical.g), Group::physical));
    f.push_back(real("physical.detuning", QFB_REF(c.physical.detuning), Group::physical));
    f.push_back(real("physical.epsilon", QFB_REF(c.physical.epsilon), Group::physical));
    f.push_back(real("physical.kappa", QFB_REF(c.physical.kappa), Group::physical));
    f.push_back(real("physical.eta", QFB_REF(c.physical.eta), Group::physical));

    f.push_back(real("noise.gamma1", QFB_REF(c.noise.gamma1)));
    f.push_back(real("noise.gamma2", QFB_REF(c.noise.gamma2)));
    f.push_back(real("noise.gamma_phi1", QFB_REF(c.noise.gamma_phi1)));
    f.push_back(real("noise.gamma_phi2", QFB_REF(c.noise.gamma_phi2)));
    f.push_back(named(
        "noise.purcell_sign", QFB_REF(c.noise.purcell_sign), parse_purcell_sign,
        [](PurcellSign s) { return to_string(s); }));

    f.push_back(named(
        "feedback.strategy", QFB_REF(c.feedback.strategy), parse_strategy,
        [](Strategy s) { return to_string(s); }));
    f.push_back(real("feedback.u", QFB_REF(c.feedback.u)));
    f.push_back(named(
        "feedback.operator", QFB_REF(c.feedback.op.kind), parse_operator_kind,
        [](OperatorSpec::Kind k) { return to_string(k); }));
    f.push_back(real("feedback.c1", QFB_REF(c.feedback.op.c1)));
    f.push_back(real("feedback.c2", QFB_REF(c.feedback.op.c2)));
    f.push_back(boolean("feedback.one_step_delay", QFB_REF(c.feedback.one_step_delay)));

    f.push_back(real("filter.gamma_ft", QFB_REF(c.feedback.filter.gamma_ft)));
    f.push_back(real("filter.window_T", QFB_REF(c.feedback.filter.window_T)));
    f.push_back(integer("filter.power_P", QFB_REF(c.feedback.filter.power_P)));
    f.push_back(boolean("filter.recursive", QFB_REF(c.feedback.filter.recursive)));

    f.push_back(real("integrator.dt", QFB_REF(c.integrator.dt)));
    f.push_back(real("integrator.t_end", QFB_REF(c.integrator.t_end)));
    f.push_back(integer("integrator.record_stride", QFB_REF(c.integrator.record_stride)));
    f.push_back(real("integrator.positivity_tol", QFB_REF(c.integrator.positivity_tol)));
    f.push_back(boolean("integrator.renormalize", QFB_REF(c.integrator.renormalize)));
    f.push_back(boolean("integrator.hermitize", QFB_REF(c.integrator.hermitize)));
    f.push_back(named(
        "integrator.scheme", QFB_REF(c.integrator.scheme), parse_scheme, [](Scheme s) { return to_string(s); }));
    f.push_back(boolean("integrator.record_current", QFB_REF(c.integrator.record_current)));

    f.push_back(real("death.arm_threshold", QFB_REF(c.integrator.death.arm_threshold)));
    f.push_back(real("death.jump_from", QFB_REF(c.integrator.death.jump_from)));
    f.push_back(real("death.zero_tol", QFB_REF(c.integrator.death.zero_tol)));

    f.push_back(named("run.initial", QFB_REF(c.initial), parse_initial, initial_name));
    f.push_back(named(
        "run.target", QFB_REF(c.integrator.target), parse_bell_state, [](BellState b) { return to_string(b); }));
    f.push_back(integer("run.n_traj", QFB_REF(c.n_traj)));
    f.push_back(integer("run.seed", QFB_REF(c.seed)));
    f.push_back({"run.out", [](ScenarioConfig& c, std::string_view v) { c.out = std::string(v); },
                 [](const ScenarioConfig& c) { return c.out; }});
    f.push_back(boolean("run.emit_trajectories", QFB_REF(c.emit_trajectories)));
    f.push_back(integer("run.emit_count", QFB_REF(c.emit_count)));
    f.push_back(integer("run.workers", QFB_REF(c.workers)));

    f.push_back({"sweep.power_P",
                 [](ScenarioConfig& c, std::string_view v) {
                   std::vector<int> ps;
                   while (!trim(v).empty()) {
                     const auto comma = v.find(',');
                     ps.push_back(parse_integer<int>(trim(v.substr(0, comma))));
                     v = comma == std::string_view::npos ? std::string_view{} : v.substr(comma + 1);
                   }
                   c.sweep_power = std::move(ps);
                 },
                 [](const ScenarioConfig& c) {
                   std::string s;
                   for (std::size_t i = 0; i < c.sweep_power.size(); ++i)
                     s += (i ? "," : "") + std::to_string(c.sweep_power[i]);
                   return s;
                 }});
    f.push_back(boolean("compare.feedback_off", QFB_REF(c.compare_feedback_off)));
    return f;
  }();
  return table;
}

#undef QFB_REF

const Field* find_field(std::string_view key) {
  for (const auto& f : fields())
    if (f.key == key) return &f;
  return nullptr;
}

void check(std::vector<ConfigIssue>& out, bool ok, std::string_view key, std::string_view reason) {
  if (!ok) out.push_back({std::string(key), std::string(reason)});
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::string format_double(double x) {
  std::array<char, 32> buf{};
  auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), p);
}

std::vector<Setting> parse_settings(std::string_view text, std::string_view origin) {
  std::vector<Setting> out;
  std::vector<ConfigIssue> issues;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = std::string(origin) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos || trim(line.substr(0, eq)).empty()) {
      issues.push_back({where, "expected 'key = value'"});
      continue;
    }
    out.push_back({std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))), where});
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
  return out;
}

void apply_settings(ScenarioConfig& cfg, std::span<const Setting> settings) {
  std::vector<ConfigIssue> issues;
  bool touched_direct = false;
  bool touched_physical = false;
  for (const auto& s : settings) {
    const Field* f = find_field(s.key);
    if (!f) {
      issues.push_back({s.key, "unknown key (" + s.origin + ")"});
      continue;
    }
    if (f->group == Group::direct && !touched_direct) {
      touched_direct = true;
      if (cfg.source != RateSource::direct) cfg.physical = {};
      cfg.source = RateSource::direct;
    } else if (f->group == Group::physical && !touched_physical) {
      touched_physical = true;
      if (cfg.source != RateSource::physical) cfg.rates = {};
      cfg.source = RateSource::physical;
    }
    try {
      f->set(cfg, s.value);
    } catch (const std::exception& e) {
      issues.push_back({s.key, e.what() + std::string(" (") + s.origin + ")"});
    }
  }
  if (touched_direct && touched_physical)
    issues.push_back({"rates/physical", "supply either direct rates or physical parameters, not both"});
  auto more = validate(cfg);
  issues.insert(issues.end(), more.begin(), more.end());
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

std::vector<ConfigIssue> validate(const ScenarioConfig& c) {
  std::vector<ConfigIssue> v;
  if (c.source == RateSource::direct) {
    check(v, std::isfinite(c.rates.chi_alpha2), "rates.chi_alpha2", "must be finite");
    check(v, std::isfinite(c.rates.Gamma_d) && c.rates.Gamma_d > 0.0, "rates.Gamma_d", "must be > 0");
    check(v, c.rates.eta > 0.0 && c.rates.eta <= 1.0, "rates.eta", "must lie in (0, 1]");
    check(v, finite_nonneg(c.rates.gamma_p), "rates.gamma_p", "must be >= 0");
  } else {
    const auto& p = c.physical;
    check(v, std::isfinite(p.g) && p.g != 0.0, "physical.g", "must be finite and nonzero");
    check(v, std::isfinite(p.detuning) && p.detuning != 0.0, "physical.detuning", "must be finite and nonzero");
    check(v, std::isfinite(p.epsilon) && p.epsilon != 0.0, "physical.epsilon", "must be finite and nonzero");
    check(v, std::isfinite(p.kappa) && p.kappa > 0.0, "physical.kappa", "must be > 0");
    check(v, p.eta > 0.0 && p.eta <= 1.0, "physical.eta", "must lie in (0, 1]");
  }
  check(v, finite_nonneg(c.noise.gamma1), "noise.gamma1", "must be >= 0");
  check(v, finite_nonneg(c.noise.gamma2), "noise.gamma2", "must be >= 0");
  check(v, finite_nonneg(c.noise.gamma_phi1), "noise.gamma_phi1", "must be >= 0");
  check(v, finite_nonneg(c.noise.gamma_phi2), "noise.gamma_phi2", "must be >= 0");

  const auto& fb = c.feedback;
  check(v, std::isfinite(fb.u), "feedback.u", "must be finite");
  check(v, std::isfinite(fb.op.c1), "feedback.c1", "must be finite");
  check(v, std::isfinite(fb.op.c2), "feedback.c2", "must be finite");
  check(v, finite_nonneg(fb.filter.gamma_ft), "filter.gamma_ft", "must be >= 0");
  check(v, std::isfinite(fb.filter.window_T) && fb.filter.window_T > 0.0, "filter.window_T", "must be > 0");
  check(v, fb.filter.power_P >= 1, "filter.power_P", "must be >= 1");

  const auto& in = c.integrator;
  const bool dt_ok = std::isfinite(in.dt) && in.dt > 0.0;
  check(v, dt_ok, "integrator.dt", "must be > 0");
  check(v, std::isfinite(in.t_end) && (!dt_ok || in.t_end >= in.dt), "integrator.t_end", "must be >= dt");
  check(v, in.record_stride >= 1, "integrator.record_stride", "must be >= 1");
  check(v, finite_nonneg(in.positivity_tol), "integrator.positivity_tol", "must be >= 0");
  check(v, in.death.arm_threshold >= 0.0 && in.death.arm_threshold <= 1.0, "death.arm_threshold",
        "must lie in [0, 1]");
  check(v, in.death.jump_from >= 0.0 && in.death.jump_from <= 1.0, "death.jump_from", "must lie in [0, 1]");
  check(v, in.death.zero_tol >= 0.0 && in.death.zero_tol < 1.0, "death.zero_tol", "must lie in [0, 1)");

  check(v, c.n_traj >= 1, "run.n_traj", "must be >= 1");
  check(v, c.workers >= 1, "run.workers", "must be >= 1");
  check(v, !c.out.empty(), "run.out", "must not be empty");
  check(v, std::all_of(c.sweep_power.begin(), c.sweep_power.end(), [](int p) { return p >= 1; }),
        "sweep.power_P", "entries must be >= 1");
  return v;
}

ScenarioConfig parse_config(std::string_view text, ScenarioConfig base) {
  const auto settings = parse_settings(text);
  apply_settings(base, settings);
  return base;
}

std::string emit_config(const ScenarioConfig& cfg) {
  std::string s;
  for (const auto& f : fields()) {
    if (f.group == Group::direct && cfg.source != RateSource::direct) continue;
    if (f.group == Group::physical && cfg.source != RateSource::physical) continue;
    s += std::string(f.key) + " = " + f.get(cfg) + "\n";
  }
  return s;
}

std::vector<std::string_view> config_keys() {
  std::vector<std::string_view> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

namespace {

constexpr std::array<std::string_view, 5> kPresets{"fig2a", "fig2bc", "fig3", "fig4", "eta08"};

ScenarioConfig preset_base(std::string_view name) {
  ScenarioConfig c;
  c.name = std::string(name);
  c.rates = {.chi_alpha2 = 0.0, .Gamma_d = 1.0, .eta = 1.0, .gamma_p = 1.0};
  c.noise.gamma1 = 0.1;
  c.noise.gamma2 = 0.1;
  c.n_traj = 500;
  c.out = "runs/" + std::string(name);
  return c;
}

void fig3_feedback(ScenarioConfig& c) {
  c.feedback.strategy = Strategy::filtered_current;
  c.feedback.u = 10.0;
  c.feedback.filter.gamma_ft = 0.006;
  c.feedback.filter.window_T = 2.0;  // 2000 steps at dt = 1e-3
  c.feedback.filter.power_P = 1;
}

}  // namespace

std::span<const std::string_view> preset_names() { return kPresets; }

ScenarioConfig preset(std::string_view name) {
  ScenarioConfig c = preset_base(name);
  if (name == "fig2a") {
    c.feedback.strategy = Strategy::markovian_direct;
    c.feedback.u = 0.1;
  } else if (name == "fig2bc") {
    c.feedback.strategy = Strategy::state_estimate;
    c.feedback.u = 1.0;
  } else if (name == "fig3" || name == "eta08") {
    fig3_feedback(c);
    c.sweep_power = {1, 2, 3};
    if (name == "eta08") c.rates.eta = 0.8;
  } else if (name == "fig4") {
    fig3_feedback(c);
    c.n_traj = 1000;
    c.initial = BellState::Phi_plus;
    c.compare_feedback_off = true;
    // The conditional concurrence decays exponentially and never hits an
    // exact zero on a finite grid.
    c.integrator.death.zero_tol = 1e-3;
  } else {
    throw ConfigError({{"preset", "unknown preset '" + std::string(name) + "'"}});
  }
  return c;
}

std::vector<Setting> env_settings(std::span<const std::pair<std::string, std::string>> env) {
  static constexpr std::pair<std::string_view, std::string_view> shorthands[] = {
      {"QFB_SEED", "run.seed"},
      {"QFB_TRAJECTORIES", "run.n_traj"},
      {"QFB_WORKERS", "run.workers"},
      {"QFB_OUT", "run.out"},
  };
  auto env_name = [](std::string_view key) {
    std::string s = "QFB_";
    for (char ch : key) s += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
  };

  std::vector<Setting> out;
  for (const auto& [name, value] : env) {
    if (!name.starts_with("QFB_") || name == "QFB_PRESET" || name == "QFB_CONFIG") continue;
    std::string key;
    for (const auto& [n, k] : shorthands)
      if (name == n) key = k;
    if (key.empty())
      for (const auto& f : fields())
        if (env_name(f.key) == name) key = f.key;
    if (key.empty()) key = name;  // reported as unknown by apply_settings
    out.push_back({key, value, name});
  }
  return out;
}

std::string_view ensemble_csv_header() {
  return "t,mean_concurrence,std_concurrence,mean_fidelity,std_fidelity,"
         "concurrence_of_mean_state,fidelity_of_mean_state,purity_of_mean_state";
}

std::string_view trajectory_csv_header() { return "t,concurrence,fidelity,purity"; }

void write_ensemble_csv(std::ostream& os, const EnsembleStats& st) {
  os << ensemble_csv_header() << '\n';
  for (std::size_t i = 0; i < st.times.size(); ++i) {
    os << format_double(st.times[i]) << ',' << format_double(st.mean_concurrence[i]) << ','
       << format_double(st.std_concurrence[i]) << ',' << format_double(st.mean_fidelity[i]) << ','
       << format_double(st.std_fidelity[i]) << ',' << format_double(st.concurrence_of_mean_state[i]) << ','
       << format_double(st.fidelity_of_mean_state[i]) << ',' << format_double(st.purity_of_mean_state[i]) << '\n';
  }
}

void write_trajectory_csv(std::ostream& os, const TrajectoryRecord& rec) {
  os << trajectory_csv_header() << '\n';
  for (std::size_t i = 0; i < rec.times.size(); ++i)
    os << format_double(rec.times[i]) << ',' << format_double(rec.concurrence[i]) << ','
       << format_double(rec.fidelity[i]) << ',' << format_double(rec.purity[i]) << '\n';
}

std::vector<RunVariant> run_variants(const ScenarioConfig& cfg) {
  std::vector<RunVariant> v{{"ensemble.csv", cfg.feedback}};
  for (int p : cfg.sweep_power) {
    FeedbackConfig fb = cfg.feedback;
    fb.filter.power_P = p;
    v.push_back({"ensemble_P" + std::to_string(p) + ".csv", fb});
  }
  if (cfg.compare_feedback_off) {
    FeedbackConfig fb = cfg.feedback;
    fb.strategy = Strategy::none;
    v.push_back({"ensemble_feedback_off.csv", fb});
  }
  return v;
}

namespace {

class IoError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class Writer>
void write_file(const std::filesystem::path& path, Writer&& w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.imbue(std::locale::classic());
  w(os);
  os.flush();
  if (!os) throw IoError("write failed: " + path.string());
}

}  // namespace

int run(const ScenarioConfig& cfg, std::ostream& log) {
  if (auto issues = validate(cfg); !issues.empty()) {
    log << ConfigError(std::move(issues)).what() << '\n';
    return exit_config;
  }
  const std::filesystem::path dir(cfg.out);
  try {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    write_file(dir / "manifest.cfg", [&](std::ostream& os) {
      os << "# qfb " << version() << "\n# seed " << cfg.seed << "\n" << emit_config(cfg);
    });

    const ModelRates model = cfg.model_rates();
    const DensityMatrix rho0 = cfg.initial_state();
    std::vector<std::pair<std::string, SuddenDeathSummary>> deaths;

    bool first = true;
    for (const auto& variant : run_variants(cfg)) {
      EnsembleOptions opts;
      opts.workers = cfg.workers;
      opts.keep_trajectories = first && cfg.emit_trajectories ? cfg.emit_count : 0;
      const auto st = run_ensemble(model, variant.feedback, cfg.integrator, cfg.n_traj, cfg.seed, rho0, opts);

      write_file(dir / variant.file, [&](std::ostream& os) { write_ensemble_csv(os, st); });
      for (const auto& rec : st.kept)
        write_file(dir / ("traj_" + std::to_string(rec.stream_id) + ".csv"),
                   [&](std::ostream& os) { write_trajectory_csv(os, rec); });
      if (cfg.initial) deaths.emplace_back(variant.file, sudden_death_stats(st.deaths, cfg.integrator.t_end));

      log << cfg.name << ": " << variant.file << " done, " << st.n_trajectories << "/" << cfg.n_traj
          << " trajectories, final mean concurrence " << st.mean_concurrence.back() << '\n';
      first = false;
    }

    if (!deaths.empty())
      write_file(dir / "sudden_death.csv", [&](std::ostream& os) {
        os << "variant,n,dead,jumps,death_fraction\n";
        for (const auto& [file, s] : deaths)
          os << file << ',' << s.n << ',' << s.dead << ',' << s.jumps << ',' << format_double(s.death_fraction)
             << '\n';
      });
  } catch (const EnsembleFailure& e) {
    log << "error: " << e.what() << '\n';
    return exit_integration;
  } catch (const IoError& e) {
    log << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << '\n';
    return exit_config;
  }
  return exit_ok;
}

}  // namespace qfb
