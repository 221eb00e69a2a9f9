#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "qfb/qstate.hpp"

namespace qfb {

enum class Strategy { none, markovian_direct, state_estimate, filtered_current };

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

struct OperatorSpec {
  enum class Kind { Jx, Jx_bar, weighted_x };
  Kind kind = Kind::Jx;
  double c1 = 1.0;  // weights, weighted_x only
  double c2 = 1.0;

  friend bool operator==(const OperatorSpec&, const OperatorSpec&) = default;
};

std::string_view to_string(OperatorSpec::Kind k);
OperatorSpec::Kind parse_operator_kind(std::string_view name);

struct FilterParams {
  double gamma_ft = 0.006;  // exponential weight, units of Gamma_d
  double window_T = 2.0;    // window length, units of 1/Gamma_d
  int power_P = 1;
  /// O(1) recursive update instead of the exact windowed sum.
  bool recursive = false;

  friend bool operator==(const FilterParams&, const FilterParams&) = default;
};

struct FeedbackConfig {
  Strategy strategy = Strategy::none;
  double u = 0.0;
  OperatorSpec op;
  FilterParams filter;
  /// Apply the control computed at the previous step (sensitivity studies).
  bool one_step_delay = false;

  /// Throws std::invalid_argument listing the first violated invariant.
  void validate() const;

  friend bool operator==(const FeedbackConfig&, const FeedbackConfig&) = default;
};

/// Unit-gain Hermitian feedback operator.
Mat4 feedback_operator(const OperatorSpec& spec);

/// R = N = 2 sqrt(Gamma_m) (1 - exp(-gamma_ft T)) / gamma_ft, so that a noiseless
/// current from a state with <J_z> = 2 filters to R = 1. The gamma_ft -> 0 limit
/// is 2 sqrt(Gamma_m) T.
double filter_normalization(const FilterParams& p, double Gamma_m);

/// Exponentially weighted window over the last ceil(T/dt) current increments:
///   R(t_n) = (1/N) sum_{k > n - M} exp(-gamma_ft (t_n - t_k)) dI_k
/// Increments are time-stamped at the left end of their step.
class CurrentFilter {
 public:
  /// Throws std::invalid_argument for dt <= 0, T <= 0, gamma_ft < 0 or Gamma_m <= 0.
  CurrentFilter(const FilterParams& params, double dt, double Gamma_m);

  /// Push one increment and return the updated R.
  double update(double dI);

  double value() const { return value_; }
  double normalization() const { return norm_; }
  std::size_t window_length() const { return weights_.size(); }
  std::size_t filled() const { return filled_; }

 private:
  double exact_sum() const;

  // oldest-first weights: weights_[len - 1 - j] = exp(-gamma_ft j dt)
  std::vector<double> weights_;
  // doubled ring: slot i is mirrored at i + len so the window is contiguous
  std::vector<double> ring_;
  std::size_t head_ = 0;  // slot of the newest increment
  std::size_t filled_ = 0;
  double norm_;
  double decay_;       // exp(-gamma_ft dt)
  double tail_weight_; // exp(-gamma_ft M dt)
  bool recursive_;
  double running_ = 0.0;
  double value_ = 0.0;
};

struct ControlSignals {
  std::optional<double> dI;
  std::optional<double> jz;  // <J_z>_c
  std::optional<double> R;
};

/// Scalar multiplying the unit feedback operator. Markovian direct feedback is
/// structural (see markovian_fb_terms) and raises std::logic_error here; a
/// required signal that is missing raises std::invalid_argument.
/// For even powers the sign of R is reattached: u sign(R) |R|^P.
double control_value(const FeedbackConfig& fb, const ControlSignals& s);

}  // namespace qfb
