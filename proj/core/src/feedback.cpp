#include "qfb/feedback.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qfb {

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::none: return "none";
    case Strategy::markovian_direct: return "markovian_direct";
    case Strategy::state_estimate: return "state_estimate";
    case Strategy::filtered_current: return "filtered_current";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::none, Strategy::markovian_direct, Strategy::state_estimate,
                 Strategy::filtered_current})
    if (to_string(s) == name) return s;
  throw std::invalid_argument("unknown feedback strategy '" + std::string(name) + "'");
}

std::string_view to_string(OperatorSpec::Kind k) {
  switch (k) {
    case OperatorSpec::Kind::Jx: return "Jx";
    case OperatorSpec::Kind::Jx_bar: return "Jx_bar";
    case OperatorSpec::Kind::weighted_x: return "weighted_x";
  }
  return "?";
}

OperatorSpec::Kind parse_operator_kind(std::string_view name) {
  for (auto k : {OperatorSpec::Kind::Jx, OperatorSpec::Kind::Jx_bar, OperatorSpec::Kind::weighted_x})
    if (to_string(k) == name) return k;
  throw std::invalid_argument("unknown feedback operator '" + std::string(name) + "'");
}

void FeedbackConfig::validate() const {
  if (!std::isfinite(u)) throw std::invalid_argument("feedback.u must be finite");
  if (op.kind == OperatorSpec::Kind::weighted_x && (!std::isfinite(op.c1) || !std::isfinite(op.c2)))
    throw std::invalid_argument("feedback weights must be finite");
  if (!(filter.gamma_ft >= 0.0) || !std::isfinite(filter.gamma_ft))
    throw std::invalid_argument("filter.gamma_ft must be >= 0");
  if (!(filter.window_T > 0.0) || !std::isfinite(filter.window_T))
    throw std::invalid_argument("filter.window_T must be > 0");
  if (filter.power_P < 1) throw std::invalid_argument("filter.power_P must be >= 1");
}

Mat4 feedback_operator(const OperatorSpec& spec) {
  switch (spec.kind) {
    case OperatorSpec::Kind::Jx: return collective_op(CollectiveKind::Jx);
    case OperatorSpec::Kind::Jx_bar: return collective_op(CollectiveKind::Jx_bar);
    case OperatorSpec::Kind::weighted_x: return collective_op(CollectiveKind::weighted_x, spec.c1, spec.c2);
  }
  throw std::invalid_argument("feedback_operator: invalid kind");
}

double filter_normalization(const FilterParams& p, double Gamma_m) {
  const double scale = 2.0 * std::sqrt(Gamma_m);
  if (p.gamma_ft == 0.0) return scale * p.window_T;
  return scale * -std::expm1(-p.gamma_ft * p.window_T) / p.gamma_ft;
}

CurrentFilter::CurrentFilter(const FilterParams& params, double dt, double Gamma_m)
    : recursive_(params.recursive) {
  if (!(dt > 0.0)) throw std::invalid_argument("CurrentFilter: dt must be positive");
  if (!(params.window_T > 0.0)) throw std::invalid_argument("CurrentFilter: window_T must be positive");
  if (!(params.gamma_ft >= 0.0)) throw std::invalid_argument("CurrentFilter: gamma_ft must be >= 0");
  if (!(Gamma_m > 0.0))
    throw std::invalid_argument("CurrentFilter: filtered feedback needs Gamma_m > 0");

  // guard against T/dt landing a rounding error above an integer
  const auto m = static_cast<std::size_t>(std::ceil(params.window_T / dt - 1e-9));
  const std::size_t len = std::max<std::size_t>(m, 1);
  weights_.resize(len);
  for (std::size_t j = 0; j < len; ++j)
    weights_[len - 1 - j] = std::exp(-params.gamma_ft * static_cast<double>(j) * dt);
  ring_.assign(2 * len, 0.0);
  head_ = len - 1;
  norm_ = filter_normalization(params, Gamma_m);
  decay_ = std::exp(-params.gamma_ft * dt);
  tail_weight_ = std::exp(-params.gamma_ft * static_cast<double>(len) * dt);
}

double CurrentFilter::exact_sum() const {
  // Window is ring_[head_ + 1 .. head_ + len], oldest first. Slots not yet
  // written hold zero, so the warm-up sum needs no special case.
  const std::size_t len = weights_.size();
  const double* x = ring_.data() + head_ + 1;
  const double* w = weights_.data();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  std::size_t j = 0;
  for (; j + 4 <= len; j += 4) {
    s0 += w[j] * x[j];
    s1 += w[j + 1] * x[j + 1];
    s2 += w[j + 2] * x[j + 2];
    s3 += w[j + 3] * x[j + 3];
  }
  for (; j < len; ++j) s0 += w[j] * x[j];
  return (s0 + s1) + (s2 + s3);
}

double CurrentFilter::update(double dI) {
  const std::size_t len = weights_.size();
  head_ = (head_ + 1) % len;
  const double dropped = filled_ == len ? ring_[head_] : 0.0;
  ring_[head_] = dI;
  ring_[head_ + len] = dI;
  if (filled_ < len) ++filled_;

  if (recursive_) {
    running_ = decay_ * running_ + dI - tail_weight_ * dropped;
    value_ = running_ / norm_;
  } else {
    value_ = exact_sum() / norm_;
  }
  return value_;
}

double control_value(const FeedbackConfig& fb, const ControlSignals& s) {
  switch (fb.strategy) {
    case Strategy::none: return 0.0;
    case Strategy::markovian_direct:
      throw std::logic_error("control_value: Markovian direct feedback enters through markovian_fb_terms");
    case Strategy::state_estimate:
      if (!s.jz) throw std::invalid_argument("control_value: state_estimate needs <J_z>");
      return fb.u * *s.jz;
    case Strategy::filtered_current: {
      if (!s.R) throw std::invalid_argument("control_value: filtered_current needs R");
      const double r = *s.R;
      const int p = fb.filter.power_P;
      const double mag = std::pow(std::abs(r), p);
      return fb.u * std::copysign(mag, r);
    }
  }
  throw std::invalid_argument("control_value: invalid strategy");
}

}  // namespace qfb
