#include "photocount/params.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace photocount {

namespace {

constexpr double kBoltzmann = 1.380649e-23;  // J/K

// Absorbs round-off when tau is an exact multiple of T (tau = T is the
// design operating point and must give alpha = 1, delta = 0).
constexpr double kFloorGuard = 1e-12;

bool is_finite(double x) { return std::isfinite(x); }

}  // namespace

const char* to_string(Regime r) {
  return r == Regime::kSampleGtHold ? "T>tau" : "T<=tau";
}

void ReceiverConfig::validate() const {
  if (!is_finite(sampling_period) || sampling_period <= 0.0 || sampling_period > 1.0)
    throw InvalidArgument("sampling period T must lie in (0, 1]");
  const double n = 1.0 / sampling_period;
  if (std::fabs(n - std::round(n)) > 1e-9 * n)
    throw InvalidArgument("1/T must be an integer number of samples per symbol");
  if (!is_finite(holding_time) || holding_time <= 0.0 || holding_time >= 1.0)
    throw InvalidArgument("holding time tau must lie in (0, 1)");
  if (!is_finite(threshold) || threshold <= 0.0)
    throw InvalidArgument("decision threshold xi must be positive");
  if (!is_finite(shot_sigma) || shot_sigma < 0.0)
    throw InvalidArgument("shot noise sigma must be >= 0");
  if (!is_finite(thermal_sigma) || thermal_sigma < 0.0)
    throw InvalidArgument("thermal noise sigma0 must be >= 0");
}

int ReceiverConfig::samples_per_symbol() const {
  return static_cast<int>(std::lround(1.0 / sampling_period));
}

void ChannelParams::validate() const {
  if (!is_finite(lambda0) || lambda0 < 0.0)
    throw InvalidArgument("lambda0 must be >= 0");
  if (!is_finite(lambda1) || lambda1 <= 0.0)
    throw InvalidArgument("lambda1 must be > 0");
  if (lambda1 < lambda0)
    throw InvalidArgument("lambda1 must be >= lambda0");
}

double gaussian_q(double x) {
  // glibc erfc is accurate to a few ulp over its whole range; it underflows
  // to 0 past x ~ 38.5, which is the intended clamp.
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

DerivedParams derive_params(const ReceiverConfig& cfg) {
  cfg.validate();
  DerivedParams d;
  const double T = cfg.sampling_period;
  const double tau = cfg.holding_time;

  d.samples = cfg.samples_per_symbol();
  d.regime = T > tau ? Regime::kSampleGtHold : Regime::kSampleLeHold;

  // sigma == 0: every pulse sits exactly at height 1, so it misses xi only
  // when xi > 1; sigma0 == 0: noise never reaches a positive threshold.
  if (cfg.shot_sigma > 0.0)
    d.q = gaussian_q((1.0 - cfg.threshold) / cfg.shot_sigma);
  else
    d.q = cfg.threshold > 1.0 ? 1.0 : 0.0;
  d.p = cfg.thermal_sigma > 0.0 ? gaussian_q(cfg.threshold / cfg.thermal_sigma) : 0.0;

  d.alpha = static_cast<int>(std::floor(tau / T + kFloorGuard));
  d.delta = tau - d.alpha * T;
  if (d.delta < 0.0) d.delta = 0.0;

  d.tau_equiv = d.regime == Regime::kSampleGtHold ? 1.5 * T : tau + 0.5 * T;
  d.max_count = static_cast<int>(std::floor(1.0 / d.tau_equiv)) + 1;
  return d;
}

double thermal_sigma_from_physical(double temperature_kelvin,
                                   double symbol_duration_s,
                                   double load_resistance_ohm,
                                   double pulse_height) {
  if (temperature_kelvin < 0.0 || symbol_duration_s <= 0.0 ||
      load_resistance_ohm <= 0.0 || pulse_height <= 0.0)
    throw InvalidArgument("physical thermal-noise inputs must be positive");
  const double variance =
      2.0 * kBoltzmann * temperature_kelvin * symbol_duration_s / load_resistance_ohm;
  return std::sqrt(variance) / pulse_height;
}

}  // namespace photocount
