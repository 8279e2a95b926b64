// ============================================================================
// params.hpp -- receiver/channel parameters and the Gaussian tail function
//
// All quantities are normalized: the symbol lasts 1, a single held pulse has
// mean height 1. Sampling period, holding time and noise levels are expressed
// in those units.
// ============================================================================
#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace photocount {

/// Rejected input (bad configuration, out-of-domain argument).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An analytic approximation broke down at the requested operating point.
/// `flag()` names the failed condition so callers can report it.
class ApproximationError : public std::runtime_error {
 public:
  ApproximationError(std::string flag, const std::string& what)
      : std::runtime_error(flag + ": " + what), flag_(std::move(flag)) {}
  const std::string& flag() const noexcept { return flag_; }

 private:
  std::string flag_;
};

enum class Regime {
  kSampleGtHold,  // T > tau
  kSampleLeHold,  // T <= tau
};

const char* to_string(Regime r);

struct ReceiverConfig {
  double sampling_period = 0.01;  // T, 1/T samples per symbol
  double holding_time = 0.01;     // tau
  double threshold = 0.3;         // xi
  double shot_sigma = 0.0;        // sigma, std. dev. of pulse amplitude
  double thermal_sigma = 0.0;     // sigma0, std. dev. of per-sample noise

  /// Throws InvalidArgument unless 0 < T <= 1 with 1/T integral,
  /// 0 < tau < 1, xi > 0 and both sigmas >= 0.
  void validate() const;

  /// 1/T rounded to the nearest integer (call after validate()).
  int samples_per_symbol() const;
};

struct ChannelParams {
  double lambda0 = 0.0;  // mean photoelectrons per symbol, symbol 0
  double lambda1 = 0.0;  // mean photoelectrons per symbol, symbol 1

  double signal() const { return lambda1 - lambda0; }
  void validate() const;
};

struct DerivedParams {
  double q = 0.0;         // Q((1 - xi) / sigma): a pulse sample misses xi
  double p = 0.0;         // Q(xi / sigma0): a noise-only sample crosses xi
  int alpha = 0;          // floor(tau / T)
  double delta = 0.0;     // tau - alpha * T, in [0, T)
  double tau_equiv = 0.0; // 3T/2 or tau + T/2 depending on the regime
  int max_count = 0;      // floor(1 / tau_equiv) + 1
  int samples = 0;        // 1/T
  Regime regime = Regime::kSampleLeHold;
};

/// Upper tail of the standard normal, Q(x) = P(Z > x).
double gaussian_q(double x);

/// Aggregates q, p, alpha, delta and the equivalent dead time for `cfg`.
DerivedParams derive_params(const ReceiverConfig& cfg);

/// Thermal noise level sigma0 = sqrt(2 k T0 Ts / R) expressed relative to the
/// mean pulse height `pulse_height` (same voltage unit as the noise).
double thermal_sigma_from_physical(double temperature_kelvin,
                                   double symbol_duration_s,
                                   double load_resistance_ohm,
                                   double pulse_height = 1.0);

}  // namespace photocount
