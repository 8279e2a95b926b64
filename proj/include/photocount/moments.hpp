// ============================================================================
// moments.hpp -- count moments of the finite-rate sampling receiver
//
// n_s is the number of 0->1 transitions among the quantized samples of one
// symbol. Closed forms are given for the noiseless receiver (exact and
// small-rate approximations), with shot noise on the pulse amplitude, and
// with shot plus thermal noise. Each result also carries the parameters
// (lambda', tau') of the ideal dead-time model that shares its moments.
// ============================================================================
#pragma once

#include "photocount/params.hpp"

namespace photocount {

enum class NoiseModel { kNone, kShot, kShotThermal };

const char* to_string(NoiseModel n);

struct CountMoments {
  double mean = 0.0;           // E[n_s]
  double variance = 0.0;       // D[n_s]
  double second_moment = 0.0;  // E[n_s^2] = variance + mean^2
  Regime regime = Regime::kSampleLeHold;
  NoiseModel noise = NoiseModel::kNone;
  double lambda_equiv = 0.0;   // lambda'
  double tau_equiv = 0.0;      // tau' = 3T/2 (T > tau) or tau + T/2

  // False when lambda*tau or lambda*T >= 0.5, outside the range the
  // small-rate expansions were derived for.
  bool within_validity = true;
  // False when an approximate variance came out <= 0; the numbers are
  // returned unclamped and must not feed a binomial fit.
  bool variance_valid = true;
};

/// Exact noiseless moments (noise fields of cfg are ignored).
CountMoments moments_exact_noiseless(double lambda, const ReceiverConfig& cfg);

/// Small lambda*T, lambda*tau approximations of the noiseless moments.
CountMoments moments_approx_noiseless(double lambda, const ReceiverConfig& cfg);

/// Shot noise only: the arrival rate is thinned to (1 - q) lambda.
CountMoments moments_shot(double lambda, const ReceiverConfig& cfg);

/// Shot and thermal noise. Returns all-zero moments when both the thinned
/// rate and the thermal crossing probability vanish.
CountMoments moments_full(double lambda, const ReceiverConfig& cfg);

/// Binomial (N, P) with N P = E[n_s], N real valued.
struct BinomialApprox {
  double trials = 0.0;  // N
  double prob = 0.0;    // P

  double mean() const { return trials * prob; }
  double variance() const { return trials * prob * (1.0 - prob); }
};

/// Binomial approximation of the count likelihood from the equivalent
/// parameters. T > tau: N = 1/(2 tau'), P = 2 tau' mean. T <= tau: both are
/// corrected by the thermal-noise bracket
///   B = p delta / (tau' (lambda' T + p)) + (alpha - 1) p / (mean tau').
/// Throws ApproximationError("binomial_breakdown") when P is outside (0, 1)
/// or N <= mean.
BinomialApprox binomial_approx(const CountMoments& moments, const DerivedParams& derived);

}  // namespace photocount
