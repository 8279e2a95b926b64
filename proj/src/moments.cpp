#include "photocount/moments.hpp"

#include <cmath>
#include <string>

namespace photocount {

namespace {

constexpr double kValidityLimit = 0.5;

void check_rate(double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw InvalidArgument("photon rate lambda must be >= 0");
}

// Fills second moment and validity flags once mean/variance are set.
CountMoments& finish(CountMoments& m, double lambda, const ReceiverConfig& cfg) {
  m.second_moment = m.variance + m.mean * m.mean;
  m.within_validity = lambda * cfg.holding_time < kValidityLimit &&
                      lambda * cfg.sampling_period < kValidityLimit;
  m.variance_valid = m.variance > 0.0 || (m.mean == 0.0 && m.variance == 0.0);
  return m;
}

// Small-rate moments of the ideal dead-time model with rate `rate`,
// shared by the noiseless and shot-noise approximations.
CountMoments small_rate_moments(double rate, const ReceiverConfig& cfg, const DerivedParams& d) {
  const double T = cfg.sampling_period;
  const double tau = cfg.holding_time;
  CountMoments m;
  m.regime = d.regime;
  if (d.regime == Regime::kSampleGtHold) {
    m.lambda_equiv = tau * rate / T;
    m.tau_equiv = 1.5 * T;
  } else {
    m.lambda_equiv = rate;
    m.tau_equiv = tau + 0.5 * T;
  }
  m.mean = m.lambda_equiv * std::exp(-m.lambda_equiv * m.tau_equiv);
  m.variance = m.mean - 2.0 * m.tau_equiv * m.mean * m.mean;
  return m;
}

}  // namespace

const char* to_string(NoiseModel n) {
  switch (n) {
    case NoiseModel::kNone: return "none";
    case NoiseModel::kShot: return "shot";
    case NoiseModel::kShotThermal: return "shot+thermal";
  }
  return "?";
}

CountMoments moments_exact_noiseless(double lambda, const ReceiverConfig& cfg) {
  check_rate(lambda);
  const DerivedParams d = derive_params(cfg);
  const double T = cfg.sampling_period;
  const double tau = cfg.holding_time;

  CountMoments m;
  m.regime = d.regime;
  m.noise = NoiseModel::kNone;
  if (d.regime == Regime::kSampleGtHold) {
    const double low = std::exp(-lambda * tau);
    m.mean = low * (1.0 - low) / T;
    m.second_moment = m.mean + m.mean * m.mean * (1.0 + 2.0 * T * T - 3.0 * T);
    m.lambda_equiv = tau * lambda / T;
    m.tau_equiv = 1.5 * T;
  } else {
    const double a = d.alpha;
    const double rise = -std::expm1(-lambda * T);
    m.mean = std::exp(-lambda * tau) * rise / T;
    // P(rise in a shortened interval T - delta) / P(rise in T); the limit
    // lambda -> 0 is (T - delta)/T.
    const double ratio = lambda > 0.0 ? -std::expm1(-lambda * (T - d.delta)) / rise
                                      : (T - d.delta) / T;
    const double pairs = (1.0 - (a + 1.0) * T) * (1.0 - (a + 2.0) * T) +
                         2.0 * T * (1.0 - (a + 1.0) * T) * ratio;
    m.second_moment = m.mean + m.mean * m.mean * pairs;
    m.lambda_equiv = lambda;
    m.tau_equiv = tau + 0.5 * T;
  }
  m.variance = m.second_moment - m.mean * m.mean;
  return finish(m, lambda, cfg);
}

CountMoments moments_approx_noiseless(double lambda, const ReceiverConfig& cfg) {
  check_rate(lambda);
  const DerivedParams d = derive_params(cfg);
  CountMoments m = small_rate_moments(lambda, cfg, d);
  m.noise = NoiseModel::kNone;
  return finish(m, lambda, cfg);
}

CountMoments moments_shot(double lambda, const ReceiverConfig& cfg) {
  check_rate(lambda);
  const DerivedParams d = derive_params(cfg);
  CountMoments m = small_rate_moments((1.0 - d.q) * lambda, cfg, d);
  m.noise = NoiseModel::kShot;
  return finish(m, lambda, cfg);
}

CountMoments moments_full(double lambda, const ReceiverConfig& cfg) {
  check_rate(lambda);
  const DerivedParams d = derive_params(cfg);
  const double T = cfg.sampling_period;
  const double tau = cfg.holding_time;
  const double p = d.p;

  CountMoments m;
  m.regime = d.regime;
  m.noise = NoiseModel::kShotThermal;
  m.lambda_equiv = (1.0 - d.q) * lambda;
  m.tau_equiv = d.tau_equiv;
  const double rate = m.lambda_equiv;

  if (d.regime == Regime::kSampleGtHold) {
    const double low = std::exp(-rate * tau) * (1.0 - p);
    m.mean = low * (1.0 - low) / T;
    m.variance = m.mean + (2.0 * T * T - 3.0 * T) * m.mean * m.mean;
  } else {
    if (rate * T + p == 0.0) {
      // no signal and no thermal crossings: nothing is ever recorded
      return finish(m, lambda, cfg);
    }
    const double low = std::exp(-rate * tau) * (1.0 - p);
    m.mean = low * (1.0 - std::exp(-rate * T) * (1.0 - p)) / T;
    m.variance = m.mean * (1.0 + 2.0 * (d.alpha - 1) * p) +
                 2.0 * m.mean * m.mean * (-(tau + 0.5 * T) + p * d.delta / (rate * T + p));
  }
  return finish(m, lambda, cfg);
}

BinomialApprox binomial_approx(const CountMoments& moments, const DerivedParams& derived) {
  const double mean = moments.mean;
  const double tau_eq = moments.tau_equiv;
  if (!(mean > 0.0) || !(tau_eq > 0.0))
    throw ApproximationError("binomial_breakdown", "mean count must be positive");

  BinomialApprox b;
  if (derived.regime == Regime::kSampleGtHold) {
    b.trials = 1.0 / (2.0 * tau_eq);
    b.prob = 2.0 * tau_eq * mean;
  } else {
    const double p = derived.p;
    const double rate_t = moments.lambda_equiv / derived.samples;  // lambda' T
    const double thermal = p > 0.0 ? p * derived.delta / (tau_eq * (rate_t + p)) +
                                         (derived.alpha - 1) * p / (mean * tau_eq)
                                   : 0.0;
    b.trials = 1.0 / (2.0 * tau_eq) / (1.0 - thermal);
    b.prob = 2.0 * tau_eq * mean * (1.0 - thermal);
  }
  if (!(b.prob > 0.0 && b.prob < 1.0) || !(b.trials > mean))
    throw ApproximationError("binomial_breakdown",
                             "P = " + std::to_string(b.prob) + ", N = " +
                                 std::to_string(b.trials) + ", mean = " + std::to_string(mean));
  return b;
}

}  // namespace photocount
