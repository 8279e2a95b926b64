// ============================================================================
// subpoisson.hpp -- dead-time counting distribution of an ideal receiver
//
// A stationary Poisson stream of rate lambda (per symbol) feeds a counter
// with extending dead time tau: an arrival is recorded iff no other arrival
// occurred in the preceding tau. The count over one symbol follows a
// sub-Poisson law with mean lambda e^{-lambda tau}.
// ============================================================================
#pragma once

#include <cstdint>
#include <vector>

namespace photocount {

struct SubPoissonDist {
  double lambda = 0.0;
  double tau = 0.0;
  int max_count = 0;        // M = floor(1/tau) + 1
  std::vector<double> pmf;  // indexed n = 0..M

  double total() const;
  double mean() const;
  double variance() const;
};

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

struct EquivalentParams {
  double lambda = 0.0;  // lambda'
  double tau = 0.0;     // tau'
};

/// Largest lambda*tau accepted by subpoisson_pmf.
inline constexpr double kSeriesValidity = 0.5;

/// Exact PMF of the recorded count, evaluated from the alternating
/// binomial-moment series in multiprecision.
///
/// Throws InvalidArgument for lambda < 0 or tau outside (0, 1), and
/// ApproximationError("series_validity") when lambda*tau > 0.5 or the
/// evaluated mass misses 1 by more than 1e-4.
SubPoissonDist subpoisson_pmf(double lambda, double tau);

/// Closed-form mean lambda e^{-lambda tau} and variance
/// mean - [1 - (1 - tau)^2] mean^2.
MeanVariance subpoisson_moments(double lambda, double tau);

/// Solves mean = l e^{-l t}, variance = mean - 2 t mean^2 for (l, t).
/// Requires 0 < variance <= mean.
EquivalentParams invert_moments(double mean, double variance);

// ---------------------------------------------------------------------------
// Count data
// ---------------------------------------------------------------------------

/// histogram[n] = number of trials that recorded n pulses.
using CountHistogram = std::vector<std::uint64_t>;

struct SampleMoments {
  std::uint64_t trials = 0;
  double mean = 0.0;
  double variance = 0.0;        // unbiased; 0 when trials < 2
  double third_central = 0.0;   // population central moments
  double fourth_central = 0.0;
  bool variance_defined = false;

  double std_error_mean() const;
};

SampleMoments sample_moments(const CountHistogram& histogram);

struct EquivalentFit {
  EquivalentParams params;
  double se_lambda = 0.0;  // delta-method standard errors
  double se_tau = 0.0;
};

/// Moment-matching fit of (lambda', tau') with delta-method standard errors
/// derived from the sample's second to fourth central moments.
EquivalentFit fit_equivalent(const SampleMoments& m);

/// Moment-matched binomial (N, P) fitted to sample moments; N is real valued.
struct BinomialFit {
  double trials = 0.0;
  double prob = 0.0;
};
BinomialFit fit_binomial(const SampleMoments& m);

/// Total-variation distance between a normalized PMF and an empirical
/// histogram (indices beyond either support count as zero mass).
double total_variation(const std::vector<double>& pmf, const CountHistogram& histogram);

}  // namespace photocount
