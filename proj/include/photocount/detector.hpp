// ============================================================================
// detector.hpp -- ML on-off keying detection from pulse counts
//
// Both hypotheses are modelled by real-N binomials (see binomial_approx).
// The rule decides 1 iff n_s > n_th; a count equal to n_th decides 0.
// ============================================================================
#pragma once

#include <cstdint>
#include <vector>

#include "photocount/moments.hpp"
#include "photocount/params.hpp"
#include "photocount/waveform_sim.hpp"

namespace photocount {

struct MlRule {
  int n_th = 0;
  BinomialApprox approx0;
  BinomialApprox approx1;
};

/// Binomial PMF with real N over n = 0..floor(N), using the log-gamma
/// extension of the binomial coefficient, renormalized to unit mass.
struct BinomialPmf {
  std::vector<double> pmf;
  double mass_deviation = 0.0;  // |raw mass - 1| before renormalization
};
BinomialPmf binomial_pmf(const BinomialApprox& b);

/// log P(n) for the real-N binomial; -infinity for n > floor(N).
double binomial_log_pmf(const BinomialApprox& b, int n);

/// Closed-form threshold for the equal-trials case N0 = N1 = 1/(3T):
///   floor( (1/(3T)) L / (log(N1/N0) + L) ),  L = log((1 - 3T N0) / (1 - 3T N1)).
/// Requires 0 < N0 < N1 and 3T N1 < 1.
int ml_threshold(double n_hat1, double n_hat0, double T);

/// Largest n such that every m <= n has P1(m) <= P0(m), found by scanning
/// the log-likelihood ratio. Handles unequal N.
int ml_threshold_general(const BinomialApprox& b0, const BinomialApprox& b1);

/// Rule from analytic moments (moments_full) at both rates. Uses the closed
/// form when tau = T and the likelihood scan otherwise. Throws
/// InvalidArgument when lambda1 <= lambda0 gives no separable means and
/// ApproximationError when a binomial approximation breaks down.
MlRule build_rule(const ChannelParams& channel, const ReceiverConfig& cfg);

/// Rule from externally fitted binomials (e.g. Monte Carlo moment fits).
MlRule build_rule(const BinomialApprox& b0, const BinomialApprox& b1);

inline int classify(int n_s, const MlRule& rule) { return n_s > rule.n_th ? 1 : 0; }

/// 0.5 [P1(n <= n_th) + P0(n > n_th)] under the rule's binomials.
double error_prob_analytic(const MlRule& rule);

struct BerEstimate {
  double ber = 0.0;
  double std_error = 0.0;  // sqrt(ber (1 - ber) / symbols)
  std::uint64_t errors = 0;
  std::uint64_t symbols = 0;
};

/// Monte Carlo bit error rate for i.i.d. equiprobable OOK symbols. Symbol i
/// draws its bit and its waveform from Rng(seed, kSymbol, i), so the same
/// seed reuses the same bits and randomness across operating points.
BerEstimate ber_mc(const ChannelParams& channel, const ReceiverConfig& cfg, std::uint64_t symbols,
                   std::uint64_t seed, const SimOptions& opts = {});

/// Same as ber_mc with an explicit rule.
BerEstimate ber_mc(const ChannelParams& channel, const ReceiverConfig& cfg, const MlRule& rule,
                   std::uint64_t symbols, std::uint64_t seed, const SimOptions& opts = {});

/// One estimate per (thresholds[i], rules[i]) from shared simulated symbols.
std::vector<BerEstimate> ber_mc_thresholds(const ChannelParams& channel, const ReceiverConfig& cfg,
                                           const std::vector<double>& thresholds,
                                           const std::vector<MlRule>& rules,
                                           std::uint64_t symbols, std::uint64_t seed,
                                           const SimOptions& opts = {});

}  // namespace photocount
