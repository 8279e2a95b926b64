// ============================================================================
// waveform_sim.hpp -- event-level Monte Carlo of the receiver chain
//
//   Poisson arrivals -> held rectangular pulses of width tau with Gaussian
//   amplitudes (mean 1, sd sigma, overlapping pulses add) -> additive
//   per-sample Gaussian noise (sd sigma0) -> samples at t_k = k T ->
//   quantization against xi -> 0->1 edge counting.
//
// By default a symbol starts in the stationary state of the pulse train:
// arrivals in [-tau, 0) are simulated and the sample at t = 0 fixes the
// state preceding the first in-symbol sample. The cold start instead assumes
// an empty past and a low initial state. Pulses are truncated at t = 1.
//
// Each trial draws from its own keyed stream (seed, trial index), so results
// are identical for any worker count.
// ============================================================================
#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "photocount/params.hpp"
#include "photocount/rng.hpp"
#include "photocount/subpoisson.hpp"

namespace photocount {

enum class StartState { kStationary, kCold };

struct SimOptions {
  StartState start = StartState::kStationary;
  int workers = 0;  // <= 0: default_workers()
};

struct ArrivalSet {
  std::vector<double> times;    // sorted, in [0, 1)
  std::vector<double> carry_in; // sorted, in [-tau, 0); empty for a cold start
};

struct SampleStream {
  std::vector<double> values;        // F(t_k), k = 1..N, stored at index k-1
  std::vector<std::uint8_t> bits;    // bits[i] = values[i] >= xi
  double initial_value = 0.0;        // F(0); 0 for a cold start
  std::uint8_t initial_bit = 0;      // state preceding the first sample
};

struct TrialResult {
  int n_s = 0;       // recorded pulses
  int arrivals = 0;  // photon arrivals inside the symbol
};

/// Poisson(lambda) arrival epochs, i.i.d. uniform on [0, 1), sorted.
ArrivalSet gen_arrivals(double lambda, Rng& rng);

/// In-symbol arrivals followed (stationary start only) by the Poisson(lambda
/// tau) arrivals in [-tau, 0) whose pulses are still held at t = 0.
ArrivalSet gen_arrivals(double lambda, double tau, StartState start, Rng& rng);

/// Analog samples and quantized bits for one symbol. Draw order: pulse
/// amplitudes (carry-in then in-symbol, only when sigma > 0), then per-sample
/// noise v_0 (stationary start only) and v_1..v_N (only when sigma0 > 0).
SampleStream synth_samples(const ArrivalSet& arrivals, const ReceiverConfig& cfg, Rng& rng,
                           StartState start = StartState::kStationary);

/// Number of 0->1 transitions in `bits`, preceded by the state `initial`.
int count_rising_edges(std::span<const std::uint8_t> bits, std::uint8_t initial = 0);

/// One symbol through the full chain. Consumes `rng` exactly as
/// gen_arrivals + synth_samples would and returns the same count.
TrialResult simulate_symbol(double lambda, const ReceiverConfig& cfg, Rng& rng,
                            StartState start = StartState::kStationary);

/// As simulate_symbol but quantizes the same analog samples against each of
/// `thresholds`; counts[i] corresponds to thresholds[i]. cfg.threshold is
/// ignored.
TrialResult simulate_symbol_thresholds(double lambda, const ReceiverConfig& cfg,
                                       std::span<const double> thresholds, Rng& rng,
                                       std::span<int> counts,
                                       StartState start = StartState::kStationary);

struct McMoments {
  CountHistogram histogram;
  SampleMoments moments;
  std::uint64_t arrivals = 0;  // total in-symbol arrivals over all trials
};

/// Histogram and sample moments of n_s over `trials` symbols; trial i uses
/// Rng(seed, kSymbol, i).
McMoments estimate_moments_mc(double lambda, const ReceiverConfig& cfg, std::uint64_t trials,
                              std::uint64_t seed, const SimOptions& opts = {});

/// One histogram per threshold from a shared set of simulated symbols.
std::vector<McMoments> estimate_moments_mc_thresholds(double lambda, const ReceiverConfig& cfg,
                                                      std::span<const double> thresholds,
                                                      std::uint64_t trials, std::uint64_t seed,
                                                      const SimOptions& opts = {});

/// Ideal counter with extending dead time: an arrival is recorded iff no
/// arrival (recorded or not) precedes it within tau. Stationary start.
CountHistogram ideal_counter_histogram(double lambda, double tau, std::uint64_t trials,
                                       std::uint64_t seed, int workers = 0);

}  // namespace photocount
