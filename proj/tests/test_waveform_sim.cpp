#include <gtest/gtest.h>

#include <cmath>
#include <regex>
#include <string>

#include "photocount/moments.hpp"
#include "photocount/subpoisson.hpp"
#include "photocount/waveform_sim.hpp"

using namespace photocount;

namespace {

ReceiverConfig cfg(double T, double tau, double xi = 0.3, double sigma = 0.0, double sigma0 = 0.0) {
  return ReceiverConfig{T, tau, xi, sigma, sigma0};
}

int regex_edge_count(const std::string& bits) {
  const std::string padded = "0" + bits;
  const std::regex edge("01");
  return static_cast<int>(std::distance(
      std::sregex_iterator(padded.begin(), padded.end(), edge), std::sregex_iterator()));
}

}  // namespace

TEST(GenArrivals, ZeroRateIsEmpty) {
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng rng(5, StreamId::kSymbol, i);
    EXPECT_TRUE(gen_arrivals(0.0, rng).times.empty());
  }
}

TEST(GenArrivals, PoissonMeanAndOrdering) {
  const std::uint64_t trials = 1000000;
  double total = 0.0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    Rng rng(99, StreamId::kSymbol, i);
    const ArrivalSet a = gen_arrivals(10.0, rng);
    total += static_cast<double>(a.times.size());
    if (i < 1000) {
      for (std::size_t k = 0; k < a.times.size(); ++k) {
        EXPECT_GE(a.times[k], 0.0);
        EXPECT_LT(a.times[k], 1.0);
        if (k > 0) EXPECT_LE(a.times[k - 1], a.times[k]);
      }
    }
  }
  EXPECT_NEAR(total / trials, 10.0, 4.0 * std::sqrt(10.0 / trials));
}

TEST(GenArrivals, CarryInOnlyForStationaryStart) {
  Rng a(1, StreamId::kSymbol, 0), b(1, StreamId::kSymbol, 0);
  const ArrivalSet cold = gen_arrivals(50.0, 0.2, StartState::kCold, a);
  const ArrivalSet warm = gen_arrivals(50.0, 0.2, StartState::kStationary, b);
  EXPECT_TRUE(cold.carry_in.empty());
  EXPECT_EQ(cold.times, warm.times);
  EXPECT_FALSE(warm.carry_in.empty());
  for (double t : warm.carry_in) {
    EXPECT_GE(t, -0.2);
    EXPECT_LT(t, 0.0);
  }
}

TEST(GenArrivals, Deterministic) {
  Rng a(42, StreamId::kSymbol, 17), b(42, StreamId::kSymbol, 17), c(42, StreamId::kSymbol, 18);
  const auto x = gen_arrivals(10.0, a).times;
  EXPECT_EQ(x, gen_arrivals(10.0, b).times);
  EXPECT_NE(x, gen_arrivals(10.0, c).times);
}

TEST(SynthSamples, NoArrivalsNoNoise) {
  Rng rng(1);
  const SampleStream s = synth_samples(ArrivalSet{}, cfg(0.01, 0.02), rng);
  ASSERT_EQ(s.values.size(), 100u);
  ASSERT_EQ(s.bits.size(), 100u);
  for (auto b : s.bits) EXPECT_EQ(b, 0);
  EXPECT_EQ(s.initial_bit, 0);
}

TEST(SynthSamples, SinglePulseGeometry) {
  ArrivalSet a;
  a.times = {0.005};
  Rng rng(1);
  const SampleStream s = synth_samples(a, cfg(0.01, 0.02), rng);
  for (std::size_t i = 0; i < s.bits.size(); ++i) EXPECT_EQ(s.bits[i], i <= 1 ? 1 : 0) << i;
  EXPECT_EQ(count_rising_edges(s.bits, s.initial_bit), 1);
}

TEST(SynthSamples, BitsFollowThreshold) {
  Rng rng(3, StreamId::kSymbol, 0);
  ReceiverConfig c = cfg(0.01, 0.03, 0.45, 0.2, 0.1);
  const ArrivalSet a = gen_arrivals(20.0, c.holding_time, StartState::kStationary, rng);
  const SampleStream s = synth_samples(a, c, rng);
  for (std::size_t i = 0; i < s.values.size(); ++i) EXPECT_EQ(s.bits[i], s.values[i] >= 0.45);
  EXPECT_EQ(s.initial_bit, s.initial_value >= 0.45);
}

TEST(SynthSamples, OverlappingPulsesAddVariance) {
  const double sigma = 0.2;
  const int trials = 100000;
  ArrivalSet a;
  a.times = {0.0051, 0.0051};
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < trials; ++i) {
    Rng rng(8, StreamId::kSymbol, static_cast<std::uint64_t>(i));
    const SampleStream s = synth_samples(a, cfg(0.01, 0.02, 0.3, sigma, 0.0), rng);
    sum += s.values[0];
    sum2 += s.values[0] * s.values[0];
  }
  const double mean = sum / trials;
  const double var = (sum2 - trials * mean * mean) / (trials - 1);
  const double expected = 2.0 * sigma * sigma;
  EXPECT_NEAR(mean, 2.0, 4.0 * std::sqrt(expected / trials));
  EXPECT_NEAR(var, expected, 4.0 * expected * std::sqrt(2.0 / trials));
}

TEST(CountRisingEdges, Examples) {
  const std::vector<std::uint8_t> zeros(6, 0);
  EXPECT_EQ(count_rising_edges(zeros), 0);
  const std::vector<std::uint8_t> v{0, 1, 1, 0, 1, 1};
  EXPECT_EQ(count_rising_edges(v), 2);
  const std::vector<std::uint8_t> lead{1, 0, 1};
  EXPECT_EQ(count_rising_edges(lead), 2);
  EXPECT_EQ(count_rising_edges(lead, 1), 1);
  EXPECT_EQ(count_rising_edges(std::vector<std::uint8_t>{}), 0);
}

TEST(CountRisingEdges, ExhaustiveAgainstRegexScanner) {
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    std::vector<std::uint8_t> bits(12);
    std::string text(12, '0');
    for (int k = 0; k < 12; ++k) {
      bits[static_cast<std::size_t>(k)] = (mask >> k) & 1u;
      text[static_cast<std::size_t>(k)] = bits[static_cast<std::size_t>(k)] ? '1' : '0';
    }
    ASSERT_EQ(count_rising_edges(bits), regex_edge_count(text)) << text;
  }
}

TEST(SimulateSymbol, ZeroRateNoNoise) {
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng rng(4, StreamId::kSymbol, i);
    const TrialResult r = simulate_symbol(0.0, cfg(0.01, 0.02, 0.3, 0.2, 0.0), rng);
    EXPECT_EQ(r.n_s, 0);
    EXPECT_EQ(r.arrivals, 0);
  }
}

TEST(SimulateSymbol, MatchesSampleLevelPipeline) {
  const std::vector<ReceiverConfig> configs{
      cfg(0.01, 0.02), cfg(0.01, 0.005, 0.3, 0.2), cfg(0.01, 0.01, 0.3, 0.2, 0.02),
      cfg(0.02, 0.03, 0.5, 0.3, 0.15), cfg(0.001, 0.004, 0.3, 0.2, 0.0), cfg(0.05, 0.01, 1.2, 0.3)};
  for (const ReceiverConfig& c : configs)
    for (StartState start : {StartState::kStationary, StartState::kCold})
      for (std::uint64_t i = 0; i < 2000; ++i) {
        Rng a(77, StreamId::kSymbol, i), b(77, StreamId::kSymbol, i);
        const TrialResult r = simulate_symbol(25.0, c, a, start);
        const ArrivalSet arr = gen_arrivals(25.0, c.holding_time, start, b);
        const SampleStream s = synth_samples(arr, c, b, start);
        ASSERT_EQ(r.n_s, count_rising_edges(s.bits, s.initial_bit))
            << c.sampling_period << " " << c.holding_time << " trial " << i;
        ASSERT_EQ(r.arrivals, static_cast<int>(arr.times.size()));
        ASSERT_EQ(a(), b()) << "streams consumed differently";
      }
}

TEST(SimulateSymbol, MultiThresholdMatchesSingle) {
  const std::vector<double> xis{0.15, 0.3, 0.6, 0.9, 1.3};
  for (const ReceiverConfig& base : {cfg(0.01, 0.02, 0.3, 0.2), cfg(0.01, 0.02, 0.3, 0.2, 0.05)})
    for (std::uint64_t i = 0; i < 500; ++i) {
      std::vector<int> counts(xis.size());
      Rng a(5, StreamId::kSymbol, i);
      simulate_symbol_thresholds(15.0, base, xis, a, counts);
      for (std::size_t j = 0; j < xis.size(); ++j) {
        ReceiverConfig c = base;
        c.threshold = xis[j];
        Rng b(5, StreamId::kSymbol, i);
        ASSERT_EQ(counts[j], simulate_symbol(15.0, c, b).n_s);
      }
    }
}

TEST(SimulateSymbol, ExactMeanAtTauEqualsT) {
  const ReceiverConfig c = cfg(0.01, 0.01);
  const McMoments mc = estimate_moments_mc(10.0, c, 1000000, 2024);
  EXPECT_NEAR(mc.moments.mean, moments_exact_noiseless(10.0, c).mean,
              4.0 * mc.moments.std_error_mean());
}

TEST(SimulateSymbol, CountBounds) {
  for (const ReceiverConfig& c :
       {cfg(0.01, 0.02), cfg(0.01, 0.005), cfg(0.02, 0.02), cfg(0.01, 0.02, 0.3, 0.1)}) {
    const int dead_time_cap = static_cast<int>(std::floor(1.0 / (c.holding_time + c.sampling_period))) + 1;
    const int edge_cap = static_cast<int>(std::ceil(0.5 / c.sampling_period));
    const bool noiseless = c.shot_sigma == 0.0;
    for (std::uint64_t i = 0; i < 50000; ++i) {
      Rng rng(6, StreamId::kSymbol, i);
      const TrialResult r = simulate_symbol(40.0, c, rng);
      ASSERT_LE(r.n_s, dead_time_cap);
      ASSERT_LE(r.n_s, edge_cap);
      if (noiseless) ASSERT_LE(r.n_s, r.arrivals);
    }
  }
  const ReceiverConfig noisy = cfg(0.01, 0.02, 0.3, 0.2, 0.2);
  const int edge_cap = 50;
  for (std::uint64_t i = 0; i < 5000; ++i) {
    Rng rng(6, StreamId::kSymbol, i);
    ASSERT_LE(simulate_symbol(10.0, noisy, rng).n_s, edge_cap);
  }
}

TEST(EstimateMomentsMc, WorkerCountInvariant) {
  for (const ReceiverConfig& c : {cfg(0.01, 0.02), cfg(0.01, 0.01, 0.3, 0.2, 0.02)}) {
    SimOptions one{StartState::kStationary, 1}, eight{StartState::kStationary, 8};
    const McMoments a = estimate_moments_mc(10.0, c, 30001, 9, one);
    const McMoments b = estimate_moments_mc(10.0, c, 30001, 9, eight);
    EXPECT_EQ(a.histogram, b.histogram);
    EXPECT_EQ(a.arrivals, b.arrivals);
    EXPECT_EQ(a.moments.mean, b.moments.mean);
    EXPECT_EQ(a.moments.variance, b.moments.variance);
  }
}

TEST(EstimateMomentsMc, SingleTrialHasUndefinedVariance) {
  const McMoments m = estimate_moments_mc(10.0, cfg(0.01, 0.02), 1, 3);
  EXPECT_FALSE(m.moments.variance_defined);
  EXPECT_EQ(m.moments.variance, 0.0);
  EXPECT_EQ(m.moments.std_error_mean(), 0.0);
}

TEST(EstimateMomentsMc, FittedEquivalentParameters) {
  {
    const McMoments m = estimate_moments_mc(10.0, cfg(0.01, 0.02), 1000000, 41);
    const EquivalentParams p = invert_moments(m.moments.mean, m.moments.variance);
    EXPECT_NEAR(p.lambda, 10.0, 0.05 * 10.0);
    EXPECT_NEAR(p.tau, 0.025, 0.05 * 0.025);
  }
  {
    const McMoments m = estimate_moments_mc(10.0, cfg(0.01, 0.005), 1000000, 42);
    const EquivalentParams p = invert_moments(m.moments.mean, m.moments.variance);
    EXPECT_NEAR(p.lambda, 5.0, 0.05 * 5.0);
    EXPECT_NEAR(p.tau, 0.015, 0.05 * 0.015);
  }
}

TEST(EstimateMomentsMc, FineSamplingLimit) {
  const double T = 1e-4;
  const McMoments m = estimate_moments_mc(10.0, cfg(T, 0.01), 1000000, 43);
  const SubPoissonDist d = subpoisson_pmf(10.0, 0.01 + T / 2);
  EXPECT_LT(total_variation(d.pmf, m.histogram), 0.005);
}
