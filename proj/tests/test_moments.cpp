#include <gtest/gtest.h>

#include <cmath>

#include "photocount/moments.hpp"
#include "photocount/subpoisson.hpp"
#include "photocount/waveform_sim.hpp"

using namespace photocount;

namespace {

ReceiverConfig cfg(double T, double tau, double xi = 0.3, double sigma = 0.0, double sigma0 = 0.0) {
  return ReceiverConfig{T, tau, xi, sigma, sigma0};
}

}  // namespace

TEST(MomentsExact, ZeroRate) {
  for (double tau : {0.005, 0.02}) {
    const CountMoments m = moments_exact_noiseless(0.0, cfg(0.01, tau));
    EXPECT_EQ(m.mean, 0.0);
    EXPECT_EQ(m.variance, 0.0);
  }
}

TEST(MomentsExact, SampleGtHoldReference) {
  const CountMoments m = moments_exact_noiseless(10.0, cfg(0.01, 0.005));
  EXPECT_EQ(m.regime, Regime::kSampleGtHold);
  EXPECT_NEAR(m.mean, 4.63920064647544359, 1e-12);
  EXPECT_NEAR(m.second_moment, m.mean + m.mean * m.mean * (1.0 - 0.03 + 2e-4), 1e-10);
  EXPECT_NEAR(m.second_moment, m.variance + m.mean * m.mean, 1e-10);
}

TEST(MomentsExact, SampleLeHoldReference) {
  const CountMoments m = moments_exact_noiseless(10.0, cfg(0.01, 0.02));
  EXPECT_EQ(m.regime, Regime::kSampleLeHold);
  EXPECT_NEAR(m.mean, 7.79125323962639926, 1e-12);
  EXPECT_NEAR(m.variance, 4.79249406365334949, 1e-10);
}

TEST(MomentsExact, NoiseFieldsIgnored) {
  const CountMoments a = moments_exact_noiseless(7.0, cfg(0.01, 0.02));
  const CountMoments b = moments_exact_noiseless(7.0, cfg(0.01, 0.02, 0.6, 0.3, 0.1));
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
}

TEST(MomentsExact, MonteCarloMeanSampleLeHold) {
  const double lambda = 10.0;
  const ReceiverConfig c = cfg(0.01, 0.02);
  const McMoments mc = estimate_moments_mc(lambda, c, 1000000, 11);
  const CountMoments m = moments_exact_noiseless(lambda, c);
  EXPECT_NEAR(mc.moments.mean, m.mean, 4.0 * mc.moments.std_error_mean());
}

TEST(MomentsExact, MonteCarloMeanSampleGtHold) {
  const double lambda = 10.0;
  const ReceiverConfig c = cfg(0.01, 0.005);
  const McMoments mc = estimate_moments_mc(lambda, c, 400000, 12);
  const CountMoments m = moments_exact_noiseless(lambda, c);
  EXPECT_NEAR(mc.moments.mean, m.mean, 4.0 * mc.moments.std_error_mean());
}

TEST(MomentsApprox, SmallRateValues) {
  const CountMoments le = moments_approx_noiseless(10.0, cfg(0.01, 0.02));
  EXPECT_DOUBLE_EQ(le.lambda_equiv, 10.0);
  EXPECT_DOUBLE_EQ(le.tau_equiv, 0.025);
  EXPECT_NEAR(le.mean, 7.78800783071404868, 1e-12);
  EXPECT_NEAR(le.variance, le.mean - 0.05 * le.mean * le.mean, 1e-12);
  EXPECT_TRUE(le.within_validity);

  const CountMoments gt = moments_approx_noiseless(10.0, cfg(0.01, 0.005));
  EXPECT_DOUBLE_EQ(gt.lambda_equiv, 5.0);
  EXPECT_DOUBLE_EQ(gt.tau_equiv, 0.015);
  EXPECT_NEAR(gt.variance, gt.mean - 0.03 * gt.mean * gt.mean, 1e-12);
}

TEST(MomentsApprox, CloseToExactAtTauEqualsT) {
  const ReceiverConfig c = cfg(0.01, 0.01);
  const double approx = moments_approx_noiseless(10.0, c).mean;
  const double exact = moments_exact_noiseless(10.0, c).mean;
  EXPECT_LT(std::abs(approx - exact) / exact, 0.01);
}

TEST(MomentsApprox, ValidityFlag) {
  EXPECT_FALSE(moments_approx_noiseless(30.0, cfg(0.01, 0.02)).within_validity);
  EXPECT_FALSE(moments_approx_noiseless(60.0, cfg(0.01, 0.005)).within_validity);
  EXPECT_TRUE(moments_approx_noiseless(20.0, cfg(0.01, 0.02)).within_validity);
}

TEST(MomentsShot, ZeroMissProbabilityReducesToNoiseless) {
  for (double tau : {0.005, 0.02}) {
    const ReceiverConfig c = cfg(0.01, tau, 0.3, 0.005);  // q = Q(140) = 0
    const CountMoments s = moments_shot(10.0, c);
    const CountMoments n = moments_approx_noiseless(10.0, c);
    EXPECT_EQ(s.mean, n.mean);
    EXPECT_EQ(s.variance, n.variance);
    EXPECT_EQ(s.lambda_equiv, n.lambda_equiv);
    EXPECT_EQ(s.noise, NoiseModel::kShot);
  }
}

TEST(MomentsShot, ThinnedRate) {
  const ReceiverConfig c = cfg(0.01, 0.02, 0.3, 0.2);
  const CountMoments s = moments_shot(10.0, c);
  const double q = 2.32629079035525036e-4;
  EXPECT_NEAR(s.lambda_equiv, 10.0 * (1.0 - q), 1e-12);
  EXPECT_NEAR(s.mean, 10.0 * (1 - q) * std::exp(-10.0 * (1 - q) * 0.025), 1e-12);

  const ReceiverConfig g = cfg(0.01, 0.005, 0.3, 0.2);
  EXPECT_NEAR(moments_shot(10.0, g).lambda_equiv, 5.0 * (1.0 - q), 1e-12);
}

TEST(MomentsShot, MonteCarloFittedRate) {
  const double lambda = 10.0;
  const ReceiverConfig c = cfg(0.01, 0.02, 0.3, 0.2);
  const McMoments mc = estimate_moments_mc(lambda, c, 1000000, 21);
  const EquivalentParams fit = invert_moments(mc.moments.mean, mc.moments.variance);
  const double expected = (1.0 - derive_params(c).q) * lambda;
  EXPECT_LT(std::abs(fit.lambda - expected) / expected, 0.03);
}

TEST(MomentsFull, NoiselessLimitEqualsExactMean) {
  for (double tau : {0.005, 0.01, 0.02, 0.035}) {
    const ReceiverConfig c = cfg(0.01, tau);
    const CountMoments f = moments_full(10.0, c);
    const CountMoments e = moments_exact_noiseless(10.0, c);
    const CountMoments a = moments_approx_noiseless(10.0, c);
    EXPECT_NEAR(f.mean, e.mean, 1e-12 * e.mean);
    if (tau < 0.01) EXPECT_NEAR(f.variance, e.variance, 1e-10);
    else EXPECT_NEAR(f.variance, f.mean - 2.0 * (tau + 0.005) * f.mean * f.mean, 1e-10);
    EXPECT_NEAR(f.mean, a.mean, 0.01 * a.mean);
    EXPECT_NEAR(f.variance, a.variance, 0.03 * a.variance);
  }
}

TEST(MomentsFull, ThermalCorrectionVanishesAtTauEqualsT) {
  const ReceiverConfig c = cfg(0.01, 0.01, 0.3, 0.2, 0.02);
  const CountMoments f = moments_full(10.0, c);
  EXPECT_NEAR(f.variance, f.mean - 0.03 * f.mean * f.mean, 1e-12);
  EXPECT_EQ(f.noise, NoiseModel::kShotThermal);
}

TEST(MomentsFull, DegenerateReturnsZero) {
  const CountMoments f = moments_full(0.0, cfg(0.01, 0.02));
  EXPECT_EQ(f.mean, 0.0);
  EXPECT_EQ(f.variance, 0.0);
  EXPECT_EQ(f.second_moment, 0.0);
  EXPECT_TRUE(f.variance_valid);
}

TEST(MomentsFull, RegimeContinuityAtTauEqualsT) {
  for (double sigma0 : {0.0, 0.1, 0.2}) {
    const double T = 0.01;
    const CountMoments below = moments_full(12.0, cfg(T, T * (1.0 - 1e-14), 0.3, 0.2, sigma0));
    const CountMoments at = moments_full(12.0, cfg(T, T, 0.3, 0.2, sigma0));
    EXPECT_EQ(below.regime, Regime::kSampleGtHold);
    EXPECT_EQ(at.regime, Regime::kSampleLeHold);
    EXPECT_NEAR(below.mean, at.mean, 1e-12 * at.mean);
  }
}

TEST(MomentsFull, MeanNonincreasingInThreshold) {
  const double sigma = 0.05, sigma0 = 0.02;
  for (double tau : {0.005, 0.01, 0.03}) {
    double prev = INFINITY;
    for (int i = 0; i <= 100; ++i) {
      const double xi = 6 * sigma0 + (1 - 6 * sigma - 6 * sigma0) * i / 100.0;
      const double mean = moments_full(10.0, cfg(0.01, tau, xi, sigma, sigma0)).mean;
      EXPECT_LE(mean, prev + 1e-12) << xi;
      prev = mean;
    }
  }
}

TEST(MomentsFull, SubPoissonWhenThermalNegligible) {
  for (double lambda : {0.5, 5.0, 20.0})
    for (double tau : {0.005, 0.01, 0.03, 0.05})
      for (double xi : {0.2, 0.5}) {
        const ReceiverConfig c = cfg(0.01, tau, xi, 0.2, 0.02);
        ASSERT_LE(derive_params(c).p, 1e-6);
        const CountMoments f = moments_full(lambda, c);
        EXPECT_LE(f.variance, f.mean);
      }
}

TEST(MomentsFull, FineSamplingLimit) {
  const ReceiverConfig c = cfg(1e-4, 0.01);
  const double mean = moments_full(10.0, c).mean;
  const double ideal = 10.0 * std::exp(-0.1);
  EXPECT_LT(std::abs(mean - ideal) / ideal, 1e-3);
}

TEST(MomentsFull, MonteCarloMeanAtOperatingPoint) {
  const ReceiverConfig c = cfg(0.01, 0.01, 0.3, 0.2, 0.02);
  const McMoments mc = estimate_moments_mc(10.0, c, 1000000, 31);
  EXPECT_NEAR(mc.moments.mean, moments_full(10.0, c).mean, 4.0 * mc.moments.std_error_mean());
}

TEST(BinomialApprox, TauEqualsT) {
  const ReceiverConfig c = cfg(0.01, 0.01, 0.3, 0.2, 0.02);
  const CountMoments m = moments_full(10.0, c);
  const BinomialApprox b = binomial_approx(m, derive_params(c));
  EXPECT_NEAR(b.trials, 1.0 / 0.03, 1e-12);
  EXPECT_NEAR(b.prob, 0.03 * m.mean, 1e-15);
  // The T > tau formula gives the same pair.
  const ReceiverConfig g = cfg(0.01, 0.01 * (1 - 1e-14), 0.3, 0.2, 0.02);
  const BinomialApprox bg = binomial_approx(moments_full(10.0, g), derive_params(g));
  EXPECT_NEAR(bg.trials, b.trials, 1e-9);
  EXPECT_NEAR(bg.prob, b.prob, 1e-12);
}

TEST(BinomialApprox, ZeroThermalNoiseUsesPlainDeadTime) {
  const ReceiverConfig c = cfg(0.01, 0.03, 0.3, 0.2, 0.0);
  const CountMoments m = moments_full(10.0, c);
  const BinomialApprox b = binomial_approx(m, derive_params(c));
  EXPECT_NEAR(b.trials, 1.0 / (2.0 * 0.035), 1e-12);
  EXPECT_NEAR(b.prob, 2.0 * 0.035 * m.mean, 1e-15);
}

TEST(BinomialApprox, ExactMomentMatchingForSampleLeHold) {
  for (double tau : {0.01, 0.015, 0.02, 0.035, 0.05})
    for (double sigma0 : {0.0, 0.05, 0.08})
      for (double lambda : {0.5, 5.0, 15.0}) {
        const ReceiverConfig c = cfg(0.01, tau, 0.3, 0.2, sigma0);
        const CountMoments m = moments_full(lambda, c);
        BinomialApprox b;
        try {
          b = binomial_approx(m, derive_params(c));
        } catch (const ApproximationError&) {
          continue;
        }
        EXPECT_NEAR(b.mean() / m.mean, 1.0, 1e-9);
        EXPECT_NEAR(b.variance() / m.variance, 1.0, 1e-9) << tau << " " << sigma0 << " " << lambda;
      }
}

TEST(BinomialApprox, SampleGtHoldMatchesUpToSecondOrderInT) {
  for (double lambda : {1.0, 5.0, 15.0}) {
    const ReceiverConfig c = cfg(0.01, 0.004, 0.3, 0.2, 0.02);
    const CountMoments m = moments_full(lambda, c);
    const BinomialApprox b = binomial_approx(m, derive_params(c));
    EXPECT_NEAR(b.mean() / m.mean, 1.0, 1e-12);
    // prescribed N = 1/(3T) drops the 2 T^2 mean^2 term of the variance
    EXPECT_NEAR(b.variance() - m.variance, -2e-4 * m.mean * m.mean, 1e-9 * m.mean);
  }
}

TEST(BinomialApprox, BreakdownIsFlagged) {
  const ReceiverConfig c = cfg(0.01, 0.08, 0.3, 0.2, 0.3);  // p = Q(1), alpha = 8: P < 0
  const CountMoments m = moments_full(1.0, c);
  try {
    binomial_approx(m, derive_params(c));
    FAIL() << "expected breakdown";
  } catch (const ApproximationError& e) {
    EXPECT_EQ(e.flag(), "binomial_breakdown");
  }
  EXPECT_THROW(binomial_approx(moments_full(0.0, cfg(0.01, 0.02)), derive_params(cfg(0.01, 0.02))),
               ApproximationError);
}
