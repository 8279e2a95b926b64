#include <gtest/gtest.h>

#include <cmath>

#include "photocount/params.hpp"
#include "photocount/subpoisson.hpp"
#include "photocount/waveform_sim.hpp"

using namespace photocount;

namespace {

// 20 x 20 grid over lambda in [0, 50], tau in [0.001, 0.1].
template <class F>
void for_grid(F&& f) {
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) f(50.0 * i / 19.0, 0.001 + 0.099 * j / 19.0);
}

}  // namespace

TEST(SubPoissonPmf, ZeroRate) {
  const SubPoissonDist d = subpoisson_pmf(0.0, 0.1);
  ASSERT_EQ(d.max_count, 11);
  ASSERT_EQ(d.pmf.size(), 12u);
  EXPECT_EQ(d.pmf[0], 1.0);
  for (std::size_t n = 1; n < d.pmf.size(); ++n) EXPECT_EQ(d.pmf[n], 0.0);
}

TEST(SubPoissonPmf, ReferenceValuesLambda10Tau001) {
  // multiprecision evaluation of the alternating series
  const SubPoissonDist d = subpoisson_pmf(10.0, 0.01);
  EXPECT_NEAR(d.pmf[0], 4.56439502503341205e-5, 1e-15);
  EXPECT_NEAR(d.pmf[5], 0.0516304431976702734, 1e-14);
  EXPECT_NEAR(d.pmf[9], 0.145407689525449883, 1e-14);
  EXPECT_NEAR(d.pmf[12], 0.0758944046432108183, 1e-14);
  EXPECT_NEAR(d.pmf[20], 1.74708937040183213e-4, 1e-15);
  EXPECT_NEAR(d.mean(), 9.04837418035959573, 1e-10);
  EXPECT_NEAR(d.variance(), 7.41909998173441183, 1e-9);
}

TEST(SubPoissonPmf, NormalizationMeanAndSubPoissonityOnGrid) {
  for_grid([](double lambda, double tau) {
    if (lambda * tau > kSeriesValidity) return;
    const SubPoissonDist d = subpoisson_pmf(lambda, tau);
    EXPECT_NEAR(d.total(), 1.0, 1e-6) << lambda << " " << tau;
    const double mean = lambda * std::exp(-lambda * tau);
    if (mean > 0.0) EXPECT_NEAR(d.mean() / mean, 1.0, 1e-4) << lambda << " " << tau;
    EXPECT_LE(d.variance(), d.mean() + 1e-9);
    for (double p : d.pmf) EXPECT_GE(p, 0.0);
    EXPECT_EQ(d.max_count, static_cast<int>(std::floor(1.0 / tau)) + 1);
    EXPECT_EQ(d.pmf.size(), static_cast<std::size_t>(d.max_count) + 1);
  });
}

TEST(SubPoissonPmf, ExactVarianceMatchesClosedForm) {
  for (double lambda : {1.0, 5.0, 10.0, 30.0})
    for (double tau : {0.002, 0.01, 0.015}) {
      const SubPoissonDist d = subpoisson_pmf(lambda, tau);
      const MeanVariance mv = subpoisson_moments(lambda, tau);
      EXPECT_NEAR(d.variance(), mv.variance, 1e-7 * std::max(1.0, mv.variance));
    }
}

TEST(SubPoissonPmf, RejectsOutsideValidity) {
  EXPECT_THROW(subpoisson_pmf(60.0, 0.01), ApproximationError);
  EXPECT_THROW(subpoisson_pmf(-1.0, 0.01), InvalidArgument);
  EXPECT_THROW(subpoisson_pmf(1.0, 0.0), InvalidArgument);
  EXPECT_THROW(subpoisson_pmf(1.0, 1.0), InvalidArgument);
  try {
    subpoisson_pmf(60.0, 0.01);
  } catch (const ApproximationError& e) {
    EXPECT_EQ(e.flag(), "series_validity");
  }
}

TEST(SubPoissonMoments, ClosedForms) {
  const MeanVariance z = subpoisson_moments(0.0, 0.1);
  EXPECT_EQ(z.mean, 0.0);
  EXPECT_EQ(z.variance, 0.0);
  const MeanVariance mv = subpoisson_moments(10.0, 0.01);
  EXPECT_NEAR(mv.mean, 9.04837418035959573, 1e-13);
  EXPECT_NEAR(mv.variance, 7.41909998173441183, 1e-12);
  for_grid([](double lambda, double tau) {
    const MeanVariance m = subpoisson_moments(lambda, tau);
    EXPECT_LE(m.variance, m.mean);
  });
}

TEST(InvertMoments, RoundTripOnSmallTauModel) {
  for (double lambda : {0.5, 2.0, 10.0, 25.0})
    for (double tau : {0.001, 0.005, 0.015, 0.03}) {
      if (lambda * tau >= 1.0) continue;
      const double mean = lambda * std::exp(-lambda * tau);
      const double var = mean - 2.0 * tau * mean * mean;
      if (var <= 0.0) continue;
      const EquivalentParams p = invert_moments(mean, var);
      EXPECT_NEAR(p.lambda, lambda, 1e-6 * lambda);
      EXPECT_NEAR(p.tau, tau, 1e-6 * tau);
    }
  const double mean = 10.0 * std::exp(-0.15);
  const EquivalentParams p = invert_moments(mean, mean - 0.03 * mean * mean);
  EXPECT_NEAR(p.lambda, 10.0, 1e-6);
  EXPECT_NEAR(p.tau, 0.015, 1e-6);
}

TEST(InvertMoments, PoissonLimitAndErrors) {
  const EquivalentParams p = invert_moments(3.5, 3.5);
  EXPECT_EQ(p.tau, 0.0);
  EXPECT_EQ(p.lambda, 3.5);
  EXPECT_THROW(invert_moments(3.0, 3.1), InvalidArgument);
  EXPECT_THROW(invert_moments(3.0, 0.0), InvalidArgument);
  EXPECT_THROW(invert_moments(10.0, 0.5), ApproximationError);
}

TEST(SampleMoments, HistogramStatistics) {
  // values 0,1,1,2,2,2,5
  const CountHistogram h{1, 2, 3, 0, 0, 1};
  const SampleMoments m = sample_moments(h);
  EXPECT_EQ(m.trials, 7u);
  EXPECT_NEAR(m.mean, 13.0 / 7.0, 1e-15);
  double ss = 0.0;
  for (double v : {0., 1., 1., 2., 2., 2., 5.}) ss += (v - 13.0 / 7.0) * (v - 13.0 / 7.0);
  EXPECT_NEAR(m.variance, ss / 6.0, 1e-14);
  EXPECT_TRUE(m.variance_defined);
  EXPECT_NEAR(m.std_error_mean(), std::sqrt(ss / 6.0 / 7.0), 1e-14);

  const SampleMoments one = sample_moments(CountHistogram{0, 0, 1});
  EXPECT_FALSE(one.variance_defined);
  EXPECT_EQ(one.variance, 0.0);
  EXPECT_EQ(one.mean, 2.0);
}

TEST(FitBinomial, MomentMatching) {
  SampleMoments m;
  m.trials = 100;
  m.mean = 6.0;
  m.variance = 4.5;
  m.variance_defined = true;
  const BinomialFit b = fit_binomial(m);
  EXPECT_NEAR(b.prob, 0.25, 1e-15);
  EXPECT_NEAR(b.trials, 24.0, 1e-12);
  m.variance = 7.0;
  EXPECT_THROW(fit_binomial(m), ApproximationError);
}

TEST(TotalVariation, Basics) {
  EXPECT_NEAR(total_variation({0.5, 0.5}, CountHistogram{1, 1}), 0.0, 1e-15);
  EXPECT_NEAR(total_variation({1.0}, CountHistogram{0, 4}), 1.0, 1e-15);
  EXPECT_NEAR(total_variation({0.25, 0.75}, CountHistogram{1, 0, 1}), 0.75, 1e-15);
  EXPECT_THROW(total_variation({1.0}, CountHistogram{}), InvalidArgument);
}

TEST(IdealCounter, MatchesPmfAtModerateTrials) {
  // The full 1e7-trial check (TV < 0.002) runs in the acceptance binary.
  const CountHistogram h = ideal_counter_histogram(10.0, 0.01, 400000, 7, 1);
  const SubPoissonDist d = subpoisson_pmf(10.0, 0.01);
  EXPECT_LT(total_variation(d.pmf, h), 0.006);
  const SampleMoments m = sample_moments(h);
  EXPECT_NEAR(m.mean, d.mean(), 4.0 * m.std_error_mean());
}

TEST(IdealCounter, WorkerCountInvariant) {
  EXPECT_EQ(ideal_counter_histogram(8.0, 0.02, 20000, 3, 1),
            ideal_counter_histogram(8.0, 0.02, 20000, 3, 5));
}
