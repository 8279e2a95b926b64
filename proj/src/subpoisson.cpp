#include "photocount/subpoisson.hpp"

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "photocount/params.hpp"

namespace photocount {

namespace {

// Terms below exp(-92) ~ 1e-40 cannot move any probability at double
// precision and are skipped.
constexpr double kNegligibleLog = -92.0;

class MpfrValue {
 public:
  explicit MpfrValue(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  ~MpfrValue() { mpfr_clear(v_); }
  MpfrValue(const MpfrValue&) = delete;
  MpfrValue& operator=(const MpfrValue&) = delete;
  MpfrValue(MpfrValue&& o) noexcept {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_swap(v_, o.v_);
  }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

 private:
  mpfr_t v_;
};

// log |term(n, m)| in double precision, used only to size precision and to
// prune negligible terms.
double log_term_magnitude(int n, int m, double tau, double log_rate) {
  const int k = n + m;
  if (k == 0) return 0.0;
  const double base = 1.0 - (k - 1) * tau;
  if (base <= 0.0) return -std::numeric_limits<double>::infinity();
  return k * (std::log(base) + log_rate) - std::lgamma(n + 1.0) - std::lgamma(m + 1.0);
}

}  // namespace

double SubPoissonDist::total() const {
  double s = 0.0;
  for (double p : pmf) s += p;
  return s;
}

double SubPoissonDist::mean() const {
  double s = 0.0;
  for (std::size_t n = 0; n < pmf.size(); ++n) s += n * pmf[n];
  return s;
}

double SubPoissonDist::variance() const {
  const double mu = mean();
  double s = 0.0;
  for (std::size_t n = 0; n < pmf.size(); ++n) {
    const double d = n - mu;
    s += d * d * pmf[n];
  }
  return s;
}

SubPoissonDist subpoisson_pmf(double lambda, double tau) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw InvalidArgument("subpoisson_pmf: lambda must be >= 0");
  if (!std::isfinite(tau) || tau <= 0.0 || tau >= 1.0)
    throw InvalidArgument("subpoisson_pmf: tau must lie in (0, 1)");
  if (lambda * tau > kSeriesValidity)
    throw ApproximationError("series_validity",
                             "lambda*tau = " + std::to_string(lambda * tau) +
                                 " exceeds the evaluated range (<= 0.5)");

  SubPoissonDist dist;
  dist.lambda = lambda;
  dist.tau = tau;
  dist.max_count = static_cast<int>(std::floor(1.0 / tau)) + 1;
  const int M = dist.max_count;
  dist.pmf.assign(M + 1, 0.0);

  if (lambda == 0.0) {
    dist.pmf[0] = 1.0;
    return dist;
  }

  const double log_rate = std::log(lambda) - lambda * tau;
  const double rate = std::exp(log_rate);

  // Per n, the relevant m form a contiguous window around the peak term.
  struct Window {
    int lo = 0;
    int hi = -1;
  };
  std::vector<Window> windows(M + 1);
  double log_max = 0.0;
  int last_n = -1;
  for (int n = 0; n <= M; ++n) {
    Window w;
    double best = -std::numeric_limits<double>::infinity();
    double prev = best;
    for (int m = 0; m <= M - n; ++m) {
      const double lt = log_term_magnitude(n, m, tau, log_rate);
      best = std::max(best, lt);
      if (lt > kNegligibleLog) {
        if (w.hi < w.lo) w.lo = m;
        w.hi = m;
      } else if (lt < prev && w.hi >= w.lo) {
        break;  // past the peak and below the cutoff
      }
      prev = lt;
    }
    windows[n] = w;
    if (w.hi >= w.lo) {
      last_n = n;
      log_max = std::max(log_max, best);
    } else if (n > 2.0 * rate + 10.0) {
      break;
    }
  }

  // Enough bits to resolve 1e-25 after cancelling terms as large as
  // exp(log_max).
  const auto prec = static_cast<mpfr_prec_t>(std::ceil(log_max / std::log(2.0)) + 140);

  MpfrValue mp_rate(prec), base(prec), term(prec), sum(prec), tmp(prec);
  // rate = lambda * exp(-lambda tau), evaluated in working precision
  mpfr_set_d(tmp.get(), -lambda, MPFR_RNDN);
  mpfr_mul_d(tmp.get(), tmp.get(), tau, MPFR_RNDN);
  mpfr_exp(tmp.get(), tmp.get(), MPFR_RNDN);
  mpfr_mul_d(mp_rate.get(), tmp.get(), lambda, MPFR_RNDN);

  // 1/i! for every index a window can reach, by running division.
  int top = last_n;
  for (int n = 0; n <= last_n; ++n) top = std::max(top, windows[n].hi);
  std::vector<MpfrValue> inv_fact;
  inv_fact.reserve(static_cast<std::size_t>(top) + 1);
  inv_fact.emplace_back(prec);
  mpfr_set_ui(inv_fact.back().get(), 1, MPFR_RNDN);
  for (int i = 1; i <= top; ++i) {
    inv_fact.emplace_back(prec);
    mpfr_div_ui(inv_fact.back().get(), inv_fact[static_cast<std::size_t>(i) - 1].get(),
                static_cast<unsigned long>(i), MPFR_RNDN);
  }

  // The power ((1 - (k - 1) tau) rate)^k depends on k = n + m only;
  // live[k] is false when the base is nonpositive.
  int top_k = 0;
  for (int n = 0; n <= last_n; ++n)
    if (windows[n].hi >= windows[n].lo) top_k = std::max(top_k, n + windows[n].hi);
  std::vector<MpfrValue> power;
  std::vector<bool> live(static_cast<std::size_t>(top_k) + 1, false);
  power.reserve(static_cast<std::size_t>(top_k) + 1);
  for (int k = 0; k <= top_k; ++k) {
    power.emplace_back(prec);
    if (k == 0) {
      mpfr_set_ui(power.back().get(), 1, MPFR_RNDN);
      live[0] = true;
      continue;
    }
    // base = 1 - (k - 1) tau
    mpfr_set_d(base.get(), tau, MPFR_RNDN);
    mpfr_mul_si(base.get(), base.get(), k - 1, MPFR_RNDN);
    mpfr_ui_sub(base.get(), 1, base.get(), MPFR_RNDN);
    if (mpfr_sgn(base.get()) <= 0) continue;
    mpfr_mul(power.back().get(), base.get(), mp_rate.get(), MPFR_RNDN);
    mpfr_pow_ui(power.back().get(), power.back().get(), static_cast<unsigned long>(k), MPFR_RNDN);
    live[static_cast<std::size_t>(k)] = true;
  }

  for (int n = 0; n <= last_n; ++n) {
    const Window w = windows[n];
    if (w.hi < w.lo) continue;
    mpfr_set_zero(sum.get(), 1);
    for (int m = w.lo; m <= w.hi; ++m) {
      const auto k = static_cast<std::size_t>(n + m);
      if (!live[k]) continue;
      mpfr_mul(term.get(), power[k].get(), inv_fact[n].get(), MPFR_RNDN);
      mpfr_mul(term.get(), term.get(), inv_fact[m].get(), MPFR_RNDN);
      if (m % 2 == 0)
        mpfr_add(sum.get(), sum.get(), term.get(), MPFR_RNDN);
      else
        mpfr_sub(sum.get(), sum.get(), term.get(), MPFR_RNDN);
    }
    double p = mpfr_get_d(sum.get(), MPFR_RNDN);
    if (p < 0.0) {
      if (p < -1e-9)
        throw ApproximationError("series_validity",
                                 "negative probability at n = " + std::to_string(n));
      p = 0.0;
    }
    dist.pmf[n] = p;
  }

  const double total = dist.total();
  if (std::fabs(total - 1.0) > 1e-4)
    throw ApproximationError("series_validity",
                             "probability mass sums to " + std::to_string(total));
  return dist;
}

MeanVariance subpoisson_moments(double lambda, double tau) {
  MeanVariance mv;
  mv.mean = lambda * std::exp(-lambda * tau);
  const double one_minus = 1.0 - tau;
  mv.variance = mv.mean - (1.0 - one_minus * one_minus) * mv.mean * mv.mean;
  return mv;
}

EquivalentParams invert_moments(double mean, double variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance) || variance <= 0.0)
    throw InvalidArgument("invert_moments: variance must be positive");
  if (variance > mean)
    throw InvalidArgument("invert_moments: variance exceeds mean (super-Poisson data)");

  EquivalentParams out;
  out.tau = (mean - variance) / (2.0 * mean * mean);
  if (out.tau == 0.0) {
    out.lambda = mean;
    return out;
  }
  // l e^{-l t} rises on [0, 1/t] to 1/(e t); the root lies in [mean, mean*e].
  const double peak = 1.0 / out.tau;
  if (mean * out.tau * std::numbers::e > 1.0)
    throw ApproximationError("no_equivalent_rate",
                             "mean exceeds the maximum of l*exp(-l*tau')");
  double lo = mean;
  double hi = std::min(mean * std::numbers::e, peak);
  auto f = [&](double l) { return l * std::exp(-l * out.tau) - mean; };
  for (int it = 0; it < 200 && (hi - lo) > 1e-13 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  out.lambda = 0.5 * (lo + hi);
  return out;
}

double SampleMoments::std_error_mean() const {
  if (!variance_defined || trials == 0) return 0.0;
  return std::sqrt(variance / static_cast<double>(trials));
}

SampleMoments sample_moments(const CountHistogram& histogram) {
  SampleMoments m;
  long double sum = 0.0L;
  for (std::size_t n = 0; n < histogram.size(); ++n) {
    m.trials += histogram[n];
    sum += static_cast<long double>(n) * histogram[n];
  }
  if (m.trials == 0) return m;
  const long double count = static_cast<long double>(m.trials);
  const long double mu = sum / count;
  long double c2 = 0.0L, c3 = 0.0L, c4 = 0.0L;
  for (std::size_t n = 0; n < histogram.size(); ++n) {
    if (histogram[n] == 0) continue;
    const long double d = static_cast<long double>(n) - mu;
    const long double w = histogram[n];
    c2 += w * d * d;
    c3 += w * d * d * d;
    c4 += w * d * d * d * d;
  }
  m.mean = static_cast<double>(mu);
  m.third_central = static_cast<double>(c3 / count);
  m.fourth_central = static_cast<double>(c4 / count);
  if (m.trials >= 2) {
    m.variance = static_cast<double>(c2 / (count - 1.0L));
    m.variance_defined = true;
  }
  return m;
}

EquivalentFit fit_equivalent(const SampleMoments& m) {
  if (!m.variance_defined)
    throw InvalidArgument("fit_equivalent: need at least two trials");
  EquivalentFit fit;
  fit.params = invert_moments(m.mean, m.variance);

  const double n = static_cast<double>(m.trials);
  const double var_mean = m.variance / n;
  const double var_var =
      std::max(0.0, m.fourth_central - m.variance * m.variance) / n;
  const double cov = m.third_central / n;

  const double hm = 1e-6 * m.mean;
  const double hv = 1e-6 * m.variance;
  const auto up_m = invert_moments(m.mean + hm, m.variance);
  const auto dn_m = invert_moments(m.mean - hm, m.variance);
  const auto up_v = invert_moments(m.mean, m.variance + hv);
  const auto dn_v = invert_moments(m.mean, m.variance - hv);
  const double dl_dm = (up_m.lambda - dn_m.lambda) / (2 * hm);
  const double dl_dv = (up_v.lambda - dn_v.lambda) / (2 * hv);
  const double dt_dm = (up_m.tau - dn_m.tau) / (2 * hm);
  const double dt_dv = (up_v.tau - dn_v.tau) / (2 * hv);

  auto quad = [&](double a, double b) {
    return a * a * var_mean + b * b * var_var + 2.0 * a * b * cov;
  };
  fit.se_lambda = std::sqrt(std::max(0.0, quad(dl_dm, dl_dv)));
  fit.se_tau = std::sqrt(std::max(0.0, quad(dt_dm, dt_dv)));
  return fit;
}

BinomialFit fit_binomial(const SampleMoments& m) {
  if (!m.variance_defined || m.mean <= 0.0)
    throw InvalidArgument("fit_binomial: need a positive mean and two trials");
  BinomialFit b;
  b.prob = 1.0 - m.variance / m.mean;
  if (b.prob <= 0.0 || b.prob >= 1.0)
    throw ApproximationError("binomial_breakdown", "sample is not sub-Poisson");
  b.trials = m.mean / b.prob;
  return b;
}

double total_variation(const std::vector<double>& pmf, const CountHistogram& histogram) {
  std::uint64_t trials = 0;
  for (auto c : histogram) trials += c;
  if (trials == 0) throw InvalidArgument("total_variation: empty histogram");
  const std::size_t len = std::max(pmf.size(), histogram.size());
  double tv = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    const double a = n < pmf.size() ? pmf[n] : 0.0;
    const double b = n < histogram.size()
                         ? static_cast<double>(histogram[n]) / static_cast<double>(trials)
                         : 0.0;
    tv += std::fabs(a - b);
  }
  return 0.5 * tv;
}

}  // namespace photocount
