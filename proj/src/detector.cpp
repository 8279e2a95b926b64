#include "photocount/detector.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "photocount/parallel.hpp"

namespace photocount {

namespace {

void check_binomial(const BinomialApprox& b) {
  if (!(b.trials > 0.0) || !(b.prob > 0.0 && b.prob < 1.0))
    throw InvalidArgument("binomial needs N > 0 and P in (0, 1)");
}

int support_max(const BinomialApprox& b) { return static_cast<int>(std::floor(b.trials)); }

}  // namespace

double binomial_log_pmf(const BinomialApprox& b, int n) {
  if (n < 0 || n > support_max(b)) return -INFINITY;
  const double N = b.trials;
  return std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0) +
         n * std::log(b.prob) + (N - n) * std::log1p(-b.prob);
}

BinomialPmf binomial_pmf(const BinomialApprox& b) {
  check_binomial(b);
  BinomialPmf out;
  const int top = support_max(b);
  out.pmf.resize(static_cast<std::size_t>(top) + 1);
  double mass = 0.0;
  for (int n = 0; n <= top; ++n) {
    out.pmf[static_cast<std::size_t>(n)] = std::exp(binomial_log_pmf(b, n));
    mass += out.pmf[static_cast<std::size_t>(n)];
  }
  out.mass_deviation = std::abs(mass - 1.0);
  for (auto& x : out.pmf) x /= mass;
  return out;
}

int ml_threshold(double n_hat1, double n_hat0, double T) {
  if (!(n_hat0 > 0.0) || !(n_hat1 > n_hat0))
    throw InvalidArgument("ml_threshold needs 0 < N0 < N1 (no separability otherwise)");
  if (!(3.0 * T * n_hat1 < 1.0))
    throw ApproximationError("binomial_breakdown", "3 T N1 must be < 1");
  const double trials = 1.0 / (3.0 * T);
  const double L = std::log1p(-3.0 * T * n_hat0) - std::log1p(-3.0 * T * n_hat1);
  const double x = trials * L / (std::log(n_hat1 / n_hat0) + L);
  const int n_th = static_cast<int>(std::floor(x));
  if (!(n_th >= 0 && n_th < trials))
    throw ApproximationError("threshold_range", "n_th = " + std::to_string(n_th));
  return n_th;
}

int ml_threshold_general(const BinomialApprox& b0, const BinomialApprox& b1) {
  check_binomial(b0);
  check_binomial(b1);
  const int top = std::max(support_max(b0), support_max(b1));
  for (int n = 0; n <= top; ++n) {
    const double l1 = binomial_log_pmf(b1, n);
    const double l0 = binomial_log_pmf(b0, n);
    if (l1 > l0) return n - 1;
  }
  return top;
}

MlRule build_rule(const BinomialApprox& b0, const BinomialApprox& b1) {
  MlRule rule;
  rule.approx0 = b0;
  rule.approx1 = b1;
  rule.n_th = ml_threshold_general(b0, b1);
  return rule;
}

MlRule build_rule(const ChannelParams& channel, const ReceiverConfig& cfg) {
  channel.validate();
  cfg.validate();
  const DerivedParams d = derive_params(cfg);
  const CountMoments m0 = moments_full(channel.lambda0, cfg);
  const CountMoments m1 = moments_full(channel.lambda1, cfg);
  if (!(m1.mean > m0.mean))
    throw InvalidArgument("channel is not separable: mean counts do not increase with lambda");
  MlRule rule;
  rule.approx0 = binomial_approx(m0, d);
  rule.approx1 = binomial_approx(m1, d);
  if (d.alpha == 1 && d.delta == 0.0)
    rule.n_th = ml_threshold(m1.mean, m0.mean, cfg.sampling_period);
  else
    rule.n_th = ml_threshold_general(rule.approx0, rule.approx1);
  return rule;
}

double error_prob_analytic(const MlRule& rule) {
  const BinomialPmf p0 = binomial_pmf(rule.approx0);
  const BinomialPmf p1 = binomial_pmf(rule.approx1);
  double miss = 0.0;  // decide 0 when 1 was sent
  for (std::size_t n = 0; n < p1.pmf.size() && static_cast<int>(n) <= rule.n_th; ++n)
    miss += p1.pmf[n];
  double false_alarm = 0.0;  // decide 1 when 0 was sent
  for (std::size_t n = static_cast<std::size_t>(std::max(rule.n_th + 1, 0)); n < p0.pmf.size(); ++n)
    false_alarm += p0.pmf[n];
  return 0.5 * (miss + false_alarm);
}

std::vector<BerEstimate> ber_mc_thresholds(const ChannelParams& channel, const ReceiverConfig& cfg,
                                           const std::vector<double>& thresholds,
                                           const std::vector<MlRule>& rules,
                                           std::uint64_t symbols, std::uint64_t seed,
                                           const SimOptions& opts) {
  channel.validate();
  cfg.validate();
  if (symbols < 1) throw InvalidArgument("symbols must be >= 1");
  if (thresholds.size() != rules.size())
    throw InvalidArgument("one rule per threshold required");
  const std::size_t m = thresholds.size();
  const int workers = opts.workers > 0 ? opts.workers : default_workers();
  std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(workers));
  parallel_chunks(symbols, workers, [&](std::uint64_t chunk, std::uint64_t begin, std::uint64_t end) {
    std::vector<std::uint64_t>& errors = partial[chunk];
    errors.assign(m, 0);
    std::vector<int> counts(m);
    for (std::uint64_t i = begin; i < end; ++i) {
      Rng rng(seed, StreamId::kSymbol, i);
      const int bit = static_cast<int>(rng() >> 63);
      const double lambda = bit ? channel.lambda1 : channel.lambda0;
      simulate_symbol_thresholds(lambda, cfg, thresholds, rng, counts, opts.start);
      for (std::size_t j = 0; j < m; ++j) errors[j] += classify(counts[j], rules[j]) != bit;
    }
  });
  std::vector<BerEstimate> out(m);
  for (std::size_t j = 0; j < m; ++j) {
    for (const auto& e : partial)
      if (!e.empty()) out[j].errors += e[j];
    out[j].symbols = symbols;
    out[j].ber = static_cast<double>(out[j].errors) / static_cast<double>(symbols);
    out[j].std_error = std::sqrt(out[j].ber * (1.0 - out[j].ber) / static_cast<double>(symbols));
  }
  return out;
}

BerEstimate ber_mc(const ChannelParams& channel, const ReceiverConfig& cfg, const MlRule& rule,
                   std::uint64_t symbols, std::uint64_t seed, const SimOptions& opts) {
  return ber_mc_thresholds(channel, cfg, {cfg.threshold}, {rule}, symbols, seed, opts).front();
}

BerEstimate ber_mc(const ChannelParams& channel, const ReceiverConfig& cfg, std::uint64_t symbols,
                   std::uint64_t seed, const SimOptions& opts) {
  return ber_mc(channel, cfg, build_rule(channel, cfg), symbols, seed, opts);
}

}  // namespace photocount
