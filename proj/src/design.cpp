#include "photocount/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "photocount/detector.hpp"
#include "photocount/parallel.hpp"

namespace photocount {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_probabilities(const BinomialApprox& b0, const BinomialApprox& b1) {
  for (const BinomialApprox* b : {&b0, &b1}) {
    if (b->prob == 0.0 || b->prob == 1.0)
      throw ApproximationError("infinite_kl", "binomial probability is exactly 0 or 1");
    if (!(b->prob > 0.0 && b->prob < 1.0) || !(b->trials > 0.0))
      throw InvalidArgument("binomial needs N > 0 and P in (0, 1)");
  }
}

double log_choose(double N, int n) {
  return std::lgamma(N + 1.0) - std::lgamma(n + 1.0) - std::lgamma(N - n + 1.0);
}

// Parameter part shared by every directional form:
// N_A P_A log(P_A/P_B) + N_A (1-P_A) log((1-P_A)/(1-P_B)) + (N_A - N_B) log(1-P_B).
double parameter_terms(const BinomialApprox& a, const BinomialApprox& b) {
  const double lp = std::log(a.prob / b.prob);
  const double lq = std::log1p(-a.prob) - std::log1p(-b.prob);
  return a.trials * a.prob * lp + a.trials * (1.0 - a.prob) * lq +
         (a.trials - b.trials) * std::log1p(-b.prob);
}

double directional(const BinomialApprox& a, const BinomialApprox& b, double& excluded) {
  const BinomialPmf pa = binomial_pmf(a);
  const int top_b = static_cast<int>(std::floor(b.trials));
  double coeff = 0.0;
  excluded = 0.0;
  for (std::size_t i = 0; i < pa.pmf.size(); ++i) {
    const int n = static_cast<int>(i);
    const double lc_b = n <= top_b ? log_choose(b.trials, n) : 0.0;
    if (n > top_b) excluded += pa.pmf[i];
    coeff += pa.pmf[i] * (log_choose(a.trials, n) - lc_b);
  }
  return coeff + parameter_terms(a, b);
}

ReceiverConfig with_point(const ReceiverConfig& base, double xi, double tau) {
  ReceiverConfig c = base;
  c.threshold = xi;
  c.holding_time = tau;
  return c;
}

struct ModelPair {
  BinomialApprox b0, b1;
};

ModelPair binomials_at(const ChannelParams& ch, const ReceiverConfig& cfg) {
  const DerivedParams d = derive_params(cfg);
  return {binomial_approx(moments_full(ch.lambda0, cfg), d),
          binomial_approx(moments_full(ch.lambda1, cfg), d)};
}

// Index of the largest finite value; lowest index on ties; npos if none.
std::size_t argmax(const std::vector<double>& v) {
  std::size_t best = static_cast<std::size_t>(-1);
  for (std::size_t i = 0; i < v.size(); ++i)
    if (std::isfinite(v[i]) && (best == static_cast<std::size_t>(-1) || v[i] > v[best])) best = i;
  return best;
}

template <class F>
double golden_max(F&& f, double a, double b, double& fbest) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60 && (b - a) > 1e-9 * std::max(1.0, std::abs(a)); ++it) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  if (fc >= fd) {
    fbest = fc;
    return c;
  }
  fbest = fd;
  return d;
}

}  // namespace

KlPair kl_equal_n(const BinomialApprox& b0, const BinomialApprox& b1) {
  check_probabilities(b0, b1);
  if (!(std::abs(b0.trials - b1.trials) < 1e-9))
    throw InvalidArgument("kl_equal_n needs N0 == N1");
  return {parameter_terms(b0, b1), parameter_terms(b1, b0), 0.0, 0.0};
}

KlPair kl_general_n(const BinomialApprox& b0, const BinomialApprox& b1) {
  check_probabilities(b0, b1);
  KlPair k;
  k.kl_01 = directional(b0, b1, k.excluded_mass_01);
  k.kl_10 = directional(b1, b0, k.excluded_mass_10);
  return k;
}

double kl_approx_01(const BinomialApprox& b0, const BinomialApprox& b1) {
  check_probabilities(b0, b1);
  const double lq = std::log1p(-b0.prob) - std::log1p(-b1.prob);
  return b1.trials * lq + b0.trials * b0.prob * (std::log(b0.prob / b1.prob) - lq);
}

double kl_approx_10(const BinomialApprox& b0, const BinomialApprox& b1) {
  check_probabilities(b0, b1);
  const double lq = std::log1p(-b1.prob) - std::log1p(-b0.prob);
  return b0.trials * lq + b1.trials * b1.prob * (std::log(b1.prob / b0.prob) - lq);
}

std::vector<double> default_xi_grid(const ReceiverConfig& cfg) {
  const double lo = std::max(6.0 * cfg.thermal_sigma, 0.05);
  const double hi = 1.0 + 3.0 * cfg.shot_sigma;
  constexpr int kPoints = 64;
  std::vector<double> g(kPoints);
  for (int i = 0; i < kPoints; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * (i + 0.5) / kPoints;
  return g;
}

std::vector<double> default_tau_grid(const ReceiverConfig& cfg) {
  std::vector<double> g;
  for (int k = 1; k <= 10 && k * cfg.sampling_period < 1.0; ++k) g.push_back(k * cfg.sampling_period);
  return g;
}

double kl_gap_bound_at(const ChannelParams& channel, const ReceiverConfig& cfg) {
  const DerivedParams d = derive_params(cfg);
  const ModelPair m = binomials_at(channel, cfg);
  const double l0 = (1.0 - d.q) * channel.lambda0;
  const double l1 = (1.0 - d.q) * channel.lambda1;
  const double tau = cfg.holding_time;
  const double background = l0 > 0.0 ? l0 * tau * std::log(1.0 / l0) : 0.0;
  const double bracket = std::log((2.0 * d.alpha + 3.0) * l1 / 3.0) - std::log1p(-m.b1.prob);
  return (m.b0.prob + background + l0 * tau * bracket) * m.b0.mean();
}

DesignConditions check_conditions(const ChannelParams& channel, const ReceiverConfig& cfg,
                                  const std::vector<double>& tau_grid_in) {
  channel.validate();
  cfg.validate();
  const std::vector<double> tau_grid = tau_grid_in.empty() ? default_tau_grid(cfg) : tau_grid_in;
  const double T = cfg.sampling_period;
  const DerivedParams d = derive_params(cfg);
  const double l0 = (1.0 - d.q) * channel.lambda0;
  const double l1 = (1.0 - d.q) * channel.lambda1;

  DesignConditions c;
  c.p = d.p;

  const CountMoments m0 = moments_full(channel.lambda0, cfg);
  const CountMoments m1 = moments_full(channel.lambda1, cfg);
  c.gamma = m0.mean > 0.0 ? m1.mean / m0.mean : INFINITY;
  {
    const double denom = 1.0 - 2.0 * d.tau_equiv * m1.mean;
    const double rhs = (1.0 + d.tau_equiv / (1.5 * T)) / denom;
    const double lhs = std::log(c.gamma);
    c.lemma1_asymmetry.margin = denom > 0.0 ? lhs - rhs : -INFINITY;
    c.lemma1_asymmetry.holds = denom > 0.0 && lhs > rhs;
  }
  {
    const ReceiverConfig at_t = with_point(cfg, cfg.threshold, T);
    const double n0 = moments_full(channel.lambda0, at_t).mean;
    const double n1 = moments_full(channel.lambda1, at_t).mean;
    const double g = n0 > 0.0 ? n1 / n0 : INFINITY;
    double bound = -INFINITY;
    if (g > 1.0) {
      const double ratio = std::isfinite(g) ? std::log(g) / (2.0 * (g - 1.0)) : 0.0;
      bound = 0.5 - ratio - l1 * T;
    }
    c.lemma2_tau.margin = bound - d.p;
    c.lemma2_tau.holds = d.p < bound;
  }
  {
    double p_bound = INFINITY;
    double gap = -INFINITY;
    bool gap_ok = true;
    for (const double tau : tau_grid) {
      const ReceiverConfig at = with_point(cfg, cfg.threshold, tau);
      const DerivedParams dt = derive_params(at);
      const double a = dt.alpha;
      const double c1 = -std::expm1(-std::pow(l1 * T, 3));
      const double c2 = (1.0 - channel.lambda0 * dt.tau_equiv) / (a + 0.5);
      const double c3 = 1.0 - 2.0 * (a - 1.0) / (2.0 * a + 1.0) * std::exp(l0 * (tau + T));
      p_bound = std::min({p_bound, c1, c2, c3});
      try {
        gap = std::max(gap, kl_gap_bound_at(channel, at));
      } catch (const ApproximationError&) {
        gap_ok = false;
        gap = INFINITY;
      }
    }
    c.p_bound = p_bound;
    c.p_bound_eq54.margin = p_bound - d.p;
    c.p_bound_eq54.holds = d.p <= p_bound;
    c.gap_bound = gap;
    c.kl_gap_bound.margin = kGapCeiling - gap;
    c.kl_gap_bound.holds = gap_ok && gap <= kGapCeiling;
  }
  return c;
}

DesignResult select_params(const ChannelParams& channel, const ReceiverConfig& cfg_template,
                           std::vector<double> xi_grid, std::vector<double> tau_grid,
                           const SelectOptions& opts) {
  channel.validate();
  cfg_template.validate();
  const double T = cfg_template.sampling_period;
  if (xi_grid.empty()) xi_grid = default_xi_grid(cfg_template);
  if (tau_grid.empty()) tau_grid = default_tau_grid(cfg_template);
  for (const double tau : tau_grid) {
    const double k = tau / T;
    if (!(tau > 0.0 && tau < 1.0) || std::abs(k - std::round(k)) > 1e-9 || std::round(k) < 1.0)
      throw InvalidArgument("tau grid must hold integer multiples of T in (0, 1)");
  }
  for (const double xi : xi_grid)
    if (!(xi > 0.0)) throw InvalidArgument("xi grid must be positive");

  DesignResult result;
  result.tau_star = T;
  result.xi_star = xi_grid.front();
  if (!(channel.lambda1 > channel.lambda0)) {
    result.separable = false;
    result.predicted_ber = 0.5;
    return result;
  }

  auto note_skip = [&result](const ApproximationError& e) {
    if (result.skipped_points++ == 0) result.first_skip_flag = e.flag();
  };

  // Fast path: tau = T, maximize the approximate D(P0||P1) over xi.
  if (opts.mode != SelectMode::kFull) {
    auto objective = [&](double xi) {
      try {
        const ModelPair m = binomials_at(channel, with_point(cfg_template, xi, T));
        return kl_approx_01(m.b0, m.b1);
      } catch (const ApproximationError&) {
        return -std::numeric_limits<double>::infinity();
      }
    };
    std::vector<double> values(xi_grid.size(), kNaN);
    for (std::size_t i = 0; i < xi_grid.size(); ++i) {
      try {
        const ModelPair m = binomials_at(channel, with_point(cfg_template, xi_grid[i], T));
        values[i] = kl_approx_01(m.b0, m.b1);
      } catch (const ApproximationError& e) {
        note_skip(e);
      }
    }
    const std::size_t best = argmax(values);
    if (best != static_cast<std::size_t>(-1)) {
      double xi = xi_grid[best];
      double value = values[best];
      const double a = xi_grid[best == 0 ? 0 : best - 1];
      const double b = xi_grid[std::min(best + 1, xi_grid.size() - 1)];
      if (b > a) {
        double refined_value = -INFINITY;
        const double refined = golden_max(objective, a, b, refined_value);
        if (refined_value > value) {
          xi = refined;
          value = refined_value;
        }
      }
      const ModelPair m = binomials_at(channel, with_point(cfg_template, xi, T));
      const KlPair k = kl_general_n(m.b0, m.b1);
      result.fast = DesignCandidate{xi, T, k.kl_01, k.kl_10, value};
    }
  }

  const ReceiverConfig gate_cfg =
      with_point(cfg_template, result.fast ? result.fast->xi : cfg_template.threshold, T);
  result.conditions = check_conditions(channel, gate_cfg, tau_grid);
  const bool fast_ok = result.fast && result.conditions.fast_path_ok();

  const bool want_full = opts.mode == SelectMode::kFull || opts.mode == SelectMode::kBoth ||
                         (opts.mode == SelectMode::kAuto && !fast_ok);
  if (want_full) {
    const std::size_t nx = xi_grid.size();
    const std::size_t total = nx * tau_grid.size();
    std::vector<double> objective(total, kNaN), d01(total, kNaN), d10(total, kNaN);
    std::vector<std::string> flags(total);
    parallel_chunks(total, opts.workers, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
      for (std::uint64_t idx = begin; idx < end; ++idx) {
        const double tau = tau_grid[idx / nx];
        const double xi = xi_grid[idx % nx];
        try {
          const ModelPair m = binomials_at(channel, with_point(cfg_template, xi, tau));
          const KlPair k = kl_general_n(m.b0, m.b1);
          d01[idx] = k.kl_01;
          d10[idx] = k.kl_10;
          objective[idx] = std::min(k.kl_01, k.kl_10);
        } catch (const ApproximationError& e) {
          flags[idx] = e.flag();
        }
      }
    });
    for (const auto& f : flags)
      if (!f.empty()) note_skip(ApproximationError(f, ""));
    const std::size_t best = argmax(objective);
    if (best != static_cast<std::size_t>(-1))
      result.full = DesignCandidate{xi_grid[best % nx], tau_grid[best / nx], d01[best], d10[best],
                                    objective[best]};
  }

  const DesignCandidate* chosen = nullptr;
  switch (opts.mode) {
    case SelectMode::kFast: chosen = result.fast ? &*result.fast : nullptr; break;
    case SelectMode::kFull: chosen = result.full ? &*result.full : nullptr; break;
    case SelectMode::kAuto:
    case SelectMode::kBoth:
      chosen = fast_ok ? &*result.fast : (result.full ? &*result.full : nullptr);
      break;
  }
  if (!chosen)
    throw ApproximationError(result.first_skip_flag.empty() ? "binomial_breakdown"
                                                            : result.first_skip_flag,
                             "no grid point admits a valid binomial approximation");
  result.used_fast_path = chosen == (result.fast ? &*result.fast : nullptr);
  result.xi_star = chosen->xi;
  result.tau_star = chosen->tau;
  result.kl_01 = chosen->kl_01;
  result.kl_10 = chosen->kl_10;
  try {
    result.predicted_ber =
        error_prob_analytic(build_rule(channel, with_point(cfg_template, chosen->xi, chosen->tau)));
  } catch (const std::exception&) {
    result.predicted_ber = kNaN;
  }
  return result;
}

}  // namespace photocount
