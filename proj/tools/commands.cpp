#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "photocount/design.hpp"
#include "photocount/detector.hpp"
#include "photocount/moments.hpp"
#include "photocount/subpoisson.hpp"

namespace photocount::cli {

namespace {

using Row = std::vector<Cell>;

// Threshold used where the command is noiseless and xi plays no role.
constexpr double kNoiselessThreshold = 0.5;

std::string describe(const ParamSet& p) {
  std::string s;
  for (const auto& [k, v] : p) s += (s.empty() ? "" : " ") + k + "=" + format_number(v);
  return s;
}

std::string message_of(const ApproximationError& e) {
  const std::string what = e.what();
  const std::string prefix = e.flag() + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

std::vector<double> default_axis(const std::string& name, const ParamSet& p,
                                 const std::string& command) {
  if (name == "tau") {
    const double T = require(p, "T", command);
    std::vector<double> v;
    for (int k = 1; k <= 5 && k * T < 1.0; ++k) v.push_back(k * T);
    return v;
  }
  if (name == "xi") {
    ReceiverConfig c{require(p, "T", command), 0.5, 1.0, require(p, "sigma", command),
                     require(p, "sigma0", command)};
    return default_xi_grid(c);
  }
  throw InvalidArgument("--sweep " + name + " needs --values");
}

// Completes lambda1 from lambdas once all axes are applied.
ParamSet finalize(ParamSet p) {
  if (const auto it = p.find("lambdas"); it != p.end()) {
    const double l0 = p.count("lambda0") ? p.at("lambda0") : 0.0;
    p["lambda1"] = l0 + it->second;
  }
  return p;
}

// Calls f(params, xis) for every combination of the non-xi axes, outermost
// axis first. xis holds the xi axis (or the scalar xi, or nothing).
void for_each_point(const Experiment& e,
                    const std::function<void(const ParamSet&, const std::vector<double>&)>& f) {
  std::vector<const Axis*> outer;
  const Axis* xi_axis = nullptr;
  for (const auto& a : e.axes) {
    if (a.name == "xi") xi_axis = &a;
    else outer.push_back(&a);
  }

  std::function<void(std::size_t, ParamSet)> rec = [&](std::size_t depth, ParamSet p) {
    if (depth == outer.size()) {
      p = finalize(std::move(p));
      std::vector<double> xis;
      if (xi_axis)
        xis = xi_axis->values.empty() ? default_axis("xi", p, e.command) : xi_axis->values;
      else if (p.count("xi"))
        xis = {p.at("xi")};
      try {
        f(p, xis);
      } catch (const ApproximationError& err) {
        throw ApproximationError(err.flag(), message_of(err) + " [" + describe(p) + "]");
      }
      return;
    }
    const Axis& a = *outer[depth];
    const auto values = a.values.empty() ? default_axis(a.name, p, e.command) : a.values;
    for (const double v : values) {
      ParamSet q = p;
      q[a.name] = v;
      rec(depth + 1, std::move(q));
    }
  };
  rec(0, e.params);
}

ReceiverConfig receiver(const ParamSet& p, const std::string& cmd, double xi) {
  ReceiverConfig c{require(p, "T", cmd), require(p, "tau", cmd), xi, require(p, "sigma", cmd),
                   require(p, "sigma0", cmd)};
  c.validate();
  return c;
}

ReceiverConfig with_xi(ReceiverConfig c, double xi) {
  c.threshold = xi;
  c.validate();
  return c;
}

SimOptions sim(const Experiment& e) { return {e.start, e.workers}; }

std::uint64_t derived_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
  return splitmix64(s);
}

void need_xi(const std::vector<double>& xis, const std::string& cmd) {
  if (xis.empty()) throw InvalidArgument(cmd + ": missing parameter 'xi'");
}

void need_trials(const Experiment& e) {
  if (e.trials < 1) throw InvalidArgument(e.command + ": --trials must be >= 1");
}

void forbid_axes(const Experiment& e) {
  if (!e.axes.empty()) throw InvalidArgument(e.command + " does not take sweep axes");
}

// ---------------------------------------------------------------------------

CsvTable run_pmf(const Experiment& e) {
  forbid_axes(e);
  const SubPoissonDist d =
      subpoisson_pmf(require(e.params, "lambda", e.command), require(e.params, "tau", e.command));
  CsvTable t({"n", "probability"});
  for (std::size_t n = 0; n < d.pmf.size(); ++n)
    t.add({static_cast<std::int64_t>(n), d.pmf[n]});
  return t;
}

CountMoments model_moments(const std::string& model, double lambda, const ReceiverConfig& c) {
  if (model == "exact") return moments_exact_noiseless(lambda, c);
  if (model == "approx") return moments_approx_noiseless(lambda, c);
  if (model == "shot") return moments_shot(lambda, c);
  if (model == "full") return moments_full(lambda, c);
  throw InvalidArgument("unknown --model '" + model + "' (exact, approx, shot, full)");
}

CsvTable run_moments(const Experiment& e) {
  std::vector<std::string> header{"lambda",   "T",           "tau",       "xi",
                                  "sigma",    "sigma0",      "model",     "regime",
                                  "mean",     "variance",    "lambda_equiv", "tau_equiv",
                                  "within_validity", "binomial_N", "binomial_P"};
  const bool mc = e.trials > 0;
  if (mc) header.insert(header.end(), {"mc_mean", "mc_mean_se", "mc_variance"});
  CsvTable t(header);
  const bool noiseless = e.model == "exact" || e.model == "approx";
  for_each_point(e, [&](const ParamSet& p, std::vector<double> xis) {
    ParamSet q = p;
    if (noiseless) {
      q["sigma"] = 0.0;
      q["sigma0"] = 0.0;
      if (xis.empty()) xis = {kNoiselessThreshold};
    } else if (e.model == "shot") {
      q["sigma0"] = 0.0;
    }
    need_xi(xis, e.command);
    const double lambda = require(q, "lambda", e.command);
    const ReceiverConfig base = receiver(q, e.command, xis.front());
    std::vector<McMoments> sims;
    if (mc) sims = estimate_moments_mc_thresholds(lambda, base, xis, e.trials, e.seed, sim(e));
    for (std::size_t j = 0; j < xis.size(); ++j) {
      const ReceiverConfig c = with_xi(base, xis[j]);
      const CountMoments m = model_moments(e.model, lambda, c);
      const BinomialApprox b = binomial_approx(m, derive_params(c));
      Row row{lambda, c.sampling_period, c.holding_time, c.threshold, c.shot_sigma,
              c.thermal_sigma, e.model, std::string(to_string(m.regime)), m.mean, m.variance,
              m.lambda_equiv, m.tau_equiv, m.within_validity, b.trials, b.prob};
      if (mc) {
        const SampleMoments& s = sims[j].moments;
        row.insert(row.end(), {s.mean, s.std_error_mean(), s.variance});
      }
      t.add(std::move(row));
    }
  });
  return t;
}

CountHistogram read_histogram(const std::string& path) {
  if (path.empty()) throw InvalidArgument("fit: --histogram is required");
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read histogram file '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw InvalidArgument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "n,count") throw InvalidArgument(path + ": header must be 'n,count'");
  CountHistogram h;
  int lineno = 1;
  while (std::getline(f, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    long long n = -1, count = -1;
    char comma = 0;
    if (!(ss >> n >> comma >> count) || comma != ',' || n < 0 || count < 0 || !(ss >> std::ws).eof())
      throw InvalidArgument(path + ":" + std::to_string(lineno) + ": expected 'n,count'");
    if (static_cast<std::size_t>(n) >= h.size()) h.resize(static_cast<std::size_t>(n) + 1, 0);
    h[static_cast<std::size_t>(n)] += static_cast<std::uint64_t>(count);
  }
  return h;
}

CsvTable run_fit(const Experiment& e) {
  forbid_axes(e);
  const CountHistogram h = read_histogram(e.histogram_path);
  const SampleMoments s = sample_moments(h);
  if (!s.variance_defined) throw InvalidArgument("fit: need at least two counts");
  const EquivalentFit fit = fit_equivalent(s);
  const BinomialFit bf = fit_binomial(s);
  Cell tv_sub = Empty{}, tv_bin = Empty{};
  const double lt = fit.params.lambda * fit.params.tau;
  if (fit.params.tau < 1.0 && lt <= kSeriesValidity) {
    try {
      tv_sub = total_variation(subpoisson_pmf(fit.params.lambda, fit.params.tau).pmf, h);
    } catch (const ApproximationError&) {
    }
  }
  if (bf.prob > 0.0 && bf.prob < 1.0 && bf.trials >= 1.0)
    tv_bin = total_variation(binomial_pmf({bf.trials, bf.prob}).pmf, h);
  CsvTable t({"trials", "mean", "variance", "lambda_fit", "lambda_fit_se", "tau_fit", "tau_fit_se",
              "binomial_N", "binomial_P", "tv_subpoisson", "tv_binomial"});
  t.add({static_cast<std::int64_t>(s.trials), s.mean, s.variance, fit.params.lambda, fit.se_lambda,
         fit.params.tau, fit.se_tau, bf.trials, bf.prob, tv_sub, tv_bin});
  return t;
}

CsvTable run_sweep_sampling(const Experiment& e) {
  need_trials(e);
  CsvTable t({"T", "tau", "lambda", "regime", "mc_mean", "mc_mean_se", "mc_variance", "exact_mean",
              "exact_variance", "tau_fit", "tau_fit_se", "lambda_fit", "lambda_fit_se",
              "tau_theory", "lambda_theory"});
  for_each_point(e, [&](const ParamSet& p, const std::vector<double>&) {
    ParamSet q = p;
    q["sigma"] = 0.0;
    q["sigma0"] = 0.0;
    const double lambda = require(q, "lambda", e.command);
    const ReceiverConfig c = receiver(q, e.command, kNoiselessThreshold);
    const CountMoments exact = moments_exact_noiseless(lambda, c);
    const CountMoments approx = moments_approx_noiseless(lambda, c);
    const McMoments mc = estimate_moments_mc(lambda, c, e.trials, e.seed, sim(e));
    const EquivalentFit fit = fit_equivalent(mc.moments);
    t.add({c.sampling_period, c.holding_time, lambda, std::string(to_string(exact.regime)),
           mc.moments.mean, mc.moments.std_error_mean(), mc.moments.variance, exact.mean,
           exact.variance, fit.params.tau, fit.se_tau, fit.params.lambda, fit.se_lambda,
           approx.tau_equiv, approx.lambda_equiv});
  });
  return t;
}

CsvTable run_sweep_noise(const Experiment& e) {
  need_trials(e);
  CsvTable t({"sigma", "sigma0", "xi", "T", "tau", "lambda", "q", "p", "mc_mean", "mc_mean_se",
              "mc_variance", "theory_mean", "theory_variance", "lambda_fit", "lambda_fit_se",
              "tau_fit", "tau_fit_se", "lambda_theory", "tau_theory"});
  for_each_point(e, [&](const ParamSet& p, const std::vector<double>& xis) {
    need_xi(xis, e.command);
    const double lambda = require(p, "lambda", e.command);
    const ReceiverConfig base = receiver(p, e.command, xis.front());
    const auto sims = estimate_moments_mc_thresholds(lambda, base, xis, e.trials, e.seed, sim(e));
    for (std::size_t j = 0; j < xis.size(); ++j) {
      const ReceiverConfig c = with_xi(base, xis[j]);
      const DerivedParams d = derive_params(c);
      const CountMoments m = moments_full(lambda, c);
      const SampleMoments& s = sims[j].moments;
      const EquivalentFit fit = fit_equivalent(s);
      t.add({c.shot_sigma, c.thermal_sigma, c.threshold, c.sampling_period, c.holding_time, lambda,
             d.q, d.p, s.mean, s.std_error_mean(), s.variance, m.mean, m.variance,
             fit.params.lambda, fit.se_lambda, fit.params.tau, fit.se_tau, m.lambda_equiv,
             m.tau_equiv});
    }
  });
  return t;
}

CsvTable run_approx_params(const Experiment& e) {
  need_trials(e);
  CsvTable t({"xi", "lambda", "T", "tau", "sigma", "sigma0", "N_theory", "P_theory", "N_fit",
              "P_fit", "mean_theory", "variance_theory", "mc_mean", "mc_mean_se", "mc_variance"});
  for_each_point(e, [&](const ParamSet& p, const std::vector<double>& xis) {
    need_xi(xis, e.command);
    const double lambda = require(p, "lambda", e.command);
    const ReceiverConfig base = receiver(p, e.command, xis.front());
    const auto sims = estimate_moments_mc_thresholds(lambda, base, xis, e.trials, e.seed, sim(e));
    for (std::size_t j = 0; j < xis.size(); ++j) {
      const ReceiverConfig c = with_xi(base, xis[j]);
      const CountMoments m = moments_full(lambda, c);
      const BinomialApprox b = binomial_approx(m, derive_params(c));
      const SampleMoments& s = sims[j].moments;
      const BinomialFit f = fit_binomial(s);
      t.add({c.threshold, lambda, c.sampling_period, c.holding_time, c.shot_sigma, c.thermal_sigma,
             b.trials, b.prob, f.trials, f.prob, m.mean, m.variance, s.mean, s.std_error_mean(),
             s.variance});
    }
  });
  return t;
}

ChannelParams channel_of(const ParamSet& p, const std::string& cmd) {
  ChannelParams ch{require(p, "lambda0", cmd), require(p, "lambda1", cmd)};
  ch.validate();
  return ch;
}

// MC-fitted binomials at both rates for every threshold, one shared
// simulation per rate.
std::vector<MlRule> fitted_rules(const Experiment& e, const ChannelParams& ch,
                                 const ReceiverConfig& base, const std::vector<double>& xis) {
  const std::uint64_t n = e.fit_trials > 0 ? e.fit_trials : e.trials;
  const auto s0 = estimate_moments_mc_thresholds(ch.lambda0, base, xis, n, derived_seed(e.seed, 1), sim(e));
  const auto s1 = estimate_moments_mc_thresholds(ch.lambda1, base, xis, n, derived_seed(e.seed, 2), sim(e));
  std::vector<MlRule> rules;
  for (std::size_t j = 0; j < xis.size(); ++j) {
    const BinomialFit f0 = fit_binomial(s0[j].moments);
    const BinomialFit f1 = fit_binomial(s1[j].moments);
    rules.push_back(build_rule(BinomialApprox{f0.trials, f0.prob}, BinomialApprox{f1.trials, f1.prob}));
  }
  return rules;
}

CsvTable run_ber(const Experiment& e) {
  need_trials(e);
  if (e.rule != "analytic" && e.rule != "mc")
    throw InvalidArgument("unknown --rule '" + e.rule + "' (analytic, mc)");
  CsvTable t({"xi", "ber", "stderr", "errors", "symbols", "n_th", "analytic_pe", "rule", "lambda0",
              "lambda1", "T", "tau", "sigma", "sigma0"});
  for_each_point(e, [&](const ParamSet& p, const std::vector<double>& xis) {
    need_xi(xis, e.command);
    const ChannelParams ch = channel_of(p, e.command);
    const ReceiverConfig base = receiver(p, e.command, xis.front());
    std::vector<MlRule> rules;
    if (e.rule == "mc") {
      rules = fitted_rules(e, ch, base, xis);
    } else {
      for (const double xi : xis) rules.push_back(build_rule(ch, with_xi(base, xi)));
    }
    const auto bers = ber_mc_thresholds(ch, base, xis, rules, e.trials, e.seed, sim(e));
    for (std::size_t j = 0; j < xis.size(); ++j) {
      t.add({xis[j], bers[j].ber, bers[j].std_error, static_cast<std::int64_t>(bers[j].errors),
             static_cast<std::int64_t>(bers[j].symbols), static_cast<std::int64_t>(rules[j].n_th),
             error_prob_analytic(rules[j]), e.rule, ch.lambda0, ch.lambda1, base.sampling_period,
             base.holding_time, base.shot_sigma, base.thermal_sigma});
    }
  });
  return t;
}

SelectMode parse_mode(const std::string& m) {
  if (m == "auto") return SelectMode::kAuto;
  if (m == "fast") return SelectMode::kFast;
  if (m == "full") return SelectMode::kFull;
  if (m == "both") return SelectMode::kBoth;
  throw InvalidArgument("unknown --mode '" + m + "' (auto, fast, full, both)");
}

CsvTable run_design(const Experiment& e) {
  const SelectMode mode = parse_mode(e.mode);
  std::vector<std::string> header{
      "lambda0",       "lambda1",        "mode",           "separable",     "used_fast_path",
      "xi_star",       "tau_star",       "kl_01",          "kl_10",         "predicted_ber",
      "lemma1_asymmetry", "lemma2_tau",  "p_bound_eq54",   "kl_gap_bound",  "gamma",
      "p",             "p_bound",        "gap_bound",      "skipped_points", "skip_flag",
      "fast_xi",       "fast_kl_01",     "fast_kl_10",     "full_xi",       "full_tau",
      "full_kl_01",    "full_kl_10"};
  const bool mc = e.trials > 0;
  if (mc)
    header.insert(header.end(),
                  {"ber", "ber_se", "fast_ber", "fast_ber_se", "full_ber", "full_ber_se"});
  CsvTable t(header);

  // xi and tau axes are the search grids here, not output rows.
  std::vector<double> xi_grid, tau_grid;
  Experiment rows = e;
  rows.axes.clear();
  for (const auto& a : e.axes) {
    if (a.name == "xi") xi_grid = a.values;
    else if (a.name == "tau") tau_grid = a.values;
    else rows.axes.push_back(a);
  }
  for_each_point(rows, [&](const ParamSet& p, const std::vector<double>&) {
    const ChannelParams ch = channel_of(p, e.command);
    const double T = require(p, "T", e.command);
    ReceiverConfig tmpl{T, T, 1.0, require(p, "sigma", e.command), require(p, "sigma0", e.command)};
    tmpl.threshold = p.count("xi") ? p.at("xi") : default_xi_grid(tmpl).front();
    tmpl.validate();
    const DesignResult r = select_params(ch, tmpl, xi_grid, tau_grid, {mode, e.workers});
    const DesignConditions& c = r.conditions;
    auto opt = [](const std::optional<DesignCandidate>& d, double DesignCandidate::*f) -> Cell {
      return d ? Cell{(*d).*f} : Cell{Empty{}};
    };
    Row row{ch.lambda0,
            ch.lambda1,
            e.mode,
            r.separable,
            r.used_fast_path,
            r.xi_star,
            r.tau_star,
            r.kl_01,
            r.kl_10,
            r.predicted_ber,
            c.lemma1_asymmetry.holds,
            c.lemma2_tau.holds,
            c.p_bound_eq54.holds,
            c.kl_gap_bound.holds,
            c.gamma,
            c.p,
            c.p_bound,
            c.gap_bound,
            static_cast<std::int64_t>(r.skipped_points),
            r.first_skip_flag,
            opt(r.fast, &DesignCandidate::xi),
            opt(r.fast, &DesignCandidate::kl_01),
            opt(r.fast, &DesignCandidate::kl_10),
            opt(r.full, &DesignCandidate::xi),
            opt(r.full, &DesignCandidate::tau),
            opt(r.full, &DesignCandidate::kl_01),
            opt(r.full, &DesignCandidate::kl_10)};
    if (mc) {
      auto ber_at = [&](double xi, double tau) {
        ReceiverConfig c2 = tmpl;
        c2.threshold = xi;
        c2.holding_time = tau;
        const BerEstimate b = ber_mc(ch, c2, e.trials, e.seed, sim(e));
        return std::pair<Cell, Cell>{b.ber, b.std_error};
      };
      const std::pair<Cell, Cell> none{Empty{}, Empty{}};
      const auto chosen = r.separable ? ber_at(r.xi_star, r.tau_star) : none;
      const auto fast = r.fast ? ber_at(r.fast->xi, r.fast->tau) : none;
      const auto full = r.full ? ber_at(r.full->xi, r.full->tau) : none;
      row.insert(row.end(), {chosen.first, chosen.second, fast.first, fast.second, full.first,
                             full.second});
    }
    t.add(std::move(row));
  });
  return t;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"pmf",         "moments",       "fit",
                                              "sweep-sampling", "sweep-noise", "approx-params",
                                              "design",      "ber"};
  return names;
}

const char* command_help(const std::string& command) {
  if (command == "pmf") return "ideal dead-time count PMF (columns n, probability)";
  if (command == "moments") return "analytic count moments and binomial (N, P), optional MC check";
  if (command == "fit") return "moment-matching fit of a user count histogram (CSV n,count)";
  if (command == "sweep-sampling") return "noiseless MC fit of (lambda', tau') vs T and tau";
  if (command == "sweep-noise") return "MC fit of (lambda', tau') under shot and thermal noise";
  if (command == "approx-params") return "analytic vs MC-fitted binomial (N, P)";
  if (command == "design") return "select (xi*, tau*) by max-min KL with condition flags";
  if (command == "ber") return "Monte Carlo bit error rate of the ML count detector";
  return "";
}

std::uint64_t default_trials(const std::string& command) {
  if (command == "moments" || command == "design" || command == "pmf" || command == "fit") return 0;
  return 100000;
}

CsvTable execute(const Experiment& e) {
  if (e.command == "pmf") return run_pmf(e);
  if (e.command == "moments") return run_moments(e);
  if (e.command == "fit") return run_fit(e);
  if (e.command == "sweep-sampling") return run_sweep_sampling(e);
  if (e.command == "sweep-noise") return run_sweep_noise(e);
  if (e.command == "approx-params") return run_approx_params(e);
  if (e.command == "design") return run_design(e);
  if (e.command == "ber") return run_ber(e);
  throw InvalidArgument("unknown command '" + e.command + "'");
}

}  // namespace photocount::cli
