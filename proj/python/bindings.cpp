#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "photocount/design.hpp"
#include "photocount/detector.hpp"
#include "photocount/moments.hpp"
#include "photocount/params.hpp"
#include "photocount/subpoisson.hpp"
#include "photocount/waveform_sim.hpp"

namespace py = pybind11;
using namespace photocount;

namespace {

SimOptions sim_options(const std::string& start, int workers) {
  SimOptions o;
  if (start == "cold")
    o.start = StartState::kCold;
  else if (start != "stationary")
    throw InvalidArgument("start must be 'stationary' or 'cold'");
  o.workers = workers;
  return o;
}

SelectMode select_mode(const std::string& m) {
  if (m == "auto") return SelectMode::kAuto;
  if (m == "fast") return SelectMode::kFast;
  if (m == "full") return SelectMode::kFull;
  if (m == "both") return SelectMode::kBoth;
  throw InvalidArgument("mode must be auto, fast, full or both");
}

std::string repr_fields(const char* name, std::initializer_list<std::pair<const char*, double>> f) {
  std::string s = std::string(name) + "(";
  bool first = true;
  for (const auto& [k, v] : f) {
    s += (first ? "" : ", ") + std::string(k) + "=" + py::repr(py::float_(v)).cast<std::string>();
    first = false;
  }
  return s + ")";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Photon-counting receiver model: count statistics, simulation, detection and design.";
  m.attr("__version__") = PHOTOCOUNT_VERSION;

  static py::exception<ApproximationError> approx_exc(m, "ApproximationError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ApproximationError& e) {
      py::object err = py::handle(approx_exc.ptr())(py::str(e.what()));
      err.attr("flag") = e.flag();
      PyErr_SetObject(approx_exc.ptr(), err.ptr());
    } catch (const InvalidArgument& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  py::enum_<Regime>(m, "Regime")
      .value("SAMPLE_GT_HOLD", Regime::kSampleGtHold)
      .value("SAMPLE_LE_HOLD", Regime::kSampleLeHold);

  py::class_<ReceiverConfig>(m, "ReceiverConfig")
      .def(py::init([](double T, double tau, double xi, double sigma, double sigma0) {
             ReceiverConfig c{T, tau, xi, sigma, sigma0};
             c.validate();
             return c;
           }),
           py::arg("T") = 0.01, py::arg("tau") = 0.01, py::arg("xi") = 0.3,
           py::arg("sigma") = 0.0, py::arg("sigma0") = 0.0)
      .def_readwrite("T", &ReceiverConfig::sampling_period)
      .def_readwrite("tau", &ReceiverConfig::holding_time)
      .def_readwrite("xi", &ReceiverConfig::threshold)
      .def_readwrite("sigma", &ReceiverConfig::shot_sigma)
      .def_readwrite("sigma0", &ReceiverConfig::thermal_sigma)
      .def("validate", &ReceiverConfig::validate)
      .def("__repr__", [](const ReceiverConfig& c) {
        return repr_fields("ReceiverConfig", {{"T", c.sampling_period},
                                            {"tau", c.holding_time},
                                            {"xi", c.threshold},
                                            {"sigma", c.shot_sigma},
                                            {"sigma0", c.thermal_sigma}});
      });

  py::class_<ChannelParams>(m, "ChannelParams")
      .def(py::init([](double l0, double l1) {
             ChannelParams c{l0, l1};
             c.validate();
             return c;
           }),
           py::arg("lambda0"), py::arg("lambda1"))
      .def_readwrite("lambda0", &ChannelParams::lambda0)
      .def_readwrite("lambda1", &ChannelParams::lambda1);

  py::class_<DerivedParams>(m, "DerivedParams")
      .def_readonly("q", &DerivedParams::q)
      .def_readonly("p", &DerivedParams::p)
      .def_readonly("alpha", &DerivedParams::alpha)
      .def_readonly("delta", &DerivedParams::delta)
      .def_readonly("tau_equiv", &DerivedParams::tau_equiv)
      .def_readonly("max_count", &DerivedParams::max_count)
      .def_readonly("samples", &DerivedParams::samples)
      .def_readonly("regime", &DerivedParams::regime);
  m.def("derive_params", &derive_params, py::arg("cfg"));
  m.def("gaussian_q", &gaussian_q, py::arg("x"));

  // Sub-Poisson counts.
  py::class_<SubPoissonDist>(m, "SubPoissonDist")
      .def_readonly("lambda_", &SubPoissonDist::lambda)
      .def_readonly("tau", &SubPoissonDist::tau)
      .def_readonly("max_count", &SubPoissonDist::max_count)
      .def_readonly("pmf", &SubPoissonDist::pmf)
      .def("total", &SubPoissonDist::total)
      .def("mean", &SubPoissonDist::mean)
      .def("variance", &SubPoissonDist::variance);
  m.def("subpoisson_pmf", &subpoisson_pmf, py::arg("lam"), py::arg("tau"));
  m.def(
      "subpoisson_moments",
      [](double lam, double tau) {
        const MeanVariance mv = subpoisson_moments(lam, tau);
        return py::make_tuple(mv.mean, mv.variance);
      },
      py::arg("lam"), py::arg("tau"), "(mean, variance) of the dead-time count.");
  m.def(
      "invert_moments",
      [](double mean, double variance) {
        const EquivalentParams e = invert_moments(mean, variance);
        return py::make_tuple(e.lambda, e.tau);
      },
      py::arg("mean"), py::arg("variance"), "(lambda', tau') matching a mean and variance.");

  py::class_<SampleMoments>(m, "SampleMoments")
      .def_readonly("trials", &SampleMoments::trials)
      .def_readonly("mean", &SampleMoments::mean)
      .def_readonly("variance", &SampleMoments::variance)
      .def("std_error_mean", &SampleMoments::std_error_mean);
  m.def("sample_moments", &sample_moments, py::arg("histogram"));
  m.def(
      "fit_equivalent",
      [](const SampleMoments& s) {
        const EquivalentFit f = fit_equivalent(s);
        py::dict d;
        d["lambda"] = f.params.lambda;
        d["tau"] = f.params.tau;
        d["se_lambda"] = f.se_lambda;
        d["se_tau"] = f.se_tau;
        return d;
      },
      py::arg("moments"));
  m.def(
      "fit_binomial",
      [](const SampleMoments& s) {
        const BinomialFit f = fit_binomial(s);
        return py::make_tuple(f.trials, f.prob);
      },
      py::arg("moments"), "(N, P) matching the sample mean and variance.");
  m.def("total_variation", &total_variation, py::arg("pmf"), py::arg("histogram"));

  // Count moments and the binomial approximation.
  py::class_<CountMoments>(m, "CountMoments")
      .def_readonly("mean", &CountMoments::mean)
      .def_readonly("variance", &CountMoments::variance)
      .def_readonly("regime", &CountMoments::regime)
      .def_readonly("lambda_equiv", &CountMoments::lambda_equiv)
      .def_readonly("tau_equiv", &CountMoments::tau_equiv)
      .def_readonly("within_validity", &CountMoments::within_validity)
      .def_readonly("variance_valid", &CountMoments::variance_valid);
  m.def("moments_exact_noiseless", &moments_exact_noiseless, py::arg("lam"), py::arg("cfg"));
  m.def("moments_approx_noiseless", &moments_approx_noiseless, py::arg("lam"), py::arg("cfg"));
  m.def("moments_shot", &moments_shot, py::arg("lam"), py::arg("cfg"));
  m.def("moments_full", &moments_full, py::arg("lam"), py::arg("cfg"));

  py::class_<BinomialApprox>(m, "BinomialApprox")
      .def(py::init([](double n, double p) { return BinomialApprox{n, p}; }), py::arg("N"),
           py::arg("P"))
      .def_readonly("N", &BinomialApprox::trials)
      .def_readonly("P", &BinomialApprox::prob)
      .def("mean", &BinomialApprox::mean)
      .def("variance", &BinomialApprox::variance);
  m.def("binomial_approx", &binomial_approx, py::arg("moments"), py::arg("derived"));
  m.def(
      "binomial_for",
      [](double lam, const ReceiverConfig& c) {
        return binomial_approx(moments_full(lam, c), derive_params(c));
      },
      py::arg("lam"), py::arg("cfg"), "Binomial approximation of the noisy count at rate lam.");

  // Simulation. Heavy loops release the GIL.
  m.def(
      "estimate_moments_mc",
      [](double lam, const ReceiverConfig& c, std::uint64_t trials, std::uint64_t seed,
         const std::string& start, int workers) {
        const SimOptions o = sim_options(start, workers);
        McMoments r;
        {
          py::gil_scoped_release release;
          r = estimate_moments_mc(lam, c, trials, seed, o);
        }
        return py::make_tuple(r.histogram, r.moments);
      },
      py::arg("lam"), py::arg("cfg"), py::arg("trials"), py::arg("seed") = 1,
      py::arg("start") = "stationary", py::arg("workers") = 0,
      "(histogram, SampleMoments) of the simulated count per symbol.");
  m.def(
      "ideal_counter_histogram",
      [](double lam, double tau, std::uint64_t trials, std::uint64_t seed, int workers) {
        py::gil_scoped_release release;
        return ideal_counter_histogram(lam, tau, trials, seed, workers);
      },
      py::arg("lam"), py::arg("tau"), py::arg("trials"), py::arg("seed") = 1,
      py::arg("workers") = 0);
  m.def(
      "count_rising_edges",
      [](const std::vector<std::uint8_t>& bits, std::uint8_t initial) {
        return count_rising_edges(bits, initial);
      },
      py::arg("bits"), py::arg("initial") = 0);

  // Detection.
  py::class_<MlRule>(m, "MlRule")
      .def_readonly("n_th", &MlRule::n_th)
      .def_readonly("approx0", &MlRule::approx0)
      .def_readonly("approx1", &MlRule::approx1)
      .def("classify", [](const MlRule& r, int n) { return classify(n, r); }, py::arg("n"));
  m.def("build_rule", py::overload_cast<const ChannelParams&, const ReceiverConfig&>(&build_rule),
        py::arg("channel"), py::arg("cfg"));
  m.def("error_prob_analytic", &error_prob_analytic, py::arg("rule"));

  py::class_<BerEstimate>(m, "BerEstimate")
      .def_readonly("ber", &BerEstimate::ber)
      .def_readonly("std_error", &BerEstimate::std_error)
      .def_readonly("errors", &BerEstimate::errors)
      .def_readonly("symbols", &BerEstimate::symbols);
  m.def(
      "ber_mc",
      [](const ChannelParams& ch, const ReceiverConfig& c, std::uint64_t symbols,
         std::uint64_t seed, const std::string& start, int workers) {
        const SimOptions o = sim_options(start, workers);
        py::gil_scoped_release release;
        return ber_mc(ch, c, symbols, seed, o);
      },
      py::arg("channel"), py::arg("cfg"), py::arg("symbols"), py::arg("seed") = 1,
      py::arg("start") = "stationary", py::arg("workers") = 0);

  // Design.
  py::class_<KlPair>(m, "KlPair")
      .def_readonly("kl_01", &KlPair::kl_01)
      .def_readonly("kl_10", &KlPair::kl_10);
  m.def("kl_equal_n", &kl_equal_n, py::arg("b0"), py::arg("b1"));
  m.def("kl_general_n", &kl_general_n, py::arg("b0"), py::arg("b1"));

  py::class_<ConditionCheck>(m, "ConditionCheck")
      .def_readonly("holds", &ConditionCheck::holds)
      .def_readonly("margin", &ConditionCheck::margin);
  py::class_<DesignConditions>(m, "DesignConditions")
      .def_readonly("lemma1_asymmetry", &DesignConditions::lemma1_asymmetry)
      .def_readonly("lemma2_tau", &DesignConditions::lemma2_tau)
      .def_readonly("p_bound_eq54", &DesignConditions::p_bound_eq54)
      .def_readonly("kl_gap_bound", &DesignConditions::kl_gap_bound)
      .def_readonly("gamma", &DesignConditions::gamma)
      .def_readonly("p", &DesignConditions::p)
      .def_readonly("p_bound", &DesignConditions::p_bound)
      .def_readonly("gap_bound", &DesignConditions::gap_bound)
      .def("fast_path_ok", &DesignConditions::fast_path_ok);
  m.def("check_conditions", &check_conditions, py::arg("channel"), py::arg("cfg"),
        py::arg("tau_grid") = std::vector<double>{});

  py::class_<DesignCandidate>(m, "DesignCandidate")
      .def_readonly("xi", &DesignCandidate::xi)
      .def_readonly("tau", &DesignCandidate::tau)
      .def_readonly("kl_01", &DesignCandidate::kl_01)
      .def_readonly("kl_10", &DesignCandidate::kl_10)
      .def_readonly("objective", &DesignCandidate::objective);
  py::class_<DesignResult>(m, "DesignResult")
      .def_readonly("xi_star", &DesignResult::xi_star)
      .def_readonly("tau_star", &DesignResult::tau_star)
      .def_readonly("kl_01", &DesignResult::kl_01)
      .def_readonly("kl_10", &DesignResult::kl_10)
      .def_readonly("conditions", &DesignResult::conditions)
      .def_readonly("predicted_ber", &DesignResult::predicted_ber)
      .def_readonly("separable", &DesignResult::separable)
      .def_readonly("used_fast_path", &DesignResult::used_fast_path)
      .def_readonly("fast", &DesignResult::fast)
      .def_readonly("full", &DesignResult::full)
      .def_readonly("skipped_points", &DesignResult::skipped_points);
  m.def(
      "select_params",
      [](const ChannelParams& ch, const ReceiverConfig& c, std::vector<double> xi_grid,
         std::vector<double> tau_grid, const std::string& mode, int workers) {
        const SelectOptions o{select_mode(mode), workers};
        py::gil_scoped_release release;
        return select_params(ch, c, std::move(xi_grid), std::move(tau_grid), o);
      },
      py::arg("channel"), py::arg("cfg"), py::arg("xi_grid") = std::vector<double>{},
      py::arg("tau_grid") = std::vector<double>{}, py::arg("mode") = "auto",
      py::arg("workers") = 0);
  m.def("default_xi_grid", &default_xi_grid, py::arg("cfg"));
  m.def("default_tau_grid", &default_tau_grid, py::arg("cfg"));
}
