#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace photocount::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::vector<double> steps(double lo, double hi, double step) {
  std::vector<double> v;
  const int n = static_cast<int>(std::llround((hi - lo) / step));
  // Rounded so grids print and serialize as their decimal values.
  for (int i = 0; i <= n; ++i) v.push_back(std::round((lo + step * i) * 1e9) / 1e9);
  return v;
}

}  // namespace

const std::vector<std::string>& parameter_names() {
  static const std::vector<std::string> names{"T",      "tau",     "xi",      "sigma",  "sigma0",
                                              "lambda", "lambda0", "lambda1", "lambdas"};
  return names;
}

const std::vector<std::string>& axis_order() {
  static const std::vector<std::string> order{"T",      "tau",     "sigma",   "sigma0", "lambda",
                                              "lambda0", "lambda1", "lambdas", "xi"};
  return order;
}

ParamSet parse_config(const std::string& text, const std::string& origin) {
  ParamSet out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  const auto& names = parameter_names();
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto where = origin + ":" + std::to_string(lineno);
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (std::find(names.begin(), names.end(), key) == names.end())
      throw InvalidArgument(where + ": unknown key '" + key + "'");
    if (out.count(key)) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    const auto v = to_double(value);
    if (!v) throw InvalidArgument(where + ": '" + value + "' is not a number");
    out[key] = *v;
  }
  return out;
}

ParamSet load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InvalidArgument("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto v = to_double(trim(item));
    if (!v) throw InvalidArgument(what + ": '" + item + "' is not a number");
    out.push_back(*v);
  }
  if (out.empty()) throw InvalidArgument(what + ": empty list");
  return out;
}

double require(const ParamSet& p, const std::string& key, const std::string& command) {
  const auto it = p.find(key);
  if (it == p.end())
    throw InvalidArgument(command + ": missing parameter '" + key +
                          "' (set it with --" + key + ", a config file or a preset)");
  return it->second;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = [] {
    std::vector<Preset> v;
    const ParamSet ook{{"T", 0.01}, {"xi", 0.3}, {"sigma", 0.2}, {"sigma0", 0.02},
                       {"lambda0", 0.2}, {"lambda1", 4.0}};
    v.push_back({"fig3", "sweep-sampling",
                 "noiseless equivalent dead time vs sampling period, T <= tau",
                 {{"lambda", 10.0}},
                 {{"T", {0.0025, 0.005, 0.01}}, {"tau", {0.01, 0.02, 0.03}}},
                 1000000, "~6 s", ""});
    v.push_back({"fig4", "sweep-sampling",
                 "noiseless equivalent rate vs sampling period, T > tau",
                 {{"lambda", 10.0}, {"tau", 0.005}},
                 {{"T", {0.01, 0.02, 0.025, 0.05}}},
                 1000000, "~3 s", ""});
    v.push_back({"fig5", "sweep-noise", "equivalent parameters vs shot noise, tau = T",
                 {{"lambda", 10.0}, {"T", 0.01}, {"tau", 0.01}, {"xi", 0.3}, {"sigma0", 0.0}},
                 {{"sigma", {0.1, 0.2, 0.3}}},
                 1000000, "~3 s", ""});
    v.push_back({"fig6", "approx-params", "binomial (N, P) vs threshold, tau = T",
                 {{"lambda", 10.0}, {"T", 0.01}, {"tau", 0.01}, {"sigma", 0.2}, {"sigma0", 0.02}},
                 {{"xi", steps(0.2, 0.8, 0.05)}},
                 1000000, "~4 s", ""});
    v.push_back({"fig7", "approx-params", "binomial (N, P) vs threshold, tau = 2T",
                 {{"lambda", 10.0}, {"T", 0.01}, {"tau", 0.02}, {"sigma", 0.2}, {"sigma0", 0.02}},
                 {{"xi", steps(0.2, 0.8, 0.05)}},
                 1000000, "~4 s", ""});
    Preset fig8{"fig8", "ber", "BER vs holding time at xi = 0.3, T = 0.01", ook,
                {{"tau", {0.01, 0.02, 0.03, 0.04, 0.05}}}, 100000, "~2 s", ""};
    v.push_back(fig8);
    Preset fig9{"fig9", "ber", "BER over holding time and sampling period at xi = 0.3", ook,
                {{"T", {0.005, 0.01, 0.02}}, {"tau", {0.01, 0.02, 0.03, 0.04, 0.05}}},
                100000, "~5 s", ""};
    v.push_back(fig9);
    Preset fig10{"fig10", "ber", "BER vs decision threshold at tau = T", ook,
                 {{"xi", steps(0.1, 1.5, 0.05)}}, 100000, "~1 s", ""};
    fig10.params["tau"] = 0.01;
    v.push_back(fig10);
    Preset fig11{"fig11", "design", "fast-path design vs full max-min grid over lambda_s", ook,
                 {{"lambdas", {1.0, 2.0, 3.0, 4.0, 5.0}}}, 100000, "~4 s", ""};
    fig11.params.erase("lambda1");
    fig11.params.erase("xi");
    fig11.mode = "both";
    v.push_back(fig11);
    return v;
  }();
  return all;
}

const Preset& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return p;
  std::string known;
  for (const auto& p : presets()) known += (known.empty() ? "" : ", ") + p.name;
  throw InvalidArgument("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace photocount::cli
