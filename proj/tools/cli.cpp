#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "photocount/parallel.hpp"

#ifndef PHOTOCOUNT_VERSION
#define PHOTOCOUNT_VERSION "0.0.0"
#endif

namespace photocount::cli {

namespace {

struct Flags {
  std::string preset;
  std::string config;
  std::string out;
  std::string manifest;
  std::string histogram;
  std::string model = "full";
  std::optional<std::string> mode;
  std::string rule = "analytic";
  std::string start = "stationary";
  std::string sweep;
  std::string values;
  std::optional<std::uint64_t> trials;
  std::uint64_t fit_trials = 0;
  std::uint64_t seed = 1;
  int workers = 0;
  std::map<std::string, std::optional<double>> scalars;
  std::map<std::string, std::string> lists;
};

// A layer assigns scalars and axes. A later layer's scalar removes an
// earlier axis of the same name and vice versa; lambda1 and lambdas
// displace each other.
struct Layer {
  ParamSet scalars;
  std::map<std::string, std::vector<double>> axes;
};

const char* rival(const std::string& key) {
  if (key == "lambda1") return "lambdas";
  if (key == "lambdas") return "lambda1";
  return nullptr;
}

void apply(Layer& acc, const Layer& next) {
  auto clear = [&acc](const std::string& key) {
    acc.scalars.erase(key);
    acc.axes.erase(key);
    if (const char* r = rival(key)) {
      acc.scalars.erase(r);
      acc.axes.erase(r);
    }
  };
  for (const auto& [k, v] : next.scalars) {
    clear(k);
    acc.scalars[k] = v;
  }
  for (const auto& [k, v] : next.axes) {
    clear(k);
    acc.axes[k] = v;
  }
}

StartState parse_start(const std::string& s) {
  if (s == "stationary") return StartState::kStationary;
  if (s == "cold") return StartState::kCold;
  throw InvalidArgument("unknown --start '" + s + "' (stationary, cold)");
}

Experiment resolve(const std::string& command, const Flags& f, const Preset* preset) {
  Layer acc;
  if (preset) {
    if (preset->command != command)
      throw InvalidArgument("preset " + preset->name + " belongs to command '" + preset->command +
                            "'");
    apply(acc, Layer{preset->params, preset->axes});
  }
  if (!f.config.empty()) apply(acc, Layer{load_config_file(f.config), {}});
  Layer flags;
  for (const auto& [k, v] : f.scalars)
    if (v) flags.scalars[k] = *v;
  for (const auto& [k, v] : f.lists)
    if (!v.empty()) flags.axes[k] = parse_list(v, "--" + k + "-list");
  if (!f.sweep.empty()) {
    const auto& names = parameter_names();
    if (std::find(names.begin(), names.end(), f.sweep) == names.end())
      throw InvalidArgument("--sweep: unknown parameter '" + f.sweep + "'");
    if (flags.axes.count(f.sweep))
      throw InvalidArgument("--sweep " + f.sweep + " conflicts with --" + f.sweep + "-list");
    flags.axes[f.sweep] = f.values.empty() ? std::vector<double>{} : parse_list(f.values, "--values");
  } else if (!f.values.empty()) {
    throw InvalidArgument("--values needs --sweep");
  }
  apply(acc, flags);

  Experiment e;
  e.command = command;
  e.params = acc.scalars;
  for (const auto& name : axis_order())
    if (const auto it = acc.axes.find(name); it != acc.axes.end()) e.axes.push_back({name, it->second});
  e.trials = f.trials ? *f.trials : (preset ? preset->trials : default_trials(command));
  e.seed = f.seed;
  e.workers = f.workers > 0 ? f.workers : default_workers();
  e.start = parse_start(f.start);
  e.model = f.model;
  e.mode = f.mode ? *f.mode : (preset && !preset->mode.empty() ? preset->mode : "auto");
  e.rule = f.rule;
  e.fit_trials = f.fit_trials;
  e.histogram_path = f.histogram;
  return e;
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

nlohmann::ordered_json manifest(const Experiment& e, const Flags& f, const CsvTable& t,
                                double seconds, const std::string& csv_path) {
  nlohmann::ordered_json j;
  j["command"] = e.command;
  j["preset"] = f.preset.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(f.preset);
  j["config"] = f.config.empty() ? nlohmann::ordered_json() : nlohmann::ordered_json(f.config);
  j["params"] = e.params;
  nlohmann::ordered_json axes = nlohmann::ordered_json::object();
  for (const auto& a : e.axes) axes[a.name] = a.values;
  j["axes"] = axes;
  j["trials"] = e.trials;
  j["seed"] = e.seed;
  j["workers"] = e.workers;
  j["start"] = f.start;
  if (e.command == "moments") j["model"] = e.model;
  if (e.command == "design") j["mode"] = e.mode;
  if (e.command == "ber") {
    j["rule"] = e.rule;
    if (e.rule == "mc") j["fit_trials"] = e.fit_trials > 0 ? e.fit_trials : e.trials;
  }
  if (e.command == "fit") j["histogram"] = e.histogram_path;
  j["library_version"] = PHOTOCOUNT_VERSION;
  j["started_utc"] = utc_now();
  j["wall_time_seconds"] = seconds;
  j["csv"] = csv_path.empty() ? nlohmann::ordered_json("-") : nlohmann::ordered_json(csv_path);
  j["columns"] = t.header();
  j["rows"] = t.rows();
  return j;
}

void add_common(CLI::App* sub, Flags& f, bool simulates) {
  sub->add_option("--preset", f.preset, "figure preset (fig3 ... fig11)");
  sub->add_option("--config", f.config, "flat key = value parameter file");
  sub->add_option("-o,--out", f.out, "CSV output path (default: stdout)");
  sub->add_option("--manifest", f.manifest, "JSON manifest path (default: <out>.json)");
  for (const auto& name : parameter_names()) {
    sub->add_option("--" + name, f.scalars[name], "parameter " + name);
    sub->add_option("--" + name + "-list", f.lists[name], "comma-separated sweep of " + name);
  }
  sub->add_option("--sweep", f.sweep, "sweep axis name (xi and tau have default grids)");
  sub->add_option("--values", f.values, "comma-separated values for --sweep");
  if (simulates) {
    sub->add_option("--trials", f.trials, "Monte Carlo symbols per operating point");
    sub->add_option("--seed", f.seed, "master seed");
    sub->add_option("--workers", f.workers,
                    "worker threads (0: $PHOTOCOUNT_WORKERS or hardware); never changes results");
    sub->add_option("--start", f.start, "symbol start state: stationary | cold");
  }
}

int list_presets(std::ostream& out) {
  CsvTable t({"name", "command", "trials", "runtime", "description"});
  for (const auto& p : presets())
    t.add({p.name, p.command, static_cast<std::int64_t>(p.trials), p.runtime_note, p.description});
  t.write(out);
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"photocount: photon-counting receiver experiments", "photocount"};
  app.set_version_flag("--version", PHOTOCOUNT_VERSION);
  app.require_subcommand(1);
  Flags f;
  std::map<std::string, CLI::App*> subs;
  for (const auto& name : command_names()) {
    CLI::App* sub = app.add_subcommand(name, command_help(name));
    add_common(sub, f, name != "pmf" && name != "fit");
    subs[name] = sub;
  }
  subs["moments"]->add_option("--model", f.model, "exact | approx | shot | full");
  subs["fit"]->add_option("--histogram", f.histogram, "CSV with header n,count")->required();
  subs["design"]->add_option("--mode", f.mode, "auto | fast | full | both");
  subs["ber"]->add_option("--rule", f.rule, "analytic | mc (binomials fitted by simulation)");
  subs["ber"]->add_option("--fit-trials", f.fit_trials, "symbols per rate for --rule mc");
  CLI::App* list = app.add_subcommand("presets", "list figure presets");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; every other parse failure is a bad config.
    return app.exit(e, out, err) == 0 ? kExitOk : kExitInvalid;
  }

  if (list->parsed()) return list_presets(out);

  std::string command;
  for (const auto& [name, sub] : subs)
    if (sub->parsed()) command = name;

  try {
    const Preset* preset = f.preset.empty() ? nullptr : &find_preset(f.preset);
    const Experiment e = resolve(command, f, preset);
    const auto t0 = std::chrono::steady_clock::now();
    const CsvTable table = execute(e);
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    if (f.out.empty()) {
      table.write(out);
    } else {
      std::ofstream file(f.out, std::ios::binary);
      if (!file) throw InvalidArgument("cannot write '" + f.out + "'");
      table.write(file);
      if (!file) throw std::runtime_error("write to '" + f.out + "' failed");
    }
    const std::string manifest_path = !f.manifest.empty() ? f.manifest
                                      : !f.out.empty()    ? f.out + ".json"
                                                          : std::string();
    if (!manifest_path.empty()) {
      std::ofstream mf(manifest_path);
      if (!mf) throw InvalidArgument("cannot write '" + manifest_path + "'");
      mf << manifest(e, f, table, seconds, f.out).dump(2) << '\n';
    }
    return kExitOk;
  } catch (const ApproximationError& e) {
    std::string what = e.what();
    if (what.rfind(e.flag() + ": ", 0) == 0) what.erase(0, e.flag().size() + 2);
    err << "error: approximation breakdown (" << e.flag() << "): " << what << '\n';
    return kExitBreakdown;
  } catch (const InvalidArgument& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace photocount::cli
