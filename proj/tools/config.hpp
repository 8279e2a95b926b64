// Parameter layering for the experiment harness: preset, then config file,
// then command-line flags, later layers overriding earlier ones.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "photocount/params.hpp"

namespace photocount::cli {

/// Scalar parameter names accepted in config files and presets.
/// lambda is the single rate of pmf/moments/sweep commands; lambdas sets
/// lambda1 = lambda0 + lambdas.
const std::vector<std::string>& parameter_names();

using ParamSet = std::map<std::string, double>;

/// Parses flat "key = value" lines. Blank lines and lines starting with '#'
/// are ignored. Unknown keys, duplicate keys and non-numeric values throw
/// InvalidArgument naming the line.
ParamSet parse_config(const std::string& text, const std::string& origin = "config");
ParamSet load_config_file(const std::string& path);

/// Sweep axes in canonical nesting order (outermost first). xi is innermost
/// so threshold sweeps can share simulated samples.
const std::vector<std::string>& axis_order();

struct Preset {
  std::string name;
  std::string command;
  std::string description;
  ParamSet params;
  std::map<std::string, std::vector<double>> axes;
  std::uint64_t trials = 0;
  std::string runtime_note;  // single-core wall time at the default trials
  std::string mode;          // design selection mode; empty keeps the default
};

const std::vector<Preset>& presets();
const Preset& find_preset(const std::string& name);  // throws InvalidArgument

/// Comma-separated list of reals; throws InvalidArgument on junk.
std::vector<double> parse_list(const std::string& text, const std::string& what);

/// Value of `key` or InvalidArgument("missing parameter ...").
double require(const ParamSet& p, const std::string& key, const std::string& command);

}  // namespace photocount::cli
