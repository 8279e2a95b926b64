// Command pipelines. Each one maps a resolved Experiment to a CSV table.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "config.hpp"
#include "csv.hpp"
#include "photocount/waveform_sim.hpp"

namespace photocount::cli {

struct Axis {
  std::string name;
  std::vector<double> values;  // empty: the command's default grid (xi, tau only)
};

struct Experiment {
  std::string command;
  ParamSet params;
  std::vector<Axis> axes;  // canonical order, see axis_order()
  std::uint64_t trials = 0;
  std::uint64_t seed = 1;
  int workers = 1;
  StartState start = StartState::kStationary;
  std::string model = "full";    // moments: exact | approx | shot | full
  std::string mode = "auto";     // design: auto | fast | full | both
  std::string rule = "analytic"; // ber: analytic | mc
  std::uint64_t fit_trials = 0;  // ber --rule mc; 0 means `trials`
  std::string histogram_path;    // fit
};

const std::vector<std::string>& command_names();
const char* command_help(const std::string& command);

/// Trials used when neither a flag nor a preset sets them.
std::uint64_t default_trials(const std::string& command);

/// Throws InvalidArgument for bad inputs and ApproximationError (with the
/// operating point appended) when an approximation breaks down.
CsvTable execute(const Experiment& e);

}  // namespace photocount::cli
