#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "egame/continuous.hpp"
#include "egame/ebsde.hpp"
#include "egame/game.hpp"
#include "egame/montecarlo.hpp"
#include "egame/nash.hpp"
#include "egame/sde.hpp"

namespace egame::io {

using nlohmann::json;

/// Shortest decimal text that reads back to the same double.
std::string format_number(double value);

/// Indented JSON text with a trailing newline.
std::string dump(const json& document);

/// Writes `text` to `path`, replacing any existing file; throws Error on failure.
void write_file(const std::string& path, const std::string& text);
json read_json_file(const std::string& path);

json to_json(const Grid1D& grid);
Grid1D grid_from_json(const json& j);

json to_json(const ErgodicSolution& s);
json to_json(const DiscountedSolution& s);
json to_json(const ConvergenceReport& r);
json to_json(const PayoffEstimate& e);
json to_json(const DeviationReport& r);
json to_json(const std::vector<SweepRow>& rows);
json to_json(const ContinuousResult& r);
json to_json(const AssumptionReport& r);
json to_json(const MomentReport& r);
json to_json(const IsaacReport& r);
json to_json(const PathResidual& r);

/// Complete, reloadable form of a Nash solution.
json to_json(const NashSolution& s);
/// Inverse of to_json(NashSolution); throws Error on malformed input.
NashSolution nash_from_json(const json& j);

/// Columns x, v, xi.
void write_solution_csv(std::ostream& os, const ErgodicSolution& s);
/// Columns x, v_tilde, xi_tilde.
void write_solution_csv(std::ostream& os, const DiscountedSolution& s);
/// Columns x, then v_i, xi_i and u_i (first control component) per player.
void write_nash_csv(std::ostream& os, const GameSpec& spec, const NashSolution& s);
void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
/// One row per deviation: player, kind, estimate, stderr, margin, pass.
void write_deviations_csv(std::ostream& os, const DeviationReport& r);
/// Columns path, t, x_1..x_N.
void write_paths_csv(std::ostream& os, const std::vector<Path>& paths);

}  // namespace egame::io
