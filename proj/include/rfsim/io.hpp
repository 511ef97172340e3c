#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "rfsim/analysis.hpp"
#include "rfsim/handshake.hpp"
#include "rfsim/integrator.hpp"
#include "rfsim/montecarlo.hpp"

namespace rfsim::io {

/// Plain decimal with 12 significant digits.
std::string num(double x);
/// x rounded to 12 significant digits.
double round12(double x);

std::string trace_csv(const Trace& tr);
std::string events_csv(const std::vector<SpikeEvent>& events);
nlohmann::json events_json(const std::vector<SpikeEvent>& events);
nlohmann::json metrics_json(const MetricsRecord& m);
nlohmann::json derived_json(const DerivedParams& d);
std::string tuning_map_csv(const TuningMap& map);
nlohmann::json tuning_map_json(const TuningMap& map);
nlohmann::json population_json(const PopulationStats& stats);
std::string dies_csv(const PopulationStats& stats);

/// Writes the whole file or throws IoError.
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace rfsim::io
