#pragma once

#include <cstddef>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "rfsim/analysis.hpp"
#include "rfsim/circuit.hpp"
#include "rfsim/handshake.hpp"
#include "rfsim/integrator.hpp"
#include "rfsim/montecarlo.hpp"
#include "rfsim/stimulus.hpp"

namespace rfsim {

struct RingdownSection {
  double t_pulse = 5e-3;
  double width = 100e-6;
  double amplitude = 0.5;
  Polarity polarity = Polarity::Inhibitory;
  double horizon = 0.3;
  double settle_window = 0.02;
  /// Optional piecewise stimulus replacing the pulse.
  std::string stimulus_csv;
};

struct FiSection {
  double level_min = 0.0;
  double level_max = 0.5;
  int n_levels = 26;
  int spikes_per_point = 100;
  double V_th = 0.840;
  double timeout = 2.0;
};

struct ChirpSection {
  ChirpSpec chirp;
  bool sweep = true;
  double bias_min = 105e-12;
  double bias_max = 255e-12;
  int n_bias = 11;
  double vth_min = 0.840;
  double vth_max = 0.900;
};

struct SweepBiasSection {
  double I_min = 10e-12;
  double I_max = 2.51e-9;
  int n_points = 15;
  double periods = 10.0;
  /// Comparator threshold during the sweep. Kept above every ringdown so
  /// that no spike interrupts the subthreshold oscillation.
  double V_th = 1.4;
};

struct MonteCarloSection {
  MismatchModel model;
  int n_dies = 100;
  unsigned workers = 0;
};

/// Everything a subcommand needs. Missing fields take the defaults below,
/// which reproduce the characterization setup.
struct ExperimentConfig {
  CircuitParams neuron;
  IntegratorConfig integrator;
  AckMode ack_mode = AckMode::SelfAck;
  std::vector<double> ack_delays;
  RingdownSection ringdown;
  FiSection fi;
  ChirpSection chirp;
  SweepBiasSection sweep_bias;
  MonteCarloSection montecarlo;
  std::string output_dir = "out";

  HandshakeConfig handshake() const;
  RingdownSpec ringdown_spec() const;
  /// Validates every section; throws ConfigError with the offending field.
  void validate() const;
};

/// Parses a config document. Unknown sections or fields are errors.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace rfsim
